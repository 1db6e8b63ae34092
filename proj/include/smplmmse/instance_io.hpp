#pragma once

#include <filesystem>
#include <string>

#include "smplmmse/signal_model.hpp"

namespace smplmmse {

inline constexpr const char* kInstanceFormat = "smplmmse-instance";
inline constexpr int kInstanceFormatVersion = 1;

/// JSON document; see README "Instance file format".
std::string instance_to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const std::string& text);

void save_instance(const std::filesystem::path& path, const ProblemInstance& inst);
ProblemInstance load_instance(const std::filesystem::path& path);

}  // namespace smplmmse
