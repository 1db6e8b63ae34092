#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace smplmmse {

/// One value of the flat key-value config format: booleans, numbers, quoted
/// strings and one-level arrays of those.
struct ConfigValue {
    enum class Type { Bool, Number, String, Array };

    Type type = Type::Number;
    std::string text;  // number token or string contents
    bool flag = false;
    std::vector<ConfigValue> items;
};

/// Keys are "section.key", or "key" before the first section header.
class ConfigDocument {
public:
    static ConfigDocument parse(const std::string& text);
    static ConfigDocument load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.contains(key); }
    std::vector<std::string> keys() const;

    double number(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    std::uint64_t unsigned_integer(const std::string& key) const;
    bool boolean(const std::string& key) const;
    std::string string(const std::string& key) const;
    std::vector<double> number_list(const std::string& key) const;
    std::vector<std::string> string_list(const std::string& key) const;

private:
    const ConfigValue& at(const std::string& key, ConfigValue::Type type) const;

    std::map<std::string, ConfigValue> values_;
};

}  // namespace smplmmse
