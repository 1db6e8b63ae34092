#pragma once

#include <cstdint>
#include <random>

namespace smplmmse {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of the independent stream `stream` under `master`. Counter based, so
/// any stream can be derived without touching the others.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

}  // namespace smplmmse
