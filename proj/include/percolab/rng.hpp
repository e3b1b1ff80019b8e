#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace percolab {

// Counter-based randomness: every draw is a pure function of
// (seed, stream, index), so replicas can be generated in any order.

std::uint64_t mix64(std::uint64_t x);

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

// Uniform in [0, 1) with 53 bits of resolution.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

// Task seed = hash(master, tag, indices...). Stable across releases of
// the same major version; changing it invalidates recorded baselines.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::initializer_list<std::uint64_t> indices = {});

namespace stream {
inline constexpr std::uint64_t kUniform = 0;
inline constexpr std::uint64_t kAuxiliary = 1;
}  // namespace stream

}  // namespace percolab
