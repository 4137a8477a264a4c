#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace communitypoll {

// splitmix64 step; used to derive independent substream seeds so results do
// not depend on the order in which consumers draw.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Seed derived from a string key (e.g. an agent id) plus a base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view key);

// Canonical double in [0, 1) with 53 random bits. Avoids
// std::uniform_real_distribution so streams are identical across platforms.
double canonical(std::mt19937_64& rng);

// Index i such that cumulative[i-1] <= u < cumulative[i]. cumulative must be
// nondecreasing with back() ~ 1.
std::size_t pick_index(std::span<const double> cumulative, double u);

}  // namespace communitypoll
