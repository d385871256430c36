#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace peepopt {

using rng_t = std::mt19937_64;

/// splitmix64 finalizer.
[[nodiscard]] constexpr auto mix64(std::uint64_t x) noexcept -> std::uint64_t
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for a named sub-task, e.g. derive_seed(seed, {stage, index}).
[[nodiscard]] constexpr auto derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept
    -> std::uint64_t
{
    std::uint64_t s = mix64(seed);
    for (auto p : path) { s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL)); }
    return s;
}

} // namespace peepopt
