#pragma once

#include <cstdint>
#include <initializer_list>

namespace drorl {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Order-sensitive hash of a sequence of words.
constexpr std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (auto w : words) {
        h = mix64(h ^ mix64(w));
    }
    return h;
}

/// Maps 64 random bits to a double in [0, 1).
constexpr double unit_interval(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based uniform draw: a pure function of (key, counter, lane).
constexpr double counter_uniform(std::uint64_t key, std::uint64_t counter, std::uint64_t lane) {
    return unit_interval(hash_words({key, counter, lane}));
}

}  // namespace drorl
