#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace impact {

// FNV-1a 64-bit, used for artifact content hashes and provenance stamps.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 1469598103934665603ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
    return fnv1a(s.data(), s.size(), h);
}

inline std::uint64_t fnv1a(const std::vector<double>& v,
                           std::uint64_t h = 1469598103934665603ULL) {
    return fnv1a(v.data(), v.size() * sizeof(double), h);
}

// splitmix64, used to derive independent per-path RNG streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct corruption_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct solver_invariant_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace impact
