#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ardnet {

// Invalid argument / precondition violation.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Input data violates a contract (negative counts, dimension mismatch...).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation not valid for the object's current state.
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical optimization failed (non-finite objective etc.).
struct OptimizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

// splitmix64; used to derive independent sub-stream seeds so parallel
// replications never share generator state.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(mix_seed(seed, stream));
}

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Index of the unordered pair {i,j}, i<j, in lexicographic i<j enumeration
// over n nodes: (0,1),(0,2),...,(0,n-1),(1,2),...
inline std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) {
    if (i > j) std::swap(i, j);
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

inline std::size_t num_pairs(std::size_t n) { return n * (n - 1) / 2; }

}  // namespace ardnet
