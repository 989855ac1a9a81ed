#pragma once

#include <cstdint>
#include <vector>

#include "ardnet/graph.hpp"

namespace ardnet {

// Node-size distribution for the interbank generator.
struct SizeDist {
    enum class Kind { Lognormal, Uniform };
    Kind kind = Kind::Lognormal;
    double a = 0.0;  // lognormal mu   / uniform lower
    double b = 1.0;  // lognormal sigma / uniform upper

    static SizeDist lognormal(double mu = 0.0, double sigma = 1.0) {
        return {Kind::Lognormal, mu, sigma};
    }
    static SizeDist uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
};

// Scale-free graph via the Chung-Lu expected-degree construction: weights
// w_i proportional to (i + i0)^(-1/(gamma-1)) with i0 = 1, scaled so the
// minimum expected degree is >= k_min, then independent
// Bernoulli(min(1, w_i w_j / sum w)) edges. For gamma < 3 a few hub-hub pairs
// clip at probability 1; an i0 large enough to avoid that flattens the top
// of the degree tail and drags the Hill exponent well above gamma.
Graph gen_scale_free(std::size_t n, double gamma, std::size_t k_min, std::uint64_t seed);

// Watts-Strogatz ring lattice with k nearest neighbors, each lattice edge
// rewired independently with probability p_r (avoiding self-loops and
// duplicates). k must be even, 2 <= k < n; p_r in [0,1].
Graph gen_small_world(std::size_t n, std::size_t k, double p_r, std::uint64_t seed);

// Size-driven interbank graph: sizes s_i ~ size_dist, link probabilities
// p_ij = p0 + alpha*(log(1+s_i) + log(1+s_j)) + eps_ij with
// eps_ij = noise_scale*(Beta(2,2) - 0.5), clamped to [0,1], realized by
// independent Bernoulli draws. Sizes are stored on the returned graph.
Graph gen_interbank(std::size_t n, double p0, double alpha, double noise_scale,
                    const SizeDist& size_dist, std::uint64_t seed);

// Gives each existing edge weight 1 + NegBin(r, q); the edge set is unchanged.
// The graph must be unweighted.
Graph add_negbin_weights(const Graph& g, double r, double q, std::uint64_t seed);

}  // namespace ardnet
