#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ardnet/graph.hpp"
#include "ardnet/traits.hpp"

namespace ardnet {

enum class ArdProvenance { Clean, Misreported, DpNoised };

std::string to_string(ArdProvenance p);
ArdProvenance ard_provenance_from_string(const std::string& s);

// n x K matrix of nonnegative integer ARD counts y_ik.
struct ArdMatrix {
    std::size_t n = 0;
    std::size_t K = 0;
    std::vector<std::int64_t> counts;  // row-major
    ArdProvenance provenance = ArdProvenance::Clean;
    std::vector<std::uint8_t> misreporter;  // per-node flags; empty unless misreported

    ArdMatrix() = default;
    ArdMatrix(std::size_t n_, std::size_t K_)
        : n(n_), K(K_), counts(n_ * K_, 0) {}

    std::int64_t& at(std::size_t i, std::size_t k) { return counts[i * K + k]; }
    std::int64_t at(std::size_t i, std::size_t k) const { return counts[i * K + k]; }
};

// y_ik = sum of w_ij over neighbors j in G_k, j != i (weight 1 when the graph
// is unweighted). Self-links are never counted even when i is in G_k.
ArdMatrix compute_ard(const Graph& g, const TraitPartition& t);

// Flags ceil(rho*n) nodes as misreporters; each of their entries becomes
// y +/- delta with delta drawn uniformly from {0..ceil(max_frac*y)} and a fair
// random sign, clamped at 0. Unflagged rows pass through unchanged.
ArdMatrix inject_misreporting(const ArdMatrix& y, double rho, double max_frac,
                              std::uint64_t seed);

// Per-entry Laplace noise of scale m/epsilon (m = max traits per node, the
// sensitivity of one edge change), rounded to integers and clamped at 0.
ArdMatrix inject_dp_noise(const ArdMatrix& y, const TraitPartition& t, double epsilon,
                          std::uint64_t seed);

}  // namespace ardnet
