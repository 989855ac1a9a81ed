#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ardnet/graph.hpp"

namespace ardnet {

struct MetricsReport {
    double auc = 0.0;
    double rmse = 0.0;
    std::optional<double> procrustes_error;
    double runtime_seconds = 0.0;
    // Scenario metadata.
    std::size_t n = 0;
    std::size_t K = 0;
    double rho = 0.0;
    std::optional<double> epsilon;
    std::string method;
    std::uint64_t seed = 0;
};

struct RiskRow {
    NodeId node_id;
    std::uint32_t degree;
    double betweenness;
    double score;
    std::uint32_t risk_rank;  // 1 = riskiest
};

struct RiskTable {
    std::vector<RiskRow> rows;  // sorted by score, rank 1 first
};

// Mann-Whitney AUC: probability that a uniformly random true-edge pair
// outscores a uniformly random non-edge pair, ties counted 1/2. `predicted`
// holds one score per unordered pair in pair_index order.
double auc(const Graph& truth, const std::vector<double>& predicted);

double rmse(const std::vector<double>& truth, const std::vector<double>& predicted);

// min over orthogonal Q of ||z_hat Q - z_true||_F, via the SVD of
// z_hat^T z_true. Rows of both matrices must be unit vectors in R^d.
// Matrices are row-major n x d.
double procrustes_error(const std::vector<double>& z_hat, const std::vector<double>& z_true,
                        std::size_t n, std::size_t d);

// Exact Brandes betweenness on the unweighted graph, normalized by
// (n-1)(n-2)/2.
std::vector<double> betweenness(const Graph& g);

// Composite risk ranking: score_i = w_deg*(deg_i/max deg) + w_btw*(btw_i/max btw),
// max-normalized per criterion (an all-zero criterion is dropped). Rank 1 is
// the highest score; ties break by node id.
RiskTable risk_rank(const Graph& g, double w_deg, double w_btw);

}  // namespace ardnet
