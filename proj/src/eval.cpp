#include "ardnet/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "ardnet/common.hpp"

namespace ardnet {

double auc(const Graph& truth, const std::vector<double>& predicted) {
    const std::size_t n = truth.n();
    const std::size_t m = num_pairs(n);
    if (predicted.size() != m)
        throw ParameterError("auc: predictions must cover all unordered pairs");
    const std::size_t pos = truth.edges().size();
    if (pos == 0 || pos == m)
        throw DataError("auc: undefined for a graph with no edges or all edges");

    std::vector<std::uint8_t> is_edge(m, 0);
    for (const auto& e : truth.edges()) is_edge[pair_index(e.a, e.b, n)] = 1;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return predicted[a] < predicted[b]; });

    // Rank-sum with average ranks over tied scores.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j + 1 < m && predicted[order[j + 1]] == predicted[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            if (is_edge[order[t]]) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    const double npos = static_cast<double>(pos);
    const double nneg = static_cast<double>(m - pos);
    return (rank_sum_pos - npos * (npos + 1.0) / 2.0) / (npos * nneg);
}

double rmse(const std::vector<double>& truth, const std::vector<double>& predicted) {
    if (truth.size() != predicted.size()) throw ParameterError("rmse: length mismatch");
    if (truth.empty()) throw ParameterError("rmse: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = truth[i] - predicted[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(truth.size()));
}

double procrustes_error(const std::vector<double>& z_hat, const std::vector<double>& z_true,
                        std::size_t n, std::size_t d) {
    if (z_hat.size() != n * d || z_true.size() != n * d)
        throw ParameterError("procrustes_error: shape mismatch");
    using Mat = Eigen::MatrixXd;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        A(z_hat.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d)),
        B(z_true.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Mat M = A.transpose() * B;
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat Q = svd.matrixU() * svd.matrixV().transpose();
    return (A * Q - B).norm();
}

std::vector<double> betweenness(const Graph& g) {
    const std::size_t n = g.n();
    if (n < 2) throw ParameterError("betweenness: need n >= 2");
    auto adj = g.adjacency();
    std::vector<double> bc(n, 0.0);

    // Brandes accumulation over BFS shortest-path DAGs.
    std::vector<int> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<std::vector<NodeId>> pred(n);
    std::vector<NodeId> stack;
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto& p : pred) p.clear();
        stack.clear();

        dist[s] = 0;
        sigma[s] = 1.0;
        std::deque<NodeId> q{static_cast<NodeId>(s)};
        while (!q.empty()) {
            NodeId u = q.front();
            q.pop_front();
            stack.push_back(u);
            for (NodeId v : adj[u]) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
                if (dist[v] == dist[u] + 1) {
                    sigma[v] += sigma[u];
                    pred[v].push_back(u);
                }
            }
        }
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            NodeId w = *it;
            for (NodeId u : pred[w]) delta[u] += sigma[u] / sigma[w] * (1.0 + delta[w]);
            if (w != s) bc[w] += delta[w];
        }
    }
    // Each unordered pair was counted twice (once per endpoint as source).
    const double norm = static_cast<double>(n - 1) * static_cast<double>(n - 2);
    for (auto& x : bc) x = (norm > 0.0) ? x / norm : 0.0;
    return bc;
}

RiskTable risk_rank(const Graph& g, double w_deg, double w_btw) {
    if (w_deg < 0.0 || w_btw < 0.0 || (w_deg == 0.0 && w_btw == 0.0))
        throw ParameterError("risk_rank: weights must be >= 0 and not both zero");
    const std::size_t n = g.n();
    auto deg = g.degrees();
    auto btw = betweenness(g);

    const double max_deg = static_cast<double>(*std::max_element(deg.begin(), deg.end()));
    const double max_btw = *std::max_element(btw.begin(), btw.end());

    RiskTable table;
    table.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double score = 0.0;
        if (max_deg > 0.0) score += w_deg * static_cast<double>(deg[i]) / max_deg;
        if (max_btw > 0.0) score += w_btw * btw[i] / max_btw;
        table.rows.push_back({static_cast<NodeId>(i), deg[i], btw[i], score, 0});
    }
    std::sort(table.rows.begin(), table.rows.end(), [](const RiskRow& a, const RiskRow& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.node_id < b.node_id;
    });
    for (std::size_t r = 0; r < n; ++r) table.rows[r].risk_rank = static_cast<std::uint32_t>(r + 1);
    return table;
}

}  // namespace ardnet
