#include "ardnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace ardnet {

void Graph::add_edge(NodeId i, NodeId j) {
    if (i == j) throw ParameterError("graph: self-loops are not allowed");
    if (i >= n_ || j >= n_) throw ParameterError("graph: node index out of range");
    if (weighted()) throw StateError("graph: cannot add edges after weights are set");
    edges_.emplace_back(i, j);
}

void Graph::finalize() {
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

bool Graph::has_edge(NodeId i, NodeId j) const {
    if (i == j) return false;
    Edge e(i, j);
    return std::binary_search(edges_.begin(), edges_.end(), e);
}

std::uint32_t Graph::weight(NodeId i, NodeId j) const {
    Edge e(i, j);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
    if (it == edges_.end() || !(*it == e)) return 0;
    if (!weighted()) return 1;
    return weights_[static_cast<std::size_t>(it - edges_.begin())];
}

void Graph::set_weights(std::vector<std::uint32_t> w) {
    if (w.size() != edges_.size())
        throw ParameterError("graph: weight vector length must match edge count");
    for (auto x : w)
        if (x < 1) throw ParameterError("graph: edge weights must be >= 1");
    weights_ = std::move(w);
}

void Graph::set_sizes(std::vector<double> s) {
    if (s.size() != n_) throw ParameterError("graph: size vector length must match n");
    for (auto x : s)
        if (!(x > 0.0)) throw ParameterError("graph: node sizes must be positive");
    sizes_ = std::move(s);
}

std::vector<std::uint32_t> Graph::degrees() const {
    std::vector<std::uint32_t> deg(n_, 0);
    for (const auto& e : edges_) {
        ++deg[e.a];
        ++deg[e.b];
    }
    return deg;
}

std::vector<std::vector<NodeId>> Graph::adjacency() const {
    std::vector<std::vector<NodeId>> adj(n_);
    for (const auto& e : edges_) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    return adj;
}

std::vector<std::uint8_t> Graph::adjacency_matrix() const {
    std::vector<std::uint8_t> a(n_ * n_, 0);
    for (const auto& e : edges_) {
        a[static_cast<std::size_t>(e.a) * n_ + e.b] = 1;
        a[static_cast<std::size_t>(e.b) * n_ + e.a] = 1;
    }
    return a;
}

double hill_tail_exponent(const std::vector<std::uint32_t>& degrees, std::size_t k) {
    std::vector<std::uint32_t> d;
    d.reserve(degrees.size());
    for (auto x : degrees)
        if (x > 0) d.push_back(x);
    if (d.size() < 3) return 0.0;
    std::sort(d.begin(), d.end(), std::greater<>());
    k = std::clamp<std::size_t>(k, 2, d.size() - 1);
    const double x_ref = static_cast<double>(d[k]);
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += std::log(static_cast<double>(d[i]) / x_ref);
    if (s <= 0.0) return 0.0;
    // Survival-tail index alpha = k / s; density exponent gamma = alpha + 1.
    return 1.0 + static_cast<double>(k) / s;
}

namespace {

// Triangle-based (global) clustering coefficient.
double global_clustering(const std::vector<std::vector<NodeId>>& adj) {
    std::size_t n = adj.size();
    std::vector<std::vector<NodeId>> sorted = adj;
    for (auto& v : sorted) std::sort(v.begin(), v.end());

    std::uint64_t closed = 0;  // ordered pairs of adjacent neighbors, 2*3*triangles over all
    std::uint64_t triads = 0;  // ordered open+closed: sum deg*(deg-1)
    for (std::size_t i = 0; i < n; ++i) {
        const auto& nb = sorted[i];
        std::size_t d = nb.size();
        triads += static_cast<std::uint64_t>(d) * (d - 1);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a + 1; b < d; ++b) {
                NodeId u = nb[a], v = nb[b];
                if (std::binary_search(sorted[u].begin(), sorted[u].end(), v)) closed += 2;
            }
    }
    if (triads == 0) return 0.0;
    return static_cast<double>(closed) / static_cast<double>(triads);
}

}  // namespace

GraphStats graph_stats(const Graph& g) {
    if (g.n() < 2) throw ParameterError("graph_stats: need n >= 2");
    GraphStats st;
    const std::size_t n = g.n();
    st.degree_sequence = g.degrees();
    st.density = 2.0 * static_cast<double>(g.edges().size()) /
                 (static_cast<double>(n) * static_cast<double>(n - 1));

    auto adj = g.adjacency();
    st.clustering_coeff = global_clustering(adj);

    // Largest connected component by BFS labelling.
    std::vector<int> comp(n, -1);
    int ncomp = 0;
    std::vector<std::size_t> comp_size;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::deque<NodeId> q{static_cast<NodeId>(s)};
        comp[s] = ncomp;
        std::size_t sz = 0;
        while (!q.empty()) {
            NodeId u = q.front();
            q.pop_front();
            ++sz;
            for (NodeId v : adj[u])
                if (comp[v] < 0) {
                    comp[v] = ncomp;
                    q.push_back(v);
                }
        }
        comp_size.push_back(sz);
        ++ncomp;
    }
    int big = static_cast<int>(std::max_element(comp_size.begin(), comp_size.end()) -
                               comp_size.begin());
    std::vector<NodeId> members;
    for (std::size_t i = 0; i < n; ++i)
        if (comp[i] == big) members.push_back(static_cast<NodeId>(i));

    double total = 0.0;
    std::uint64_t pairs = 0;
    std::vector<int> dist(n);
    for (NodeId s : members) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        std::deque<NodeId> q{s};
        while (!q.empty()) {
            NodeId u = q.front();
            q.pop_front();
            for (NodeId v : adj[u])
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
        }
        for (NodeId t : members)
            if (t > s) {
                total += dist[t];
                ++pairs;
            }
    }
    st.avg_path_length = pairs ? total / static_cast<double>(pairs) : 0.0;

    st.tail_exponent_estimate =
        hill_tail_exponent(st.degree_sequence, std::max<std::size_t>(2, n / 10));
    return st;
}

}  // namespace ardnet
