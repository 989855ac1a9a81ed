#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ardnet/common.hpp"

namespace ardnet {

using NodeId = std::uint32_t;

// Undirected edge, stored with a < b.
struct Edge {
    NodeId a;
    NodeId b;

    Edge(NodeId i, NodeId j) : a(i < j ? i : j), b(i < j ? j : i) {}
    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Simple undirected graph. Edges are kept sorted and unique; weights, when
// present, are parallel to `edges` and all >= 1. `sizes` carries optional
// per-node sizes (e.g. bank size) used by the size-driven generator.
class Graph {
public:
    Graph() = default;
    explicit Graph(std::size_t n) : n_(n) {}

    std::size_t n() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }
    bool weighted() const { return !weights_.empty(); }
    const std::vector<std::uint32_t>& weights() const { return weights_; }
    bool has_sizes() const { return !sizes_.empty(); }
    const std::vector<double>& sizes() const { return sizes_; }

    void add_edge(NodeId i, NodeId j);
    bool has_edge(NodeId i, NodeId j) const;
    // Weight of {i,j}: 0 when absent, 1 for unweighted edges.
    std::uint32_t weight(NodeId i, NodeId j) const;

    void set_weights(std::vector<std::uint32_t> w);
    void set_sizes(std::vector<double> s);

    std::vector<std::uint32_t> degrees() const;
    // Neighbor lists for all nodes.
    std::vector<std::vector<NodeId>> adjacency() const;
    // Dense 0/1 adjacency flags, row-major n*n. Intended for small n.
    std::vector<std::uint8_t> adjacency_matrix() const;

    // Re-establishes sorted unique edge order; called by generators that
    // build the edge list out of order.
    void finalize();

private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::uint32_t> weights_;
    std::vector<double> sizes_;
};

struct GraphStats {
    double density = 0.0;
    std::vector<std::uint32_t> degree_sequence;
    double clustering_coeff = 0.0;
    // Average shortest path over the largest connected component.
    double avg_path_length = 0.0;
    double tail_exponent_estimate = 0.0;
};

// Exact density/degrees, triangle-based global clustering, BFS average path
// length on the largest component, and a Hill tail-exponent estimate over the
// top-decile degrees.
GraphStats graph_stats(const Graph& g);

// Hill estimator of the degree-distribution exponent gamma using the k
// largest values (gamma = 1 + survival-tail index).
double hill_tail_exponent(const std::vector<std::uint32_t>& degrees, std::size_t k);

}  // namespace ardnet
