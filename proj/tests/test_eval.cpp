#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <queue>

#include "ardnet/eval.hpp"
#include "ardnet/graphgen.hpp"
#include "helpers.hpp"

using namespace ardnet;

namespace {

Graph er_graph(std::size_t n, double p, Rng& rng) {
    Graph g(n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (NodeId i = 0; i + 1 < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            if (unif(rng) < p) g.add_edge(i, j);
    g.finalize();
    return g;
}

std::vector<double> perfect_scores(const Graph& g) {
    std::vector<double> s(num_pairs(g.n()), 0.0);
    for (const auto& e : g.edges()) s[pair_index(e.a, e.b, g.n())] = 1.0;
    return s;
}

// Betweenness oracle by explicit enumeration of every shortest path.
std::vector<double> betweenness_by_path_enumeration(const Graph& g) {
    const std::size_t n = g.n();
    const auto adj = g.adjacency();
    std::vector<double> bc(n, 0.0);
    for (NodeId s = 0; s < n; ++s) {
        std::vector<int> dist(n, -1);
        std::queue<NodeId> q;
        dist[s] = 0;
        q.push(s);
        while (!q.empty()) {
            const NodeId u = q.front();
            q.pop();
            for (NodeId v : adj[u])
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push(v);
                }
        }
        for (NodeId t = s + 1; t < n; ++t) {
            if (dist[t] < 0) continue;
            // Walk every shortest s-t path, tallying interior visits.
            std::vector<std::size_t> visits(n, 0);
            std::size_t total = 0;
            std::vector<NodeId> stack = {t};
            std::vector<std::size_t> next_edge = {0};
            while (!stack.empty()) {
                const NodeId u = stack.back();
                if (u == s) {
                    ++total;
                    for (std::size_t d = 1; d + 1 < stack.size(); ++d) ++visits[stack[d]];
                    stack.pop_back();
                    next_edge.pop_back();
                    continue;
                }
                bool advanced = false;
                while (next_edge.back() < adj[u].size()) {
                    const NodeId v = adj[u][next_edge.back()++];
                    if (dist[v] == dist[u] - 1) {
                        stack.push_back(v);
                        next_edge.push_back(0);
                        advanced = true;
                        break;
                    }
                }
                if (!advanced) {
                    stack.pop_back();
                    next_edge.pop_back();
                }
            }
            for (NodeId v = 0; v < n; ++v)
                if (visits[v] > 0)
                    bc[v] += static_cast<double>(visits[v]) / static_cast<double>(total);
        }
    }
    const double norm = static_cast<double>((n - 1) * (n - 2)) / 2.0;
    for (auto& b : bc) b /= norm;
    return bc;
}

}  // namespace

TEST_CASE("auc separates perfect, reversed, and random scores") {
    Rng rng = make_rng(1);
    const Graph g = er_graph(100, 0.1, rng);
    const auto perfect = perfect_scores(g);
    CHECK(auc(g, perfect) == doctest::Approx(1.0));
    auto reversed = perfect;
    for (auto& s : reversed) s = 1.0 - s;
    CHECK(auc(g, reversed) == doctest::Approx(0.0));

    double total = 0.0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        Rng r2 = make_rng(100 + static_cast<std::uint64_t>(rep));
        const Graph h = er_graph(100, 0.1, r2);
        std::vector<double> s(num_pairs(100));
        for (auto& x : s) x = unif(r2);
        total += auc(h, s);
    }
    CHECK(std::abs(total / 10.0 - 0.5) < 0.05);
}

TEST_CASE("auc rejects degenerate graphs and short score vectors") {
    const Graph none(5);
    CHECK_THROWS_AS(auc(none, std::vector<double>(10, 0.5)), DataError);
    Graph full(4);
    for (NodeId i = 0; i < 4; ++i)
        for (NodeId j = i + 1; j < 4; ++j) full.add_edge(i, j);
    full.finalize();
    CHECK_THROWS_AS(auc(full, std::vector<double>(6, 0.5)), DataError);
    Graph one(4);
    one.add_edge(0, 1);
    one.finalize();
    CHECK_THROWS_AS(auc(one, std::vector<double>(3, 0.5)), ParameterError);
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
    Rng rng = make_rng(2);
    const Graph g = er_graph(40, 0.15, rng);
    std::vector<double> s(num_pairs(40));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (auto& x : s) x = unif(rng);
    const double base = auc(g, s);
    auto affine = s, expd = s;
    for (auto& x : affine) x = 3.0 * x + 2.0;
    for (auto& x : expd) x = std::exp(x);
    CHECK(auc(g, affine) == doctest::Approx(base).epsilon(1e-12));
    CHECK(auc(g, expd) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("rmse basics") {
    CHECK(rmse({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == doctest::Approx(0.0));
    CHECK(rmse({0.0, 0.0}, {1.0, 1.0}) == doctest::Approx(1.0));
    const std::vector<double> t = {1.0, 5.0, -2.0};
    const std::vector<double> d = {0.5, -1.0, 2.0};
    std::vector<double> p1(3), p3(3);
    for (std::size_t i = 0; i < 3; ++i) {
        p1[i] = t[i] + d[i];
        p3[i] = t[i] + 3.0 * d[i];
    }
    CHECK(rmse(t, p3) == doctest::Approx(3.0 * rmse(t, p1)));
    CHECK_THROWS_AS(rmse({1.0}, {1.0, 2.0}), ParameterError);
    CHECK_THROWS_AS(rmse({}, {}), ParameterError);
}

TEST_CASE("procrustes error vanishes under any orthogonal map") {
    const std::size_t n = 20, d = 3;
    Rng rng = make_rng(3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> z(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            z[i * d + c] = gauss(rng);
            norm += z[i * d + c] * z[i * d + c];
        }
        for (std::size_t c = 0; c < d; ++c) z[i * d + c] /= std::sqrt(norm);
    }
    CHECK(procrustes_error(z, z, n, d) == doctest::Approx(0.0));
    for (int rep = 0; rep < 50; ++rep) {
        const auto Q = testutil::random_orthogonal(d, rng);
        const auto zq = testutil::apply_rotation(z, n, d, Q);
        CHECK(procrustes_error(zq, z, n, d) < 1e-10);
        CHECK(std::abs(procrustes_error(zq, z, n, d) - procrustes_error(z, zq, n, d)) < 1e-10);
    }
    CHECK_THROWS_AS(procrustes_error(z, std::vector<double>(n * 2), n, d), ParameterError);
}

TEST_CASE("procrustes error of a corrupted embedding matches brute-force search") {
    const std::size_t n = 5, d = 2;
    Rng rng = make_rng(4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> z(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = gauss(rng), b = gauss(rng), norm = std::hypot(a, b);
        z[i * d] = a / norm;
        z[i * d + 1] = b / norm;
    }
    auto corrupted = z;
    corrupted[0] = -corrupted[0];
    corrupted[1] = -corrupted[1];
    const double exact = procrustes_error(corrupted, z, n, d);
    CHECK(exact > 0.1);

    double best = 1e300;
    for (int rep = 0; rep < 100000; ++rep) {
        const auto Q = testutil::random_orthogonal(d, rng);
        const auto rotated = testutil::apply_rotation(corrupted, n, d, Q);
        double sq = 0.0;
        for (std::size_t i = 0; i < n * d; ++i) sq += (rotated[i] - z[i]) * (rotated[i] - z[i]);
        best = std::min(best, std::sqrt(sq));
    }
    CHECK(std::abs(best - exact) < 1e-3);
    CHECK(best >= exact - 1e-9);
}

TEST_CASE("betweenness on hand graphs") {
    Graph star(5);
    for (NodeId leaf = 1; leaf < 5; ++leaf) star.add_edge(0, leaf);
    star.finalize();
    const auto bs = betweenness(star);
    CHECK(bs[0] == doctest::Approx(1.0));
    for (NodeId leaf = 1; leaf < 5; ++leaf) CHECK(bs[leaf] == doctest::Approx(0.0));

    Graph full(6);
    for (NodeId i = 0; i < 6; ++i)
        for (NodeId j = i + 1; j < 6; ++j) full.add_edge(i, j);
    full.finalize();
    for (double b : betweenness(full)) CHECK(b == doctest::Approx(0.0));

    Graph path(3);
    path.add_edge(0, 1);
    path.add_edge(1, 2);
    path.finalize();
    CHECK(betweenness(path)[1] == doctest::Approx(1.0));
}

TEST_CASE("betweenness matches the path-enumeration oracle") {
    Rng rng = make_rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 4 + static_cast<std::size_t>(rep) % 9;
        const Graph g = er_graph(n, 0.2 + 0.6 * unif(rng), rng);
        const auto fast = betweenness(g);
        const auto slow = betweenness_by_path_enumeration(g);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(fast[i] - slow[i]) <= 1e-12);
    }
}

TEST_CASE("risk ranking reduces to the degree ranking when betweenness has no weight") {
    Rng rng = make_rng(6);
    const Graph g = er_graph(30, 0.2, rng);
    const RiskTable table = risk_rank(g, 1.0, 0.0);
    REQUIRE(table.rows.size() == 30);
    const auto deg = g.degrees();
    for (std::size_t r = 0; r + 1 < table.rows.size(); ++r) {
        const auto& hi = table.rows[r];
        const auto& lo = table.rows[r + 1];
        CHECK(hi.risk_rank == r + 1);
        const bool deg_order = deg[hi.node_id] > deg[lo.node_id] ||
                               (deg[hi.node_id] == deg[lo.node_id] && hi.node_id < lo.node_id);
        CHECK(deg_order);
    }
}

TEST_CASE("risk ranking puts the star center first and ranks are a permutation") {
    Graph star(7);
    for (NodeId leaf = 1; leaf < 7; ++leaf) star.add_edge(0, leaf);
    star.finalize();
    const RiskTable table = risk_rank(star, 0.4, 0.6);
    CHECK(table.rows.front().node_id == 0);
    CHECK(table.rows.front().risk_rank == 1);
    std::vector<std::uint32_t> ranks;
    for (const auto& row : table.rows) ranks.push_back(row.risk_rank);
    std::sort(ranks.begin(), ranks.end());
    for (std::size_t i = 0; i < ranks.size(); ++i) CHECK(ranks[i] == i + 1);
    for (std::size_t r = 0; r + 1 < table.rows.size(); ++r)
        CHECK(table.rows[r].score >= table.rows[r + 1].score);
    CHECK_THROWS_AS(risk_rank(star, 0.0, 0.0), ParameterError);
}
