#include "ardnet/graphgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace ardnet {

namespace {

double draw_size(const SizeDist& d, Rng& rng) {
    switch (d.kind) {
        case SizeDist::Kind::Lognormal: {
            std::lognormal_distribution<double> dist(d.a, d.b);
            return dist(rng);
        }
        case SizeDist::Kind::Uniform: {
            std::uniform_real_distribution<double> dist(d.a, d.b);
            return dist(rng);
        }
    }
    throw ParameterError("size_dist: unknown kind");
}

}  // namespace

Graph gen_scale_free(std::size_t n, double gamma, std::size_t k_min, std::uint64_t seed) {
    if (n < 10) throw ParameterError("gen_scale_free: need n >= 10");
    if (!(gamma > 2.0 && gamma < 3.0))
        throw ParameterError("gen_scale_free: gamma must lie in (2,3)");
    if (k_min < 1) throw ParameterError("gen_scale_free: k_min must be >= 1");
    if (static_cast<double>(k_min) >= static_cast<double>(n) / 2.0)
        throw ParameterError("gen_scale_free: n too small to realize k_min");

    const double p = 1.0 / (gamma - 1.0);
    const double i0 = 1.0;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = static_cast<double>(k_min) *
               std::pow((static_cast<double>(n - 1) + i0) / (static_cast<double>(i) + i0), p);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);

    Graph g(n);
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double pij = std::min(1.0, w[i] * w[j] / total);
            if (unif(rng) < pij)
                g.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(j));
        }
    g.finalize();
    return g;
}

Graph gen_small_world(std::size_t n, std::size_t k, double p_r, std::uint64_t seed) {
    if (k % 2 != 0) throw ParameterError("gen_small_world: k must be even");
    if (k < 2 || k >= n) throw ParameterError("gen_small_world: need 2 <= k < n");
    if (!(p_r >= 0.0 && p_r <= 1.0))
        throw ParameterError("gen_small_world: p_r must lie in [0,1]");

    const std::size_t half = k / 2;
    std::vector<std::vector<NodeId>> adj(n);
    auto connected = [&](NodeId a, NodeId b) {
        return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
    };
    auto link = [&](NodeId a, NodeId b) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    };

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 1; j <= half; ++j) link(static_cast<NodeId>(i),
                                                     static_cast<NodeId>((i + j) % n));

    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 1; j <= half; ++j) {
            NodeId u = static_cast<NodeId>(i);
            NodeId v = static_cast<NodeId>((i + j) % n);
            if (unif(rng) >= p_r) continue;
            if (adj[u].size() >= n - 1) continue;  // already saturated
            NodeId w;
            do {
                w = static_cast<NodeId>(pick(rng));
            } while (w == u || connected(u, w));
            adj[u].erase(std::find(adj[u].begin(), adj[u].end(), v));
            adj[v].erase(std::find(adj[v].begin(), adj[v].end(), u));
            link(u, w);
        }

    Graph g(n);
    for (std::size_t i = 0; i < n; ++i)
        for (NodeId v : adj[i])
            if (v > i) g.add_edge(static_cast<NodeId>(i), v);
    g.finalize();
    return g;
}

Graph gen_interbank(std::size_t n, double p0, double alpha, double noise_scale,
                    const SizeDist& size_dist, std::uint64_t seed) {
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw ParameterError("gen_interbank: p0 must lie in [0,1]");
    if (alpha < 0.0) throw ParameterError("gen_interbank: alpha must be >= 0");
    if (noise_scale < 0.0) throw ParameterError("gen_interbank: noise_scale must be >= 0");

    Rng rng = make_rng(seed);
    std::vector<double> sizes(n);
    for (auto& s : sizes) s = draw_size(size_dist, rng);

    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = std::log1p(sizes[i]);

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::gamma_distribution<double> gamma2(2.0, 1.0);
    auto beta22_centered = [&]() {
        double x = gamma2(rng), y = gamma2(rng);
        return x / (x + y) - 0.5;
    };

    Graph g(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double pij = p0 + alpha * (f[i] + f[j]);
            if (noise_scale > 0.0) pij += noise_scale * beta22_centered();
            pij = std::clamp(pij, 0.0, 1.0);
            if (unif(rng) < pij)
                g.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(j));
        }
    g.finalize();
    g.set_sizes(std::move(sizes));
    return g;
}

Graph add_negbin_weights(const Graph& g, double r, double q, std::uint64_t seed) {
    if (g.weighted()) throw StateError("add_negbin_weights: graph is already weighted");
    if (!(r > 0.0)) throw ParameterError("add_negbin_weights: r must be > 0");
    if (!(q > 0.0 && q < 1.0)) throw ParameterError("add_negbin_weights: q must lie in (0,1)");

    Graph out = g;
    Rng rng = make_rng(seed);
    // NegBin(r,q) as a Poisson-Gamma mixture with mean r*q/(1-q).
    std::gamma_distribution<double> gam(r, q / (1.0 - q));
    std::vector<std::uint32_t> w(g.edges().size());
    for (auto& wi : w) {
        double lambda = gam(rng);
        std::poisson_distribution<std::uint32_t> pois(lambda);
        wi = 1 + (lambda > 0.0 ? pois(rng) : 0);
    }
    out.set_weights(std::move(w));
    return out;
}

}  // namespace ardnet
