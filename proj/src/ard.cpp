#include "ardnet/ard.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ardnet {

std::string to_string(ArdProvenance p) {
    switch (p) {
        case ArdProvenance::Clean: return "clean";
        case ArdProvenance::Misreported: return "misreported";
        case ArdProvenance::DpNoised: return "dp-noised";
    }
    return "clean";
}

ArdProvenance ard_provenance_from_string(const std::string& s) {
    if (s == "clean") return ArdProvenance::Clean;
    if (s == "misreported") return ArdProvenance::Misreported;
    if (s == "dp-noised") return ArdProvenance::DpNoised;
    throw DataError("unknown ARD provenance: " + s);
}

ArdMatrix compute_ard(const Graph& g, const TraitPartition& t) {
    if (t.n() != g.n()) throw ParameterError("compute_ard: trait partition size must match graph");
    ArdMatrix y(g.n(), t.num_traits());
    const auto& edges = g.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const NodeId a = edges[e].a, b = edges[e].b;
        const std::int64_t w = g.weighted() ? g.weights()[e] : 1;
        for (std::uint32_t k : t.memberships(b)) y.at(a, k) += w;
        for (std::uint32_t k : t.memberships(a)) y.at(b, k) += w;
    }
    y.provenance = ArdProvenance::Clean;
    return y;
}

ArdMatrix inject_misreporting(const ArdMatrix& y, double rho, double max_frac,
                              std::uint64_t seed) {
    if (y.provenance != ArdProvenance::Clean)
        throw StateError("inject_misreporting: input must be clean ARD");
    if (!(rho >= 0.0 && rho <= 1.0))
        throw ParameterError("inject_misreporting: rho must lie in [0,1]");
    if (max_frac < 0.0) throw ParameterError("inject_misreporting: max_frac must be >= 0");

    ArdMatrix out = y;
    out.provenance = ArdProvenance::Misreported;
    out.misreporter.assign(y.n, 0);
    const std::size_t flagged =
        static_cast<std::size_t>(std::ceil(rho * static_cast<double>(y.n)));
    if (flagged == 0) return out;

    Rng rng = make_rng(seed);
    std::vector<std::size_t> order(y.n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::uniform_int_distribution<int> coin(0, 1);
    for (std::size_t f = 0; f < flagged && f < y.n; ++f) {
        const std::size_t i = order[f];
        out.misreporter[i] = 1;
        for (std::size_t k = 0; k < y.K; ++k) {
            const std::int64_t yi = y.at(i, k);
            const std::int64_t dmax = static_cast<std::int64_t>(
                std::ceil(max_frac * static_cast<double>(yi)));
            std::uniform_int_distribution<std::int64_t> del(0, dmax);
            const std::int64_t delta = del(rng);
            const std::int64_t sign = coin(rng) ? 1 : -1;
            out.at(i, k) = std::max<std::int64_t>(0, yi + sign * delta);
        }
    }
    return out;
}

ArdMatrix inject_dp_noise(const ArdMatrix& y, const TraitPartition& t, double epsilon,
                          std::uint64_t seed) {
    if (!(epsilon > 0.0)) throw ParameterError("inject_dp_noise: epsilon must be > 0");
    if (t.n() != y.n) throw ParameterError("inject_dp_noise: trait partition size mismatch");

    const double sensitivity = static_cast<double>(t.max_traits_per_node());
    const double scale = sensitivity / epsilon;

    ArdMatrix out = y;
    out.provenance = ArdProvenance::DpNoised;
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    for (auto& c : out.counts) {
        const double u = unif(rng);
        // Inverse-CDF Laplace draw; symmetric around 0.
        const double sign = u < 0.0 ? -1.0 : 1.0;
        const double noise = -sign * scale * std::log1p(-2.0 * std::abs(u));
        c = std::max<std::int64_t>(
            0, static_cast<std::int64_t>(std::llround(static_cast<double>(c) + noise)));
    }
    return out;
}

}  // namespace ardnet
