#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "ardnet/ard.hpp"
#include "ardnet/fpr.hpp"
#include "ardnet/graph.hpp"
#include "ardnet/traits.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ardnet;
using namespace ardnet::fpr;

namespace {

struct Planted {
    ArdMatrix y;
    TraitPartition traits;
};

Planted planted_ard(std::size_t n, std::size_t K, double p, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    Graph g(n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            if (unif(rng) < p) g.add_edge(i, j);
    Planted out;
    out.traits = assign_traits(n, K, 0.4, K == 1 ? 0.0 : 0.4, mix_seed(seed, 1));
    out.y = compute_ard(g, out.traits);
    return out;
}

// Region formulas for the scalar thresholding operators, written out
// independently of the library (le = lambda * step).
double prox_oracle(PenaltyKind kind, double a, double v, double le) {
    const double s = v >= 0.0 ? 1.0 : -1.0;
    const double av = std::abs(v);
    switch (kind) {
        case PenaltyKind::L1:
            return s * std::max(av - le, 0.0);
        case PenaltyKind::L2:
            return v / (1.0 + 2.0 * le);
        case PenaltyKind::Scad:
            if (av <= 2.0 * le) return s * std::max(av - le, 0.0);
            if (av <= a * le) return ((a - 1.0) * v - s * a * le) / (a - 2.0);
            return v;
        case PenaltyKind::Mcp:
            if (av <= a * le) return s * std::max(av - le, 0.0) / (1.0 - 1.0 / a);
            return v;
    }
    return v;
}

PenaltySpec with_intercept(PenaltySpec p) {
    p.penalize_intercept = true;
    return p;
}

double upper_median(std::vector<double> xs) {
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    return xs[mid];
}

}  // namespace

TEST_CASE("feature layout: dimensions, pair coordinates, names") {
    CHECK(feature_dim(4, 2) == 1 + 4 + 3);
    CHECK(feature_dim(10, 1) == 12);
    CHECK(feature_dim(3, 4) == 1 + 3 + 10);

    const std::size_t n = 7, K = 4;
    std::set<std::size_t> coords;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = k; l < K; ++l) {
            const std::size_t c = trait_pair_coord(k, l, n, K);
            CHECK(c == trait_pair_coord(l, k, n, K));
            CHECK(c >= 1 + n);
            CHECK(c < feature_dim(n, K));
            coords.insert(c);
        }
    CHECK(coords.size() == K * (K + 1) / 2);

    CHECK(feature_name(0, n, K) == "intercept");
    CHECK(feature_name(1 + 3, n, K) == "node:3");
    CHECK(feature_name(trait_pair_coord(1, 2, n, K), n, K) == "traitpair:1:2");
    CHECK_THROWS_AS(trait_pair_coord(4, 0, n, K), ParameterError);
    CHECK_THROWS_AS(feature_name(feature_dim(n, K), n, K), ParameterError);
}

TEST_CASE("linear predictor: hand values and overlap multiplicity") {
    SUBCASE("single shared trait") {
        TraitPartition t(3, {{0, 1, 2}});
        FprModel m;
        m.n = 3;
        m.K = 1;
        m.beta = {0.2, 0.1, -0.3, 0.5, 0.4};
        CHECK(linear_predictor(m, t, 0, 1) == doctest::Approx(0.4).epsilon(1e-12));
        CHECK(linear_predictor(m, t, 0, 2) == doctest::Approx(1.2).epsilon(1e-12));
        CHECK(linear_predictor(m, t, 1, 2) == doctest::Approx(0.8).epsilon(1e-12));
        const double sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); }(0.4);
        auto p = predict_links(m, t, {{0, 1}, {1, 0}});
        CHECK(p[0] == doctest::Approx(sig).epsilon(1e-12));
        CHECK(std::abs(p[1] - p[0]) < 1e-15);
        const double want_rate = 1.0 / (1.0 + std::exp(-0.4)) + 1.0 / (1.0 + std::exp(-1.2));
        CHECK(predicted_rate(m, t, 0, 0) == doctest::Approx(want_rate).epsilon(1e-12));
    }

    SUBCASE("doubly shared trait pair counts twice") {
        TraitPartition t(4, {{0, 1, 2}, {0, 1, 3}});
        FprModel m;
        m.n = 4;
        m.K = 2;
        m.beta.assign(feature_dim(4, 2), 0.0);
        m.beta[trait_pair_coord(0, 0, 4, 2)] = 0.3;
        m.beta[trait_pair_coord(0, 1, 4, 2)] = 0.7;
        m.beta[trait_pair_coord(1, 1, 4, 2)] = -0.2;
        CHECK(linear_predictor(m, t, 0, 1) == doctest::Approx(0.3 + 2 * 0.7 - 0.2).epsilon(1e-12));
        CHECK(linear_predictor(m, t, 0, 2) == doctest::Approx(0.3 + 0.7).epsilon(1e-12));
        CHECK(linear_predictor(m, t, 0, 3) == doctest::Approx(0.7 - 0.2).epsilon(1e-12));
        CHECK(linear_predictor(m, t, 2, 3) == doctest::Approx(0.7).epsilon(1e-12));
    }

    SUBCASE("zero coefficients predict one half") {
        TraitPartition t(3, {{0, 1, 2}});
        FprModel m;
        m.n = 3;
        m.K = 1;
        m.beta.assign(feature_dim(3, 1), 0.0);
        auto p = predict_links(m, t, {{0, 2}});
        CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-14));
    }

    SUBCASE("bad indices rejected") {
        TraitPartition t(3, {{0, 1, 2}});
        FprModel m;
        m.n = 3;
        m.K = 1;
        m.beta.assign(5, 0.0);
        CHECK_THROWS_AS(linear_predictor(m, t, 1, 1), ParameterError);
        CHECK_THROWS_AS(linear_predictor(m, t, 0, 3), ParameterError);
        TraitPartition t4(4, {{0, 1, 2, 3}});
        CHECK_THROWS_AS(linear_predictor(m, t4, 0, 1), DataError);
    }
}

TEST_CASE("prox operators match the region formulas exactly") {
    const std::vector<std::pair<PenaltyKind, double>> kinds = {
        {PenaltyKind::L1, 3.7}, {PenaltyKind::L2, 3.7},
        {PenaltyKind::Scad, 3.7}, {PenaltyKind::Scad, 2.4},
        {PenaltyKind::Mcp, 3.0}, {PenaltyKind::Mcp, 1.4}};
    for (const auto& [kind, a] : kinds)
        for (double lambda : {0.4, 1.0})
            for (double step : {0.25, 0.7, 1.0}) {
                PenaltySpec spec{kind, lambda, a, false};
                for (int g = 0; g < 30; ++g) {
                    const double v = -6.0 + 12.0 * double(g) / 29.0;
                    const double got = prox(spec, v, step);
                    const double want = prox_oracle(kind, a, v, lambda * step);
                    CHECK(std::abs(got - want) <= 1e-12);
                }
            }

    SUBCASE("pinned examples") {
        CHECK(prox(PenaltySpec::l1(1.0), 0.5, 1.0) == 0.0);
        CHECK(prox(PenaltySpec::l1(1.0), 2.5, 1.0) == doctest::Approx(1.5).epsilon(1e-14));
        CHECK(prox(PenaltySpec::scad(1.0, 3.7), 5.0, 1.0) == 5.0);
        CHECK(prox(PenaltySpec::scad(1.0, 3.7), 3.0, 1.0) ==
              doctest::Approx((2.7 * 3.0 - 3.7) / 1.7).epsilon(1e-14));
        CHECK(prox(PenaltySpec::mcp(1.0, 2.0), 1.5, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(prox(PenaltySpec::mcp(1.0, 2.0), 3.0, 1.0) == 3.0);
    }

    SUBCASE("shrinkage invariants") {
        for (const auto& [kind, a] : kinds)
            for (int g = 0; g < 30; ++g) {
                const double v = -6.0 + 12.0 * double(g) / 29.0;
                PenaltySpec spec{kind, 0.8, a, false};
                const double out = prox(spec, v, 1.0);
                CHECK(std::abs(out) <= std::abs(v) + 1e-15);
                CHECK(out * v >= 0.0);
            }
        CHECK(prox(PenaltySpec::scad(0.5, 3.0), 2.0, 1.0) == 2.0);
        CHECK(prox(PenaltySpec::mcp(0.5, 3.0), 2.0, 1.0) == 2.0);
    }

    SUBCASE("prox minimizes the scalar envelope at unit step") {
        for (const auto& [kind, a] : kinds) {
            PenaltySpec spec = with_intercept({kind, 0.9, a, false});
            for (double v : {-4.2, -1.1, -0.3, 0.2, 0.9, 2.6, 5.0}) {
                const double x_star = prox(spec, v, 1.0);
                auto envelope = [&](double x) {
                    return 0.5 * (x - v) * (x - v) + penalty_value(spec, {x});
                };
                double best = std::numeric_limits<double>::infinity();
                const double span = std::abs(v) + 1.0;
                for (int g = 0; g <= 4000; ++g)
                    best = std::min(best, envelope(-span + 2.0 * span * double(g) / 4000.0));
                CHECK(envelope(x_star) <= best + 1e-7);
            }
        }
    }

    SUBCASE("rejects bad knees and steps") {
        CHECK_THROWS_AS(prox(PenaltySpec::scad(1.0, 2.0), 1.0, 1.0), ParameterError);
        CHECK_THROWS_AS(prox(PenaltySpec::mcp(1.0, 1.0), 1.0, 1.0), ParameterError);
        CHECK_THROWS_AS(prox(PenaltySpec::l1(1.0), 1.0, 0.0), ParameterError);
        CHECK_THROWS_AS(prox(PenaltySpec::l1(-0.1), 1.0, 1.0), ParameterError);
    }
}

TEST_CASE("penalty values: conventions and intercept handling") {
    const std::vector<double> beta = {5.0, 1.5, -2.0};
    CHECK(penalty_value(PenaltySpec::l1(0.3), beta) == doctest::Approx(1.05).epsilon(1e-12));
    CHECK(penalty_value(with_intercept(PenaltySpec::l1(0.3)), beta) ==
          doctest::Approx(0.3 * 8.5).epsilon(1e-12));
    CHECK(penalty_value(PenaltySpec::l2(0.3), beta) ==
          doctest::Approx(0.3 * (2.25 + 4.0)).epsilon(1e-12));
    CHECK(penalty_value(PenaltySpec::l1(0.0), beta) == 0.0);

    // Folded-penalty tails are flat beyond a*lambda.
    for (auto kind : {PenaltyKind::Scad, PenaltyKind::Mcp}) {
        PenaltySpec spec{kind, 1.0, 3.0, false};
        const double far = penalty_value(spec, {0.0, 4.0});
        CHECK(penalty_value(spec, {0.0, 9.0}) == doctest::Approx(far).epsilon(1e-12));
        CHECK(penalty_value(spec, {0.0, -9.0}) == doctest::Approx(far).epsilon(1e-12));
        double prev = 0.0;
        for (int g = 1; g <= 40; ++g) {
            const double cur = penalty_value(spec, {0.0, 0.1 * double(g)});
            CHECK(cur >= prev - 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("deviance values: saturated Poisson, robust branches, knee continuity") {
    TraitPartition t(3, {{0, 1, 2}});
    ArdMatrix y(3, 1);
    FprModel m;
    m.n = 3;
    m.K = 1;
    m.beta.assign(feature_dim(3, 1), 0.0);  // all pair probs 0.5, so mu_i0 = 1

    y.at(0, 0) = 1, y.at(1, 0) = 1, y.at(2, 0) = 1;
    m.deviance = {DevianceKind::Poisson, 1.345};
    CHECK(std::abs(smooth_deviance(m, y, t)) < 1e-12);

    y.at(2, 0) = 3;
    CHECK(smooth_deviance(m, y, t) ==
          doctest::Approx(2.0 * (-2.0 + 3.0 * std::log(3.0))).epsilon(1e-12));

    // Residuals are {0, 0, 2}; the MAD floor pins the robust scale at 1.
    m.deviance = {DevianceKind::Huber, 1.0};
    CHECK(smooth_deviance(m, y, t) == doctest::Approx(1.5).epsilon(1e-12));
    m.deviance = {DevianceKind::Huber, 1.345};
    CHECK(smooth_deviance(m, y, t) ==
          doctest::Approx(1.345 * 2.0 - 0.5 * 1.345 * 1.345).epsilon(1e-12));

    y.at(2, 0) = 2;  // residual exactly at the knee
    m.deviance = {DevianceKind::Huber, 1.0};
    const double at_knee = smooth_deviance(m, y, t);
    CHECK(at_knee == doctest::Approx(0.5).epsilon(1e-12));
    m.deviance = {DevianceKind::Huber, 1.0 - 1e-9};
    CHECK(std::abs(smooth_deviance(m, y, t) - at_knee) < 1e-6);

    ArdMatrix bad(4, 1);
    CHECK_THROWS_AS(smooth_deviance(m, bad, t), DataError);
}

TEST_CASE("smooth-deviance gradients match central finite differences") {
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 6 + (std::size_t(rep) * 7) % 25;
        const std::size_t K = 1 + rep % 4;
        Planted d = planted_ard(n, K, 0.25, 900 + std::uint64_t(rep));
        const std::size_t dim = feature_dim(n, K);

        Rng rng = make_rng(700 + std::uint64_t(rep));
        std::normal_distribution<double> gauss(0.0, 0.3);
        FprModel m;
        m.n = n;
        m.K = K;
        m.beta.resize(dim);
        for (double& b : m.beta) b = gauss(rng);
        switch (rep % 3) {
            case 0: m.deviance = {DevianceKind::Poisson, 1.345}; break;
            case 1: m.deviance = {DevianceKind::Logistic, 1.345}; break;
            default: m.deviance = {DevianceKind::Huber, 1.345}; break;
        }

        if (m.deviance.kind == DevianceKind::Huber) {
            // Rebuild counts near the fitted rates (plus two honest outliers)
            // so the MAD stays under its floor and the robust scale is fixed
            // at 1 across the finite-difference window.
            std::vector<double> resid;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < K; ++k) {
                    const double mu = predicted_rate(m, d.traits, NodeId(i), k);
                    d.y.at(i, k) = std::llround(mu);
                    if (i < 2 && k == 0) d.y.at(i, k) += 4;
                    resid.push_back(double(d.y.at(i, k)) - mu);
                }
            const double med = upper_median(resid);
            for (double& r : resid) r = std::abs(r - med);
            REQUIRE(upper_median(resid) < 0.9);
        }

        std::vector<double> grad;
        smooth_deviance(m, d.y, d.traits, &grad);
        REQUIRE(grad.size() == dim);

        const double h = 1e-5;
        for (std::size_t c = 0; c < dim; ++c) {
            FprModel probe = m;
            probe.beta[c] = m.beta[c] + h;
            const double up = smooth_deviance(probe, d.y, d.traits);
            probe.beta[c] = m.beta[c] - h;
            const double dn = smooth_deviance(probe, d.y, d.traits);
            const double fd = (up - dn) / (2.0 * h);
            const double rel =
                std::abs(grad[c] - fd) / std::max({std::abs(grad[c]), std::abs(fd), 1e-6});
            CHECK(rel < 1e-4);
        }
    }
}

TEST_CASE("huge penalty zeroes every non-intercept coordinate") {
    Planted d = planted_ard(30, 3, 0.2, 1200);
    FprConfig cfg;
    cfg.penalty = PenaltySpec::l1(1e6);
    FitDiagnostics diag;
    FprModel m = fit(d.y, d.traits, cfg, &diag);
    CHECK(m.n == 30);
    CHECK(m.K == 3);
    REQUIRE(m.beta.size() == feature_dim(30, 3));
    CHECK(std::isfinite(m.beta[0]));
    for (std::size_t c = 1; c < m.beta.size(); ++c) CHECK(m.beta[c] == 0.0);
    CHECK(diag.iterations == diag.objective_trace.size());
}

TEST_CASE("backtracking keeps the objective non-increasing") {
    Planted d = planted_ard(25, 3, 0.25, 1300);
    FprConfig cfg;
    cfg.penalty = PenaltySpec::l1(0.05);
    cfg.max_iters = 400;
    FitDiagnostics diag;
    FprModel m = fit(d.y, d.traits, cfg, &diag);
    REQUIRE(diag.objective_trace.size() >= 2);
    for (std::size_t i = 0; i + 1 < diag.objective_trace.size(); ++i)
        CHECK(diag.objective_trace[i + 1] <= diag.objective_trace[i] + 1e-10);
    CHECK(objective(m, d.y, d.traits) ==
          doctest::Approx(diag.objective_trace.back()).epsilon(1e-9));

    SUBCASE("acceleration reaches at least the plain optimum") {
        FprConfig acc = cfg;
        acc.accelerate = true;
        acc.max_iters = 2000;
        cfg.max_iters = 2000;
        FprModel mp = fit(d.y, d.traits, cfg);
        FprModel ma = fit(d.y, d.traits, acc);
        CHECK(objective(ma, d.y, d.traits) <= objective(mp, d.y, d.traits) + 1e-4);
    }

    SUBCASE("conservative fixed step is also monotone") {
        FprConfig fx = cfg;
        fx.fixed_step = default_fixed_step(d.y, d.traits);
        REQUIRE(*fx.fixed_step > 0.0);
        FitDiagnostics fdiag;
        fit(d.y, d.traits, fx, &fdiag);
        for (std::size_t i = 0; i + 1 < fdiag.objective_trace.size(); ++i)
            CHECK(fdiag.objective_trace[i + 1] <= fdiag.objective_trace[i] + 1e-9);
    }
}

TEST_CASE("tight fit satisfies the soft-threshold stationarity conditions") {
    Planted d = planted_ard(25, 3, 0.3, 1400);
    FprConfig cfg;
    cfg.penalty = PenaltySpec::l1(0.02);
    cfg.max_iters = 50000;
    cfg.tol = 1e-12;
    cfg.accelerate = true;
    FprModel m = fit(d.y, d.traits, cfg);

    std::vector<double> grad;
    smooth_deviance(m, d.y, d.traits, &grad);
    const double lam = cfg.penalty.lambda;
    std::size_t active = 0;
    CHECK(std::abs(grad[0]) <= 1e-4);
    for (std::size_t c = 1; c < m.beta.size(); ++c) {
        if (m.beta[c] != 0.0) {
            ++active;
            CHECK(std::abs(grad[c] + lam * (m.beta[c] > 0.0 ? 1.0 : -1.0)) <= 1e-4);
        } else {
            CHECK(std::abs(grad[c]) <= lam + 1e-4);
        }
    }
    REQUIRE(active > 0);
}

TEST_CASE("cross-validation: grid handling, argmin, tie-break") {
    Planted d = planted_ard(24, 2, 0.3, 1500);
    FprConfig cfg;
    cfg.penalty = PenaltySpec::l1(0.1);
    cfg.max_iters = 300;

    SUBCASE("single point") {
        CvResult r = cross_validate(d.y, d.traits, {0.2}, 3, cfg, 11);
        CHECK(r.best_lambda == 0.2);
        REQUIRE(r.lambdas.size() == 1);
        REQUIRE(r.mean_deviance.size() == 1);
        CHECK(std::isfinite(r.mean_deviance[0]));
        CHECK(r.mean_deviance[0] >= 0.0);
    }

    SUBCASE("full curve reports ascending lambdas and the argmin") {
        CvResult r = cross_validate(d.y, d.traits, {1.0, 0.01, 10.0, 0.1}, 4, cfg, 12);
        REQUIRE(r.lambdas.size() == 4);
        CHECK(std::is_sorted(r.lambdas.begin(), r.lambdas.end()));
        std::size_t best = 0;
        for (std::size_t i = 1; i < 4; ++i)
            if (r.mean_deviance[i] < r.mean_deviance[best]) best = i;
        CHECK(r.best_lambda == r.lambdas[best]);
        for (double dev : r.mean_deviance) {
            CHECK(std::isfinite(dev));
            CHECK(dev >= 0.0);
        }
    }

    SUBCASE("exact ties prefer the smaller lambda") {
        // Both levels crush every penalized coordinate, so the held-out
        // deviance depends only on the (identical) intercept path.
        CvResult r = cross_validate(d.y, d.traits, {2e6, 1e6}, 3, cfg, 13);
        REQUIRE(r.mean_deviance.size() == 2);
        REQUIRE(r.mean_deviance[0] == r.mean_deviance[1]);
        CHECK(r.best_lambda == 1e6);
    }

    SUBCASE("bad arguments") {
        CHECK_THROWS_AS(cross_validate(d.y, d.traits, {}, 3, cfg, 1), ParameterError);
        CHECK_THROWS_AS(cross_validate(d.y, d.traits, {0.1}, 1, cfg, 1), ParameterError);
        CHECK_THROWS_AS(cross_validate(d.y, d.traits, {0.1}, 25, cfg, 1), ParameterError);
        CHECK_THROWS_AS(cross_validate(d.y, d.traits, {-0.1}, 3, cfg, 1), ParameterError);
    }
}

TEST_CASE("federated rounds with unlimited budget reproduce the centralized path") {
    Planted d = planted_ard(20, 2, 0.3, 1600);
    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t rounds = 300;

    FprConfig cfg;
    cfg.penalty = PenaltySpec::l1(0.05);
    cfg.fixed_step = default_fixed_step(d.y, d.traits);
    cfg.max_iters = rounds;
    cfg.tol = 1e-15;
    FprModel central = fit(d.y, d.traits, cfg);

    std::vector<NodeId> everyone(20);
    for (NodeId i = 0; i < 20; ++i) everyone[i] = i;
    FprModel one = federated_fit(d.y, d.traits, {everyone}, rounds, inf, cfg);

    std::vector<std::vector<NodeId>> four(4);
    for (NodeId i = 0; i < 20; ++i) four[i % 4].push_back(i);
    FprModel parts = federated_fit(d.y, d.traits, four, rounds, inf, cfg);

    REQUIRE(one.beta.size() == central.beta.size());
    for (std::size_t c = 0; c < central.beta.size(); ++c) {
        CHECK(std::abs(one.beta[c] - central.beta[c]) < 1e-6);
        CHECK(std::abs(parts.beta[c] - central.beta[c]) < 1e-6);
    }

    SUBCASE("finite budgets add seeded, reproducible noise") {
        cfg.seed = 42;
        FprModel a = federated_fit(d.y, d.traits, four, 40, 0.5, cfg);
        FprModel b = federated_fit(d.y, d.traits, four, 40, 0.5, cfg);
        CHECK(a.beta == b.beta);
        cfg.seed = 43;
        FprModel c = federated_fit(d.y, d.traits, four, 40, 0.5, cfg);
        CHECK(a.beta != c.beta);
        FprModel clean = federated_fit(d.y, d.traits, four, 40, inf, cfg);
        CHECK(a.beta != clean.beta);
    }

    SUBCASE("shard validation") {
        std::vector<std::vector<NodeId>> overlap = {{0, 1, 2}, {2, 3}, {4}};
        CHECK_THROWS_AS(federated_fit(d.y, d.traits, overlap, 5, inf, cfg), ParameterError);
        std::vector<std::vector<NodeId>> sparse = {{0, 1, 2}};
        CHECK_THROWS_AS(federated_fit(d.y, d.traits, sparse, 5, inf, cfg), ParameterError);
        CHECK_THROWS_AS(federated_fit(d.y, d.traits, {}, 5, inf, cfg), ParameterError);
        std::vector<std::vector<NodeId>> holed = {everyone, {}};
        CHECK_THROWS_AS(federated_fit(d.y, d.traits, holed, 5, inf, cfg), ParameterError);
        CHECK_THROWS_AS(federated_fit(d.y, d.traits, {everyone}, 0, inf, cfg), ParameterError);
        CHECK_THROWS_AS(federated_fit(d.y, d.traits, {everyone}, 5, 0.0, cfg), ParameterError);
        CHECK_THROWS_AS(federated_fit(d.y, d.traits, {everyone}, 5, -1.0, cfg), ParameterError);
    }
}

TEST_CASE("fit rejects invalid configurations") {
    Planted d = planted_ard(10, 2, 0.3, 1700);
    FprConfig cfg;
    cfg.penalty = PenaltySpec::scad(0.1, 2.0);
    CHECK_THROWS_AS(fit(d.y, d.traits, cfg), ParameterError);
    cfg.penalty = PenaltySpec::mcp(0.1, 1.0);
    CHECK_THROWS_AS(fit(d.y, d.traits, cfg), ParameterError);
    cfg.penalty = PenaltySpec::l1(-0.5);
    CHECK_THROWS_AS(fit(d.y, d.traits, cfg), ParameterError);
    cfg.penalty = PenaltySpec::l1(0.1);
    cfg.max_iters = 0;
    CHECK_THROWS_AS(fit(d.y, d.traits, cfg), ParameterError);
    cfg = FprConfig{};
    cfg.tol = 0.0;
    CHECK_THROWS_AS(fit(d.y, d.traits, cfg), ParameterError);
    cfg = FprConfig{};
    cfg.fixed_step = -1.0;
    CHECK_THROWS_AS(fit(d.y, d.traits, cfg), ParameterError);
    TraitPartition wrong(11, {{0, 1, 2}});
    cfg = FprConfig{};
    CHECK_THROWS_AS(fit(d.y, wrong, cfg), DataError);
}
