#include "ardnet/fpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ardnet/common.hpp"

namespace ardnet::fpr {

namespace {

constexpr double kRateFloor = 1e-12;

struct DevCtx {
    DevianceSpec spec;
    double sigma = 1.0;  // Huber standardization, refreshed per iteration
};

double cell_trials(const TraitPartition& t, std::size_t k, NodeId i) {
    return double(t.group_size_excluding(k, i));
}

double cell_dev(double y, double mu, double trials, const DevCtx& ctx) {
    switch (ctx.spec.kind) {
        case DevianceKind::Poisson: {
            mu = std::max(mu, kRateFloor);
            double d = mu - y;
            if (y > 0.0) d += y * std::log(y / mu);
            return 2.0 * d;
        }
        case DevianceKind::Logistic: {
            if (trials <= 0.0) return 0.0;
            const double c = trials;
            const double yy = std::clamp(y, 0.0, c);
            const double m = std::clamp(mu, kRateFloor, c - kRateFloor);
            double d = 0.0;
            if (yy > 0.0) d += yy * std::log(yy / m);
            if (yy < c) d += (c - yy) * std::log((c - yy) / (c - m));
            return 2.0 * d;
        }
        case DevianceKind::Huber: {
            const double x = (y - mu) / ctx.sigma;
            const double d0 = ctx.spec.delta0;
            if (std::abs(x) <= d0) return 0.5 * x * x;
            return d0 * std::abs(x) - 0.5 * d0 * d0;
        }
    }
    return 0.0;
}

double cell_ddev(double y, double mu, double trials, const DevCtx& ctx) {
    switch (ctx.spec.kind) {
        case DevianceKind::Poisson:
            return 2.0 * (1.0 - y / std::max(mu, kRateFloor));
        case DevianceKind::Logistic: {
            if (trials <= 0.0) return 0.0;
            const double c = trials;
            const double yy = std::clamp(y, 0.0, c);
            const double m = std::clamp(mu, kRateFloor, c - kRateFloor);
            return 2.0 * (-yy / m + (c - yy) / (c - m));
        }
        case DevianceKind::Huber: {
            const double x = (y - mu) / ctx.sigma;
            const double d0 = ctx.spec.delta0;
            const double psi = std::abs(x) <= d0 ? x : d0 * (x > 0.0 ? 1.0 : -1.0);
            return -psi / ctx.sigma;
        }
    }
    return 0.0;
}

double eta_pair(const std::vector<double>& beta, const TraitPartition& t, std::size_t n,
                std::size_t K, NodeId i, NodeId j) {
    double eta = beta[0] + beta[1 + i] + beta[1 + j];
    const auto& mi = t.memberships(i);
    const auto& mj = t.memberships(j);
    for (std::size_t k : mi)
        for (std::size_t l : mj) eta += beta[trait_pair_coord(k, l, n, K)];
    return eta;
}

// Symmetric link-probability matrix from beta (diagonal zero).
void build_probs(const std::vector<double>& beta, const TraitPartition& t, std::size_t n,
                 std::size_t K, std::vector<double>& P) {
    P.assign(n * n, 0.0);
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j) {
            const double p = sigmoid(eta_pair(beta, t, n, K, i, j));
            P[i * n + j] = p;
            P[j * n + i] = p;
        }
}

// mu[i*K+k] for rows with mask set (mask empty = all rows).
void build_mu(const std::vector<double>& P, const TraitPartition& t, std::size_t n, std::size_t K,
              const std::vector<char>& mask, std::vector<double>& mu) {
    mu.assign(n * K, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask.empty() && !mask[i]) continue;
        double* row = mu.data() + i * K;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto& mem = t.memberships(static_cast<NodeId>(j));
            if (mem.empty()) continue;
            const double p = P[i * n + j];
            for (std::size_t k : mem) row[k] += p;
        }
    }
}

double mad_sigma(const ArdMatrix& y, const std::vector<double>& mu,
                 const std::vector<char>& mask) {
    std::vector<double> r;
    r.reserve(y.n * y.K);
    for (std::size_t i = 0; i < y.n; ++i) {
        if (!mask.empty() && !mask[i]) continue;
        for (std::size_t k = 0; k < y.K; ++k) r.push_back(double(y.at(i, k)) - mu[i * y.K + k]);
    }
    if (r.empty()) return 1.0;
    auto median_of = [](std::vector<double>& xs) {
        const std::size_t mid = xs.size() / 2;
        std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
        return xs[mid];
    };
    const double med = median_of(r);
    for (double& x : r) x = std::abs(x - med);
    return std::max(1.0, median_of(r));
}

double smooth_value(const ArdMatrix& y, const TraitPartition& t, const std::vector<char>& mask,
                    const std::vector<double>& mu, const DevCtx& ctx) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.n; ++i) {
        if (!mask.empty() && !mask[i]) continue;
        for (std::size_t k = 0; k < y.K; ++k)
            total += cell_dev(double(y.at(i, k)), mu[i * y.K + k],
                              cell_trials(t, k, static_cast<NodeId>(i)), ctx);
    }
    return total;
}

void smooth_grad(const ArdMatrix& y, const TraitPartition& t, const std::vector<char>& mask,
                 const std::vector<double>& P, const std::vector<double>& mu, const DevCtx& ctx,
                 std::vector<double>& grad) {
    const std::size_t n = y.n;
    const std::size_t K = y.K;
    std::vector<double> W(n * K, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask.empty() && !mask[i]) continue;
        for (std::size_t k = 0; k < K; ++k)
            W[i * K + k] = cell_ddev(double(y.at(i, k)), mu[i * K + k],
                                     cell_trials(t, k, static_cast<NodeId>(i)), ctx);
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    for (NodeId i = 0; i < n; ++i) {
        const auto& mi = t.memberships(i);
        const bool in_i = mask.empty() || mask[i];
        for (NodeId j = i + 1; j < n; ++j) {
            const auto& mj = t.memberships(j);
            double s = 0.0;
            if (in_i)
                for (std::size_t k : mj) s += W[i * K + k];
            if (mask.empty() || mask[j])
                for (std::size_t k : mi) s += W[j * K + k];
            if (s == 0.0) continue;
            const double p = P[i * n + j];
            const double w = s * p * (1.0 - p);
            grad[0] += w;
            grad[1 + i] += w;
            grad[1 + j] += w;
            for (std::size_t k : mi)
                for (std::size_t l : mj) grad[trait_pair_coord(k, l, n, K)] += w;
        }
    }
}

void check_shapes(const ArdMatrix& y, const TraitPartition& t) {
    if (y.n != t.n()) throw DataError("ARD/trait node count mismatch");
    if (y.K != t.num_traits()) throw DataError("ARD/trait group count mismatch");
}

void check_penalty(const PenaltySpec& p) {
    if (p.lambda < 0.0) throw ParameterError("penalty level must be nonnegative");
    if (p.kind == PenaltyKind::Scad && p.a <= 2.0) throw ParameterError("SCAD knee must exceed 2");
    if (p.kind == PenaltyKind::Mcp && p.a <= 1.0) throw ParameterError("MCP knee must exceed 1");
}

void prox_vector(const PenaltySpec& penalty, std::vector<double>& beta, double step) {
    const std::size_t start = penalty.penalize_intercept ? 0 : 1;
    for (std::size_t idx = start; idx < beta.size(); ++idx)
        beta[idx] = prox(penalty, beta[idx], step);
}

// Shared ISTA loop over the rows selected by mask.
FprModel fit_masked(const ArdMatrix& y, const TraitPartition& t, const FprConfig& config,
                    const std::vector<char>& mask, FitDiagnostics* diag) {
    check_shapes(y, t);
    check_penalty(config.penalty);
    if (config.max_iters == 0) throw ParameterError("max_iters must be >= 1");
    if (config.tol <= 0.0) throw ParameterError("tol must be positive");
    if (config.fixed_step && *config.fixed_step <= 0.0)
        throw ParameterError("fixed step must be positive");

    const std::size_t n = y.n;
    const std::size_t K = y.K;
    const std::size_t dim = feature_dim(n, K);
    std::vector<double> beta(dim, 0.0);
    std::vector<double> point = beta;  // gradient evaluation point
    std::vector<double> P, mu, grad(dim), cand(dim), trial_mu;
    DevCtx ctx{config.deviance, 1.0};
    double L = 1.0;
    double t_momentum = 1.0;
    double last_obj = std::numeric_limits<double>::infinity();

    FitDiagnostics local;
    FitDiagnostics& out = diag ? *diag : local;
    out.objective_trace.clear();
    out.converged = false;

    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        build_probs(point, t, n, K, P);
        build_mu(P, t, n, K, mask, mu);
        if (config.deviance.kind == DevianceKind::Huber) ctx.sigma = mad_sigma(y, mu, mask);
        const double f = smooth_value(y, t, mask, mu, ctx);
        smooth_grad(y, t, mask, P, mu, ctx, grad);

        double f_cand = 0.0;
        if (config.fixed_step) {
            const double step = *config.fixed_step;
            for (std::size_t idx = 0; idx < dim; ++idx) cand[idx] = point[idx] - step * grad[idx];
            prox_vector(config.penalty, cand, step);
            build_probs(cand, t, n, K, P);
            build_mu(P, t, n, K, mask, trial_mu);
            f_cand = smooth_value(y, t, mask, trial_mu, ctx);
        } else {
            for (int halvings = 0; halvings < 60; ++halvings) {
                const double step = 1.0 / L;
                for (std::size_t idx = 0; idx < dim; ++idx)
                    cand[idx] = point[idx] - step * grad[idx];
                prox_vector(config.penalty, cand, step);
                build_probs(cand, t, n, K, P);
                build_mu(P, t, n, K, mask, trial_mu);
                f_cand = smooth_value(y, t, mask, trial_mu, ctx);
                double lin = 0.0, quad = 0.0;
                for (std::size_t idx = 0; idx < dim; ++idx) {
                    const double dlt = cand[idx] - point[idx];
                    lin += grad[idx] * dlt;
                    quad += dlt * dlt;
                }
                if (f_cand <= f + lin + 0.5 * L * quad + 1e-12 * std::abs(f)) break;
                L *= 2.0;
            }
        }

        double max_change = 0.0;
        for (std::size_t idx = 0; idx < dim; ++idx)
            max_change = std::max(max_change, std::abs(cand[idx] - beta[idx]));

        const double obj = f_cand + penalty_value(config.penalty, cand);
        if (config.accelerate) {
            if (obj > last_obj) {  // restart momentum on an objective increase
                point = beta;
                t_momentum = 1.0;
                continue;
            }
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
            for (std::size_t idx = 0; idx < dim; ++idx)
                point[idx] = cand[idx] + ((t_momentum - 1.0) / t_next) * (cand[idx] - beta[idx]);
            t_momentum = t_next;
        } else {
            point = cand;
        }
        beta = cand;
        last_obj = obj;
        out.objective_trace.push_back(obj);
        out.iterations = iter + 1;
        if (!config.fixed_step) L = std::max(L / 1.5, 1e-8);
        if (max_change < config.tol) {
            out.converged = true;
            break;
        }
    }

    FprModel model;
    model.n = n;
    model.K = K;
    model.beta = std::move(beta);
    model.penalty = config.penalty;
    model.deviance = config.deviance;
    return model;
}

double heldout_poisson_deviance(const FprModel& model, const ArdMatrix& y,
                                const TraitPartition& t, const std::vector<char>& mask) {
    std::vector<double> P, mu;
    build_probs(model.beta, t, y.n, y.K, P);
    build_mu(P, t, y.n, y.K, mask, mu);
    DevCtx ctx{DevianceSpec{DevianceKind::Poisson, 1.345}, 1.0};
    return smooth_value(y, t, mask, mu, ctx);
}

}  // namespace

std::size_t feature_dim(std::size_t n, std::size_t K) { return 1 + n + K * (K + 1) / 2; }

std::size_t trait_pair_coord(std::size_t k, std::size_t l, std::size_t n, std::size_t K) {
    if (k >= K || l >= K) throw ParameterError("trait index out of range");
    if (k > l) std::swap(k, l);
    return 1 + n + k * K - k * (k - 1) / 2 + (l - k);
}

std::string feature_name(std::size_t coord, std::size_t n, std::size_t K) {
    if (coord >= feature_dim(n, K)) throw ParameterError("feature index out of range");
    if (coord == 0) return "intercept";
    if (coord < 1 + n) return "node:" + std::to_string(coord - 1);
    std::size_t rest = coord - 1 - n;
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t row = K - k;
        if (rest < row) return "traitpair:" + std::to_string(k) + ":" + std::to_string(k + rest);
        rest -= row;
    }
    throw StateError("unreachable feature coordinate");
}

double prox(const PenaltySpec& penalty, double value, double step) {
    check_penalty(penalty);
    if (step <= 0.0) throw ParameterError("prox step must be positive");
    const double le = penalty.lambda * step;
    const double av = std::abs(value);
    const double sign = value >= 0.0 ? 1.0 : -1.0;
    switch (penalty.kind) {
        case PenaltyKind::L1:
            return sign * std::max(av - le, 0.0);
        case PenaltyKind::L2:
            return value / (1.0 + 2.0 * le);
        case PenaltyKind::Scad: {
            const double a = penalty.a;
            if (av <= 2.0 * le) return sign * std::max(av - le, 0.0);
            if (av <= a * le) return ((a - 1.0) * value - sign * a * le) / (a - 2.0);
            return value;
        }
        case PenaltyKind::Mcp: {
            const double a = penalty.a;
            if (av <= a * le) return sign * std::max(av - le, 0.0) / (1.0 - 1.0 / a);
            return value;
        }
    }
    return value;
}

double penalty_value(const PenaltySpec& penalty, const std::vector<double>& beta) {
    check_penalty(penalty);
    const double lam = penalty.lambda;
    const double a = penalty.a;
    double total = 0.0;
    const std::size_t start = penalty.penalize_intercept ? 0 : 1;
    for (std::size_t idx = start; idx < beta.size(); ++idx) {
        const double t = std::abs(beta[idx]);
        switch (penalty.kind) {
            case PenaltyKind::L1:
                total += lam * t;
                break;
            case PenaltyKind::L2:
                total += lam * t * t;
                break;
            case PenaltyKind::Scad:
                if (t <= lam)
                    total += lam * t;
                else if (t <= a * lam)
                    total += (2.0 * a * lam * t - t * t - lam * lam) / (2.0 * (a - 1.0));
                else
                    total += lam * lam * (a + 1.0) / 2.0;
                break;
            case PenaltyKind::Mcp:
                if (t <= a * lam)
                    total += lam * t - t * t / (2.0 * a);
                else
                    total += a * lam * lam / 2.0;
                break;
        }
    }
    return total;
}

double linear_predictor(const FprModel& model, const TraitPartition& t, NodeId i, NodeId j) {
    if (model.n != t.n()) throw DataError("model/trait node count mismatch");
    if (i >= model.n || j >= model.n || i == j) throw ParameterError("bad node pair");
    return eta_pair(model.beta, t, model.n, model.K, i, j);
}

double predicted_rate(const FprModel& model, const TraitPartition& t, NodeId i, std::size_t k) {
    if (model.n != t.n()) throw DataError("model/trait node count mismatch");
    if (i >= model.n || k >= model.K) throw ParameterError("bad (node, trait) index");
    double mu = 0.0;
    for (NodeId j : t.group(k)) {
        if (j == i) continue;
        mu += sigmoid(eta_pair(model.beta, t, model.n, model.K, i, j));
    }
    return mu;
}

double objective(const FprModel& model, const ArdMatrix& y, const TraitPartition& t) {
    check_shapes(y, t);
    if (model.n != y.n || model.K != y.K) throw DataError("model/data shape mismatch");
    std::vector<double> P, mu;
    build_probs(model.beta, t, y.n, y.K, P);
    const std::vector<char> all;
    build_mu(P, t, y.n, y.K, all, mu);
    DevCtx ctx{model.deviance, 1.0};
    if (model.deviance.kind == DevianceKind::Huber) ctx.sigma = mad_sigma(y, mu, all);
    return smooth_value(y, t, all, mu, ctx) + penalty_value(model.penalty, model.beta);
}

double smooth_deviance(const FprModel& model, const ArdMatrix& y, const TraitPartition& t,
                       std::vector<double>* gradient) {
    check_shapes(y, t);
    if (model.n != y.n || model.K != y.K) throw DataError("model/data shape mismatch");
    std::vector<double> P, mu;
    build_probs(model.beta, t, y.n, y.K, P);
    const std::vector<char> all;
    build_mu(P, t, y.n, y.K, all, mu);
    DevCtx ctx{model.deviance, 1.0};
    if (model.deviance.kind == DevianceKind::Huber) ctx.sigma = mad_sigma(y, mu, all);
    if (gradient) {
        gradient->assign(model.beta.size(), 0.0);
        smooth_grad(y, t, all, P, mu, ctx, *gradient);
    }
    return smooth_value(y, t, all, mu, ctx);
}

FprModel fit(const ArdMatrix& y, const TraitPartition& t, const FprConfig& config,
             FitDiagnostics* diag) {
    return fit_masked(y, t, config, {}, diag);
}

CvResult cross_validate(const ArdMatrix& y, const TraitPartition& t,
                        const std::vector<double>& lambdas, std::size_t folds,
                        const FprConfig& config, std::uint64_t seed) {
    check_shapes(y, t);
    if (lambdas.empty()) throw ParameterError("lambda grid is empty");
    if (folds < 2 || folds > y.n) throw ParameterError("fold count must be in [2, n]");
    for (double l : lambdas)
        if (l < 0.0) throw ParameterError("penalty level must be nonnegative");

    CvResult result;
    result.lambdas = lambdas;
    std::sort(result.lambdas.begin(), result.lambdas.end());

    std::vector<std::size_t> order(y.n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, 11);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> fold_of(y.n);
    for (std::size_t idx = 0; idx < y.n; ++idx) fold_of[order[idx]] = idx % folds;

    result.mean_deviance.assign(result.lambdas.size(), 0.0);
    for (std::size_t li = 0; li < result.lambdas.size(); ++li) {
        FprConfig cfg = config;
        cfg.penalty.lambda = result.lambdas[li];
        double total = 0.0;
        for (std::size_t f = 0; f < folds; ++f) {
            std::vector<char> train(y.n), test(y.n);
            for (std::size_t i = 0; i < y.n; ++i) {
                train[i] = fold_of[i] != f;
                test[i] = fold_of[i] == f;
            }
            const FprModel model = fit_masked(y, t, cfg, train, nullptr);
            total += heldout_poisson_deviance(model, y, t, test);
        }
        result.mean_deviance[li] = total / double(folds);
    }

    std::size_t best = 0;
    for (std::size_t li = 1; li < result.lambdas.size(); ++li)
        if (result.mean_deviance[li] < result.mean_deviance[best]) best = li;
    result.best_lambda = result.lambdas[best];
    return result;
}

double default_fixed_step(const ArdMatrix& y, const TraitPartition& t) {
    check_shapes(y, t);
    const std::size_t dim = feature_dim(y.n, y.K);
    std::vector<double> beta0(dim, 0.0), g0(dim), g1(dim), P, mu;
    const std::vector<char> all;
    DevCtx ctx{DevianceSpec{}, 1.0};
    build_probs(beta0, t, y.n, y.K, P);
    build_mu(P, t, y.n, y.K, all, mu);
    smooth_grad(y, t, all, P, mu, ctx, g0);
    double norm = 0.0;
    for (double g : g0) norm += g * g;
    norm = std::sqrt(norm);
    if (norm < 1e-12) return 1.0;
    const double delta = 1e-3;
    std::vector<double> beta1(dim);
    for (std::size_t idx = 0; idx < dim; ++idx) beta1[idx] = delta * g0[idx] / norm;
    build_probs(beta1, t, y.n, y.K, P);
    build_mu(P, t, y.n, y.K, all, mu);
    smooth_grad(y, t, all, P, mu, ctx, g1);
    double diff = 0.0;
    for (std::size_t idx = 0; idx < dim; ++idx) diff += (g1[idx] - g0[idx]) * (g1[idx] - g0[idx]);
    const double curvature = std::sqrt(diff) / delta;
    return 0.25 / std::max(curvature, 1e-8);
}

FprModel federated_fit(const ArdMatrix& y, const TraitPartition& t,
                       const std::vector<std::vector<NodeId>>& shards, std::size_t rounds,
                       double epsilon, const FprConfig& config) {
    check_shapes(y, t);
    check_penalty(config.penalty);
    if (shards.empty()) throw ParameterError("no shards");
    if (rounds == 0) throw ParameterError("rounds must be >= 1");
    if (!(epsilon > 0.0)) throw ParameterError("privacy budget must be positive");
    std::vector<char> seen(y.n, 0);
    for (const auto& shard : shards) {
        if (shard.empty()) throw ParameterError("empty shard");
        for (NodeId i : shard) {
            if (i >= y.n) throw ParameterError("shard row out of range");
            if (seen[i]) throw ParameterError("shards overlap");
            seen[i] = 1;
        }
    }
    for (char s : seen)
        if (!s) throw ParameterError("shards must cover every respondent row");

    const std::size_t n = y.n;
    const std::size_t K = y.K;
    const std::size_t dim = feature_dim(n, K);
    const double step = config.fixed_step ? *config.fixed_step : default_fixed_step(y, t);
    if (step <= 0.0) throw ParameterError("fixed step must be positive");
    const bool noisy = std::isfinite(epsilon);
    const double clip_norm = 1.0;
    const double delta_dp = 1e-5;
    const double eps_round = epsilon / double(rounds);
    const double noise_sd =
        noisy ? clip_norm * std::sqrt(2.0 * std::log(1.25 / delta_dp)) / eps_round : 0.0;

    std::vector<std::vector<char>> masks(shards.size(), std::vector<char>(n, 0));
    for (std::size_t p = 0; p < shards.size(); ++p)
        for (NodeId i : shards[p]) masks[p][i] = 1;

    std::vector<double> beta(dim, 0.0), total(dim), gp(dim), P, mu;
    DevCtx ctx{config.deviance, 1.0};
    for (std::size_t round = 0; round < rounds; ++round) {
        build_probs(beta, t, n, K, P);
        std::fill(total.begin(), total.end(), 0.0);
        for (std::size_t p = 0; p < shards.size(); ++p) {
            build_mu(P, t, n, K, masks[p], mu);
            if (config.deviance.kind == DevianceKind::Huber)
                ctx.sigma = mad_sigma(y, mu, masks[p]);
            smooth_grad(y, t, masks[p], P, mu, ctx, gp);
            if (noisy) {
                double norm = 0.0;
                for (double g : gp) norm += g * g;
                norm = std::sqrt(norm);
                if (norm > clip_norm)
                    for (double& g : gp) g *= clip_norm / norm;
                Rng rng = make_rng(config.seed, 1000 + round * shards.size() + p);
                std::normal_distribution<double> noise(0.0, noise_sd);
                for (double& g : gp) g += noise(rng);
            }
            for (std::size_t idx = 0; idx < dim; ++idx) total[idx] += gp[idx];
        }
        for (std::size_t idx = 0; idx < dim; ++idx) beta[idx] -= step * total[idx];
        prox_vector(config.penalty, beta, step);
    }

    FprModel model;
    model.n = n;
    model.K = K;
    model.beta = std::move(beta);
    model.penalty = config.penalty;
    model.deviance = config.deviance;
    return model;
}

std::vector<double> predict_links(const FprModel& model, const TraitPartition& t,
                                  const std::vector<std::pair<NodeId, NodeId>>& pairs) {
    std::vector<double> out(pairs.size());
    for (std::size_t idx = 0; idx < pairs.size(); ++idx)
        out[idx] = sigmoid(linear_predictor(model, t, pairs[idx].first, pairs[idx].second));
    return out;
}

}  // namespace ardnet::fpr
