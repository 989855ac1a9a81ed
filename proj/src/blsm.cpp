#include "ardnet/blsm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "blsm_internal.hpp"

namespace ardnet::blsm {

namespace detail {

std::vector<double> build_rates(const BlsmParams& params, const TraitPartition& t, LinkKind link) {
    const std::size_t n = params.n;
    const std::size_t K = t.num_traits();
    std::vector<double> lam(n * K, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = lam.data() + i * K;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto& mem = t.memberships(static_cast<NodeId>(j));
            if (mem.empty()) continue;
            const double eta = params.v[i] + params.v[j] +
                               params.zeta * dot_d(params.z_row(i), params.z_row(j), params.d);
            const double p = link_value(eta, link);
            for (std::size_t k : mem) row[k] += p;
        }
    }
    return lam;
}

std::vector<double> build_link_matrix(const BlsmParams& params, LinkKind link) {
    const std::size_t n = params.n;
    std::vector<double> P(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double eta = params.v[i] + params.v[j] +
                               params.zeta * dot_d(params.z_row(i), params.z_row(j), params.d);
            const double p = link_value(eta, link);
            P[i * n + j] = p;
            P[j * n + i] = p;
        }
    }
    return P;
}

double log_normal_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return -0.5 * std::log(2.0 * M_PI) - std::log(sigma) - 0.5 * z * z;
}

double log_half_cauchy_pdf(double x, double scale) {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    const double r = x / scale;
    return std::log(2.0 / (M_PI * scale)) - std::log1p(r * r);
}

double log_bessel_i(double nu, double x) {
    if (x <= 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (x < 500.0) {
        const double val = std::cyl_bessel_i(nu, x);
        if (val > 0.0 && std::isfinite(val)) return std::log(val);
    }
    // uniform asymptotic for large argument
    const double mu4 = 4.0 * nu * nu;
    return x - 0.5 * std::log(2.0 * M_PI * x) + std::log1p(-(mu4 - 1.0) / (8.0 * x));
}

static double log_sphere_area(std::size_t d) {
    return std::log(2.0) + 0.5 * double(d) * std::log(M_PI) - std::lgamma(0.5 * double(d));
}

double vmf_log_c(std::size_t d, double kappa) {
    if (kappa < 1e-8) return -log_sphere_area(d);
    const double nu = 0.5 * double(d) - 1.0;
    return nu * std::log(kappa) - 0.5 * double(d) * std::log(2.0 * M_PI) -
           log_bessel_i(nu, kappa);
}

double vmf_mean_resultant(std::size_t d, double kappa) {
    if (kappa < 1e-8) return kappa / double(d);  // A ~ kappa/d near 0
    if (d == 3) return 1.0 / std::tanh(kappa) - 1.0 / kappa;
    const double half = 0.5 * double(d);
    return std::exp(log_bessel_i(half, kappa) - log_bessel_i(half - 1.0, kappa));
}

double vmf_mean_resultant_deriv(std::size_t d, double kappa) {
    if (kappa < 1e-8) return 1.0 / double(d);
    const double a = vmf_mean_resultant(d, kappa);
    return 1.0 - a * a - (double(d) - 1.0) * a / kappa;
}

double vmf_entropy(std::size_t d, double kappa) {
    return -vmf_log_c(d, kappa) - kappa * vmf_mean_resultant(d, kappa);
}

double vmf_sample_cos(std::size_t d, double kappa, Rng& rng) {
    if (kappa < 1e-8) {
        // w density proportional to (1-w^2)^{(d-3)/2}
        if (d == 3) return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
        kappa = 1e-8;
    }
    const double dm1 = double(d) - 1.0;
    const double b = dm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1));
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);
    std::gamma_distribution<double> gamma_half(0.5 * dm1, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int tries = 0; tries < 10000; ++tries) {
        const double g1 = gamma_half(rng);
        const double g2 = gamma_half(rng);
        const double zb = g1 / (g1 + g2);
        const double w = (1.0 - (1.0 + b) * zb) / (1.0 - (1.0 - b) * zb);
        const double u = unif(rng);
        if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) return w;
    }
    return x0;  // unreachable in practice
}

void sample_sphere(double* out, std::size_t d, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            out[c] = normal(rng);
            norm2 += out[c] * out[c];
        }
    } while (norm2 < 1e-12);
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t c = 0; c < d; ++c) out[c] *= inv;
}

}  // namespace detail

using namespace detail;

static void check_params(const BlsmParams& params) {
    if (params.n == 0 || params.d == 0) throw ParameterError("empty latent state");
    if (params.v.size() != params.n || params.z.size() != params.n * params.d)
        throw ParameterError("latent state dimensions inconsistent");
}

static void check_data(const BlsmParams& params, const ArdMatrix& y, const TraitPartition& t) {
    check_params(params);
    if (y.n != params.n || t.n() != params.n) throw DataError("ARD/trait node count mismatch");
    if (y.K != t.num_traits()) throw DataError("ARD/trait group count mismatch");
    for (std::int64_t c : y.counts)
        if (c < 0) throw DataError("negative ARD count");
}

static void check_spec(const LikelihoodSpec& spec) {
    if (spec.family == CountFamily::NegativeBinomial && spec.dispersion_r <= 0.0)
        throw ParameterError("negative-binomial dispersion must be positive");
}

double link_prob(const BlsmParams& params, NodeId i, NodeId j, LinkKind link) {
    check_params(params);
    if (i >= params.n || j >= params.n || i == j) throw ParameterError("bad node pair");
    const double eta = params.v[i] + params.v[j] +
                       params.zeta * dot_d(params.z_row(i), params.z_row(j), params.d);
    return link_value(eta, link);
}

double ard_rate(const BlsmParams& params, const TraitPartition& t, NodeId i, std::size_t k,
                const LikelihoodSpec& spec) {
    check_params(params);
    check_spec(spec);
    if (t.n() != params.n) throw DataError("trait partition node count mismatch");
    if (i >= params.n || k >= t.num_traits()) throw ParameterError("bad (node, trait) index");
    double lam = 0.0;
    for (NodeId j : t.group(k)) {
        if (j == i) continue;
        lam += link_prob(params, i, j, spec.link);
    }
    return lam;
}

double log_likelihood(const BlsmParams& params, const ArdMatrix& y, const TraitPartition& t,
                      const LikelihoodSpec& spec) {
    check_data(params, y, t);
    check_spec(spec);
    const auto lam = build_rates(params, t, spec.link);
    const std::size_t K = y.K;
    double ll = 0.0;
    for (std::size_t i = 0; i < y.n; ++i)
        for (std::size_t k = 0; k < K; ++k)
            ll += cell_logpmf(double(y.at(i, k)), lam[i * K + k], spec);
    return ll;
}

namespace detail {

double loglik_and_gradient(const BlsmParams& params, const ArdMatrix& y, const TraitPartition& t,
                           const LikelihoodSpec& spec, LoglikGradient& g) {
    const std::size_t n = params.n;
    const std::size_t d = params.d;
    const std::size_t K = y.K;
    const auto lam = build_rates(params, t, spec.link);

    // r[i*K+k] = d logpmf / d lambda at cell (i, k)
    double ll = 0.0;
    std::vector<double> r(n * K);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            ll += cell_logpmf(double(y.at(i, k)), lam[i * K + k], spec);
            r[i * K + k] = cell_dlogpmf(double(y.at(i, k)), lam[i * K + k], spec);
        }

    g.dzeta = 0.0;
    g.dv.assign(n, 0.0);
    g.dz.assign(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* zi = params.z_row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* zj = params.z_row(j);
            double s = 0.0;
            for (std::size_t k : t.memberships(static_cast<NodeId>(j))) s += r[i * K + k];
            for (std::size_t k : t.memberships(static_cast<NodeId>(i))) s += r[j * K + k];
            if (s == 0.0) continue;
            const double dot = dot_d(zi, zj, d);
            const double eta = params.v[i] + params.v[j] + params.zeta * dot;
            const double w = s * link_deriv(eta, spec.link);
            g.dv[i] += w;
            g.dv[j] += w;
            g.dzeta += w * dot;
            const double wz = w * params.zeta;
            for (std::size_t c = 0; c < d; ++c) {
                g.dz[i * d + c] += wz * zj[c];
                g.dz[j * d + c] += wz * zi[c];
            }
        }
    }
    return ll;
}

}  // namespace detail

LoglikGradient log_likelihood_gradient(const BlsmParams& params, const ArdMatrix& y,
                                       const TraitPartition& t, const LikelihoodSpec& spec) {
    check_data(params, y, t);
    check_spec(spec);
    LoglikGradient g;
    loglik_and_gradient(params, y, t, spec, g);
    return g;
}

double log_prior(const BlsmParams& params, const BlsmPriors& priors) {
    check_params(params);
    if (priors.sigma_v <= 0.0 || priors.zeta_scale <= 0.0)
        throw ParameterError("prior scales must be positive");
    double lp = log_half_cauchy_pdf(params.zeta, priors.zeta_scale);
    for (double vi : params.v) lp += log_normal_pdf(vi, priors.mu_v, priors.sigma_v);
    if (priors.z_prior.kind == ZPrior::Kind::UniformSphere) {
        lp -= double(params.n) * log_sphere_area(params.d);
    } else {
        const auto& zp = priors.z_prior;
        if (zp.mean.size() != params.d) throw ParameterError("vMF prior mean dimension mismatch");
        if (zp.concentration <= 0.0) throw ParameterError("vMF concentration must be positive");
        const double logc = vmf_log_c(params.d, zp.concentration);
        for (std::size_t i = 0; i < params.n; ++i)
            lp += logc + zp.concentration * dot_d(zp.mean.data(), params.z_row(i), params.d);
    }
    return lp;
}

BlsmParams initialize(const ArdMatrix& y, const TraitPartition& t, std::size_t p,
                      std::uint64_t seed, bool* used_fallback) {
    if (y.n != t.n() || y.K != t.num_traits()) throw DataError("ARD/trait shape mismatch");
    if (p == 0) throw ParameterError("latent dimension p must be >= 1");
    const std::size_t n = y.n;
    const std::size_t K = y.K;
    const std::size_t d = p + 1;
    BlsmParams params(n, d);
    if (used_fallback) *used_fallback = false;

    bool any = false;
    for (std::size_t i = 0; i < n * K && !any; ++i) any = y.counts[i] != 0;
    Rng rng = make_rng(seed, 101);
    if (!any) {
        if (used_fallback) *used_fallback = true;
        for (std::size_t i = 0; i < n; ++i) sample_sphere(params.z_row(i), d, rng);
        params.zeta = 1.0;
        return params;
    }

    // Row-normalized ARD profiles -> pairwise cosine distances -> classical MDS.
    Eigen::MatrixXd U(n, K);
    std::vector<double> row_norm(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double tot = 0.0;
        for (std::size_t k = 0; k < K; ++k) tot += double(y.at(i, k));
        const double denom = std::max(tot, 1.0);
        double sq = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            U(i, k) = double(y.at(i, k)) / denom;
            sq += U(i, k) * U(i, k);
        }
        row_norm[i] = std::sqrt(sq);
    }
    Eigen::MatrixXd D2(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        D2(i, i) = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double cosine = 0.0;
            if (row_norm[i] > 0.0 && row_norm[j] > 0.0)
                cosine = U.row(i).dot(U.row(j)) / (row_norm[i] * row_norm[j]);
            const double dist = 1.0 - cosine;
            D2(i, j) = dist * dist;
            D2(j, i) = D2(i, j);
        }
    }
    Eigen::VectorXd rmean = D2.rowwise().mean();
    const double gmean = rmean.mean();
    Eigen::MatrixXd B(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            B(i, j) = -0.5 * (D2(i, j) - rmean[i] - rmean[j] + gmean);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    // eigenvalues ascending; take the top d
    for (std::size_t i = 0; i < n; ++i) {
        double* zi = params.z_row(i);
        double norm2 = 0.0;
        for (std::size_t c = 0; c < d && c < n; ++c) {
            const auto col = n - 1 - c;
            const double ev = std::max(es.eigenvalues()[col], 0.0);
            zi[c] = std::sqrt(ev) * es.eigenvectors()(i, col);
            norm2 += zi[c] * zi[c];
        }
        if (norm2 < 1e-20)
            sample_sphere(zi, d, rng);
        else
            normalize(zi, d);
    }

    for (std::size_t i = 0; i < n; ++i) {
        double ysum = 0.0, csum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            ysum += double(y.at(i, k));
            csum += double(t.group_size_excluding(k, static_cast<NodeId>(i)));
        }
        double phat = csum > 0.0 ? ysum / csum : 0.5;
        phat = std::clamp(phat, 1e-4, 1.0 - 1e-4);
        params.v[i] = 0.5 * logit(phat);
    }
    params.zeta = 1.0;
    return params;
}

std::vector<std::pair<NodeId, NodeId>> all_pairs(std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(num_pairs(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            pairs.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    return pairs;
}

std::vector<double> predict_links(const BlsmParams& params,
                                  const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                  LinkKind link) {
    std::vector<double> out(pairs.size());
    for (std::size_t idx = 0; idx < pairs.size(); ++idx)
        out[idx] = link_prob(params, pairs[idx].first, pairs[idx].second, link);
    return out;
}

std::vector<double> predict_links(const PosteriorSamples& samples,
                                  const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                  LinkKind link) {
    if (samples.draws.empty()) throw ParameterError("no posterior draws");
    std::vector<double> out(pairs.size(), 0.0);
    for (const auto& draw : samples.draws) {
        for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
            const auto [i, j] = pairs[idx];
            const double eta = draw.v[i] + draw.v[j] +
                               draw.zeta * dot_d(draw.z_row(i), draw.z_row(j), draw.d);
            out[idx] += link_value(eta, link);
        }
    }
    for (double& p : out) p /= double(samples.draws.size());
    return out;
}

Graph simulate_graph(const BlsmParams& params, std::uint64_t seed, LinkKind link) {
    check_params(params);
    Rng rng = make_rng(seed, 7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Graph g(params.n);
    for (std::size_t i = 0; i < params.n; ++i)
        for (std::size_t j = i + 1; j < params.n; ++j) {
            const double p =
                link_prob(params, static_cast<NodeId>(i), static_cast<NodeId>(j), link);
            if (unif(rng) < p) g.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(j));
        }
    g.finalize();
    return g;
}

double effective_sample_size(const std::vector<double>& chain) {
    const std::size_t N = chain.size();
    if (N < 4) throw ParameterError("chain too short for ESS");
    const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / double(N);
    auto gamma = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < N; ++i)
            s += (chain[i] - mean) * (chain[i + lag] - mean);
        return s / double(N);
    };
    const double g0 = gamma(0);
    if (g0 <= 0.0) return 1.0;  // constant chain
    // initial-positive-sequence truncation over paired autocorrelations
    double tau = -1.0;
    for (std::size_t m = 0; 2 * m + 1 < N; ++m) {
        const double pair_sum = (gamma(2 * m) + gamma(2 * m + 1)) / g0;
        if (pair_sum <= 0.0) break;
        tau += 2.0 * pair_sum;
    }
    tau = std::max(tau, 1e-10);
    return std::max(1.0, double(N) / tau);
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
    if (chains.size() < 2)
        throw ParameterError("potential scale reduction needs at least two chains");
    const std::size_t M = chains.size();
    const std::size_t L = chains[0].size();
    if (L < 2) throw ParameterError("chains too short");
    for (const auto& c : chains)
        if (c.size() != L) throw ParameterError("chains must have equal length");

    std::vector<double> means(M);
    double grand = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        means[m] = std::accumulate(chains[m].begin(), chains[m].end(), 0.0) / double(L);
        grand += means[m];
    }
    grand /= double(M);
    double B = 0.0;
    for (double mu : means) B += (mu - grand) * (mu - grand);
    B *= double(L) / double(M - 1);
    double W = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        double s2 = 0.0;
        for (double x : chains[m]) s2 += (x - means[m]) * (x - means[m]);
        W += s2 / double(L - 1);
    }
    W /= double(M);
    if (W == 0.0)
        return B == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    // ratio of pooled to within variance, without the (L-1)/L shrink so that
    // identical chains give exactly 1
    return std::sqrt(1.0 + B / (double(L) * W));
}

Diagnostics diagnostics(const std::vector<PosteriorSamples>& chains) {
    if (chains.empty()) throw ParameterError("no chains");
    const std::size_t n = chains[0].n;
    const std::size_t L = chains[0].draws.size();
    if (L < 4) throw ParameterError("too few stored draws for diagnostics");
    for (const auto& c : chains)
        if (c.n != n || c.draws.size() != L)
            throw ParameterError("chains disagree in shape or length");

    Diagnostics out;
    auto scalar_chain = [&](const PosteriorSamples& s, std::size_t which) {
        std::vector<double> x(L);
        for (std::size_t t = 0; t < L; ++t) {
            if (which < n)
                x[t] = s.draws[t].v[which];
            else if (which == n)
                x[t] = s.draws[t].zeta;
            else
                x[t] = s.log_posterior[t];
        }
        return x;
    };
    for (std::size_t which = 0; which < n + 2; ++which) {
        if (which < n)
            out.names.push_back("v_" + std::to_string(which));
        else if (which == n)
            out.names.emplace_back("zeta");
        else
            out.names.emplace_back("log_posterior");
        double ess_total = 0.0;
        std::vector<std::vector<double>> per_chain;
        for (const auto& c : chains) {
            auto x = scalar_chain(c, which);
            ess_total += effective_sample_size(x);
            per_chain.push_back(std::move(x));
        }
        out.ess.push_back(ess_total);
        if (chains.size() >= 2) out.gelman_rubin.push_back(gelman_rubin(per_chain));
    }
    return out;
}

}  // namespace ardnet::blsm
