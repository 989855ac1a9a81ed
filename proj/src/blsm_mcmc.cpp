#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ardnet/blsm.hpp"
#include "blsm_internal.hpp"

namespace ardnet::blsm {

using namespace detail;

namespace {

struct Sampler {
    const ArdMatrix& y;
    const TraitPartition& t;
    const BlsmPriors& priors;
    const LikelihoodSpec& spec;
    std::size_t n, d, K;

    BlsmParams params;
    std::vector<double> P;    // n x n link probabilities
    std::vector<double> lam;  // n x K rates, kept incrementally
    Rng rng;

    std::vector<double> pnew;     // scratch: candidate link row
    std::vector<double> lam_new;  // scratch: candidate rate row
    std::vector<double> znew;     // scratch: candidate position

    Sampler(const ArdMatrix& y_, const TraitPartition& t_, const BlsmPriors& pr,
            const LikelihoodSpec& sp, BlsmParams init, std::uint64_t seed)
        : y(y_),
          t(t_),
          priors(pr),
          spec(sp),
          n(init.n),
          d(init.d),
          K(y_.K),
          params(std::move(init)),
          rng(make_rng(seed, 1)),
          pnew(n),
          lam_new(K),
          znew(d) {
        rebuild();
    }

    void rebuild() {
        P = build_link_matrix(params, spec.link);
        lam.assign(n * K, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                for (std::size_t k : t.memberships(static_cast<NodeId>(j)))
                    lam[i * K + k] += P[i * n + j];
            }
    }

    double full_loglik() const {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < K; ++k)
                ll += cell_logpmf(double(y.at(i, k)), lam[i * K + k], spec);
        return ll;
    }

    // Log-likelihood change if node i's link row were replaced by pnew;
    // fills lam_new with the replacement rate row for node i.
    double row_delta(std::size_t i) {
        std::fill(lam_new.begin(), lam_new.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            for (std::size_t k : t.memberships(static_cast<NodeId>(j))) lam_new[k] += pnew[j];
        }
        double delta = 0.0;
        for (std::size_t k = 0; k < K; ++k)
            delta += cell_delta(double(y.at(i, k)), lam[i * K + k], lam_new[k], spec);
        const auto& mem_i = t.memberships(static_cast<NodeId>(i));
        if (!mem_i.empty()) {
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double dj = pnew[j] - P[i * n + j];
                if (dj == 0.0) continue;
                for (std::size_t k : mem_i) {
                    const double lj = lam[j * K + k];
                    delta += cell_delta(double(y.at(j, k)), lj, lj + dj, spec);
                }
            }
        }
        return delta;
    }

    void commit_row(std::size_t i) {
        const auto& mem_i = t.memberships(static_cast<NodeId>(i));
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dj = pnew[j] - P[i * n + j];
            if (dj != 0.0 && !mem_i.empty())
                for (std::size_t k : mem_i) lam[j * K + k] += dj;
            P[i * n + j] = pnew[j];
            P[j * n + i] = pnew[j];
        }
        for (std::size_t k = 0; k < K; ++k) lam[i * K + k] = lam_new[k];
    }

    bool move_z(std::size_t i, double step) {
        std::normal_distribution<double> normal(0.0, 1.0);
        const double* zi = params.z_row(i);
        double dotxz = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            znew[c] = normal(rng);
            dotxz += znew[c] * zi[c];
        }
        double norm2 = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            znew[c] -= dotxz * zi[c];  // tangent component
            norm2 += znew[c] * znew[c];
        }
        if (norm2 < 1e-24) return false;
        for (std::size_t c = 0; c < d; ++c) znew[c] = zi[c] + step * znew[c];
        normalize(znew.data(), d);

        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                pnew[j] = 0.0;
                continue;
            }
            const double eta = params.v[i] + params.v[j] +
                               params.zeta * dot_d(znew.data(), params.z_row(j), d);
            pnew[j] = link_value(eta, spec.link);
        }
        double log_alpha = row_delta(i);
        if (priors.z_prior.kind == ZPrior::Kind::VonMisesFisher) {
            const auto& zp = priors.z_prior;
            double dmu = 0.0;
            for (std::size_t c = 0; c < d; ++c) dmu += zp.mean[c] * (znew[c] - zi[c]);
            log_alpha += zp.concentration * dmu;
        }
        if (std::log(std::uniform_real_distribution<double>(0.0, 1.0)(rng)) < log_alpha) {
            commit_row(i);
            std::copy(znew.begin(), znew.end(), params.z_row(i));
            return true;
        }
        return false;
    }

    bool move_v(std::size_t i, double step) {
        std::normal_distribution<double> normal(0.0, 1.0);
        const double vi_new = params.v[i] + step * normal(rng);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                pnew[j] = 0.0;
                continue;
            }
            const double eta = vi_new + params.v[j] +
                               params.zeta * dot_d(params.z_row(i), params.z_row(j), d);
            pnew[j] = link_value(eta, spec.link);
        }
        double log_alpha = row_delta(i);
        log_alpha += log_normal_pdf(vi_new, priors.mu_v, priors.sigma_v) -
                     log_normal_pdf(params.v[i], priors.mu_v, priors.sigma_v);
        if (std::log(std::uniform_real_distribution<double>(0.0, 1.0)(rng)) < log_alpha) {
            commit_row(i);
            params.v[i] = vi_new;
            return true;
        }
        return false;
    }

    bool move_zeta(double step, std::vector<double>& P_cand, std::vector<double>& lam_cand) {
        std::normal_distribution<double> normal(0.0, 1.0);
        const double zeta_new = params.zeta * std::exp(step * normal(rng));
        P_cand.assign(n * n, 0.0);
        lam_cand.assign(n * K, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double eta = params.v[i] + params.v[j] +
                                   zeta_new * dot_d(params.z_row(i), params.z_row(j), d);
                const double p = link_value(eta, spec.link);
                P_cand[i * n + j] = p;
                P_cand[j * n + i] = p;
            }
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                for (std::size_t k : t.memberships(static_cast<NodeId>(j)))
                    lam_cand[i * K + k] += P_cand[i * n + j];
            }
            for (std::size_t k = 0; k < K; ++k)
                delta +=
                    cell_delta(double(y.at(i, k)), lam[i * K + k], lam_cand[i * K + k], spec);
        }
        double log_alpha = delta + log_half_cauchy_pdf(zeta_new, priors.zeta_scale) -
                           log_half_cauchy_pdf(params.zeta, priors.zeta_scale) +
                           std::log(zeta_new / params.zeta);  // log-scale walk Jacobian
        if (std::log(std::uniform_real_distribution<double>(0.0, 1.0)(rng)) < log_alpha) {
            params.zeta = zeta_new;
            P.swap(P_cand);
            lam.swap(lam_cand);
            return true;
        }
        return false;
    }
};

}  // namespace

PosteriorSamples mcmc_fit(const ArdMatrix& y, const TraitPartition& t, const BlsmPriors& priors,
                          const McmcConfig& cfg, const LikelihoodSpec& spec) {
    if (cfg.iterations == 0 || cfg.burn_in >= cfg.iterations)
        throw ParameterError("iterations must exceed burn-in");
    if (cfg.thin == 0) throw ParameterError("thin must be >= 1");
    if (cfg.step_v <= 0.0 || cfg.step_z <= 0.0 || cfg.step_zeta <= 0.0)
        throw ParameterError("proposal step sizes must be positive");
    if (spec.family == CountFamily::NegativeBinomial && spec.dispersion_r <= 0.0)
        throw ParameterError("negative-binomial dispersion must be positive");

    BlsmParams init = initialize(y, t, cfg.latent_p, cfg.seed);
    log_prior(init, priors);  // validates prior configuration against d
    Sampler s(y, t, priors, spec, std::move(init), cfg.seed);

    double step_z = cfg.step_z, step_v = cfg.step_v, step_zeta = cfg.step_zeta;
    constexpr std::size_t kAdaptWindow = 50;
    constexpr double kTargetRate = 0.3;
    std::size_t win_prop_z = 0, win_acc_z = 0, win_prop_v = 0, win_acc_v = 0;
    std::size_t win_prop_zeta = 0, win_acc_zeta = 0;
    std::size_t prop_z = 0, acc_z = 0, prop_v = 0, acc_v = 0, prop_zeta = 0, acc_zeta = 0;

    PosteriorSamples out;
    out.n = s.n;
    out.d = s.d;
    std::vector<double> P_cand, lam_cand;

    for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
        const bool warm = iter < cfg.burn_in;
        for (std::size_t i = 0; i < s.n; ++i) {
            const bool ok = s.move_z(i, step_z);
            if (warm) {
                ++win_prop_z;
                win_acc_z += ok;
            } else {
                ++prop_z;
                acc_z += ok;
            }
        }
        for (std::size_t i = 0; i < s.n; ++i) {
            const bool ok = s.move_v(i, step_v);
            if (warm) {
                ++win_prop_v;
                win_acc_v += ok;
            } else {
                ++prop_v;
                acc_v += ok;
            }
        }
        {
            const bool ok = s.move_zeta(step_zeta, P_cand, lam_cand);
            if (warm) {
                ++win_prop_zeta;
                win_acc_zeta += ok;
            } else {
                ++prop_zeta;
                acc_zeta += ok;
            }
        }

        if (cfg.adapt && warm && (iter + 1) % kAdaptWindow == 0) {
            auto tune = [](double step, std::size_t acc, std::size_t prop) {
                if (prop == 0) return step;
                const double rate = double(acc) / double(prop);
                return std::clamp(step * std::exp(0.66 * (rate - kTargetRate)), 1e-3, 10.0);
            };
            step_z = tune(step_z, win_acc_z, win_prop_z);
            step_v = tune(step_v, win_acc_v, win_prop_v);
            step_zeta = tune(step_zeta, win_acc_zeta, win_prop_zeta);
            win_prop_z = win_acc_z = win_prop_v = win_acc_v = 0;
            win_prop_zeta = win_acc_zeta = 0;
        }

        if ((iter + 1) % 500 == 0) s.rebuild();  // shed accumulated FP drift

        if (!warm && (iter - cfg.burn_in) % cfg.thin == 0) {
            const double ll = s.full_loglik();
            out.draws.push_back(s.params);
            out.log_likelihood.push_back(ll);
            out.log_posterior.push_back(ll + log_prior(s.params, priors));
        }
    }

    out.accept_z = prop_z ? double(acc_z) / double(prop_z) : 0.0;
    out.accept_v = prop_v ? double(acc_v) / double(prop_v) : 0.0;
    out.accept_zeta = prop_zeta ? double(acc_zeta) / double(prop_zeta) : 0.0;
    return out;
}

}  // namespace ardnet::blsm
