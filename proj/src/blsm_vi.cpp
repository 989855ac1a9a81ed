#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ardnet/blsm.hpp"
#include "blsm_internal.hpp"

namespace ardnet::blsm {

using namespace detail;

namespace {

// Adam in ascent form with bias correction.
struct Adam {
    std::vector<double> m, v;
    double b1 = 0.9, b2 = 0.999, eps = 1e-8;

    explicit Adam(std::size_t size) : m(size, 0.0), v(size, 0.0) {}

    void step(std::vector<double>& x, const std::vector<double>& g, double lr, std::size_t t) {
        const double c1 = 1.0 - std::pow(b1, double(t));
        const double c2 = 1.0 - std::pow(b2, double(t));
        for (std::size_t i = 0; i < x.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            x[i] += lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

}  // namespace

ViResult vi_fit(const ArdMatrix& y, const TraitPartition& t, const BlsmPriors& priors,
                const ViConfig& cfg, const LikelihoodSpec& spec) {
    if (cfg.steps == 0) throw ParameterError("steps must be >= 1");
    if (cfg.mc_samples == 0) throw ParameterError("mc_samples must be >= 1");
    if (cfg.learning_rate <= 0.0) throw ParameterError("learning rate must be positive");
    if (cfg.kappa_init <= 0.0) throw ParameterError("kappa_init must be positive");
    if (spec.family == CountFamily::NegativeBinomial && spec.dispersion_r <= 0.0)
        throw ParameterError("negative-binomial dispersion must be positive");

    BlsmParams init = initialize(y, t, cfg.latent_p, cfg.seed);
    log_prior(init, priors);  // validates prior configuration against d
    const std::size_t n = init.n;
    const std::size_t d = init.d;

    // Variational family: q(v_i) = N(m_i, e^{2 ls_i}), q(z_i) = vMF(mu_i, e^{lk_i}),
    // q(zeta) = LogNormal(a, e^{2 lb}). All expectations by reparameterization;
    // the kappa path uses the mean-cosine derivative dw/dkappa ~ A'_d(kappa).
    std::vector<double> m = init.v;
    std::vector<double> ls(n, std::log(0.3));
    std::vector<double> mu = init.z;
    std::vector<double> lk(n, std::log(cfg.kappa_init));
    double va = 0.0;                 // a
    double vlb = std::log(0.2);      // log b

    Adam opt_m(n), opt_ls(n), opt_mu(n * d), opt_lk(n), opt_ab(2);

    Rng rng = make_rng(cfg.seed, 2);
    std::normal_distribution<double> normal(0.0, 1.0);

    const double uniform_log_density = vmf_log_c(d, 0.0);  // -log(sphere area)
    const bool vmf_prior = priors.z_prior.kind == ZPrior::Kind::VonMisesFisher;
    constexpr double kMinLogKappa = -4.6;  // ~0.01
    constexpr double kMaxLogKappa = 6.2;   // ~500
    constexpr double kHalfLog2PiE = 0.5 * (1.8378770664093453 + 1.0);

    auto point_estimate = [&]() {
        BlsmParams p(n, d);
        p.v = m;
        p.z = mu;
        for (std::size_t i = 0; i < n; ++i) normalize(p.z_row(i), d);
        const double b = std::exp(vlb);
        p.zeta = std::exp(va + 0.5 * b * b);
        return p;
    };

    ViResult result;
    result.elbo_trace.reserve(cfg.steps);
    BlsmParams sample(n, d);
    BlsmParams last_good = point_estimate();
    LoglikGradient g;
    std::vector<double> gm(n), gls(n), gmu(n * d), glk(n), gab(2);
    std::vector<double> wz(n), cz(n), tnorm(n), xi(n * d), uvec(n * d), eps_v(n);

    for (std::size_t step_idx = 1; step_idx <= cfg.steps; ++step_idx) {
        std::fill(gm.begin(), gm.end(), 0.0);
        std::fill(gls.begin(), gls.end(), 0.0);
        std::fill(gmu.begin(), gmu.end(), 0.0);
        std::fill(glk.begin(), glk.end(), 0.0);
        std::fill(gab.begin(), gab.end(), 0.0);
        double elbo = 0.0;
        const double inv_s = 1.0 / double(cfg.mc_samples);
        const double b = std::exp(vlb);

        for (std::size_t s = 0; s < cfg.mc_samples; ++s) {
            // --- reparameterized draws ---
            for (std::size_t i = 0; i < n; ++i) {
                eps_v[i] = normal(rng);
                sample.v[i] = m[i] + std::exp(ls[i]) * eps_v[i];
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double kappa = std::exp(lk[i]);
                const double* mui = mu.data() + i * d;
                const double w = vmf_sample_cos(d, kappa, rng);
                double* xii = xi.data() + i * d;
                double* ui = uvec.data() + i * d;
                double tnorm2 = 0.0;
                do {
                    double dotmx = 0.0;
                    for (std::size_t c = 0; c < d; ++c) {
                        xii[c] = normal(rng);
                        dotmx += xii[c] * mui[c];
                    }
                    tnorm2 = 0.0;
                    for (std::size_t c = 0; c < d; ++c) {
                        ui[c] = xii[c] - dotmx * mui[c];
                        tnorm2 += ui[c] * ui[c];
                    }
                } while (tnorm2 < 1e-24);
                tnorm[i] = std::sqrt(tnorm2);
                for (std::size_t c = 0; c < d; ++c) ui[c] /= tnorm[i];
                wz[i] = w;
                cz[i] = std::sqrt(std::max(0.0, 1.0 - w * w));
                double* zi = sample.z_row(i);
                for (std::size_t c = 0; c < d; ++c) zi[c] = w * mui[c] + cz[i] * ui[c];
            }
            const double eps_zeta = normal(rng);
            sample.zeta = std::exp(va + b * eps_zeta);

            // --- joint log density and its gradient at the sample ---
            double joint = loglik_and_gradient(sample, y, t, spec, g);
            for (std::size_t i = 0; i < n; ++i) {
                joint += log_normal_pdf(sample.v[i], priors.mu_v, priors.sigma_v);
                g.dv[i] -= (sample.v[i] - priors.mu_v) / (priors.sigma_v * priors.sigma_v);
            }
            if (vmf_prior) {
                const auto& zp = priors.z_prior;
                const double logc = vmf_log_c(d, zp.concentration);
                for (std::size_t i = 0; i < n; ++i) {
                    joint += logc + zp.concentration * dot_d(zp.mean.data(), sample.z_row(i), d);
                    for (std::size_t c = 0; c < d; ++c)
                        g.dz[i * d + c] += zp.concentration * zp.mean[c];
                }
            } else {
                joint += double(n) * uniform_log_density;
            }
            joint += log_half_cauchy_pdf(sample.zeta, priors.zeta_scale);
            const double djoint_zeta =
                g.dzeta - 2.0 * sample.zeta /
                              (priors.zeta_scale * priors.zeta_scale + sample.zeta * sample.zeta);
            elbo += joint * inv_s;

            // --- chain rule into the variational parameters ---
            for (std::size_t i = 0; i < n; ++i) {
                gm[i] += g.dv[i] * inv_s;
                gls[i] += g.dv[i] * std::exp(ls[i]) * eps_v[i] * inv_s;
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double* gz = g.dz.data() + i * d;
                const double* mui = mu.data() + i * d;
                const double* xii = xi.data() + i * d;
                const double* ui = uvec.data() + i * d;
                const double kappa = std::exp(lk[i]);
                const double w = wz[i], cw = cz[i], tn = tnorm[i];

                // z = w mu + cw * u, u = (I - mu mu^T) xi / |(I - mu mu^T) xi|;
                // pull gz back: gmu = w gz + (cw/tn) * (-(mu.q) xi - (mu.xi) q),
                // q = (I - u u^T) gz, then keep the tangent component at mu.
                double gz_dot_u = 0.0, mu_dot_xi = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    gz_dot_u += gz[c] * ui[c];
                    mu_dot_xi += mui[c] * xii[c];
                }
                double mu_dot_q = 0.0;
                for (std::size_t c = 0; c < d; ++c)
                    mu_dot_q += mui[c] * (gz[c] - gz_dot_u * ui[c]);
                double acc_dot_mu = 0.0;
                double* gmui = gmu.data() + i * d;
                for (std::size_t c = 0; c < d; ++c) {
                    const double q = gz[c] - gz_dot_u * ui[c];
                    const double raw = w * gz[c] + (cw / tn) * (-mu_dot_q * xii[c] - mu_dot_xi * q);
                    acc_dot_mu += raw * mui[c];
                    gmui[c] += raw * inv_s;  // tangent projection applied below
                }
                for (std::size_t c = 0; c < d; ++c) gmui[c] -= acc_dot_mu * mui[c] * inv_s;

                // kappa path: dz/dkappa ~ A'(kappa) (mu - (w/cw) u)
                const double aprime = vmf_mean_resultant_deriv(d, kappa);
                if (cw > 1e-6) {
                    double gdot = 0.0;
                    for (std::size_t c = 0; c < d; ++c)
                        gdot += gz[c] * (mui[c] - (w / cw) * ui[c]);
                    glk[i] += aprime * gdot * kappa * inv_s;
                }
            }
            gab[0] += djoint_zeta * sample.zeta * inv_s;
            gab[1] += djoint_zeta * sample.zeta * eps_zeta * b * inv_s;
        }

        // --- exact entropy terms ---
        for (std::size_t i = 0; i < n; ++i) {
            elbo += kHalfLog2PiE + ls[i];
            gls[i] += 1.0;
            const double kappa = std::exp(lk[i]);
            elbo += vmf_entropy(d, kappa);
            glk[i] += -kappa * vmf_mean_resultant_deriv(d, kappa) * kappa;
        }
        elbo += kHalfLog2PiE + vlb + va;
        gab[0] += 1.0;
        gab[1] += 1.0;

        if (!std::isfinite(elbo))
            throw ViDivergenceError("variational objective became non-finite at step " +
                                        std::to_string(step_idx),
                                    last_good);
        result.elbo_trace.push_back(elbo);
        last_good = point_estimate();

        const double lr = cfg.learning_rate / (1.0 + 4.0 * double(step_idx) / double(cfg.steps));
        opt_m.step(m, gm, lr, step_idx);
        opt_ls.step(ls, gls, lr, step_idx);
        opt_mu.step(mu, gmu, lr, step_idx);
        opt_lk.step(lk, glk, lr, step_idx);
        std::vector<double> ab = {va, vlb};
        opt_ab.step(ab, gab, lr, step_idx);
        va = std::clamp(ab[0], -10.0, 10.0);
        vlb = std::clamp(ab[1], -6.0, 2.0);
        for (std::size_t i = 0; i < n; ++i) {
            ls[i] = std::clamp(ls[i], -6.0, 3.0);
            lk[i] = std::clamp(lk[i], kMinLogKappa, kMaxLogKappa);
            normalize(mu.data() + i * d, d);
        }
    }

    result.point = point_estimate();
    return result;
}

}  // namespace ardnet::blsm
