#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ardnet/ard.hpp"
#include "ardnet/graph.hpp"
#include "ardnet/traits.hpp"

namespace ardnet::blsm {

// Latent state: per-node intercepts v, per-node unit positions z on the
// sphere in R^d (d = p+1), and the global scale zeta > 0.
struct BlsmParams {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> v;  // n
    std::vector<double> z;  // n x d, row-major, unit rows
    double zeta = 1.0;

    BlsmParams() = default;
    BlsmParams(std::size_t n_, std::size_t d_)
        : n(n_), d(d_), v(n_, 0.0), z(n_ * d_, 0.0), zeta(1.0) {}

    double* z_row(std::size_t i) { return z.data() + i * d; }
    const double* z_row(std::size_t i) const { return z.data() + i * d; }
};

enum class LinkKind { Logistic, Probit };
enum class CountFamily { Poisson, NegativeBinomial };

struct LikelihoodSpec {
    CountFamily family = CountFamily::Poisson;
    double dispersion_r = 1.0;  // negative-binomial only
    LinkKind link = LinkKind::Logistic;
};

struct ZPrior {
    enum class Kind { UniformSphere, VonMisesFisher };
    Kind kind = Kind::UniformSphere;
    std::vector<double> mean;      // vMF only, unit length d
    double concentration = 1.0;    // vMF only

    static ZPrior uniform() { return {}; }
    static ZPrior vmf(std::vector<double> mu, double kappa) {
        return {Kind::VonMisesFisher, std::move(mu), kappa};
    }
};

struct BlsmPriors {
    double mu_v = 0.0;
    double sigma_v = 1.0;
    double zeta_scale = 2.5;  // half-Cauchy
    ZPrior z_prior;
};

struct McmcConfig {
    std::size_t latent_p = 2;  // sphere dimension; ambient d = p + 1
    std::size_t iterations = 5000;
    std::size_t burn_in = 1000;
    std::size_t thin = 10;
    double step_v = 0.25;
    double step_z = 0.25;
    double step_zeta = 0.25;
    bool adapt = true;  // tune step sizes during burn-in toward ~0.3 acceptance
    std::uint64_t seed = 0;
};

struct PosteriorSamples {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<BlsmParams> draws;
    std::vector<double> log_likelihood;  // per stored draw
    std::vector<double> log_posterior;   // per stored draw
    double accept_z = 0.0;               // post-burn-in acceptance rates
    double accept_v = 0.0;
    double accept_zeta = 0.0;
};

struct ViConfig {
    std::size_t latent_p = 2;
    std::size_t steps = 1000;
    std::size_t mc_samples = 2;
    double learning_rate = 0.04;
    double kappa_init = 25.0;
    std::uint64_t seed = 0;
};

struct ViResult {
    BlsmParams point;  // variational means (z rows unit, zeta the q-mean)
    std::vector<double> elbo_trace;
};

// Thrown when the ELBO becomes non-finite; carries the last finite state.
struct ViDivergenceError : OptimizationError {
    BlsmParams last_valid;
    explicit ViDivergenceError(std::string msg, BlsmParams state)
        : OptimizationError(std::move(msg)), last_valid(std::move(state)) {}
};

struct LoglikGradient {
    std::vector<double> dv;  // n
    std::vector<double> dz;  // n x d (ambient; not tangent-projected)
    double dzeta = 0.0;
};

// sigma(v_i + v_j + zeta <z_i, z_j>); symmetric in (i, j).
double link_prob(const BlsmParams& params, NodeId i, NodeId j,
                 LinkKind link = LinkKind::Logistic);

// lambda_ik = sum over j in G_k, j != i of link_prob(i, j).
double ard_rate(const BlsmParams& params, const TraitPartition& t, NodeId i, std::size_t k,
                const LikelihoodSpec& spec = {});

// Sum over all (i,k) cells of the count log-pmf at lambda_ik (lambda floored
// at 1e-12 before logs).
double log_likelihood(const BlsmParams& params, const ArdMatrix& y, const TraitPartition& t,
                      const LikelihoodSpec& spec = {});

// Analytic gradient of log_likelihood in (v, z, zeta).
LoglikGradient log_likelihood_gradient(const BlsmParams& params, const ArdMatrix& y,
                                       const TraitPartition& t, const LikelihoodSpec& spec = {});

double log_prior(const BlsmParams& params, const BlsmPriors& priors);

// MDS-based initialization from row-normalized ARD profiles; v from a plug-in
// density estimate; zeta = 1. Falls back to a random spherical configuration
// when the ARD is all zero (used_fallback reports this).
BlsmParams initialize(const ArdMatrix& y, const TraitPartition& t, std::size_t p,
                      std::uint64_t seed, bool* used_fallback = nullptr);

// Metropolis-within-Gibbs over blocks {z_i}, {v_i}, zeta.
PosteriorSamples mcmc_fit(const ArdMatrix& y, const TraitPartition& t, const BlsmPriors& priors,
                          const McmcConfig& cfg, const LikelihoodSpec& spec = {});

// Mean-field variational fit: Gaussian q(v_i), von Mises-Fisher q(z_i),
// log-normal q(zeta); stochastic gradient ascent on a Monte Carlo ELBO.
ViResult vi_fit(const ArdMatrix& y, const TraitPartition& t, const BlsmPriors& priors,
                const ViConfig& cfg, const LikelihoodSpec& spec = {});

// Posterior-mean link probabilities over the requested pairs.
std::vector<double> predict_links(const PosteriorSamples& samples,
                                  const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                  LinkKind link = LinkKind::Logistic);
std::vector<double> predict_links(const BlsmParams& params,
                                  const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                  LinkKind link = LinkKind::Logistic);

// Draws a graph from the model's link probabilities.
Graph simulate_graph(const BlsmParams& params, std::uint64_t seed,
                     LinkKind link = LinkKind::Logistic);

// Effective sample size of one scalar chain (initial-positive-sequence
// truncation of the autocorrelation sum).
double effective_sample_size(const std::vector<double>& chain);

// Potential scale reduction across >= 2 chains of equal length. Identical
// chains give exactly 1.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

struct Diagnostics {
    std::vector<std::string> names;  // v_i..., zeta, log_posterior
    std::vector<double> ess;         // summed across chains
    std::vector<double> gelman_rubin;  // empty when only one chain was given
};

Diagnostics diagnostics(const std::vector<PosteriorSamples>& chains);

// All unordered pairs i<j in pair_index order; shared by predict/evaluate.
std::vector<std::pair<NodeId, NodeId>> all_pairs(std::size_t n);

}  // namespace ardnet::blsm
