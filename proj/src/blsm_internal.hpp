#pragma once

#include <cmath>
#include <vector>

#include "ardnet/blsm.hpp"
#include "ardnet/common.hpp"

namespace ardnet::blsm::detail {

constexpr double kRateFloor = 1e-12;

inline double link_value(double eta, LinkKind link) {
    if (link == LinkKind::Logistic) return sigmoid(eta);
    return 0.5 * std::erfc(-eta * M_SQRT1_2);
}

inline double link_deriv(double eta, LinkKind link) {
    if (link == LinkKind::Logistic) {
        const double s = sigmoid(eta);
        return s * (1.0 - s);
    }
    return std::exp(-0.5 * eta * eta) / std::sqrt(2.0 * M_PI);
}

// Count log-pmf at mean lam (floored), lgamma terms included.
inline double cell_logpmf(double y, double lam, const LikelihoodSpec& spec) {
    lam = std::max(lam, kRateFloor);
    if (spec.family == CountFamily::Poisson)
        return y * std::log(lam) - lam - std::lgamma(y + 1.0);
    const double r = spec.dispersion_r;
    return std::lgamma(y + r) - std::lgamma(r) - std::lgamma(y + 1.0) + r * std::log(r / (r + lam)) +
           y * std::log(lam / (r + lam));
}

// cell_logpmf(y, lam_new) - cell_logpmf(y, lam_old); the y-only terms cancel.
inline double cell_delta(double y, double lam_old, double lam_new, const LikelihoodSpec& spec) {
    lam_old = std::max(lam_old, kRateFloor);
    lam_new = std::max(lam_new, kRateFloor);
    if (spec.family == CountFamily::Poisson)
        return y * (std::log(lam_new) - std::log(lam_old)) - (lam_new - lam_old);
    const double r = spec.dispersion_r;
    return r * (std::log(r + lam_old) - std::log(r + lam_new)) +
           y * (std::log(lam_new) - std::log(lam_old) + std::log(r + lam_old) -
                std::log(r + lam_new));
}

// d cell_logpmf / d lam at the floored rate.
inline double cell_dlogpmf(double y, double lam, const LikelihoodSpec& spec) {
    lam = std::max(lam, kRateFloor);
    if (spec.family == CountFamily::Poisson) return y / lam - 1.0;
    const double r = spec.dispersion_r;
    return y / lam - (r + y) / (r + lam);
}

inline double dot_d(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += a[c] * b[c];
    return s;
}

// lambda[i*K + k] for all cells from scratch.
std::vector<double> build_rates(const BlsmParams& params, const TraitPartition& t, LinkKind link);

// Gradient and value in one pass over the pair set.
double loglik_and_gradient(const BlsmParams& params, const ArdMatrix& y, const TraitPartition& t,
                           const LikelihoodSpec& spec, LoglikGradient& g);

// Dense symmetric link-probability matrix (diagonal zero).
std::vector<double> build_link_matrix(const BlsmParams& params, LinkKind link);

double log_normal_pdf(double x, double mu, double sigma);
double log_half_cauchy_pdf(double x, double scale);

// --- von Mises-Fisher utilities (dimension d = ambient dimension) ---

// log I_nu(x) with an asymptotic branch for large x.
double log_bessel_i(double nu, double x);

// log of the vMF normalizing constant C_d(kappa) in
// f(z) = C_d(kappa) * exp(kappa mu.z); tends to -log(sphere area) as kappa->0.
double vmf_log_c(std::size_t d, double kappa);

// Mean resultant A_d(kappa) = I_{d/2}(kappa) / I_{d/2-1}(kappa).
double vmf_mean_resultant(std::size_t d, double kappa);

// dA_d/dkappa = 1 - A^2 - (d-1) A / kappa.
double vmf_mean_resultant_deriv(std::size_t d, double kappa);

// Entropy of vMF(mu, kappa) on S^{d-1}.
double vmf_entropy(std::size_t d, double kappa);

// Samples the cosine w = mu.z under vMF(kappa) on S^{d-1} (Wood's method).
double vmf_sample_cos(std::size_t d, double kappa, Rng& rng);

// Uniform point on S^{d-1}.
void sample_sphere(double* out, std::size_t d, Rng& rng);

inline void normalize(double* x, std::size_t d) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += x[c] * x[c];
    s = std::sqrt(s);
    if (s > 0.0)
        for (std::size_t c = 0; c < d; ++c) x[c] /= s;
}

}  // namespace ardnet::blsm::detail
