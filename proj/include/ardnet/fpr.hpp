#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ardnet/ard.hpp"
#include "ardnet/graph.hpp"
#include "ardnet/traits.hpp"

namespace ardnet::fpr {

// Pairwise link model: sigma(beta_0 + beta_i + beta_j + sum over trait pairs).
// Coefficient layout: [intercept | n node effects | K(K+1)/2 unordered trait
// pairs (k <= l)]. The trait-pair feature for (i, j) counts the incidences
// {i in G_k, j in G_l} and {i in G_l, j in G_k}, so coordinates take values
// in {0, 1, 2}.
std::size_t feature_dim(std::size_t n, std::size_t K);
std::size_t trait_pair_coord(std::size_t k, std::size_t l, std::size_t n, std::size_t K);
std::string feature_name(std::size_t coord, std::size_t n, std::size_t K);

enum class PenaltyKind { L1, L2, Scad, Mcp };

struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::L1;
    double lambda = 1.0;
    double a = 3.7;  // SCAD (> 2) / MCP (> 1) knee
    bool penalize_intercept = false;

    static PenaltySpec l1(double lambda) { return {PenaltyKind::L1, lambda, 3.7, false}; }
    static PenaltySpec l2(double lambda) { return {PenaltyKind::L2, lambda, 3.7, false}; }
    static PenaltySpec scad(double lambda, double a = 3.7) {
        return {PenaltyKind::Scad, lambda, a, false};
    }
    static PenaltySpec mcp(double lambda, double a = 3.0) {
        return {PenaltyKind::Mcp, lambda, a, false};
    }
};

enum class DevianceKind { Poisson, Logistic, Huber };

struct DevianceSpec {
    DevianceKind kind = DevianceKind::Poisson;
    double delta0 = 1.345;  // Huber knee on standardized residuals
};

struct FprModel {
    std::size_t n = 0;
    std::size_t K = 0;
    std::vector<double> beta;
    PenaltySpec penalty;
    DevianceSpec deviance;
};

struct FprConfig {
    PenaltySpec penalty;
    DevianceSpec deviance;
    std::size_t max_iters = 2000;
    double tol = 1e-6;                // max absolute coefficient change
    bool accelerate = false;          // momentum (restarts to plain steps on increase)
    std::optional<double> fixed_step = std::nullopt;  // empty: backtracking line search
    std::uint64_t seed = 0;
};

struct FitDiagnostics {
    std::vector<double> objective_trace;
    std::size_t iterations = 0;
    bool converged = false;
};

// Scalar proximal operator of the scaled penalty (effective level lambda*step).
double prox(const PenaltySpec& penalty, double value, double step);

// Penalty term of the objective at beta (intercept skipped unless configured).
double penalty_value(const PenaltySpec& penalty, const std::vector<double>& beta);

double linear_predictor(const FprModel& model, const TraitPartition& t, NodeId i, NodeId j);
double predicted_rate(const FprModel& model, const TraitPartition& t, NodeId i, std::size_t k);

// Total deviance plus penalty at the model's coefficients. The Huber variant
// standardizes residuals by their median absolute deviation (floored at 1).
double objective(const FprModel& model, const ArdMatrix& y, const TraitPartition& t);

// Smooth deviance term alone (penalty excluded) and, when `gradient` is
// non-null, its analytic gradient at the model's coefficients. The Huber
// scale is treated as fixed at its current MAD value, exactly as inside fit.
double smooth_deviance(const FprModel& model, const ArdMatrix& y, const TraitPartition& t,
                       std::vector<double>* gradient = nullptr);

FprModel fit(const ArdMatrix& y, const TraitPartition& t, const FprConfig& config,
             FitDiagnostics* diag = nullptr);

struct CvResult {
    double best_lambda = 0.0;
    std::vector<double> lambdas;        // ascending
    std::vector<double> mean_deviance;  // held-out Poisson deviance per lambda
};

// Respondent-row cross-validation; ties prefer the smallest lambda.
CvResult cross_validate(const ArdMatrix& y, const TraitPartition& t,
                        const std::vector<double>& lambdas, std::size_t folds,
                        const FprConfig& config, std::uint64_t seed);

// Step size guaranteeing stability of fixed-step gradient descent (a crude
// curvature bound; intentionally conservative).
double default_fixed_step(const ArdMatrix& y, const TraitPartition& t);

// Gradient aggregation across respondent-row shards. Parties exchange only
// gradient vectors; with finite epsilon each per-round party gradient is
// clipped to norm 1 and Gaussian-noised (delta = 1e-5, budget split evenly
// across rounds). epsilon = infinity reproduces the centralized fixed-step
// fit exactly.
FprModel federated_fit(const ArdMatrix& y, const TraitPartition& t,
                       const std::vector<std::vector<NodeId>>& shards, std::size_t rounds,
                       double epsilon, const FprConfig& config);

std::vector<double> predict_links(const FprModel& model, const TraitPartition& t,
                                  const std::vector<std::pair<NodeId, NodeId>>& pairs);

}  // namespace ardnet::fpr
