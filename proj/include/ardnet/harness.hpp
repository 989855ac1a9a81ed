#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ardnet/eval.hpp"
#include "ardnet/graph.hpp"
#include "ardnet/traits.hpp"

namespace ardnet::harness {

enum class Method { BlsmMcmc, BlsmVi, Fpr, FprRobust };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct GeneratorSpec {
    enum class Kind { ScaleFree, SmallWorld, Interbank, Latent };
    Kind kind = Kind::ScaleFree;
    // scale-free
    double gamma = 2.5;
    std::size_t k_min = 2;
    // small-world
    std::size_t k = 6;
    double rewire = 0.1;
    // size-driven (interbank)
    double p0 = 0.002;
    double alpha = 0.08;
    double noise_scale = 0.01;
    double size_mu = -3.0;
    double size_sigma = 3.0;
    // latent-position ground truth
    double zeta = 3.0;
    double v_mu = -2.0;
    double v_sigma = 0.5;
    std::size_t latent_p = 2;
};

struct WeightSpec {
    bool enabled = false;
    double r = 2.0;
    double q = 0.4;
};

// Per-method fitting knobs used by the scenario pipeline.
struct MethodConfig {
    std::size_t latent_p = 2;
    std::size_t mcmc_iters = 2000;
    std::size_t mcmc_burnin = 500;
    std::size_t mcmc_thin = 5;
    std::size_t vi_steps = 600;
    std::size_t vi_samples = 2;
    double vi_learning_rate = 0.04;
    double fpr_lambda = 0.5;
    std::size_t fpr_max_iters = 400;
    double fpr_huber_delta = 1.345;
};

struct Scenario {
    std::string name = "scenario";
    GeneratorSpec generator;
    std::size_t n = 250;
    std::size_t K = 8;
    double coverage = 0.15;  // fraction of nodes per trait group
    double overlap = 0.3;    // fraction of each group drawn from other blocks
    double rho = 0.0;                // misreporting rate
    double max_frac = 0.2;           // misreporting magnitude cap
    std::optional<double> epsilon;   // differential-privacy budget
    WeightSpec weights;
    std::vector<Method> methods = {Method::Fpr};
    std::size_t replications = 1;
    std::uint64_t seed = 0;
    MethodConfig knobs;
};

struct RunRecord {
    std::string scenario;
    Method method = Method::Fpr;
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    MetricsReport metrics;
    std::string status = "ok";  // anything else is the failure reason
};

// Full pipeline per replication: generate -> traits -> ARD -> corrupt ->
// fit each method -> score against the ground-truth graph. A failing
// replication/method yields a failure row, not an aborted sweep.
std::vector<RunRecord> run_scenario(const Scenario& s);

struct SweepRow {
    double x = 0.0;  // rho or epsilon
    Method method = Method::Fpr;
    double auc_mean = 0.0, auc_sd = 0.0;
    double rmse_mean = 0.0, rmse_sd = 0.0;
};

struct SweepTable {
    std::string x_name;  // "rho" or "epsilon"
    std::vector<SweepRow> rows;
    std::vector<RunRecord> records;  // every underlying run
};

// Misreporting sweep over rho in {0, 0.1, 0.2, 0.3}.
SweepTable sweep_misreporting(const Scenario& base);

// Privacy sweep over epsilon in {0.1, 0.5, 1, 2}.
SweepTable sweep_privacy(const Scenario& base);

struct InterbankConfig {
    std::size_t n = 200;
    std::size_t categories = 16;  // size-quantile trait groups
    double p0 = 0.002;
    double alpha = 0.08;
    double noise_scale = 0.01;
    double size_mu = -3.0;    // lognormal size distribution, log-scale mean
    double size_sigma = 3.0;  // log-scale sd; heavy tail drives the money-center core
    double lambda = 0.005;
    std::size_t max_iters = 2000;
    double threshold = 0.5;
    double w_deg = 0.5;
    double w_btw = 0.5;
    std::uint64_t seed = 0;
};

struct InterbankResult {
    Graph truth;
    Graph reconstructed;
    RiskTable risk;
    double auc = 0.0;
};

// Size-driven graph, size-category traits, robust penalized fit, thresholded
// reconstruction, and a composite risk ranking of the reconstructed network.
InterbankResult interbank_study(const InterbankConfig& config);

struct TimingRow {
    std::size_t n = 0;
    Method method = Method::Fpr;
    double seconds = 0.0;
    double auc = 0.0;
};

// One run per (size, method) on a fixed scenario shape; wall-clock seconds.
std::vector<TimingRow> benchmark(const std::vector<std::size_t>& sizes,
                                 const std::vector<Method>& methods, const Scenario& base);

// --- experiment driver (config text is JSON; see README for the schema) ---

Scenario scenario_from_json_text(const std::string& text);

struct ExperimentOutput {
    std::vector<std::string> files;  // paths written, manifest last
};

// Dispatches on the config's "sweep" field (single | misreporting | privacy |
// interbank | benchmark), writes figure CSVs plus runs.csv and manifest.json
// into out_dir.
ExperimentOutput run_experiment(const std::string& config_text, const std::string& out_dir);

}  // namespace ardnet::harness
