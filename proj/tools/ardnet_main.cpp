#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ardnet/ard.hpp"
#include "ardnet/blsm.hpp"
#include "ardnet/common.hpp"
#include "ardnet/eval.hpp"
#include "ardnet/fpr.hpp"
#include "ardnet/graphgen.hpp"
#include "ardnet/harness.hpp"
#include "ardnet/io.hpp"

namespace {

using namespace ardnet;

std::string sibling_path(const std::string& out, const std::string& suffix) {
    std::filesystem::path p(out);
    const std::string ext = p.has_extension() ? p.extension().string() : ".csv";
    p.replace_extension();
    return p.string() + suffix + ext;
}

// ---- generate ----

struct GenOpts {
    std::string model = "scale-free";
    std::size_t n = 250;
    double gamma = 2.5;
    std::size_t k_min = 2;
    std::size_t k = 6;
    double rewire = 0.1;
    double p0 = 0.02;
    double alpha = 0.04;
    double noise_scale = 0.05;
    double weight_r = 0.0;  // > 0 adds negative-binomial edge weights
    double weight_q = 0.4;
    std::uint64_t seed = 0;
    std::string out;
    std::string sizes_out;
};

void run_generate(const GenOpts& o) {
    Graph g;
    if (o.model == "scale-free") {
        g = gen_scale_free(o.n, o.gamma, o.k_min, o.seed);
    } else if (o.model == "small-world") {
        g = gen_small_world(o.n, o.k, o.rewire, o.seed);
    } else if (o.model == "interbank") {
        g = gen_interbank(o.n, o.p0, o.alpha, o.noise_scale, SizeDist::lognormal(), o.seed);
    } else {
        throw ParameterError("unknown model '" + o.model + "'");
    }
    if (o.weight_r > 0.0) g = add_negbin_weights(g, o.weight_r, o.weight_q, mix_seed(o.seed, 11));
    io::write_edges(o.out, g);
    std::cout << "wrote " << o.out << " (n=" << g.n() << ", edges=" << g.edges().size() << ")\n";
    if (!o.sizes_out.empty()) {
        if (!g.has_sizes()) throw ParameterError("--sizes-out requires the interbank model");
        io::write_sizes(o.sizes_out, g);
        std::cout << "wrote " << o.sizes_out << "\n";
    }
}

// ---- ard ----

struct ArdOpts {
    std::string graph;
    std::string traits;
    std::size_t K = 8;
    double coverage = 0.15;
    double overlap = 0.3;
    double misreport = 0.0;
    double max_frac = 0.2;
    double dp = 0.0;  // > 0 enables the privacy mechanism
    std::uint64_t seed = 0;
    std::string out;
    std::string traits_out;
};

void run_ard(const ArdOpts& o) {
    const Graph g = io::read_edges(o.graph);
    TraitPartition traits = o.traits.empty()
                                ? assign_traits(g.n(), o.K, o.coverage, o.overlap,
                                                mix_seed(o.seed, 21))
                                : io::read_traits(o.traits, g.n());
    ArdMatrix ard = compute_ard(g, traits);
    std::optional<double> rho, eps;
    if (o.misreport > 0.0) {
        ard = inject_misreporting(ard, o.misreport, o.max_frac, mix_seed(o.seed, 22));
        rho = o.misreport;
    }
    if (o.dp > 0.0) {
        ard = inject_dp_noise(ard, traits, o.dp, mix_seed(o.seed, 23));
        eps = o.dp;
    }
    io::write_ard(o.out, ard, rho, eps, o.seed);
    std::cout << "wrote " << o.out << " (n=" << ard.n << ", K=" << ard.K
              << ", provenance=" << to_string(ard.provenance) << ")\n";
    if (!o.traits_out.empty()) {
        io::write_traits(o.traits_out, traits);
        std::cout << "wrote " << o.traits_out << "\n";
    }
}

// ---- fit-blsm ----

struct BlsmOpts {
    std::string ard;
    std::string traits;
    std::string mode = "mcmc";
    std::size_t p = 2;
    std::size_t iters = 5000;
    std::size_t burnin = 1000;
    std::size_t thin = 10;
    std::size_t chains = 1;
    std::string family = "poisson";
    double dispersion = 1.0;
    std::string link = "logistic";
    double lr = 0.04;
    std::size_t mc_samples = 2;
    std::uint64_t seed = 0;
    std::string out;
    std::string diag_out;
    std::string pred_out;
};

blsm::LikelihoodSpec likelihood_spec(const std::string& family, double dispersion,
                                     const std::string& link) {
    blsm::LikelihoodSpec spec;
    if (family == "poisson")
        spec.family = blsm::CountFamily::Poisson;
    else if (family == "negbin")
        spec.family = blsm::CountFamily::NegativeBinomial;
    else
        throw ParameterError("unknown family '" + family + "'");
    spec.dispersion_r = dispersion;
    if (link == "logistic")
        spec.link = blsm::LinkKind::Logistic;
    else if (link == "probit")
        spec.link = blsm::LinkKind::Probit;
    else
        throw ParameterError("unknown link '" + link + "'");
    return spec;
}

void run_fit_blsm(const BlsmOpts& o) {
    const io::ArdWithMeta data = io::read_ard(o.ard);
    const TraitPartition traits = io::read_traits(o.traits, data.ard.n);
    const blsm::LikelihoodSpec spec = likelihood_spec(o.family, o.dispersion, o.link);
    const blsm::BlsmPriors priors;
    const std::string diag_out =
        o.diag_out.empty() ? sibling_path(o.out, "_diagnostics") : o.diag_out;
    const auto pairs = blsm::all_pairs(data.ard.n);

    if (o.mode == "mcmc") {
        blsm::McmcConfig cfg;
        cfg.latent_p = o.p;
        cfg.iterations = o.iters;
        cfg.burn_in = o.burnin;
        cfg.thin = o.thin;
        std::vector<blsm::PosteriorSamples> chains;
        for (std::size_t c = 0; c < std::max<std::size_t>(o.chains, 1); ++c) {
            cfg.seed = mix_seed(o.seed, c);
            chains.push_back(blsm::mcmc_fit(data.ard, traits, priors, cfg));
        }
        io::write_posterior(o.out, chains.front());
        std::cout << "wrote " << o.out << " (" << chains.front().draws.size()
                  << " draws, accept z/v/zeta = " << chains.front().accept_z << "/"
                  << chains.front().accept_v << "/" << chains.front().accept_zeta << ")\n";
        io::write_diagnostics(diag_out, blsm::diagnostics(chains));
        std::cout << "wrote " << diag_out << "\n";
        if (!o.pred_out.empty()) {
            io::write_predictions(o.pred_out, pairs, blsm::predict_links(chains.front(), pairs));
            std::cout << "wrote " << o.pred_out << "\n";
        }
    } else if (o.mode == "vi") {
        blsm::ViConfig cfg;
        cfg.latent_p = o.p;
        cfg.steps = o.iters;
        cfg.mc_samples = o.mc_samples;
        cfg.learning_rate = o.lr;
        cfg.seed = o.seed;
        const blsm::ViResult res = blsm::vi_fit(data.ard, traits, priors, cfg, spec);
        blsm::PosteriorSamples point;
        point.n = res.point.n;
        point.d = res.point.d;
        point.log_likelihood = {blsm::log_likelihood(res.point, data.ard, traits, spec)};
        point.log_posterior = {point.log_likelihood[0] + blsm::log_prior(res.point, priors)};
        point.draws = {res.point};
        io::write_posterior(o.out, point);
        std::cout << "wrote " << o.out << " (variational point, final elbo = "
                  << res.elbo_trace.back() << ")\n";
        std::vector<std::vector<std::string>> rows;
        for (std::size_t t = 0; t < res.elbo_trace.size(); ++t)
            rows.push_back({std::to_string(t), io::format_double(res.elbo_trace[t])});
        io::write_csv(diag_out, {"step", "elbo"}, rows);
        std::cout << "wrote " << diag_out << "\n";
        if (!o.pred_out.empty()) {
            io::write_predictions(o.pred_out, pairs, blsm::predict_links(res.point, pairs));
            std::cout << "wrote " << o.pred_out << "\n";
        }
    } else {
        throw ParameterError("mode must be mcmc or vi");
    }
}

// ---- fit-fpr ----

struct FprOpts {
    std::string ard;
    std::string traits;
    std::string penalty = "l1";
    double lambda = 0.5;
    double a = 0.0;  // 0: penalty default knee
    std::string deviance = "poisson";
    double huber_delta = 1.345;
    std::size_t cv = 0;  // folds; >= 2 enables lambda selection
    std::vector<double> grid = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
    std::size_t federated = 0;  // party count; >= 1 enables the federated path
    double eps = std::numeric_limits<double>::infinity();
    std::size_t rounds = 200;
    std::size_t max_iters = 2000;
    double tol = 1e-6;
    bool accelerate = false;
    std::uint64_t seed = 0;
    std::string out;
    std::string pred_out;
    std::string cv_out;
};

fpr::PenaltySpec make_penalty(const std::string& kind, double lambda, double a) {
    if (kind == "l1") return fpr::PenaltySpec::l1(lambda);
    if (kind == "l2") return fpr::PenaltySpec::l2(lambda);
    if (kind == "scad") return a > 0.0 ? fpr::PenaltySpec::scad(lambda, a)
                                       : fpr::PenaltySpec::scad(lambda);
    if (kind == "mcp")
        return a > 0.0 ? fpr::PenaltySpec::mcp(lambda, a) : fpr::PenaltySpec::mcp(lambda);
    throw ParameterError("unknown penalty '" + kind + "'");
}

void run_fit_fpr(const FprOpts& o) {
    const io::ArdWithMeta data = io::read_ard(o.ard);
    const TraitPartition traits = io::read_traits(o.traits, data.ard.n);
    fpr::FprConfig cfg;
    cfg.penalty = make_penalty(o.penalty, o.lambda, o.a);
    if (o.deviance == "poisson")
        cfg.deviance.kind = fpr::DevianceKind::Poisson;
    else if (o.deviance == "huber")
        cfg.deviance.kind = fpr::DevianceKind::Huber;
    else if (o.deviance == "logistic")
        cfg.deviance.kind = fpr::DevianceKind::Logistic;
    else
        throw ParameterError("unknown deviance '" + o.deviance + "'");
    cfg.deviance.delta0 = o.huber_delta;
    cfg.max_iters = o.max_iters;
    cfg.tol = o.tol;
    cfg.accelerate = o.accelerate;
    cfg.seed = o.seed;

    if (o.cv >= 2) {
        const fpr::CvResult cv =
            fpr::cross_validate(data.ard, traits, o.grid, o.cv, cfg, mix_seed(o.seed, 31));
        cfg.penalty.lambda = cv.best_lambda;
        std::cout << "cross-validation picked lambda = " << cv.best_lambda << "\n";
        if (!o.cv_out.empty()) {
            std::vector<std::vector<std::string>> rows;
            for (std::size_t i = 0; i < cv.lambdas.size(); ++i)
                rows.push_back({io::format_double(cv.lambdas[i]),
                                io::format_double(cv.mean_deviance[i])});
            io::write_csv(o.cv_out, {"lambda", "mean_deviance"}, rows);
            std::cout << "wrote " << o.cv_out << "\n";
        }
    }

    fpr::FprModel model;
    if (o.federated >= 1) {
        std::vector<std::vector<NodeId>> shards(o.federated);
        for (std::size_t i = 0; i < data.ard.n; ++i)
            shards[i % o.federated].push_back(NodeId(i));
        model = fpr::federated_fit(data.ard, traits, shards, o.rounds, o.eps, cfg);
    } else {
        model = fpr::fit(data.ard, traits, cfg);
    }
    io::write_model(o.out, model);
    std::size_t nonzero = 0;
    for (double b : model.beta)
        if (b != 0.0) ++nonzero;
    std::cout << "wrote " << o.out << " (" << nonzero << "/" << model.beta.size()
              << " nonzero coefficients)\n";
    if (!o.pred_out.empty()) {
        const auto pairs = blsm::all_pairs(data.ard.n);
        io::write_predictions(o.pred_out, pairs, fpr::predict_links(model, traits, pairs));
        std::cout << "wrote " << o.pred_out << "\n";
    }
}

// ---- evaluate ----

struct EvalOpts {
    std::string truth;
    std::string pred;
    std::string embedding_true;
    std::string embedding_est;
    std::string out;
};

void run_evaluate(const EvalOpts& o) {
    const Graph truth = io::read_edges(o.truth);
    const io::Predictions preds = io::read_predictions(o.pred);
    const std::size_t n = truth.n();
    const std::size_t total = n * (n - 1) / 2;
    if (preds.pairs.size() != total)
        throw DataError("predictions must cover every unordered node pair");
    std::vector<double> scores(total, 0.0);
    std::vector<double> truth_weights(total, 0.0);
    for (std::size_t idx = 0; idx < preds.pairs.size(); ++idx) {
        const auto [i, j] = preds.pairs[idx];
        if (i >= n || j >= n || i == j) throw DataError("prediction pair out of range");
        const std::size_t at = pair_index(std::min(i, j), std::max(i, j), n);
        scores[at] = preds.scores[idx];
        truth_weights[at] = double(truth.weight(i, j));
    }
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"auc", io::format_double(auc(truth, scores))});
    rows.push_back({"rmse", io::format_double(rmse(truth_weights, scores))});
    if (!o.embedding_true.empty() || !o.embedding_est.empty()) {
        if (o.embedding_true.empty() || o.embedding_est.empty())
            throw ParameterError("--embedding-true and --embedding-est go together");
        const io::EmbeddingData zt = io::read_embedding(o.embedding_true);
        const io::EmbeddingData ze = io::read_embedding(o.embedding_est);
        if (zt.n != ze.n || zt.d != ze.d)
            throw DataError("embeddings must share their dimensions");
        rows.push_back(
            {"procrustes_error", io::format_double(procrustes_error(ze.z, zt.z, zt.n, zt.d))});
    }
    io::write_csv(o.out, {"metric", "value"}, rows);
    std::cout << "wrote " << o.out << "\n";
    for (const auto& row : rows) std::cout << "  " << row[0] << " = " << row[1] << "\n";
}

// ---- risk-rank ----

struct RiskOpts {
    std::string graph;
    double w_deg = 0.5;
    double w_btw = 0.5;
    std::string out;
};

void run_risk(const RiskOpts& o) {
    const Graph g = io::read_edges(o.graph);
    io::write_risk(o.out, risk_rank(g, o.w_deg, o.w_btw));
    std::cout << "wrote " << o.out << "\n";
}

// ---- experiment ----

struct ExpOpts {
    std::string config;
    std::string out;
};

void run_experiment_cmd(const ExpOpts& o) {
    std::ifstream in(o.config);
    if (!in) throw DataError("cannot open " + o.config);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const harness::ExperimentOutput res = harness::run_experiment(buffer.str(), o.out);
    for (const auto& f : res.files) std::cout << "wrote " << f << "\n";
}

// ---- benchmark ----

struct BenchOpts {
    std::vector<std::size_t> sizes = {250, 500, 1000};
    std::vector<std::string> methods = {"fpr", "blsm-mcmc"};
    std::size_t K = 8;
    std::uint64_t seed = 0;
    std::string out;
};

void run_benchmark(const BenchOpts& o) {
    harness::Scenario base;
    base.name = "benchmark";
    base.K = o.K;
    base.seed = o.seed;
    std::vector<harness::Method> methods;
    for (const auto& m : o.methods) methods.push_back(harness::method_from_string(m));
    const auto rows = harness::benchmark(o.sizes, methods, base);
    std::vector<std::vector<std::string>> csv_rows;
    for (const auto& row : rows) {
        csv_rows.push_back({std::to_string(row.n), harness::to_string(row.method),
                            io::format_double(row.seconds), io::format_double(row.auc)});
        std::cout << "  n=" << row.n << " " << harness::to_string(row.method) << ": "
                  << row.seconds << "s (auc " << row.auc << ")\n";
    }
    io::write_csv(o.out, {"n", "method", "seconds", "auc"}, csv_rows);
    std::cout << "wrote " << o.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ARD-based hidden network reconstruction toolkit"};
    app.require_subcommand(1);

    auto gen = std::make_shared<GenOpts>();
    {
        CLI::App* cmd = app.add_subcommand("generate", "Sample a synthetic graph");
        cmd->add_option("--model", gen->model, "scale-free | small-world | interbank")
            ->required();
        cmd->add_option("--n", gen->n, "node count");
        cmd->add_option("--gamma", gen->gamma, "scale-free: degree exponent");
        cmd->add_option("--k-min", gen->k_min, "scale-free: minimum degree");
        cmd->add_option("--k", gen->k, "small-world: ring degree (even)");
        cmd->add_option("--rewire", gen->rewire, "small-world: rewiring probability");
        cmd->add_option("--p0", gen->p0, "interbank: baseline link probability");
        cmd->add_option("--alpha", gen->alpha, "interbank: size affinity strength");
        cmd->add_option("--noise-scale", gen->noise_scale, "interbank: logit noise scale");
        cmd->add_option("--weight-r", gen->weight_r,
                        "add negative-binomial edge weights with this dispersion (> 0)");
        cmd->add_option("--weight-q", gen->weight_q, "edge-weight success probability");
        cmd->add_option("--seed", gen->seed, "RNG seed");
        cmd->add_option("--out", gen->out, "edge CSV path")->required();
        cmd->add_option("--sizes-out", gen->sizes_out, "node-size CSV path (interbank)");
        cmd->callback([gen] { run_generate(*gen); });
    }

    auto ard = std::make_shared<ArdOpts>();
    {
        CLI::App* cmd = app.add_subcommand("ard", "Aggregate a graph into ARD counts");
        cmd->add_option("--graph", ard->graph, "edge CSV")->required();
        cmd->add_option("--traits", ard->traits, "trait CSV (omit to sample one)");
        cmd->add_option("--K", ard->K, "trait count when sampling");
        cmd->add_option("--coverage", ard->coverage, "trait coverage when sampling");
        cmd->add_option("--overlap", ard->overlap, "trait overlap when sampling");
        cmd->add_option("--misreport", ard->misreport, "misreporting rate rho");
        cmd->add_option("--max-frac", ard->max_frac, "misreporting magnitude cap");
        cmd->add_option("--dp", ard->dp, "differential-privacy budget epsilon");
        cmd->add_option("--seed", ard->seed, "RNG seed");
        cmd->add_option("--out", ard->out, "ARD CSV path")->required();
        cmd->add_option("--traits-out", ard->traits_out, "write the sampled traits here");
        cmd->callback([ard] { run_ard(*ard); });
    }

    auto bl = std::make_shared<BlsmOpts>();
    {
        CLI::App* cmd = app.add_subcommand("fit-blsm", "Fit the latent surface model");
        cmd->add_option("--ard", bl->ard, "ARD CSV")->required();
        cmd->add_option("--traits", bl->traits, "trait CSV")->required();
        cmd->add_option("--mode", bl->mode, "mcmc | vi");
        cmd->add_option("--p", bl->p, "latent sphere dimension (ambient d = p+1)");
        cmd->add_option("--iters", bl->iters, "MCMC sweeps / VI steps");
        cmd->add_option("--burnin", bl->burnin, "MCMC burn-in sweeps");
        cmd->add_option("--thin", bl->thin, "MCMC thinning stride");
        cmd->add_option("--chains", bl->chains, "independent MCMC chains");
        cmd->add_option("--family", bl->family, "poisson | negbin");
        cmd->add_option("--dispersion", bl->dispersion, "negbin dispersion r");
        cmd->add_option("--link", bl->link, "logistic | probit");
        cmd->add_option("--lr", bl->lr, "VI learning rate");
        cmd->add_option("--mc-samples", bl->mc_samples, "VI Monte Carlo samples per step");
        cmd->add_option("--seed", bl->seed, "RNG seed");
        cmd->add_option("--out", bl->out, "posterior CSV path")->required();
        cmd->add_option("--diag-out", bl->diag_out, "diagnostics CSV (default <out>_diagnostics)");
        cmd->add_option("--pred-out", bl->pred_out, "all-pair link predictions CSV");
        cmd->callback([bl] { run_fit_blsm(*bl); });
    }

    auto fp = std::make_shared<FprOpts>();
    {
        CLI::App* cmd = app.add_subcommand("fit-fpr", "Fit the penalized regression model");
        cmd->add_option("--ard", fp->ard, "ARD CSV")->required();
        cmd->add_option("--traits", fp->traits, "trait CSV")->required();
        cmd->add_option("--penalty", fp->penalty, "l1 | l2 | scad | mcp");
        cmd->add_option("--lambda", fp->lambda, "penalty level");
        cmd->add_option("--a", fp->a, "SCAD/MCP knee (0: default)");
        cmd->add_option("--deviance", fp->deviance, "poisson | huber | logistic");
        cmd->add_option("--huber-delta", fp->huber_delta, "Huber knee delta0");
        cmd->add_option("--cv", fp->cv, "cross-validation folds (>= 2 enables)");
        cmd->add_option("--grid", fp->grid, "lambda grid for --cv")->delimiter(',');
        cmd->add_option("--federated", fp->federated, "party count (>= 1 enables)");
        cmd->add_option("--eps", fp->eps, "federated privacy budget (default: none)");
        cmd->add_option("--rounds", fp->rounds, "federated rounds");
        cmd->add_option("--max-iters", fp->max_iters, "iteration cap");
        cmd->add_option("--tol", fp->tol, "coefficient-change stopping tolerance");
        cmd->add_flag("--accelerate", fp->accelerate, "momentum acceleration");
        cmd->add_option("--seed", fp->seed, "RNG seed");
        cmd->add_option("--out", fp->out, "model CSV path")->required();
        cmd->add_option("--pred-out", fp->pred_out, "all-pair link predictions CSV");
        cmd->add_option("--cv-out", fp->cv_out, "cross-validation curve CSV");
        cmd->callback([fp] { run_fit_fpr(*fp); });
    }

    auto ev = std::make_shared<EvalOpts>();
    {
        CLI::App* cmd = app.add_subcommand("evaluate", "Score predictions against a truth graph");
        cmd->add_option("--truth", ev->truth, "truth edge CSV")->required();
        cmd->add_option("--pred", ev->pred, "prediction CSV (src,dst,score)")->required();
        cmd->add_option("--embedding-true", ev->embedding_true, "true latent positions CSV");
        cmd->add_option("--embedding-est", ev->embedding_est, "estimated positions CSV");
        cmd->add_option("--out", ev->out, "metric report CSV")->required();
        cmd->callback([ev] { run_evaluate(*ev); });
    }

    auto rk = std::make_shared<RiskOpts>();
    {
        CLI::App* cmd = app.add_subcommand("risk-rank", "Composite degree/betweenness ranking");
        cmd->add_option("--graph", rk->graph, "edge CSV")->required();
        cmd->add_option("--w-deg", rk->w_deg, "degree weight");
        cmd->add_option("--w-btw", rk->w_btw, "betweenness weight");
        cmd->add_option("--out", rk->out, "risk CSV path")->required();
        cmd->callback([rk] { run_risk(*rk); });
    }

    auto ex = std::make_shared<ExpOpts>();
    {
        CLI::App* cmd = app.add_subcommand("experiment", "Run a scenario config end to end");
        cmd->add_option("--config", ex->config, "JSON scenario config")->required();
        cmd->add_option("--out", ex->out, "output directory")->required();
        cmd->callback([ex] { run_experiment_cmd(*ex); });
    }

    auto bm = std::make_shared<BenchOpts>();
    {
        CLI::App* cmd = app.add_subcommand("benchmark", "Time methods across graph sizes");
        cmd->add_option("--sizes", bm->sizes, "node counts")->delimiter(',');
        cmd->add_option("--methods", bm->methods, "methods to time")->delimiter(',');
        cmd->add_option("--K", bm->K, "trait count");
        cmd->add_option("--seed", bm->seed, "RNG seed");
        cmd->add_option("--out", bm->out, "timing CSV path")->required();
        cmd->callback([bm] { run_benchmark(*bm); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
