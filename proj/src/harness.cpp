#include "ardnet/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "ardnet/ard.hpp"
#include "ardnet/blsm.hpp"
#include "ardnet/fpr.hpp"
#include "ardnet/graphgen.hpp"
#include "ardnet/io.hpp"

namespace ardnet::harness {

using nlohmann::json;

std::string to_string(Method m) {
    switch (m) {
        case Method::BlsmMcmc: return "blsm-mcmc";
        case Method::BlsmVi: return "blsm-vi";
        case Method::Fpr: return "fpr";
        case Method::FprRobust: return "fpr-robust";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "blsm-mcmc") return Method::BlsmMcmc;
    if (s == "blsm-vi") return Method::BlsmVi;
    if (s == "fpr") return Method::Fpr;
    if (s == "fpr-robust") return Method::FprRobust;
    throw ParameterError("unknown method '" + s + "'");
}

namespace {

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void sample_unit_rows(std::vector<double>& z, std::size_t n, std::size_t d, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                z[i * d + c] = normal(rng);
                norm2 += z[i * d + c] * z[i * d + c];
            }
        } while (norm2 < 1e-12);
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t c = 0; c < d; ++c) z[i * d + c] *= inv;
    }
}

struct PipelineData {
    Graph g;
    TraitPartition traits;
    ArdMatrix ard;
    std::vector<std::pair<NodeId, NodeId>> pairs;
    std::vector<double> truth_scores;  // edge weight (1 for unweighted edges)
    std::vector<double> true_z;        // latent generator only
    std::size_t true_d = 0;
    double mean_weight = 1.0;
};

PipelineData build_pipeline(const Scenario& s, std::size_t rep) {
    const std::uint64_t g_seed = mix_seed(s.seed, 0x67000 + rep);
    const std::uint64_t w_seed = mix_seed(s.seed, 0x77000 + rep);
    const std::uint64_t t_seed = mix_seed(s.seed, 0x74000 + rep);
    const std::uint64_t m_seed = mix_seed(s.seed, 0x6d000 + rep);
    const std::uint64_t d_seed = mix_seed(s.seed, 0x64000 + rep);

    PipelineData data;
    const auto& gen = s.generator;
    switch (gen.kind) {
        case GeneratorSpec::Kind::ScaleFree:
            data.g = gen_scale_free(s.n, gen.gamma, gen.k_min, g_seed);
            break;
        case GeneratorSpec::Kind::SmallWorld:
            data.g = gen_small_world(s.n, gen.k, gen.rewire, g_seed);
            break;
        case GeneratorSpec::Kind::Interbank:
            data.g = gen_interbank(s.n, gen.p0, gen.alpha, gen.noise_scale,
                                   SizeDist::lognormal(gen.size_mu, gen.size_sigma), g_seed);
            break;
        case GeneratorSpec::Kind::Latent: {
            const std::size_t d = gen.latent_p + 1;
            blsm::BlsmParams truth(s.n, d);
            Rng rng = make_rng(g_seed, 5);
            std::normal_distribution<double> normal(0.0, 1.0);
            for (std::size_t i = 0; i < s.n; ++i)
                truth.v[i] = gen.v_mu + gen.v_sigma * normal(rng);
            sample_unit_rows(truth.z, s.n, d, rng);
            truth.zeta = gen.zeta;
            data.g = blsm::simulate_graph(truth, g_seed);
            data.true_z = truth.z;
            data.true_d = d;
            break;
        }
    }
    if (s.weights.enabled) {
        data.g = add_negbin_weights(data.g, s.weights.r, s.weights.q, w_seed);
        data.mean_weight = 1.0 + s.weights.r * s.weights.q / (1.0 - s.weights.q);
    }
    data.traits = assign_traits(s.n, s.K, s.coverage, s.overlap, t_seed);
    data.ard = compute_ard(data.g, data.traits);
    if (s.rho > 0.0) data.ard = inject_misreporting(data.ard, s.rho, s.max_frac, m_seed);
    if (s.epsilon) data.ard = inject_dp_noise(data.ard, data.traits, *s.epsilon, d_seed);
    data.pairs = blsm::all_pairs(s.n);
    data.truth_scores.resize(data.pairs.size());
    for (std::size_t idx = 0; idx < data.pairs.size(); ++idx)
        data.truth_scores[idx] =
            double(data.g.weight(data.pairs[idx].first, data.pairs[idx].second));
    return data;
}

struct FitOutcome {
    std::vector<double> predictions;          // link probabilities per pair
    std::optional<double> procrustes;         // latent-truth runs only
};

FitOutcome fit_method(Method method, const PipelineData& data, const Scenario& s,
                      std::uint64_t f_seed) {
    const MethodConfig& kn = s.knobs;
    FitOutcome out;
    switch (method) {
        case Method::BlsmMcmc: {
            blsm::McmcConfig cfg;
            cfg.latent_p = kn.latent_p;
            cfg.iterations = kn.mcmc_iters;
            cfg.burn_in = kn.mcmc_burnin;
            cfg.thin = kn.mcmc_thin;
            cfg.seed = f_seed;
            blsm::BlsmPriors priors;
            const auto samples = blsm::mcmc_fit(data.ard, data.traits, priors, cfg);
            out.predictions = blsm::predict_links(samples, data.pairs);
            if (!data.true_z.empty() && kn.latent_p + 1 == data.true_d) {
                const auto best =
                    std::max_element(samples.log_posterior.begin(), samples.log_posterior.end());
                const auto& draw =
                    samples.draws[std::size_t(best - samples.log_posterior.begin())];
                out.procrustes =
                    procrustes_error(draw.z, data.true_z, samples.n, samples.d);
            }
            break;
        }
        case Method::BlsmVi: {
            blsm::ViConfig cfg;
            cfg.latent_p = kn.latent_p;
            cfg.steps = kn.vi_steps;
            cfg.mc_samples = kn.vi_samples;
            cfg.learning_rate = kn.vi_learning_rate;
            cfg.seed = f_seed;
            blsm::BlsmPriors priors;
            const auto res = blsm::vi_fit(data.ard, data.traits, priors, cfg);
            out.predictions = blsm::predict_links(res.point, data.pairs);
            if (!data.true_z.empty() && kn.latent_p + 1 == data.true_d)
                out.procrustes =
                    procrustes_error(res.point.z, data.true_z, res.point.n, res.point.d);
            break;
        }
        case Method::Fpr:
        case Method::FprRobust: {
            fpr::FprConfig cfg;
            cfg.penalty = fpr::PenaltySpec::l1(kn.fpr_lambda);
            cfg.deviance.kind =
                method == Method::FprRobust ? fpr::DevianceKind::Huber : fpr::DevianceKind::Poisson;
            cfg.deviance.delta0 = kn.fpr_huber_delta;
            cfg.max_iters = kn.fpr_max_iters;
            cfg.seed = f_seed;
            const auto model = fpr::fit(data.ard, data.traits, cfg);
            out.predictions = fpr::predict_links(model, data.traits, data.pairs);
            break;
        }
    }
    return out;
}

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / double(xs.size() - 1));
}

void append_sweep_rows(SweepTable& table, const Scenario& s, double x,
                       const std::vector<RunRecord>& records) {
    for (Method m : s.methods) {
        std::vector<double> aucs, rmses;
        for (const auto& rec : records)
            if (rec.method == m && rec.status == "ok") {
                aucs.push_back(rec.metrics.auc);
                rmses.push_back(rec.metrics.rmse);
            }
        SweepRow row;
        row.x = x;
        row.method = m;
        if (!aucs.empty()) {
            row.auc_mean = std::accumulate(aucs.begin(), aucs.end(), 0.0) / double(aucs.size());
            row.rmse_mean =
                std::accumulate(rmses.begin(), rmses.end(), 0.0) / double(rmses.size());
            row.auc_sd = sample_sd(aucs);
            row.rmse_sd = sample_sd(rmses);
        }
        table.rows.push_back(row);
    }
    table.records.insert(table.records.end(), records.begin(), records.end());
}

}  // namespace

std::vector<RunRecord> run_scenario(const Scenario& s) {
    if (s.replications == 0) throw ParameterError("replications must be >= 1");
    if (s.methods.empty()) throw ParameterError("scenario lists no methods");
    std::vector<RunRecord> records;
    for (std::size_t rep = 0; rep < s.replications; ++rep) {
        const std::uint64_t rep_seed = mix_seed(s.seed, 0x72000 + rep);
        PipelineData data;
        std::string pipeline_error;
        try {
            data = build_pipeline(s, rep);
        } catch (const std::exception& e) {
            pipeline_error = e.what();
        }
        for (Method m : s.methods) {
            RunRecord rec;
            rec.scenario = s.name;
            rec.method = m;
            rec.replication = rep;
            rec.seed = rep_seed;
            rec.metrics.n = s.n;
            rec.metrics.K = s.K;
            rec.metrics.rho = s.rho;
            rec.metrics.epsilon = s.epsilon;
            rec.metrics.method = to_string(m);
            rec.metrics.seed = rep_seed;
            if (!pipeline_error.empty()) {
                rec.status = pipeline_error;
                records.push_back(std::move(rec));
                continue;
            }
            const auto start = std::chrono::steady_clock::now();
            try {
                const std::uint64_t f_seed = mix_seed(rep_seed, 0xf000 + std::size_t(m));
                const FitOutcome fitres = fit_method(m, data, s, f_seed);
                rec.metrics.auc = auc(data.g, fitres.predictions);
                std::vector<double> pred_scores = fitres.predictions;
                if (s.weights.enabled)
                    for (double& p : pred_scores) p *= data.mean_weight;
                rec.metrics.rmse = rmse(data.truth_scores, pred_scores);
                rec.metrics.procrustes_error = fitres.procrustes;
            } catch (const std::exception& e) {
                rec.status = e.what();
            }
            rec.metrics.runtime_seconds = elapsed_seconds(start);
            records.push_back(std::move(rec));
        }
    }
    return records;
}

SweepTable sweep_misreporting(const Scenario& base) {
    SweepTable table;
    table.x_name = "rho";
    for (double rho : {0.0, 0.1, 0.2, 0.3}) {
        Scenario s = base;
        s.rho = rho;
        append_sweep_rows(table, s, rho, run_scenario(s));
    }
    return table;
}

SweepTable sweep_privacy(const Scenario& base) {
    SweepTable table;
    table.x_name = "epsilon";
    for (double eps : {0.1, 0.5, 1.0, 2.0}) {
        Scenario s = base;
        s.epsilon = eps;
        append_sweep_rows(table, s, eps, run_scenario(s));
    }
    return table;
}

InterbankResult interbank_study(const InterbankConfig& config) {
    if (config.categories == 0 || config.categories > config.n)
        throw ParameterError("category count must be in [1, n]");
    InterbankResult result;
    result.truth = gen_interbank(config.n, config.p0, config.alpha, config.noise_scale,
                                 SizeDist::lognormal(config.size_mu, config.size_sigma),
                                 config.seed);

    // Size-quantile trait groups (smallest banks in group 0).
    std::vector<NodeId> order(config.n);
    std::iota(order.begin(), order.end(), 0);
    const auto& sizes = result.truth.sizes();
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId a, NodeId b) { return sizes[a] < sizes[b]; });
    std::vector<std::vector<NodeId>> groups(config.categories);
    for (std::size_t idx = 0; idx < order.size(); ++idx)
        groups[idx * config.categories / order.size()].push_back(order[idx]);
    TraitPartition traits(config.n, std::move(groups));

    const ArdMatrix ard = compute_ard(result.truth, traits);
    fpr::FprConfig cfg;
    cfg.penalty = fpr::PenaltySpec::l1(config.lambda);
    cfg.deviance.kind = fpr::DevianceKind::Huber;
    cfg.max_iters = config.max_iters;
    cfg.accelerate = true;
    cfg.seed = config.seed;
    const fpr::FprModel model = fpr::fit(ard, traits, cfg);

    const auto pairs = blsm::all_pairs(config.n);
    const auto preds = fpr::predict_links(model, traits, pairs);
    result.auc = auc(result.truth, preds);

    result.reconstructed = Graph(config.n);
    for (std::size_t idx = 0; idx < pairs.size(); ++idx)
        if (preds[idx] > config.threshold)
            result.reconstructed.add_edge(pairs[idx].first, pairs[idx].second);
    result.reconstructed.finalize();

    result.risk = risk_rank(result.reconstructed, config.w_deg, config.w_btw);
    return result;
}

std::vector<TimingRow> benchmark(const std::vector<std::size_t>& sizes,
                                 const std::vector<Method>& methods, const Scenario& base) {
    if (sizes.empty() || methods.empty()) throw ParameterError("benchmark needs sizes and methods");
    std::vector<TimingRow> rows;
    for (std::size_t n : sizes) {
        Scenario s = base;
        s.n = n;
        const PipelineData data = build_pipeline(s, 0);
        for (Method m : methods) {
            TimingRow row;
            row.n = n;
            row.method = m;
            const auto start = std::chrono::steady_clock::now();
            const FitOutcome fitres = fit_method(m, data, s, mix_seed(s.seed, std::size_t(m)));
            row.seconds = elapsed_seconds(start);
            row.auc = auc(data.g, fitres.predictions);
            rows.push_back(row);
        }
    }
    return rows;
}

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("bad scenario config: ") + e.what());
    }
    Scenario s;
    s.name = j.value("name", s.name);
    s.n = j.value("n", s.n);
    s.K = j.value("K", s.K);
    s.coverage = j.value("coverage", s.coverage);
    s.overlap = j.value("overlap", s.overlap);
    s.rho = j.value("rho", s.rho);
    s.max_frac = j.value("max_frac", s.max_frac);
    if (j.contains("epsilon") && !j["epsilon"].is_null())
        s.epsilon = j["epsilon"].get<double>();
    s.replications = j.value("replications", s.replications);
    s.seed = j.value("seed", s.seed);

    if (j.contains("generator")) {
        const json& g = j["generator"];
        const std::string kind = g.value("kind", "scale-free");
        if (kind == "scale-free")
            s.generator.kind = GeneratorSpec::Kind::ScaleFree;
        else if (kind == "small-world")
            s.generator.kind = GeneratorSpec::Kind::SmallWorld;
        else if (kind == "interbank")
            s.generator.kind = GeneratorSpec::Kind::Interbank;
        else if (kind == "latent")
            s.generator.kind = GeneratorSpec::Kind::Latent;
        else
            throw ParameterError("unknown generator kind '" + kind + "'");
        s.generator.gamma = g.value("gamma", s.generator.gamma);
        s.generator.k_min = g.value("k_min", s.generator.k_min);
        s.generator.k = g.value("k", s.generator.k);
        s.generator.rewire = g.value("rewire", s.generator.rewire);
        s.generator.p0 = g.value("p0", s.generator.p0);
        s.generator.alpha = g.value("alpha", s.generator.alpha);
        s.generator.noise_scale = g.value("noise_scale", s.generator.noise_scale);
        s.generator.size_mu = g.value("size_mu", s.generator.size_mu);
        s.generator.size_sigma = g.value("size_sigma", s.generator.size_sigma);
        s.generator.zeta = g.value("zeta", s.generator.zeta);
        s.generator.v_mu = g.value("v_mu", s.generator.v_mu);
        s.generator.v_sigma = g.value("v_sigma", s.generator.v_sigma);
        s.generator.latent_p = g.value("latent_p", s.generator.latent_p);
    }
    if (j.contains("weights")) {
        const json& w = j["weights"];
        s.weights.enabled = w.value("enabled", true);
        s.weights.r = w.value("r", s.weights.r);
        s.weights.q = w.value("q", s.weights.q);
    }
    if (j.contains("methods")) {
        s.methods.clear();
        for (const auto& m : j["methods"]) s.methods.push_back(method_from_string(m));
    }
    if (j.contains("knobs")) {
        const json& k = j["knobs"];
        s.knobs.latent_p = k.value("latent_p", s.knobs.latent_p);
        s.knobs.mcmc_iters = k.value("mcmc_iters", s.knobs.mcmc_iters);
        s.knobs.mcmc_burnin = k.value("mcmc_burnin", s.knobs.mcmc_burnin);
        s.knobs.mcmc_thin = k.value("mcmc_thin", s.knobs.mcmc_thin);
        s.knobs.vi_steps = k.value("vi_steps", s.knobs.vi_steps);
        s.knobs.vi_samples = k.value("vi_samples", s.knobs.vi_samples);
        s.knobs.vi_learning_rate = k.value("vi_learning_rate", s.knobs.vi_learning_rate);
        s.knobs.fpr_lambda = k.value("fpr_lambda", s.knobs.fpr_lambda);
        s.knobs.fpr_max_iters = k.value("fpr_max_iters", s.knobs.fpr_max_iters);
        s.knobs.fpr_huber_delta = k.value("fpr_huber_delta", s.knobs.fpr_huber_delta);
    }
    return s;
}

namespace {

std::vector<std::vector<std::string>> record_rows(const std::vector<RunRecord>& records) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& rec : records) {
        std::vector<std::string> row;
        row.push_back(rec.scenario);
        row.push_back(to_string(rec.method));
        row.push_back(std::to_string(rec.replication));
        row.push_back(std::to_string(rec.seed));
        row.push_back(std::to_string(rec.metrics.n));
        row.push_back(std::to_string(rec.metrics.K));
        row.push_back(io::format_double(rec.metrics.rho));
        row.push_back(rec.metrics.epsilon ? io::format_double(*rec.metrics.epsilon) : "");
        row.push_back(io::format_double(rec.metrics.auc));
        row.push_back(io::format_double(rec.metrics.rmse));
        row.push_back(rec.metrics.procrustes_error
                          ? io::format_double(*rec.metrics.procrustes_error)
                          : "");
        row.push_back(io::format_double(rec.metrics.runtime_seconds));
        row.push_back(rec.status);
        rows.push_back(std::move(row));
    }
    return rows;
}

const std::vector<std::string> kRunColumns = {
    "scenario", "method", "replication", "seed",       "n",
    "K",        "rho",    "epsilon",     "auc",        "rmse",
    "procrustes_error",   "runtime_seconds",           "status"};

void write_runs(const std::string& path, const std::vector<RunRecord>& records) {
    io::write_csv(path, kRunColumns, record_rows(records));
}

void write_sweep(const std::string& path, const SweepTable& table) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : table.rows)
        rows.push_back({io::format_double(row.x), to_string(row.method),
                        io::format_double(row.auc_mean), io::format_double(row.auc_sd),
                        io::format_double(row.rmse_mean), io::format_double(row.rmse_sd)});
    io::write_csv(path, {table.x_name, "method", "auc_mean", "auc_sd", "rmse_mean", "rmse_sd"},
                  rows);
}

}  // namespace

ExperimentOutput run_experiment(const std::string& config_text, const std::string& out_dir) {
    json j;
    try {
        j = json::parse(config_text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("bad scenario config: ") + e.what());
    }
    const std::string sweep = j.value("sweep", "single");
    Scenario s = scenario_from_json_text(config_text);
    std::filesystem::create_directories(out_dir);
    const auto at = [&](const std::string& name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    ExperimentOutput out;
    if (sweep == "single") {
        write_runs(at("runs.csv"), run_scenario(s));
        out.files.push_back(at("runs.csv"));
    } else if (sweep == "misreporting") {
        const SweepTable table = sweep_misreporting(s);
        write_sweep(at("fig5_3_misreporting.csv"), table);
        write_runs(at("runs.csv"), table.records);
        out.files.push_back(at("fig5_3_misreporting.csv"));
        out.files.push_back(at("runs.csv"));
    } else if (sweep == "privacy") {
        const SweepTable table = sweep_privacy(s);
        write_sweep(at("fig5_5_privacy.csv"), table);
        write_runs(at("runs.csv"), table.records);
        out.files.push_back(at("fig5_5_privacy.csv"));
        out.files.push_back(at("runs.csv"));
    } else if (sweep == "interbank") {
        InterbankConfig cfg;
        cfg.n = s.n;
        cfg.p0 = s.generator.p0;
        cfg.alpha = s.generator.alpha;
        cfg.noise_scale = s.generator.noise_scale;
        cfg.size_mu = s.generator.size_mu;
        cfg.size_sigma = s.generator.size_sigma;
        cfg.categories = j.value("categories", cfg.categories);
        cfg.lambda = j.value("lambda", s.knobs.fpr_lambda);
        cfg.max_iters = s.knobs.fpr_max_iters;
        cfg.threshold = j.value("threshold", cfg.threshold);
        cfg.w_deg = j.value("w_deg", cfg.w_deg);
        cfg.w_btw = j.value("w_btw", cfg.w_btw);
        cfg.seed = s.seed;
        const InterbankResult res = interbank_study(cfg);
        io::write_risk(at("fig6_1_risk.csv"), res.risk);
        io::write_edges(at("interbank_edges.csv"), res.reconstructed);
        io::write_edges(at("interbank_truth_edges.csv"), res.truth);
        io::write_csv(at("interbank_summary.csv"), {"n", "auc", "threshold"},
                      {{std::to_string(cfg.n), io::format_double(res.auc),
                        io::format_double(cfg.threshold)}});
        out.files = {at("fig6_1_risk.csv"), at("interbank_edges.csv"),
                     at("interbank_truth_edges.csv"), at("interbank_summary.csv")};
    } else if (sweep == "benchmark") {
        std::vector<std::size_t> sizes = {250, 500, 1000};
        if (j.contains("sizes")) {
            sizes.clear();
            for (const auto& v : j["sizes"]) sizes.push_back(v.get<std::size_t>());
        }
        const auto rows = benchmark(sizes, s.methods, s);
        std::vector<std::vector<std::string>> csv_rows;
        for (const auto& row : rows)
            csv_rows.push_back({std::to_string(row.n), to_string(row.method),
                                io::format_double(row.seconds), io::format_double(row.auc)});
        io::write_csv(at("tab_a1_benchmark.csv"), {"n", "method", "seconds", "auc"}, csv_rows);
        out.files.push_back(at("tab_a1_benchmark.csv"));
    } else {
        throw ParameterError("unknown sweep kind '" + sweep + "'");
    }

    json manifest;
    char hash_hex[20];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(io::fnv1a_hash(config_text)));
    manifest["config_hash"] = hash_hex;
    manifest["scenario"] = s.name;
    manifest["sweep"] = sweep;
    manifest["seed"] = s.seed;
    manifest["versions"] = {{"ardnet", "1.0.0"}, {"compiler", __VERSION__}};
    manifest["outputs"] = json::array();
    for (const auto& f : out.files)
        manifest["outputs"].push_back(std::filesystem::path(f).filename().string());
    std::ofstream mf(at("manifest.json"));
    if (!mf) throw DataError("cannot open " + at("manifest.json") + " for writing");
    mf << manifest.dump(2) << '\n';
    out.files.push_back(at("manifest.json"));
    return out;
}

}  // namespace ardnet::harness
