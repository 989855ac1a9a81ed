#include "ardnet/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ardnet::io {

using nlohmann::json;

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("bad numeric field '" + s + "' in " + path);
    }
}

std::uint64_t parse_u64(const std::string& s, const std::string& path) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("bad integer field '" + s + "' in " + path);
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot open " + path + " for writing");
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path);
    return f;
}

void expect_header(const CsvTable& table, const std::vector<std::string>& expected,
                   const std::string& path) {
    if (table.header != expected) throw DataError("unexpected column header in " + path);
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream f = open_in(path);
    CsvTable table;
    std::string line;
    if (!std::getline(f, line)) throw DataError("empty file " + path);
    table.header = split_line(line);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        table.rows.push_back(split_line(line));
        if (table.rows.back().size() != table.header.size())
            throw DataError("ragged row in " + path);
    }
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream f = open_out(path);
    for (std::size_t c = 0; c < header.size(); ++c) f << (c ? "," : "") << header[c];
    f << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) f << (c ? "," : "") << row[c];
        f << '\n';
    }
}

void write_edges(const std::string& path, const Graph& g) {
    std::ofstream f = open_out(path);
    const bool w = g.weighted();
    f << (w ? "src,dst,weight\n" : "src,dst\n");
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        const Edge& edge = g.edges()[e];
        f << edge.a << ',' << edge.b;
        if (w) f << ',' << g.weights()[e];
        f << '\n';
    }
}

Graph read_edges(const std::string& path, std::size_t n_hint) {
    const CsvTable table = read_csv(path);
    const bool weighted = table.header == std::vector<std::string>{"src", "dst", "weight"};
    if (!weighted) expect_header(table, {"src", "dst"}, path);
    std::size_t n = n_hint;
    struct Row {
        NodeId a, b;
        std::uint32_t w;
    };
    std::vector<Row> rows;
    rows.reserve(table.rows.size());
    for (const auto& r : table.rows) {
        Row row{};
        row.a = static_cast<NodeId>(parse_u64(r[0], path));
        row.b = static_cast<NodeId>(parse_u64(r[1], path));
        row.w = weighted ? static_cast<std::uint32_t>(parse_u64(r[2], path)) : 1;
        n = std::max(n, std::size_t(std::max(row.a, row.b)) + 1);
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(),
              [](const Row& x, const Row& y) { return Edge(x.a, x.b) < Edge(y.a, y.b); });
    Graph g(n);
    for (const Row& row : rows) g.add_edge(row.a, row.b);
    if (weighted) {
        std::vector<std::uint32_t> w;
        w.reserve(rows.size());
        for (const Row& row : rows) w.push_back(row.w);
        g.set_weights(std::move(w));
    }
    return g;
}

void write_sizes(const std::string& path, const Graph& g) {
    if (!g.has_sizes()) throw StateError("graph carries no node sizes");
    std::ofstream f = open_out(path);
    f << "node,size\n";
    for (std::size_t i = 0; i < g.n(); ++i)
        f << i << ',' << format_double(g.sizes()[i]) << '\n';
}

std::vector<double> read_sizes(const std::string& path, std::size_t n_hint) {
    const CsvTable table = read_csv(path);
    expect_header(table, {"node", "size"}, path);
    std::size_t n = n_hint;
    std::vector<std::pair<std::size_t, double>> entries;
    for (const auto& r : table.rows) {
        const std::size_t node = parse_u64(r[0], path);
        n = std::max(n, node + 1);
        entries.emplace_back(node, parse_double(r[1], path));
    }
    std::vector<double> sizes(n, 0.0);
    for (const auto& [node, size] : entries) sizes[node] = size;
    return sizes;
}

void write_traits(const std::string& path, const TraitPartition& t) {
    std::ofstream f = open_out(path);
    f << "node,trait\n";
    for (std::size_t k = 0; k < t.num_traits(); ++k)
        for (NodeId i : t.group(k)) f << i << ',' << k << '\n';
}

TraitPartition read_traits(const std::string& path, std::size_t n_hint, std::size_t k_hint) {
    const CsvTable table = read_csv(path);
    expect_header(table, {"node", "trait"}, path);
    std::size_t n = n_hint, K = k_hint;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& r : table.rows) {
        const std::size_t node = parse_u64(r[0], path);
        const std::size_t trait = parse_u64(r[1], path);
        n = std::max(n, node + 1);
        K = std::max(K, trait + 1);
        pairs.emplace_back(node, trait);
    }
    std::vector<std::vector<NodeId>> groups(K);
    for (const auto& [node, trait] : pairs) groups[trait].push_back(static_cast<NodeId>(node));
    return TraitPartition(n, std::move(groups));
}

std::string ard_meta_path(const std::string& path) { return path + ".meta.json"; }

void write_ard(const std::string& path, const ArdMatrix& ard, std::optional<double> rho,
               std::optional<double> epsilon, std::uint64_t seed) {
    std::ofstream f = open_out(path);
    f << "node";
    for (std::size_t k = 1; k <= ard.K; ++k) f << ",y_" << k;
    f << '\n';
    for (std::size_t i = 0; i < ard.n; ++i) {
        f << i;
        for (std::size_t k = 0; k < ard.K; ++k) f << ',' << ard.at(i, k);
        f << '\n';
    }
    json meta;
    meta["provenance"] = to_string(ard.provenance);
    meta["rho"] = rho ? json(*rho) : json(nullptr);
    meta["epsilon"] = epsilon ? json(*epsilon) : json(nullptr);
    meta["seed"] = seed;
    json flagged = json::array();
    for (std::size_t i = 0; i < ard.misreporter.size(); ++i)
        if (ard.misreporter[i]) flagged.push_back(i);
    meta["misreporters"] = flagged;
    std::ofstream mf = open_out(ard_meta_path(path));
    mf << meta.dump(2) << '\n';
}

ArdWithMeta read_ard(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.empty() || table.header[0] != "node")
        throw DataError("unexpected column header in " + path);
    const std::size_t K = table.header.size() - 1;
    for (std::size_t k = 1; k <= K; ++k)
        if (table.header[k] != "y_" + std::to_string(k))
            throw DataError("unexpected column header in " + path);
    const std::size_t n = table.rows.size();
    ArdWithMeta out;
    out.ard.n = n;
    out.ard.K = K;
    out.ard.counts.assign(n * K, 0);
    for (const auto& r : table.rows) {
        const std::size_t node = parse_u64(r[0], path);
        if (node >= n) throw DataError("node id out of range in " + path);
        for (std::size_t k = 0; k < K; ++k)
            out.ard.counts[node * K + k] =
                static_cast<std::int64_t>(parse_u64(r[1 + k], path));
    }
    std::ifstream mf(ard_meta_path(path));
    if (mf) {
        json meta = json::parse(mf);
        out.ard.provenance = ard_provenance_from_string(meta.value("provenance", "clean"));
        if (meta.contains("rho") && !meta["rho"].is_null()) out.rho = meta["rho"].get<double>();
        if (meta.contains("epsilon") && !meta["epsilon"].is_null())
            out.epsilon = meta["epsilon"].get<double>();
        out.seed = meta.value("seed", std::uint64_t(0));
        out.ard.misreporter.assign(n, 0);
        if (meta.contains("misreporters"))
            for (const auto& idx : meta["misreporters"]) {
                const std::size_t i = idx.get<std::size_t>();
                if (i < n) out.ard.misreporter[i] = 1;
            }
    }
    return out;
}

void write_embedding(const std::string& path, const std::vector<double>& z, std::size_t n,
                     std::size_t d) {
    if (z.size() != n * d) throw ParameterError("embedding shape mismatch");
    std::ofstream f = open_out(path);
    f << "node";
    for (std::size_t c = 0; c < d; ++c) f << ",c_" << c;
    f << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        f << i;
        for (std::size_t c = 0; c < d; ++c) f << ',' << format_double(z[i * d + c]);
        f << '\n';
    }
}

EmbeddingData read_embedding(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.empty() || table.header[0] != "node")
        throw DataError("unexpected column header in " + path);
    EmbeddingData out;
    out.d = table.header.size() - 1;
    out.n = table.rows.size();
    out.z.assign(out.n * out.d, 0.0);
    for (const auto& r : table.rows) {
        const std::size_t node = parse_u64(r[0], path);
        if (node >= out.n) throw DataError("node id out of range in " + path);
        for (std::size_t c = 0; c < out.d; ++c)
            out.z[node * out.d + c] = parse_double(r[1 + c], path);
    }
    return out;
}

void write_posterior(const std::string& path, const blsm::PosteriorSamples& samples) {
    std::ofstream f = open_out(path);
    f << "draw";
    for (std::size_t i = 0; i < samples.n; ++i) f << ",v_" << i;
    for (std::size_t i = 0; i < samples.n; ++i)
        for (std::size_t c = 0; c < samples.d; ++c) f << ",z_" << i << '_' << c;
    f << ",zeta\n";
    for (std::size_t s = 0; s < samples.draws.size(); ++s) {
        const auto& draw = samples.draws[s];
        f << s;
        for (double v : draw.v) f << ',' << format_double(v);
        for (double zc : draw.z) f << ',' << format_double(zc);
        f << ',' << format_double(draw.zeta) << '\n';
    }
}

blsm::PosteriorSamples read_posterior(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (table.header.size() < 3 || table.header.front() != "draw" ||
        table.header.back() != "zeta")
        throw DataError("unexpected column header in " + path);
    std::size_t n = 0, nd = 0;
    for (const auto& name : table.header) {
        if (name.rfind("v_", 0) == 0) ++n;
        if (name.rfind("z_", 0) == 0) ++nd;
    }
    if (n == 0 || nd % n != 0) throw DataError("malformed posterior header in " + path);
    const std::size_t d = nd / n;
    blsm::PosteriorSamples samples;
    samples.n = n;
    samples.d = d;
    for (const auto& r : table.rows) {
        blsm::BlsmParams draw(n, d);
        for (std::size_t i = 0; i < n; ++i) draw.v[i] = parse_double(r[1 + i], path);
        for (std::size_t i = 0; i < nd; ++i) draw.z[i] = parse_double(r[1 + n + i], path);
        draw.zeta = parse_double(r.back(), path);
        samples.draws.push_back(std::move(draw));
    }
    return samples;
}

void write_diagnostics(const std::string& path, const blsm::Diagnostics& diag) {
    std::ofstream f = open_out(path);
    const bool has_gr = !diag.gelman_rubin.empty();
    f << (has_gr ? "name,ess,gelman_rubin\n" : "name,ess\n");
    for (std::size_t i = 0; i < diag.names.size(); ++i) {
        f << diag.names[i] << ',' << format_double(diag.ess[i]);
        if (has_gr) f << ',' << format_double(diag.gelman_rubin[i]);
        f << '\n';
    }
}

void write_model(const std::string& path, const fpr::FprModel& model) {
    std::ofstream f = open_out(path);
    f << "index,name,value\n";
    for (std::size_t idx = 0; idx < model.beta.size(); ++idx)
        f << idx << ',' << fpr::feature_name(idx, model.n, model.K) << ','
          << format_double(model.beta[idx]) << '\n';
}

fpr::FprModel read_model(const std::string& path) {
    const CsvTable table = read_csv(path);
    expect_header(table, {"index", "name", "value"}, path);
    std::size_t n = 0, npairs = 0;
    for (const auto& r : table.rows) {
        if (r[1].rfind("node:", 0) == 0) ++n;
        if (r[1].rfind("traitpair:", 0) == 0) ++npairs;
    }
    // npairs = K(K+1)/2
    const std::size_t K = npairs ? (std::size_t(std::sqrt(8.0 * double(npairs) + 1.0)) - 1) / 2 : 0;
    if (K * (K + 1) / 2 != npairs) throw DataError("malformed coefficient names in " + path);
    fpr::FprModel model;
    model.n = n;
    model.K = K;
    model.beta.assign(fpr::feature_dim(n, K), 0.0);
    if (table.rows.size() != model.beta.size())
        throw DataError("coefficient count mismatch in " + path);
    for (const auto& r : table.rows) {
        const std::size_t idx = parse_u64(r[0], path);
        if (idx >= model.beta.size() || r[1] != fpr::feature_name(idx, n, K))
            throw DataError("coefficient name mismatch in " + path);
        model.beta[idx] = parse_double(r[2], path);
    }
    return model;
}

void write_predictions(const std::string& path,
                       const std::vector<std::pair<NodeId, NodeId>>& pairs,
                       const std::vector<double>& scores) {
    if (pairs.size() != scores.size()) throw ParameterError("pair/score length mismatch");
    std::ofstream f = open_out(path);
    f << "src,dst,score\n";
    for (std::size_t idx = 0; idx < pairs.size(); ++idx)
        f << pairs[idx].first << ',' << pairs[idx].second << ','
          << format_double(scores[idx]) << '\n';
}

Predictions read_predictions(const std::string& path) {
    const CsvTable table = read_csv(path);
    expect_header(table, {"src", "dst", "score"}, path);
    Predictions out;
    for (const auto& r : table.rows) {
        out.pairs.emplace_back(static_cast<NodeId>(parse_u64(r[0], path)),
                               static_cast<NodeId>(parse_u64(r[1], path)));
        out.scores.push_back(parse_double(r[2], path));
    }
    return out;
}

void write_risk(const std::string& path, const RiskTable& table) {
    std::ofstream f = open_out(path);
    f << "node_id,degree,betweenness,risk_rank\n";
    for (const auto& row : table.rows)
        f << row.node_id << ',' << row.degree << ',' << format_double(row.betweenness) << ','
          << row.risk_rank << '\n';
}

RiskTable read_risk(const std::string& path) {
    const CsvTable table = read_csv(path);
    expect_header(table, {"node_id", "degree", "betweenness", "risk_rank"}, path);
    RiskTable out;
    for (const auto& r : table.rows) {
        RiskRow row;
        row.node_id = static_cast<NodeId>(parse_u64(r[0], path));
        row.degree = static_cast<std::uint32_t>(parse_u64(r[1], path));
        row.betweenness = parse_double(r[2], path);
        row.risk_rank = static_cast<std::uint32_t>(parse_u64(r[3], path));
        out.rows.push_back(row);
    }
    return out;
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace ardnet::io
