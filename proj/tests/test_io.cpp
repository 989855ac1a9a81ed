#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "ardnet/ard.hpp"
#include "ardnet/eval.hpp"
#include "ardnet/graphgen.hpp"
#include "ardnet/io.hpp"

using namespace ardnet;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("ardnet_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

}  // namespace

TEST_CASE("doubles survive a text round trip bit for bit") {
    const double values[] = {0.0,      1.0,        -1.5,          1.0 / 3.0,
                             1e-300,   1e300,      3.141592653589793, -0.1,
                             5e-324,   1.7976931348623157e308};
    for (double v : values) {
        const std::string s = io::format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("edge lists round trip, weighted and not") {
    TempDir dir;
    const Graph g = gen_small_world(25, 4, 0.3, 1);
    io::write_edges(dir.file("plain.csv"), g);
    const Graph back = io::read_edges(dir.file("plain.csv"));
    CHECK(back.n() == g.n());
    CHECK(back.edges() == g.edges());
    CHECK_FALSE(back.weighted());

    const Graph w = add_negbin_weights(g, 2.0, 0.5, 2);
    io::write_edges(dir.file("weighted.csv"), w);
    const Graph wback = io::read_edges(dir.file("weighted.csv"));
    CHECK(wback.edges() == w.edges());
    CHECK(wback.weights() == w.weights());
}

TEST_CASE("edge reader honors the size hint for isolated tail nodes") {
    TempDir dir;
    Graph g(6);
    g.add_edge(0, 1);
    g.finalize();
    io::write_edges(dir.file("e.csv"), g);
    CHECK(io::read_edges(dir.file("e.csv")).n() == 2);
    CHECK(io::read_edges(dir.file("e.csv"), 6).n() == 6);
}

TEST_CASE("node sizes round trip") {
    TempDir dir;
    const Graph g = gen_interbank(30, 0.1, 0.01, 0.02, SizeDist::lognormal(), 3);
    io::write_sizes(dir.file("sizes.csv"), g);
    const auto sizes = io::read_sizes(dir.file("sizes.csv"));
    REQUIRE(sizes.size() == 30);
    for (std::size_t i = 0; i < 30; ++i) CHECK(sizes[i] == g.sizes()[i]);
}

TEST_CASE("trait memberships round trip") {
    TempDir dir;
    const TraitPartition t = assign_traits(50, 4, 0.3, 0.3, 4);
    io::write_traits(dir.file("traits.csv"), t);
    const TraitPartition back = io::read_traits(dir.file("traits.csv"));
    REQUIRE(back.num_traits() == t.num_traits());
    CHECK(back.n() == t.n());
    for (std::size_t k = 0; k < t.num_traits(); ++k) CHECK(back.group(k) == t.group(k));
}

TEST_CASE("ard matrices round trip with their sidecar metadata") {
    TempDir dir;
    const Graph g = gen_small_world(20, 4, 0.2, 5);
    const TraitPartition t = assign_traits(20, 3, 0.3, 0.3, 6);
    const ArdMatrix clean = compute_ard(g, t);
    const ArdMatrix noisy = inject_misreporting(clean, 0.3, 0.2, 7);

    io::write_ard(dir.file("ard.csv"), noisy, 0.3, std::nullopt, 7);
    CHECK(std::filesystem::exists(io::ard_meta_path(dir.file("ard.csv"))));
    const io::ArdWithMeta back = io::read_ard(dir.file("ard.csv"));
    CHECK(back.ard.counts == noisy.counts);
    CHECK(back.ard.n == noisy.n);
    CHECK(back.ard.K == noisy.K);
    CHECK(back.ard.provenance == ArdProvenance::Misreported);
    CHECK(back.ard.misreporter == noisy.misreporter);
    REQUIRE(back.rho.has_value());
    CHECK(*back.rho == 0.3);
    CHECK_FALSE(back.epsilon.has_value());
    CHECK(back.seed == 7);
}

TEST_CASE("embeddings round trip") {
    TempDir dir;
    const std::size_t n = 12, d = 3;
    std::vector<double> z(n * d);
    Rng rng = make_rng(8);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            z[i * d + c] = gauss(rng);
            norm += z[i * d + c] * z[i * d + c];
        }
        for (std::size_t c = 0; c < d; ++c) z[i * d + c] /= std::sqrt(norm);
    }
    io::write_embedding(dir.file("z.csv"), z, n, d);
    const io::EmbeddingData back = io::read_embedding(dir.file("z.csv"));
    CHECK(back.n == n);
    CHECK(back.d == d);
    CHECK(back.z == z);
}

TEST_CASE("posterior draws round trip") {
    TempDir dir;
    blsm::PosteriorSamples s;
    s.n = 3;
    s.d = 2;
    Rng rng = make_rng(9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int draw = 0; draw < 4; ++draw) {
        blsm::BlsmParams p;
        p.n = 3;
        p.d = 2;
        p.v = {gauss(rng), gauss(rng), gauss(rng)};
        p.z.resize(6);
        for (std::size_t i = 0; i < 3; ++i) {
            const double a = gauss(rng), b = gauss(rng), norm = std::hypot(a, b);
            p.z[i * 2] = a / norm;
            p.z[i * 2 + 1] = b / norm;
        }
        p.zeta = std::abs(gauss(rng)) + 0.1;
        s.draws.push_back(p);
        s.log_likelihood.push_back(gauss(rng));
        s.log_posterior.push_back(gauss(rng));
    }
    io::write_posterior(dir.file("post.csv"), s);
    const auto back = io::read_posterior(dir.file("post.csv"));
    REQUIRE(back.draws.size() == 4);
    CHECK(back.n == 3);
    CHECK(back.d == 2);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(back.draws[k].v == s.draws[k].v);
        CHECK(back.draws[k].z == s.draws[k].z);
        CHECK(back.draws[k].zeta == s.draws[k].zeta);
    }
}

TEST_CASE("fpr models round trip with readable coefficient names") {
    TempDir dir;
    fpr::FprModel m;
    m.n = 4;
    m.K = 2;
    m.beta.assign(fpr::feature_dim(4, 2), 0.0);
    m.beta[0] = -1.25;
    m.beta[1] = 0.5;
    m.beta[fpr::trait_pair_coord(0, 1, 4, 2)] = 2.0 / 3.0;
    io::write_model(dir.file("model.csv"), m);
    const auto back = io::read_model(dir.file("model.csv"));
    CHECK(back.n == 4);
    CHECK(back.K == 2);
    CHECK(back.beta == m.beta);

    const auto table = io::read_csv(dir.file("model.csv"));
    REQUIRE(table.header.size() == 3);
    CHECK(table.header[1] == "name");
    CHECK(table.rows[0][1] == "intercept");
}

TEST_CASE("predictions and risk tables round trip") {
    TempDir dir;
    std::vector<std::pair<NodeId, NodeId>> pairs = {{0, 1}, {0, 2}, {1, 2}};
    std::vector<double> scores = {0.25, 1.0 / 7.0, 0.99};
    io::write_predictions(dir.file("pred.csv"), pairs, scores);
    const auto pback = io::read_predictions(dir.file("pred.csv"));
    CHECK(pback.pairs == pairs);
    CHECK(pback.scores == scores);

    Graph star(5);
    for (NodeId leaf = 1; leaf < 5; ++leaf) star.add_edge(0, leaf);
    star.finalize();
    const RiskTable table = risk_rank(star, 0.5, 0.5);
    io::write_risk(dir.file("risk.csv"), table);
    const RiskTable rback = io::read_risk(dir.file("risk.csv"));
    REQUIRE(rback.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        CHECK(rback.rows[i].node_id == table.rows[i].node_id);
        CHECK(rback.rows[i].degree == table.rows[i].degree);
        CHECK(rback.rows[i].betweenness == table.rows[i].betweenness);
        CHECK(rback.rows[i].risk_rank == table.rows[i].risk_rank);
    }
    const auto raw = io::read_csv(dir.file("risk.csv"));
    CHECK(raw.header == std::vector<std::string>{"node_id", "degree", "betweenness", "risk_rank"});
}

TEST_CASE("generic csv tables round trip") {
    TempDir dir;
    const std::vector<std::string> header = {"step", "elbo"};
    const std::vector<std::vector<std::string>> rows = {{"0", "-12.5"}, {"1", "-10.25"}};
    io::write_csv(dir.file("trace.csv"), header, rows);
    const auto back = io::read_csv(dir.file("trace.csv"));
    CHECK(back.header == header);
    CHECK(back.rows == rows);
}

TEST_CASE("readers reject malformed files") {
    TempDir dir;
    CHECK_THROWS_AS(io::read_csv(dir.file("missing.csv")), DataError);
    io::write_csv(dir.file("bad.csv"), {"src", "dst"}, {{"0", "zero"}});
    CHECK_THROWS_AS(io::read_edges(dir.file("bad.csv")), DataError);
}
