#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ardnet/ard.hpp"
#include "ardnet/blsm.hpp"
#include "ardnet/eval.hpp"
#include "ardnet/fpr.hpp"
#include "ardnet/graph.hpp"
#include "ardnet/traits.hpp"

namespace ardnet::io {

// Doubles are printed with enough digits to round-trip exactly.
std::string format_double(double value);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Edge list: src,dst[,weight], one undirected edge per row, src < dst.
void write_edges(const std::string& path, const Graph& g);
Graph read_edges(const std::string& path, std::size_t n_hint = 0);

// node,size
void write_sizes(const std::string& path, const Graph& g);
std::vector<double> read_sizes(const std::string& path, std::size_t n_hint = 0);

// node,trait membership pairs.
void write_traits(const std::string& path, const TraitPartition& t);
TraitPartition read_traits(const std::string& path, std::size_t n_hint = 0,
                           std::size_t k_hint = 0);

// node,y_1..y_K plus a JSON sidecar (<path>.meta.json) recording provenance,
// rho, epsilon, seed, and any flagged misreporters.
struct ArdWithMeta {
    ArdMatrix ard;
    std::optional<double> rho;
    std::optional<double> epsilon;
    std::uint64_t seed = 0;
};

void write_ard(const std::string& path, const ArdMatrix& ard, std::optional<double> rho,
               std::optional<double> epsilon, std::uint64_t seed);
ArdWithMeta read_ard(const std::string& path);

std::string ard_meta_path(const std::string& path);

// node,c_0..c_{d-1} unit rows.
void write_embedding(const std::string& path, const std::vector<double>& z, std::size_t n,
                     std::size_t d);
struct EmbeddingData {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> z;  // row-major
};
EmbeddingData read_embedding(const std::string& path);

// One row per stored draw: draw,v_0..v_{n-1},z_0_0..z_{n-1}_{d-1},zeta.
void write_posterior(const std::string& path, const blsm::PosteriorSamples& samples);
blsm::PosteriorSamples read_posterior(const std::string& path);

void write_diagnostics(const std::string& path, const blsm::Diagnostics& diag);

// index,name,value with names intercept / node:i / traitpair:k:l.
void write_model(const std::string& path, const fpr::FprModel& model);
fpr::FprModel read_model(const std::string& path);

// src,dst,score link predictions.
void write_predictions(const std::string& path,
                       const std::vector<std::pair<NodeId, NodeId>>& pairs,
                       const std::vector<double>& scores);
struct Predictions {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    std::vector<double> scores;
};
Predictions read_predictions(const std::string& path);

// node_id,degree,betweenness,risk_rank rows in rank order.
void write_risk(const std::string& path, const RiskTable& table);
RiskTable read_risk(const std::string& path);

// Stable 64-bit FNV-1a hash of a string (used for config fingerprints).
std::uint64_t fnv1a_hash(const std::string& text);

}  // namespace ardnet::io
