#pragma once

#include <cstdint>
#include <vector>

#include "ardnet/common.hpp"
#include "ardnet/graph.hpp"

namespace ardnet {

// K node subsets G_k (possibly overlapping) defining the ARD questions.
class TraitPartition {
public:
    TraitPartition() = default;
    TraitPartition(std::size_t n, std::vector<std::vector<NodeId>> groups);

    std::size_t n() const { return n_; }
    std::size_t num_traits() const { return groups_.size(); }
    const std::vector<std::vector<NodeId>>& groups() const { return groups_; }
    const std::vector<NodeId>& group(std::size_t k) const { return groups_[k]; }
    // Traits node i belongs to.
    const std::vector<std::uint32_t>& memberships(NodeId i) const { return member_of_[i]; }
    bool contains(std::size_t k, NodeId i) const;
    // Group size excluding node i itself.
    std::size_t group_size_excluding(std::size_t k, NodeId i) const;
    // Max number of traits any single node carries (DP query sensitivity).
    std::size_t max_traits_per_node() const;

private:
    std::size_t n_ = 0;
    std::vector<std::vector<NodeId>> groups_;         // each sorted ascending
    std::vector<std::vector<std::uint32_t>> member_of_;
};

// Builds K trait groups of ceil(coverage*n) members each: nodes are first
// shuffled into K blocks, then each trait takes members of its own block plus
// an `overlap` fraction sampled from other blocks.
TraitPartition assign_traits(std::size_t n, std::size_t K, double coverage, double overlap,
                             std::uint64_t seed);

}  // namespace ardnet
