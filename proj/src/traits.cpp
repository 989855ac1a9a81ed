#include "ardnet/traits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ardnet {

TraitPartition::TraitPartition(std::size_t n, std::vector<std::vector<NodeId>> groups)
    : n_(n), groups_(std::move(groups)) {
    if (groups_.empty()) throw ParameterError("trait partition: need K >= 1");
    member_of_.resize(n_);
    for (std::size_t k = 0; k < groups_.size(); ++k) {
        auto& gk = groups_[k];
        std::sort(gk.begin(), gk.end());
        gk.erase(std::unique(gk.begin(), gk.end()), gk.end());
        for (NodeId i : gk) {
            if (i >= n_) throw ParameterError("trait partition: member index out of range");
            member_of_[i].push_back(static_cast<std::uint32_t>(k));
        }
    }
}

bool TraitPartition::contains(std::size_t k, NodeId i) const {
    const auto& gk = groups_[k];
    return std::binary_search(gk.begin(), gk.end(), i);
}

std::size_t TraitPartition::group_size_excluding(std::size_t k, NodeId i) const {
    return groups_[k].size() - (contains(k, i) ? 1 : 0);
}

std::size_t TraitPartition::max_traits_per_node() const {
    std::size_t m = 0;
    for (const auto& mo : member_of_) m = std::max(m, mo.size());
    return m;
}

TraitPartition assign_traits(std::size_t n, std::size_t K, double coverage, double overlap,
                             std::uint64_t seed) {
    if (K < 1) throw ParameterError("assign_traits: need K >= 1");
    if (!(coverage > 0.0 && coverage <= 1.0))
        throw ParameterError("assign_traits: coverage must lie in (0,1]");
    if (!(overlap >= 0.0 && overlap < 1.0))
        throw ParameterError("assign_traits: overlap must lie in [0,1)");
    const std::size_t target = static_cast<std::size_t>(std::ceil(coverage * static_cast<double>(n)));
    if (target < 1) throw ParameterError("assign_traits: coverage*n must be >= 1");
    if (target > n) throw ParameterError("assign_traits: coverage*n exceeds n");

    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    // K contiguous blocks of the shuffled order, sizes differing by at most 1.
    std::vector<std::vector<NodeId>> blocks(K);
    for (std::size_t i = 0; i < n; ++i) blocks[i * K / n].push_back(order[i]);
    std::size_t min_block = n;
    for (const auto& b : blocks) min_block = std::min(min_block, b.size());

    const std::size_t want_overlap =
        static_cast<std::size_t>(std::floor(overlap * static_cast<double>(target)));
    if (want_overlap == 0 && target > min_block)
        throw ParameterError(
            "assign_traits: coverage*K infeasible for disjoint traits (overlap = 0)");

    std::vector<std::vector<NodeId>> groups(K);
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t own_take = std::min(blocks[k].size(), target - want_overlap);
        auto& gk = groups[k];
        gk.assign(blocks[k].begin(), blocks[k].begin() + static_cast<std::ptrdiff_t>(own_take));

        std::size_t need = target - own_take;
        if (need > 0) {
            std::vector<NodeId> pool;
            pool.reserve(n - blocks[k].size());
            for (std::size_t b = 0; b < K; ++b)
                if (b != k) pool.insert(pool.end(), blocks[b].begin(), blocks[b].end());
            if (need > pool.size())
                throw ParameterError("assign_traits: coverage too large for overlap sampling");
            std::shuffle(pool.begin(), pool.end(), rng);
            gk.insert(gk.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(need));
        }
    }
    return TraitPartition(n, std::move(groups));
}

}  // namespace ardnet
