#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "pine/train.hpp"

namespace pine {

std::vector<NodePair> EdgeSplit::train_edges() const {
    std::vector<NodePair> all(message_edges);
    all.insert(all.end(), supervision_pos.begin(), supervision_pos.end());
    std::sort(all.begin(), all.end());
    return all;
}

EdgeIndex::EdgeIndex(const AttributedGraph& g) : n_(g.num_nodes()) {
    pairs_.reserve(g.num_edges());
    for (NodeId j = 0; j < g.num_nodes(); ++j)
        for (NodeId i : g.out_neighbors(j)) pairs_.insert(key(j, i));
}

std::vector<NodePair> sample_negatives(const EdgeIndex& edges, std::size_t count, CounterRng& rng) {
    const std::size_t n = edges.num_nodes();
    const std::size_t capacity = n < 2 ? 0 : n * (n - 1) - edges.size();
    if (count > capacity)
        throw SplitError(fmt::format("cannot sample {} negative pairs: only {} non-edges exist", count, capacity));
    std::vector<NodePair> out;
    out.reserve(count);
    if (count == 0) return out;
    if (count * 2 > capacity) {
        // Dense request: enumerate the complement and take a random subset.
        std::vector<NodePair> all;
        all.reserve(capacity);
        for (NodeId j = 0; j < n; ++j)
            for (NodeId i = 0; i < n; ++i)
                if (i != j && !edges.contains(j, i)) all.push_back({j, i});
        for (std::size_t k = 0; k < count; ++k) std::swap(all[k], all[k + rng.below(all.size() - k)]);
        out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
    } else {
        std::unordered_set<std::uint64_t> taken;
        taken.reserve(count * 2);
        while (out.size() < count) {
            const auto j = static_cast<NodeId>(rng.below(n));
            const auto i = static_cast<NodeId>(rng.below(n));
            if (i == j || edges.contains(j, i)) continue;
            if (!taken.insert(static_cast<std::uint64_t>(j) * n + i).second) continue;
            out.push_back({j, i});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

EdgeSplit split_edges(const AttributedGraph& g, const SplitOptions& options) {
    const double total = options.train_fraction + options.val_fraction + options.test_fraction;
    if (std::abs(total - 1.0) > 1e-9 || options.train_fraction <= 0.0 || options.val_fraction < 0.0 ||
        options.test_fraction < 0.0)
        throw SplitError("split fractions must be non-negative and sum to 1");
    if (!(options.supervision_fraction > 0.0 && options.supervision_fraction < 1.0))
        throw SplitError("supervision fraction must lie in (0, 1)");

    std::vector<NodePair> pairs;
    pairs.reserve(g.num_edges());
    for (NodeId j = 0; j < g.num_nodes(); ++j) {
        const auto nbrs = g.out_neighbors(j);
        for (std::size_t k = 0; k < nbrs.size(); ++k)
            if (k == 0 || nbrs[k] != nbrs[k - 1]) pairs.push_back({j, nbrs[k]});
    }
    const std::size_t m = pairs.size();
    CounterRng shuffle_rng(options.seed, 0);
    for (std::size_t k = m; k > 1; --k) std::swap(pairs[k - 1], pairs[shuffle_rng.below(k)]);

    const auto val_count = static_cast<std::size_t>(std::llround(static_cast<double>(m) * options.val_fraction));
    const auto test_count = static_cast<std::size_t>(std::llround(static_cast<double>(m) * options.test_fraction));
    if (val_count + test_count >= m)
        throw SplitError(fmt::format("graph with {} edges is too small to split", m));
    const std::size_t train_count = m - val_count - test_count;
    const auto supervision_count =
        static_cast<std::size_t>(std::llround(static_cast<double>(train_count) * options.supervision_fraction));
    if (val_count == 0 || test_count == 0 || supervision_count == 0 || supervision_count >= train_count)
        throw SplitError(fmt::format("graph with {} edges is too small to split into non-empty parts", m));

    EdgeSplit split;
    auto take = [&](std::size_t begin, std::size_t end) {
        std::vector<NodePair> part(pairs.begin() + static_cast<std::ptrdiff_t>(begin),
                                   pairs.begin() + static_cast<std::ptrdiff_t>(end));
        std::sort(part.begin(), part.end());
        return part;
    };
    split.supervision_pos = take(0, supervision_count);
    split.message_edges = take(supervision_count, train_count);
    split.val_pos = take(train_count, train_count + val_count);
    split.test_pos = take(train_count + val_count, m);

    const EdgeIndex index(g);
    CounterRng val_rng(options.seed, 1), test_rng(options.seed, 2);
    split.val_neg = sample_negatives(index, val_count, val_rng);
    split.test_neg = sample_negatives(index, test_count, test_rng);
    return split;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double positive_rank_sum = 0.0;
    std::size_t positives = 0;
    for (std::size_t lo = 0; lo < n;) {
        std::size_t hi = lo + 1;
        while (hi < n && scores[order[hi]] == scores[order[lo]]) ++hi;
        const double average_rank = 0.5 * static_cast<double>(lo + 1 + hi);
        for (std::size_t k = lo; k < hi; ++k)
            if (labels[order[k]]) {
                positive_rank_sum += average_rank;
                ++positives;
            }
        lo = hi;
    }
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) throw std::invalid_argument("ROC AUC needs both positive and negative labels");
    const double p = static_cast<double>(positives);
    return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

}  // namespace pine
