#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "pine/graph.hpp"

namespace pine::metrics {

class UndefinedMetric : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Indices of the k largest values, descending; ties by ascending index.
std::vector<std::size_t> top_k(std::span<const double> values, std::size_t k);

/// 1-based ranks (ascending value), tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Items are ranked by `predicted` (descending, ties by index) and each of the
/// first k positions earns truth / log2(position + 1). The sum is divided by the
/// same quantity for the truth-sorted order. Throws UndefinedMetric when no
/// truth value is positive.
double ndcg_at_k(std::span<const double> predicted, std::span<const double> truth, std::size_t k);

/// Pearson correlation of average ranks. NaN when either side is constant.
double spearman(std::span<const double> predicted, std::span<const double> truth);

/// |top-k(truth) & top-k(predicted)| / k, ties broken by ascending index.
double precision_at_k(std::span<const double> predicted, std::span<const double> truth, std::size_t k);

/// Predicted and truth values restricted to labeled nodes, ordered by node id,
/// so index tie-breaks follow node ids.
struct AlignedValues {
    std::vector<double> predicted;
    std::vector<double> truth;
    std::vector<NodeId> nodes;
};
AlignedValues align(const ScoreVector& scores, std::span<const LabeledNode> truth);

}  // namespace pine::metrics
