#include "pine/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pine::metrics {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("predicted and truth vectors differ in length");
}

std::vector<std::size_t> descending_order(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    return order;
}

}  // namespace

std::vector<std::size_t> top_k(std::span<const double> values, std::size_t k) {
    auto order = descending_order(values);
    order.resize(std::min(k, order.size()));
    return order;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t lo = 0; lo < n;) {
        std::size_t hi = lo + 1;
        while (hi < n && values[order[hi]] == values[order[lo]]) ++hi;
        const double rank = 0.5 * static_cast<double>(lo + 1 + hi);
        for (std::size_t k = lo; k < hi; ++k) ranks[order[k]] = rank;
        lo = hi;
    }
    return ranks;
}

double ndcg_at_k(std::span<const double> predicted, std::span<const double> truth, std::size_t k) {
    check_lengths(predicted, truth);
    if (k == 0) throw std::invalid_argument("NDCG@k needs k >= 1");
    if (std::none_of(truth.begin(), truth.end(), [](double v) { return v > 0.0; }))
        throw UndefinedMetric("NDCG is undefined: no ground-truth importance is positive, so the ideal DCG is zero");
    auto dcg = [&](const std::vector<std::size_t>& order) {
        double sum = 0.0;
        for (std::size_t pos = 0; pos < order.size(); ++pos)
            sum += truth[order[pos]] / std::log2(static_cast<double>(pos) + 2.0);
        return sum;
    };
    return dcg(top_k(predicted, k)) / dcg(top_k(truth, k));
}

double spearman(std::span<const double> predicted, std::span<const double> truth) {
    check_lengths(predicted, truth);
    const std::size_t n = predicted.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const auto r1 = average_ranks(predicted);
    const auto r2 = average_ranks(truth);
    const double mean = 0.5 * static_cast<double>(n + 1);
    double cov = 0.0, var1 = 0.0, var2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = r1[i] - mean, b = r2[i] - mean;
        cov += a * b;
        var1 += a * a;
        var2 += b * b;
    }
    if (var1 == 0.0 || var2 == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return cov / (std::sqrt(var1) * std::sqrt(var2));
}

double precision_at_k(std::span<const double> predicted, std::span<const double> truth, std::size_t k) {
    check_lengths(predicted, truth);
    if (k == 0) throw std::invalid_argument("Precision@k needs k >= 1");
    auto a = top_k(predicted, k);
    auto b = top_k(truth, k);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::size_t> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return static_cast<double>(common.size()) / static_cast<double>(std::min(k, predicted.size()));
}

AlignedValues align(const ScoreVector& scores, std::span<const LabeledNode> truth) {
    std::vector<LabeledNode> sorted(truth.begin(), truth.end());
    std::sort(sorted.begin(), sorted.end(), [](const LabeledNode& a, const LabeledNode& b) { return a.node < b.node; });
    AlignedValues out;
    for (const auto& t : sorted) {
        if (t.node >= scores.size()) throw std::out_of_range("labeled node outside the score vector");
        if (!out.nodes.empty() && out.nodes.back() == t.node)
            throw std::invalid_argument("node " + std::to_string(t.node) + " labeled twice");
        out.nodes.push_back(t.node);
        out.predicted.push_back(scores.values[t.node]);
        out.truth.push_back(t.importance);
    }
    return out;
}

}  // namespace pine::metrics
