#pragma once

#include <cstdint>
#include <vector>

#include "pine/graph.hpp"
#include "pine/rng.hpp"

namespace testing {

using pine::AttributedGraph;
using pine::Edge;
using pine::NodeId;

/// Directed G(n, p) with uniform features in [-1, 1].
inline AttributedGraph random_graph(std::size_t n, double p, std::size_t dim, std::uint64_t seed,
                                    std::size_t num_types = 0) {
    pine::CounterRng rng(seed, 7);
    std::vector<Edge> edges;
    for (NodeId j = 0; j < n; ++j)
        for (NodeId i = 0; i < n; ++i)
            if (i != j && rng.bernoulli(p))
                edges.push_back({j, i, num_types ? static_cast<pine::EdgeType>(rng.below(num_types)) : 0u});
    std::vector<float> features(n * dim);
    for (auto& f : features) f = static_cast<float>(2.0 * rng.uniform() - 1.0);
    return AttributedGraph::from_edges(n, std::move(edges), std::move(features), dim, num_types != 0);
}

inline AttributedGraph graph_from_pairs(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                        std::size_t dim = 1, std::uint64_t feature_seed = 0) {
    std::vector<Edge> edges;
    for (auto [j, i] : pairs) edges.push_back({j, i, 0});
    std::vector<float> features(n * dim, 1.0f);
    if (feature_seed) {
        pine::CounterRng rng(feature_seed, 8);
        for (auto& f : features) f = static_cast<float>(2.0 * rng.uniform() - 1.0);
    }
    return AttributedGraph::from_edges(n, std::move(edges), std::move(features), dim);
}

/// Directed path 0 -> 1 -> ... -> n-1.
inline AttributedGraph path_graph(std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId v = 0; v + 1 < n; ++v) pairs.emplace_back(v, v + 1);
    return graph_from_pairs(n, pairs);
}

}  // namespace testing
