#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pine/graph.hpp"

namespace pine::centrality {

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// in-degree + out-degree.
ScoreVector degree(const AttributedGraph& g);
ScoreVector out_degree(const AttributedGraph& g);
/// Sum of cosine similarities over out-edges.
ScoreVector weighted_out_degree(const AttributedGraph& g);
/// Opsahl's out_degree^(1 - tuning) * weighted_out_degree^tuning.
ScoreVector relative_out_degree(const AttributedGraph& g, double tuning);

struct IterativeResult {
    ScoreVector scores;
    /// Katz: the unnormalized series value. PageRank: same as scores.
    std::vector<double> raw;
    bool converged = false;
    std::size_t iterations = 0;
};

struct PageRankOptions {
    double damping = 0.85;
    double tolerance = 1e-9;
    std::size_t max_iterations = 200;
};

/// Power iteration with uniform teleport; dangling mass is spread uniformly.
/// Stops when the L1 change drops below the tolerance. On non-convergence the
/// last iterate is returned with `converged == false`.
IterativeResult pagerank(const AttributedGraph& g, const PageRankOptions& options = {});

struct KatzOptions {
    double attenuation = 0.005;
    double tolerance = 1e-9;
    std::size_t max_iterations = 1000;
};

/// x = sum_{k>=1} a^k (A^T)^k 1, L2-normalized. An all-zero series (no edges)
/// yields uniform scores. Throws DivergenceError when the update norm grows
/// for 10 consecutive iterations.
IterativeResult katz(const AttributedGraph& g, const KatzOptions& options = {});

/// Wasserman-Faust closeness over out-edge distances.
ScoreVector closeness(const AttributedGraph& g, unsigned workers = 0);

/// Exact directed betweenness (Brandes), normalized by (N-1)(N-2).
ScoreVector betweenness(const AttributedGraph& g, unsigned workers = 0);

/// Directed VoteRank: returns all N nodes, the first k in election order and
/// the rest by final vote score (ties by ascending id).
std::vector<NodeId> voterank(const AttributedGraph& g, std::size_t k);

/// VoteRank ranking converted to scores N - position.
ScoreVector voterank_scores(const AttributedGraph& g, std::size_t k);

struct Options {
    double relative_tuning = 0.5;
    PageRankOptions pagerank;
    KatzOptions katz;
    /// Elections for VoteRank; 0 means floor(N / 10).
    std::size_t voterank_k = 0;
    /// Closeness/betweenness refuse graphs above this node count.
    std::size_t node_budget = 50000;
    unsigned workers = 0;
};

/// Method names accepted by `compute`.
const std::vector<std::string>& method_names();
bool is_method(std::string_view name);

/// Dispatch by name: degree, out_degree, weighted, relative, pagerank, katz,
/// closeness, betweenness, voterank.
ScoreVector compute(std::string_view method, const AttributedGraph& g, const Options& options = {});

}  // namespace pine::centrality
