#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pine/graph.hpp"
#include "pine/rng.hpp"

namespace pine::diffusion {

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Per-edge influence I(j -> i), indexed by in-edge id. For every node with
/// at least one in-neighbor both components sum to one over its in-edges.
struct InfluenceWeights {
    std::vector<double> structural;
    std::vector<double> semantic;
    std::vector<double> combined;
    double alpha1 = 0.5;
    double alpha2 = 0.5;
};

/// structural = 1 / in-degree(i); semantic = softmax of cosine similarity over
/// N_in(i); combined = alpha1 * structural + alpha2 * semantic.
InfluenceWeights compute_influence_weights(const AttributedGraph& g, double alpha1, double alpha2);

/// Sorted ids of the activated (or ever-infected) nodes.
using NodeSet = std::vector<NodeId>;

/// Unbounded round count.
inline constexpr std::size_t kNoStepLimit = std::numeric_limits<std::size_t>::max();

/// LT+ with thresholds drawn from Uniform(0, 1) for every node.
NodeSet run_lt_plus(const AttributedGraph& g, const InfluenceWeights& weights, std::span<const NodeId> seeds,
                    CounterRng& rng, std::size_t max_steps = kNoStepLimit);

/// LT+ with explicit per-node thresholds.
NodeSet run_lt_plus(const AttributedGraph& g, const InfluenceWeights& weights, std::span<const NodeId> seeds,
                    std::span<const double> thresholds, std::size_t max_steps = kNoStepLimit);

/// IC+: every newly activated node gets one attempt per inactive out-neighbor,
/// succeeding with probability I(j -> i).
NodeSet run_ic_plus(const AttributedGraph& g, const InfluenceWeights& weights, std::span<const NodeId> seeds,
                    CounterRng& rng, std::size_t max_steps = kNoStepLimit);

/// Discrete-time SIR along out-edges. Returns infected and recovered nodes.
NodeSet run_sir(const AttributedGraph& g, double beta, double gamma, std::span<const NodeId> seeds,
                std::size_t max_steps, CounterRng& rng);

enum class Model { LinearThresholdPlus, IndependentCascadePlus, Sir };

Model parse_model(std::string_view name);
std::string_view model_name(Model model);

struct DiffusionConfig {
    Model model = Model::LinearThresholdPlus;
    double alpha1 = 0.5;
    double alpha2 = 0.5;
    /// Negative means: 1.5 x the epidemic threshold of the undirected degree sequence.
    double sir_beta = -1.0;
    double sir_gamma = 1.0;
    std::size_t max_steps = kNoStepLimit;
    std::size_t num_runs = 1000;
    std::uint64_t rng_seed = 42;
    /// 0 means PINE_THREADS / hardware concurrency.
    unsigned workers = 0;
};

struct DiffusionResult {
    double mean_spread = 0.0;
    double std_spread = 0.0;
    std::vector<std::size_t> activated_counts;
    std::size_t runs = 0;
};

/// <k> / (<k^2> - <k>) over the undirected degree sequence.
double epidemic_threshold(const AttributedGraph& g);
/// The beta a config resolves to on this graph.
double resolve_sir_beta(const AttributedGraph& g, const DiffusionConfig& config);

/// Monte Carlo estimate of sigma(S) = phi(S) / N. Run r draws from the stream
/// (rng_seed, r), so results are identical for any worker count.
DiffusionResult influence_spread(const AttributedGraph& g, const DiffusionConfig& config,
                                 std::span<const NodeId> seeds);

/// Same, reusing precomputed influence weights (ignored for SIR).
DiffusionResult influence_spread(const AttributedGraph& g, const DiffusionConfig& config,
                                 std::span<const NodeId> seeds, const InfluenceWeights& weights);

}  // namespace pine::diffusion
