#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "pine/gat.hpp"
#include "pine/graph.hpp"
#include "pine/rng.hpp"

namespace pine {

class SplitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Link-prediction partition of the edge set. Message edges carry structure
/// for the model; supervision positives are only ever used as targets.
struct EdgeSplit {
    std::vector<NodePair> message_edges;
    std::vector<NodePair> supervision_pos;
    std::vector<NodePair> val_pos;
    std::vector<NodePair> test_pos;
    std::vector<NodePair> val_neg;
    std::vector<NodePair> test_neg;

    /// message_edges + supervision_pos
    std::vector<NodePair> train_edges() const;
};

struct SplitOptions {
    double train_fraction = 0.7;
    double val_fraction = 0.15;
    double test_fraction = 0.15;
    /// Share of training edges held out as supervision targets.
    double supervision_fraction = 0.3;
    std::uint64_t seed = 42;
};

/// Uniform random partition of the distinct (src, dst) pairs of g.
/// Validation and test negatives are sampled once here, 1:1 with positives.
EdgeSplit split_edges(const AttributedGraph& g, const SplitOptions& options = {});

/// Set of existing (src, dst) pairs used for rejection sampling.
class EdgeIndex {
public:
    explicit EdgeIndex(const AttributedGraph& g);
    bool contains(NodeId j, NodeId i) const { return pairs_.count(key(j, i)) != 0; }
    std::size_t num_nodes() const { return n_; }
    std::size_t size() const { return pairs_.size(); }

private:
    std::uint64_t key(NodeId j, NodeId i) const { return static_cast<std::uint64_t>(j) * n_ + i; }
    std::size_t n_;
    std::unordered_set<std::uint64_t> pairs_;
};

/// `count` distinct ordered non-edges (j != i), uniform, rejection-sampled
/// against the edge index. Throws SplitError when not enough non-edges exist.
std::vector<NodePair> sample_negatives(const EdgeIndex& edges, std::size_t count, CounterRng& rng);

/// Mann-Whitney ROC AUC; tied scores contribute one half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct TrainConfig {
    double learning_rate = 5e-4;
    std::size_t hidden_size = 512;
    std::size_t num_layers = 1;
    std::size_t max_epochs = 500;
    std::size_t patience = 20;
    std::uint64_t seed = 42;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double leaky_slope = 0.2;
    gat::Activation activation = gat::Activation::Elu;

    void validate() const;
};

struct EpochLog {
    std::size_t epoch = 0;
    double loss = 0.0;  ///< summed BCE over the epoch's balanced batch
    /// Summed BCE on the supervision positives and one negative set drawn
    /// before the first epoch; unaffected by resampling noise.
    double reference_loss = 0.0;
    double val_auc = 0.0;
};

struct TrainResult {
    gat::GatModel<float> model;
    std::vector<EpochLog> log;
    std::size_t best_epoch = 0;
    double best_val_auc = 0.0;
    double test_auc = 0.0;
};

/// Full-batch Adam training with per-epoch negative resampling and early
/// stopping on validation AUC; returns the best-validation parameters.
/// Validation scores use all training edges for message passing, test
/// scores use training and validation edges.
TrainResult train(const AttributedGraph& g, const EdgeSplit& split, const TrainConfig& config);

/// Scores pairs with a model forwarded on `message_graph` and returns the AUC
/// of positives against negatives.
double evaluate_auc(gat::GatModel<float>& model, const AttributedGraph& message_graph,
                    std::span<const NodePair> positives, std::span<const NodePair> negatives);

/// Adam over a list of GAT layers.
template <typename Real>
class AdamOptimizer {
public:
    AdamOptimizer(const gat::GatModel<Real>& model, double learning_rate, double beta1, double beta2, double epsilon);
    void step(gat::GatModel<Real>& model, const std::vector<gat::Layer<Real>>& gradients);

private:
    double lr_, beta1_, beta2_, epsilon_;
    std::size_t t_ = 0;
    std::vector<gat::Layer<Real>> m_, v_;
};

}  // namespace pine
