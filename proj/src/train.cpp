#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pine/train.hpp"

namespace pine {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw TrainingError("learning rate must be positive");
    if (patience < 1) throw TrainingError("patience must be at least 1");
    if (hidden_size == 0 || num_layers == 0) throw TrainingError("hidden size and layer count must be positive");
    if (max_epochs == 0) throw TrainingError("max_epochs must be positive");
}

template <typename Real>
AdamOptimizer<Real>::AdamOptimizer(const gat::GatModel<Real>& model, double learning_rate, double beta1,
                                   double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
    for (const auto& layer : model.layers()) {
        gat::Layer<Real> zero;
        zero.projection = gat::Matrix<Real>::Zero(layer.projection.rows(), layer.projection.cols());
        zero.source_weight = gat::Vector<Real>::Zero(layer.source_weight.size());
        zero.target_weight = gat::Vector<Real>::Zero(layer.target_weight.size());
        m_.push_back(zero);
        v_.push_back(std::move(zero));
    }
}

template <typename Real>
void AdamOptimizer<Real>::step(gat::GatModel<Real>& model, const std::vector<gat::Layer<Real>>& gradients) {
    ++t_;
    const auto b1 = static_cast<Real>(beta1_), b2 = static_cast<Real>(beta2_);
    const auto bias1 = static_cast<Real>(1.0 - std::pow(beta1_, static_cast<double>(t_)));
    const auto bias2 = static_cast<Real>(1.0 - std::pow(beta2_, static_cast<double>(t_)));
    const auto lr = static_cast<Real>(lr_), eps = static_cast<Real>(epsilon_);
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
        m.array() = b1 * m.array() + (Real(1) - b1) * grad.array();
        v.array() = b2 * v.array() + (Real(1) - b2) * grad.array().square();
        param.array() -= lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + eps);
    };
    for (std::size_t l = 0; l < model.num_layers(); ++l) {
        auto& layer = model.layers()[l];
        update(layer.projection, gradients[l].projection, m_[l].projection, v_[l].projection);
        update(layer.source_weight, gradients[l].source_weight, m_[l].source_weight, v_[l].source_weight);
        update(layer.target_weight, gradients[l].target_weight, m_[l].target_weight, v_[l].target_weight);
    }
}

template class AdamOptimizer<float>;
template class AdamOptimizer<double>;

namespace {

double scored_auc(const gat::Matrix<float>& h, std::span<const NodePair> positives, std::span<const NodePair> negatives) {
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(positives.size() + negatives.size());
    labels.reserve(positives.size() + negatives.size());
    for (const auto& p : positives) {
        scores.push_back(static_cast<double>(h.row(p.src).dot(h.row(p.dst))));
        labels.push_back(1);
    }
    for (const auto& p : negatives) {
        scores.push_back(static_cast<double>(h.row(p.src).dot(h.row(p.dst))));
        labels.push_back(0);
    }
    return roc_auc(scores, labels);
}

bool all_finite(const std::vector<gat::Layer<float>>& grads) {
    for (const auto& g : grads)
        if (!g.projection.allFinite() || !g.source_weight.allFinite() || !g.target_weight.allFinite()) return false;
    return true;
}

}  // namespace

double evaluate_auc(gat::GatModel<float>& model, const AttributedGraph& message_graph,
                    std::span<const NodePair> positives, std::span<const NodePair> negatives) {
    // Ranking by the dot product is the same as ranking by its sigmoid, and
    // avoids ties from saturated probabilities.
    return scored_auc(model.forward(message_graph), positives, negatives);
}

TrainResult train(const AttributedGraph& g, const EdgeSplit& split, const TrainConfig& config) {
    config.validate();
    if (split.supervision_pos.empty() || split.val_pos.empty())
        throw TrainingError("edge split has no supervision or validation edges");

    const auto message_graph = AttributedGraph::with_edges(g, split.message_edges);
    const auto train_edges = split.train_edges();
    const auto val_graph = AttributedGraph::with_edges(g, train_edges);
    std::vector<NodePair> test_message(train_edges);
    test_message.insert(test_message.end(), split.val_pos.begin(), split.val_pos.end());
    const auto test_graph = AttributedGraph::with_edges(g, test_message);
    const gat::NodeFeatures<float> features(g);

    gat::ModelShape shape;
    shape.input_dim = g.feature_dim();
    shape.hidden_size = config.hidden_size;
    shape.num_layers = config.num_layers;
    shape.leaky_slope = config.leaky_slope;
    shape.activation = config.activation;
    gat::GatModel<float> model(shape);
    model.init_glorot(config.seed);
    AdamOptimizer<float> adam(model, config.learning_rate, config.beta1, config.beta2, config.adam_epsilon);
    const EdgeIndex index(g);
    CounterRng reference_rng(config.seed, 0xFFFF);
    const auto reference_negatives = sample_negatives(index, split.supervision_pos.size(), reference_rng);

    TrainResult result;
    result.best_val_auc = -std::numeric_limits<double>::infinity();
    gat::GatModel<float> best = model;
    std::size_t stale = 0;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        CounterRng rng(config.seed, 0x10000 + epoch);
        const auto negatives = sample_negatives(index, split.supervision_pos.size(), rng);
        const auto lg = gat::loss_and_gradients(model, message_graph, features, split.supervision_pos, negatives);
        if (!std::isfinite(lg.loss) || !all_finite(lg.gradients))
            throw TrainingError(fmt::format(
                "non-finite loss or gradient at epoch {} (learning rate {}); retry with a smaller learning rate",
                epoch, config.learning_rate));
        const double reference_loss = gat::link_prediction_loss(
            gat::forward_pass(model, message_graph, features).embeddings(), split.supervision_pos, reference_negatives);
        adam.step(model, lg.gradients);

        const double val_auc = scored_auc(gat::forward_pass(model, val_graph, features).embeddings(), split.val_pos,
                                          split.val_neg);
        result.log.push_back({epoch, lg.loss, reference_loss, val_auc});
        if (val_auc > result.best_val_auc) {
            result.best_val_auc = val_auc;
            result.best_epoch = epoch;
            best = model;
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    result.model = std::move(best);
    if (!split.test_pos.empty() && !split.test_neg.empty())
        result.test_auc = scored_auc(gat::forward_pass(result.model, test_graph, features).embeddings(),
                                     split.test_pos, split.test_neg);
    return result;
}

}  // namespace pine
