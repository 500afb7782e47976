#include "pine/gat.hpp"

#include <algorithm>
#include <cmath>

#include "pine/rng.hpp"

namespace pine::gat {

namespace {

template <typename Real>
Real leaky_relu(Real x, Real slope) {
    return x > Real(0) ? x : slope * x;
}

template <typename Real>
Matrix<Real> activate(const Matrix<Real>& x, Activation a) {
    if (a == Activation::Identity) return x;
    return x.unaryExpr([](Real v) { return v > Real(0) ? v : std::expm1(v); });
}

template <typename Real>
Matrix<Real> activation_derivative(const Matrix<Real>& x, Activation a) {
    if (a == Activation::Identity) return Matrix<Real>::Ones(x.rows(), x.cols());
    return x.unaryExpr([](Real v) { return v > Real(0) ? Real(1) : std::exp(v); });
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

template <typename Real>
NodeFeatures<Real>::NodeFeatures(const AttributedGraph& g, double sparse_below_density)
    : rows_(g.num_nodes()), cols_(g.feature_dim()) {
    const auto values = g.feature_matrix();
    const auto nnz = static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](float v) { return v != 0.0f; }));
    const double density = values.empty() ? 1.0 : static_cast<double>(nnz) / static_cast<double>(values.size());
    if (density < sparse_below_density) {
        std::vector<Eigen::Triplet<Real>> triplets;
        triplets.reserve(nnz);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) {
                const float v = values[r * cols_ + c];
                if (v != 0.0f)
                    triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), static_cast<Real>(v));
            }
        Eigen::SparseMatrix<Real, Eigen::RowMajor> m(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
        m.setFromTriplets(triplets.begin(), triplets.end());
        sparse_ = std::move(m);
    } else {
        dense_.resize(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                dense_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = static_cast<Real>(values[r * cols_ + c]);
    }
}

template <typename Real>
Matrix<Real> NodeFeatures<Real>::project(const Matrix<Real>& projection) const {
    if (sparse_) return Matrix<Real>(*sparse_ * projection.transpose());
    return dense_ * projection.transpose();
}

template <typename Real>
Matrix<Real> NodeFeatures<Real>::projection_gradient(const Matrix<Real>& grad_projected) const {
    if (sparse_) return Matrix<Real>(grad_projected.transpose() * *sparse_);
    return grad_projected.transpose() * dense_;
}

template <typename Real>
GatModel<Real>::GatModel(const ModelShape& shape) : leaky_slope_(shape.leaky_slope), activation_(shape.activation) {
    if (shape.input_dim == 0 || shape.hidden_size == 0 || shape.num_layers == 0)
        throw std::invalid_argument("GAT input dimension, hidden size and layer count must be positive");
    std::size_t in = shape.input_dim;
    for (std::size_t l = 0; l < shape.num_layers; ++l) {
        Layer<Real> layer;
        layer.projection = Matrix<Real>::Zero(static_cast<Eigen::Index>(shape.hidden_size), static_cast<Eigen::Index>(in));
        layer.source_weight = Vector<Real>::Zero(static_cast<Eigen::Index>(shape.hidden_size));
        layer.target_weight = Vector<Real>::Zero(static_cast<Eigen::Index>(shape.hidden_size));
        layers_.push_back(std::move(layer));
        in = shape.hidden_size;
    }
}

template <typename Real>
void GatModel<Real>::init_glorot(std::uint64_t seed) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        auto& layer = layers_[l];
        CounterRng rng(seed, l);
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.in_dim() + layer.out_dim()));
        for (Eigen::Index r = 0; r < layer.projection.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.projection.cols(); ++c)
                layer.projection(r, c) = static_cast<Real>((2.0 * rng.uniform() - 1.0) * limit);
        layer.source_weight.setZero();
        layer.target_weight.setZero();
    }
    attention_.clear();
}

template <typename Real>
std::size_t GatModel<Real>::parameter_count() const {
    std::size_t total = 0;
    for (const auto& layer : layers_)
        total += static_cast<std::size_t>(layer.projection.size() + layer.source_weight.size() + layer.target_weight.size());
    return total;
}

template <typename Real>
Matrix<Real> GatModel<Real>::forward(const AttributedGraph& g) {
    return forward(g, NodeFeatures<Real>(g));
}

template <typename Real>
Matrix<Real> GatModel<Real>::forward(const AttributedGraph& g, const NodeFeatures<Real>& features) {
    auto state = forward_pass(*this, g, features);
    attention_.assign(state.logits.size(), std::vector<double>(g.num_edges()));
    for (std::size_t l = 0; l < state.logits.size(); ++l) {
        const auto& logits = state.logits[l];
        auto& alpha = attention_[l];
        for (NodeId i = 0; i < g.num_nodes(); ++i) {
            const std::size_t lo = g.in_begin(i), hi = g.in_end(i);
            if (lo == hi) continue;
            double peak = -std::numeric_limits<double>::infinity();
            for (std::size_t e = lo; e < hi; ++e)
                peak = std::max(peak, leaky_relu(static_cast<double>(logits[e]), leaky_slope_));
            double total = 0;
            for (std::size_t e = lo; e < hi; ++e) {
                alpha[e] = std::exp(leaky_relu(static_cast<double>(logits[e]), leaky_slope_) - peak);
                total += alpha[e];
            }
            for (std::size_t e = lo; e < hi; ++e) alpha[e] /= total;
        }
    }
    cached_nodes_ = g.num_nodes();
    cached_edges_ = g.num_edges();
    return std::move(state.outputs.back());
}

template <typename Real>
std::span<const double> GatModel<Real>::attention(std::size_t layer, const AttributedGraph& g) const {
    if (attention_.empty()) throw StateError("attention cache is empty; run a forward pass on the graph first");
    if (layer >= attention_.size())
        throw StateError("layer index " + std::to_string(layer) + " out of range for a " +
                         std::to_string(attention_.size()) + "-layer model");
    if (cached_nodes_ != g.num_nodes() || cached_edges_ != g.num_edges())
        throw StateError("attention cache was computed on a different graph; run a forward pass on this graph");
    return attention_[layer];
}

template <typename Real>
template <typename Other>
GatModel<Other> GatModel<Real>::cast() const {
    GatModel<Other> out;
    out.set_leaky_slope(leaky_slope_);
    out.set_activation(activation_);
    for (const auto& layer : layers_) {
        Layer<Other> l;
        l.projection = layer.projection.template cast<Other>();
        l.source_weight = layer.source_weight.template cast<Other>();
        l.target_weight = layer.target_weight.template cast<Other>();
        out.layers().push_back(std::move(l));
    }
    return out;
}

template <typename Real>
ForwardState<Real> forward_pass(const GatModel<Real>& model, const AttributedGraph& g,
                                const NodeFeatures<Real>& features) {
    if (model.num_layers() == 0) throw std::invalid_argument("model has no layers");
    if (features.cols() != model.input_dim() || features.rows() != g.num_nodes())
        throw std::invalid_argument("feature matrix shape does not match the model input or the graph");
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    const auto sources = g.in_sources();
    const Real slope = static_cast<Real>(model.leaky_slope());
    ForwardState<Real> state;
    for (std::size_t l = 0; l < model.num_layers(); ++l) {
        const auto& layer = model.layers()[l];
        Matrix<Real> projected;
        if (l == 0) {
            projected = features.project(layer.projection);
        } else {
            state.hidden_inputs.push_back(activate(state.outputs.back(), model.activation()));
            projected = state.hidden_inputs.back() * layer.projection.transpose();
        }
        const Vector<Real> source_score = projected * layer.source_weight;
        const Vector<Real> target_score = projected * layer.target_weight;

        std::vector<Real> logits(g.num_edges()), attention(g.num_edges());
        Matrix<Real> output = Matrix<Real>::Zero(n, projected.cols());
        for (NodeId i = 0; i < g.num_nodes(); ++i) {
            const std::size_t lo = g.in_begin(i), hi = g.in_end(i);
            if (lo == hi) continue;
            Real peak = -std::numeric_limits<Real>::infinity();
            for (std::size_t e = lo; e < hi; ++e) {
                logits[e] = source_score[sources[e]] + target_score[i];
                peak = std::max(peak, leaky_relu(logits[e], slope));
            }
            Real total = 0;
            for (std::size_t e = lo; e < hi; ++e) {
                attention[e] = std::exp(leaky_relu(logits[e], slope) - peak);
                total += attention[e];
            }
            for (std::size_t e = lo; e < hi; ++e) {
                attention[e] /= total;
                output.row(i) += attention[e] * projected.row(sources[e]);
            }
        }
        state.projected.push_back(std::move(projected));
        state.outputs.push_back(std::move(output));
        state.logits.push_back(std::move(logits));
        state.attention.push_back(std::move(attention));
    }
    return state;
}

template <typename Real>
Real predict_edge(const Matrix<Real>& embeddings, NodeId j, NodeId i) {
    return static_cast<Real>(sigmoid(static_cast<double>(embeddings.row(j).dot(embeddings.row(i)))));
}

namespace {

// Adds the loss of one labeled pair and returns dL/d(logit), zero when the
// probability sits on the clamp.
template <typename Real>
double pair_term(const Matrix<Real>& h, NodePair p, bool positive, double& loss) {
    const double x = static_cast<double>(h.row(p.src).dot(h.row(p.dst)));
    const double z = sigmoid(x);
    // -log(sigmoid(x)) = softplus(-x) and -log(1 - sigmoid(x)) = softplus(x), clamped
    // to the same range as clamping the probability to [floor, 1 - floor].
    const double term = softplus(positive ? -x : x);
    loss += std::clamp(term, -std::log1p(-kProbabilityFloor), -std::log(kProbabilityFloor));
    if (z <= kProbabilityFloor || z >= 1.0 - kProbabilityFloor) return 0.0;
    return z - (positive ? 1.0 : 0.0);
}

}  // namespace

template <typename Real>
double link_prediction_loss(const Matrix<Real>& embeddings, std::span<const NodePair> positives,
                            std::span<const NodePair> negatives) {
    double loss = 0.0;
    for (const auto& p : positives) pair_term(embeddings, p, true, loss);
    for (const auto& p : negatives) pair_term(embeddings, p, false, loss);
    return loss;
}

template <typename Real>
LossAndGradients<Real> loss_and_gradients(const GatModel<Real>& model, const AttributedGraph& g,
                                          const NodeFeatures<Real>& features, std::span<const NodePair> positives,
                                          std::span<const NodePair> negatives) {
    const auto state = forward_pass(model, g, features);
    const auto& h = state.embeddings();
    LossAndGradients<Real> result;

    Matrix<Real> grad_out = Matrix<Real>::Zero(h.rows(), h.cols());
    auto accumulate = [&](NodePair p, bool positive) {
        const auto coeff = static_cast<Real>(pair_term(h, p, positive, result.loss));
        if (coeff == Real(0)) return;
        grad_out.row(p.src) += coeff * h.row(p.dst);
        grad_out.row(p.dst) += coeff * h.row(p.src);
    };
    for (const auto& p : positives) accumulate(p, true);
    for (const auto& p : negatives) accumulate(p, false);

    const auto sources = g.in_sources();
    const Real slope = static_cast<Real>(model.leaky_slope());
    result.gradients.resize(model.num_layers());
    for (std::size_t l = model.num_layers(); l-- > 0;) {
        const auto& layer = model.layers()[l];
        const auto& projected = state.projected[l];
        const auto& attention = state.attention[l];
        const auto& logits = state.logits[l];

        Matrix<Real> grad_projected = Matrix<Real>::Zero(projected.rows(), projected.cols());
        Vector<Real> grad_source_score = Vector<Real>::Zero(projected.rows());
        Vector<Real> grad_target_score = Vector<Real>::Zero(projected.rows());
        std::vector<Real> grad_attention;
        for (NodeId i = 0; i < g.num_nodes(); ++i) {
            const std::size_t lo = g.in_begin(i), hi = g.in_end(i);
            if (lo == hi) continue;
            grad_attention.assign(hi - lo, Real(0));
            Real weighted = 0;
            for (std::size_t e = lo; e < hi; ++e) {
                const NodeId j = sources[e];
                grad_attention[e - lo] = grad_out.row(i).dot(projected.row(j));
                grad_projected.row(j) += attention[e] * grad_out.row(i);
                weighted += attention[e] * grad_attention[e - lo];
            }
            for (std::size_t e = lo; e < hi; ++e) {
                const Real grad_w = attention[e] * (grad_attention[e - lo] - weighted);
                const Real grad_logit = logits[e] > Real(0) ? grad_w : slope * grad_w;
                grad_source_score[sources[e]] += grad_logit;
                grad_target_score[i] += grad_logit;
            }
        }
        grad_projected.noalias() += grad_source_score * layer.source_weight.transpose();
        grad_projected.noalias() += grad_target_score * layer.target_weight.transpose();

        auto& grad = result.gradients[l];
        grad.source_weight = projected.transpose() * grad_source_score;
        grad.target_weight = projected.transpose() * grad_target_score;
        if (l == 0) {
            grad.projection = features.projection_gradient(grad_projected);
        } else {
            const auto& input = state.hidden_inputs[l - 1];
            grad.projection = grad_projected.transpose() * input;
            const Matrix<Real> grad_input = grad_projected * layer.projection;
            grad_out = grad_input.cwiseProduct(activation_derivative(state.outputs[l - 1], model.activation()));
        }
    }
    return result;
}

template class NodeFeatures<float>;
template class NodeFeatures<double>;
template class GatModel<float>;
template class GatModel<double>;
template GatModel<double> GatModel<float>::cast<double>() const;
template GatModel<float> GatModel<double>::cast<float>() const;
template GatModel<float> GatModel<float>::cast<float>() const;
template GatModel<double> GatModel<double>::cast<double>() const;
template ForwardState<float> forward_pass(const GatModel<float>&, const AttributedGraph&, const NodeFeatures<float>&);
template ForwardState<double> forward_pass(const GatModel<double>&, const AttributedGraph&, const NodeFeatures<double>&);
template float predict_edge(const Matrix<float>&, NodeId, NodeId);
template double predict_edge(const Matrix<double>&, NodeId, NodeId);
template double link_prediction_loss(const Matrix<float>&, std::span<const NodePair>, std::span<const NodePair>);
template double link_prediction_loss(const Matrix<double>&, std::span<const NodePair>, std::span<const NodePair>);
template LossAndGradients<float> loss_and_gradients(const GatModel<float>&, const AttributedGraph&,
                                                    const NodeFeatures<float>&, std::span<const NodePair>,
                                                    std::span<const NodePair>);
template LossAndGradients<double> loss_and_gradients(const GatModel<double>&, const AttributedGraph&,
                                                     const NodeFeatures<double>&, std::span<const NodePair>,
                                                     std::span<const NodePair>);

}  // namespace pine::gat
