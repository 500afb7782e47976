#pragma once

// Single-head graph attention network for link prediction.
//
// Layer update for node i, over in-edges (j -> i) only (no self term):
//   P = H U^T
//   w_ji = LeakyReLU(<P_j, s> + <P_i, t>)
//   alpha_ji = softmax_j(w_ji) over N_in(i)
//   out_i = sum_j alpha_ji P_j          (zero vector when N_in(i) is empty)
// Hidden layers are followed by ELU; the last layer is linear. Edges are
// scored by sigmoid(<h_j, h_i>) of the final embeddings.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "pine/graph.hpp"

namespace pine::gat {

template <typename Real>
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class Activation { Elu, Identity };

template <typename Real>
struct Layer {
    Matrix<Real> projection;     ///< U, out_dim x in_dim
    Vector<Real> source_weight;  ///< s, applied to the projected source node
    Vector<Real> target_weight;  ///< t, applied to the projected destination node

    std::size_t in_dim() const { return static_cast<std::size_t>(projection.cols()); }
    std::size_t out_dim() const { return static_cast<std::size_t>(projection.rows()); }
};

/// Input node features, stored sparse when the matrix is mostly zeros
/// (bag-of-words citation features) so the first projection stays cheap.
template <typename Real>
class NodeFeatures {
public:
    NodeFeatures() = default;
    explicit NodeFeatures(const AttributedGraph& g, double sparse_below_density = 0.1);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_sparse() const { return sparse_.has_value(); }

    /// X U^T
    Matrix<Real> project(const Matrix<Real>& projection) const;
    /// G^T X, the gradient of U given G = dL/d(X U^T).
    Matrix<Real> projection_gradient(const Matrix<Real>& grad_projected) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Matrix<Real> dense_;
    std::optional<Eigen::SparseMatrix<Real, Eigen::RowMajor>> sparse_;
};

/// Everything the backward pass needs from a forward pass.
template <typename Real>
struct ForwardState {
    std::vector<Matrix<Real>> hidden_inputs;  ///< input of layers 1..L-1 (after activation)
    std::vector<Matrix<Real>> projected;      ///< P per layer
    std::vector<Matrix<Real>> outputs;        ///< pre-activation output per layer
    std::vector<std::vector<Real>> logits;    ///< w_ji before LeakyReLU, per in-edge
    std::vector<std::vector<Real>> attention; ///< alpha_ji per in-edge

    const Matrix<Real>& embeddings() const { return outputs.back(); }
};

struct ModelShape {
    std::size_t input_dim = 0;
    std::size_t hidden_size = 0;
    std::size_t num_layers = 1;
    double leaky_slope = 0.2;
    Activation activation = Activation::Elu;
};

template <typename Real>
class GatModel {
public:
    GatModel() = default;
    /// All-zero parameters with the given shape.
    explicit GatModel(const ModelShape& shape);

    /// Glorot-uniform projections, zero attention vectors.
    void init_glorot(std::uint64_t seed);

    std::size_t num_layers() const { return layers_.size(); }
    std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
    std::size_t output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }
    double leaky_slope() const { return leaky_slope_; }
    Activation activation() const { return activation_; }
    void set_leaky_slope(double slope) { leaky_slope_ = slope; }
    void set_activation(Activation a) { activation_ = a; }

    std::vector<Layer<Real>>& layers() { return layers_; }
    const std::vector<Layer<Real>>& layers() const { return layers_; }
    std::size_t parameter_count() const;

    /// Runs the network on g and caches per-layer attention (in-edge order of g).
    Matrix<Real> forward(const AttributedGraph& g);
    Matrix<Real> forward(const AttributedGraph& g, const NodeFeatures<Real>& features);

    bool has_attention() const { return !attention_.empty(); }
    /// Cached attention of the given layer, renormalized in double precision so
    /// each destination sums to 1 regardless of Real. Throws StateError before any
    /// forward pass or when the cache was produced on a graph of a different shape.
    std::span<const double> attention(std::size_t layer, const AttributedGraph& g) const;
    void clear_attention() { attention_.clear(); }

    template <typename Other>
    GatModel<Other> cast() const;

private:
    std::vector<Layer<Real>> layers_;
    double leaky_slope_ = 0.2;
    Activation activation_ = Activation::Elu;
    std::vector<std::vector<double>> attention_;
    std::size_t cached_nodes_ = 0;
    std::size_t cached_edges_ = 0;
};

/// Full forward pass keeping intermediates.
template <typename Real>
ForwardState<Real> forward_pass(const GatModel<Real>& model, const AttributedGraph& g,
                                const NodeFeatures<Real>& features);

/// sigmoid(<h_j, h_i>)
template <typename Real>
Real predict_edge(const Matrix<Real>& embeddings, NodeId j, NodeId i);

template <typename Real>
struct LossAndGradients {
    double loss = 0.0;
    std::vector<Layer<Real>> gradients;
};

/// Probabilities are clamped to [kProbabilityFloor, 1 - kProbabilityFloor] before logs.
inline constexpr double kProbabilityFloor = 1e-7;

/// Summed binary cross-entropy over positive (y = 1) and negative (y = 0)
/// pairs, with analytic gradients for every U, s and t.
template <typename Real>
LossAndGradients<Real> loss_and_gradients(const GatModel<Real>& model, const AttributedGraph& message_graph,
                                          const NodeFeatures<Real>& features, std::span<const NodePair> positives,
                                          std::span<const NodePair> negatives);

/// Loss only.
template <typename Real>
double link_prediction_loss(const Matrix<Real>& embeddings, std::span<const NodePair> positives,
                            std::span<const NodePair> negatives);

}  // namespace pine::gat
