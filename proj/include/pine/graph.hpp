#pragma once

// Directed attributed graph with both CSR orientations materialized.
//
// Edge (j -> i) means information held by j flows to i. Every edge has an
// in-edge id (its position in the in-CSR); per-edge quantities such as
// influence weights and attention coefficients are stored in that order so
// that softmax-style normalization over N_in(i) touches a contiguous range.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pine {

using NodeId = std::uint32_t;
using EdgeType = std::uint32_t;

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public GraphError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DimensionError : public GraphError {
public:
    using GraphError::GraphError;
};

struct NodePair {
    NodeId src = 0;
    NodeId dst = 0;
    auto operator<=>(const NodePair&) const = default;
};

struct Edge {
    NodeId src = 0;
    NodeId dst = 0;
    EdgeType type = 0;
    auto operator<=>(const Edge&) const = default;
};

class AttributedGraph {
public:
    AttributedGraph() = default;

    /// Builds a graph from an edge list. Self-loops are dropped and repeated
    /// (src, dst, type) triples collapsed; both are counted.
    /// `features` is row-major num_nodes x feature_dim. Empty `labels` means
    /// node ids label themselves.
    static AttributedGraph from_edges(std::size_t num_nodes, std::vector<Edge> edges,
                                      std::vector<float> features, std::size_t feature_dim,
                                      bool typed = false, std::vector<std::string> labels = {});

    /// Same node set, features and labels as `base` but with a new edge set.
    static AttributedGraph with_edges(const AttributedGraph& base, std::vector<Edge> edges);
    static AttributedGraph with_edges(const AttributedGraph& base, std::span<const NodePair> pairs);

    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return out_targets_.size(); }
    std::size_t feature_dim() const { return feature_dim_; }

    std::span<const NodeId> out_neighbors(NodeId j) const {
        return {out_targets_.data() + out_offsets_[j], out_offsets_[j + 1] - out_offsets_[j]};
    }
    std::span<const NodeId> in_neighbors(NodeId i) const {
        return {in_sources_.data() + in_offsets_[i], in_offsets_[i + 1] - in_offsets_[i]};
    }
    std::size_t out_degree(NodeId j) const { return out_offsets_[j + 1] - out_offsets_[j]; }
    std::size_t in_degree(NodeId i) const { return in_offsets_[i + 1] - in_offsets_[i]; }

    /// In-edge ids of node i are [in_begin(i), in_end(i)).
    std::size_t in_begin(NodeId i) const { return in_offsets_[i]; }
    std::size_t in_end(NodeId i) const { return in_offsets_[i + 1]; }
    std::size_t out_begin(NodeId j) const { return out_offsets_[j]; }
    std::size_t out_end(NodeId j) const { return out_offsets_[j + 1]; }

    std::span<const std::size_t> out_offsets() const { return out_offsets_; }
    std::span<const NodeId> out_targets() const { return out_targets_; }
    std::span<const std::size_t> in_offsets() const { return in_offsets_; }
    std::span<const NodeId> in_sources() const { return in_sources_; }
    /// In-edge id of every out-edge, indexed by out-edge position.
    std::span<const std::size_t> out_to_in() const { return out_to_in_; }

    bool has_edge_types() const { return typed_; }
    EdgeType in_edge_type(std::size_t in_edge) const { return typed_ ? in_types_[in_edge] : 0; }
    EdgeType out_edge_type(std::size_t out_edge) const { return typed_ ? out_types_[out_edge] : 0; }
    /// Distinct edge types present, ascending.
    std::vector<EdgeType> edge_types() const;

    bool has_edge(NodeId j, NodeId i) const;

    std::span<const float> features(NodeId i) const {
        return {features_->data() + static_cast<std::size_t>(i) * feature_dim_, feature_dim_};
    }
    std::span<const float> feature_matrix() const { return *features_; }

    const std::string& label(NodeId i) const { return (*labels_)[i]; }
    const std::vector<std::string>& labels() const { return *labels_; }

    std::size_t dropped_self_loops() const { return dropped_self_loops_; }
    std::size_t collapsed_duplicates() const { return collapsed_duplicates_; }

    /// All edges in out-CSR order (sorted by src, dst, type).
    std::vector<Edge> edges() const;

private:
    void build(std::vector<Edge> edges);

    std::size_t num_nodes_ = 0;
    std::size_t feature_dim_ = 0;
    bool typed_ = false;
    std::vector<std::size_t> out_offsets_{0};
    std::vector<NodeId> out_targets_;
    std::vector<EdgeType> out_types_;
    std::vector<std::size_t> in_offsets_{0};
    std::vector<NodeId> in_sources_;
    std::vector<EdgeType> in_types_;
    std::vector<std::size_t> out_to_in_;
    std::shared_ptr<const std::vector<float>> features_ = std::make_shared<const std::vector<float>>();
    std::shared_ptr<const std::vector<std::string>> labels_ = std::make_shared<const std::vector<std::string>>();
    std::size_t dropped_self_loops_ = 0;
    std::size_t collapsed_duplicates_ = 0;
};

/// One real importance value per node.
struct ScoreVector {
    std::vector<double> values;
    std::string method_name;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

struct LabeledNode {
    NodeId node = 0;
    double importance = 0.0;
};

struct LoadOptions {
    /// Swap src and dst of every edge line.
    bool reverse_edges = false;
    /// CSV feature rows start with the node label instead of being keyed by row order.
    bool feature_id_column = false;
};

/// Loads an edge list (`src dst [type]` per line, `#` comments) and a feature
/// file (CSV or PINEF1 binary, detected by magic). Without a feature file every
/// node gets the single feature 1.0.
AttributedGraph load_graph(const std::filesystem::path& edge_list,
                           const std::optional<std::filesystem::path>& features,
                           const LoadOptions& options = {});

/// Reads a feature file into a row-major matrix. Returns (values, rows, dim, row labels);
/// labels are empty unless the CSV carries an id column.
struct FeatureTable {
    std::vector<float> values;
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<std::string> row_labels;
};
FeatureTable read_features(const std::filesystem::path& path, bool id_column = false);

void write_edge_list(const AttributedGraph& g, const std::filesystem::path& path);
void write_features_binary(const AttributedGraph& g, const std::filesystem::path& path);
void write_features_csv(const AttributedGraph& g, const std::filesystem::path& path, bool id_column);
/// Two-column TSV: dense id, original label.
void write_id_map(const AttributedGraph& g, const std::filesystem::path& path);

/// Reads one node label per line; returns the dense ids sorted, without duplicates.
std::vector<NodeId> read_node_list(const AttributedGraph& g, const std::filesystem::path& path);
/// Reads `label<TAB>value` rows, mapping labels to dense ids. Unknown labels are errors.
std::vector<LabeledNode> read_node_values(const AttributedGraph& g, const std::filesystem::path& path);
/// Writes `label<TAB>score` sorted by descending score (ties by ascending id).
void write_scores(const AttributedGraph& g, const ScoreVector& scores, const std::filesystem::path& path);

/// Same node set; only edges of `type` retained.
AttributedGraph subgraph_by_edge_type(const AttributedGraph& g, EdgeType type);

/// Induced subgraph on the largest weakly connected component. Ties go to
/// the component holding the smallest node id.
AttributedGraph largest_weak_component(const AttributedGraph& g);

/// Cosine similarity of the two feature vectors; 0 when either norm is 0.
double cosine_similarity(const AttributedGraph& g, NodeId j, NodeId i);

/// Euclidean norm of every feature row.
std::vector<double> feature_norms(const AttributedGraph& g);

/// Cosine similarity using precomputed norms.
double cosine_similarity(const AttributedGraph& g, std::span<const double> norms, NodeId j, NodeId i);

}  // namespace pine
