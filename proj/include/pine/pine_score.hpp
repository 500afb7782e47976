#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pine/gat.hpp"
#include "pine/graph.hpp"
#include "pine/train.hpp"

namespace pine {

/// PINE_j = sum over out-neighbors i of the attention alpha_ji at `layer`.
/// The model must have been forwarded on g.
template <typename Real>
ScoreVector pine_scores(const gat::GatModel<Real>& model, const AttributedGraph& g, std::size_t layer = 0);

enum class Calibration { None, LogDegree, Degree };

Calibration parse_calibration(std::string_view name);
std::string_view calibration_name(Calibration c);

/// Multiplies each score by f(out-degree in `g`): log(1 + k) for LogDegree,
/// k for Degree, 1 for None.
ScoreVector calibrate_by_out_degree(const ScoreVector& scores, const AttributedGraph& g,
                                    Calibration calibration = Calibration::LogDegree);

struct TypeSelectionOptions {
    std::size_t top_k_types = 100;
    TrainConfig train;
    SplitOptions split;
    std::size_t layer = 0;
    /// 0 means PINE_THREADS / hardware concurrency.
    unsigned workers = 0;
};

struct TypeCandidate {
    EdgeType type = 0;
    std::size_t num_edges = 0;
    bool trained = false;
    double test_auc = 0.0;
    /// Spearman of type-restricted PINE against the labels, over labeled
    /// nodes touching this type. NaN when undefined.
    double spearman = 0.0;
    bool selected = false;
    std::string note;
    ScoreVector scores;
    gat::GatModel<float> model;
};

struct TypeSelection {
    std::vector<EdgeType> selected;
    /// Largest types first.
    std::vector<TypeCandidate> candidates;
    std::vector<std::string> warnings;
};

/// Trains one GAT per edge type among the `top_k_types` largest, scores each
/// type subgraph with PINE and keeps the types whose scores correlate
/// positively with the validation labels.
TypeSelection select_edge_types(const AttributedGraph& g, std::span<const LabeledNode> val_labels,
                                const TypeSelectionOptions& options);

/// Sum of type-restricted PINE scores over `selected`, forwarding each
/// type's model on its subgraph. An empty selection gives zeros and a warning.
ScoreVector heterogeneous_pine(const AttributedGraph& g, std::span<const EdgeType> selected,
                               std::map<EdgeType, gat::GatModel<float>>& models, std::size_t layer = 0,
                               std::vector<std::string>* warnings = nullptr);

/// Sum of the already-computed scores of the selected candidates.
ScoreVector heterogeneous_pine(const AttributedGraph& g, const TypeSelection& selection,
                               std::vector<std::string>* warnings = nullptr);

}  // namespace pine
