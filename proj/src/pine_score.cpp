#include "pine/pine_score.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pine/metrics.hpp"
#include "pine/parallel.hpp"

namespace pine {

template <typename Real>
ScoreVector pine_scores(const gat::GatModel<Real>& model, const AttributedGraph& g, std::size_t layer) {
    const auto attention = model.attention(layer, g);
    const auto sources = g.in_sources();
    ScoreVector s{std::vector<double>(g.num_nodes(), 0.0), "pine"};
    for (std::size_t e = 0; e < attention.size(); ++e) s.values[sources[e]] += static_cast<double>(attention[e]);
    return s;
}

template ScoreVector pine_scores(const gat::GatModel<float>&, const AttributedGraph&, std::size_t);
template ScoreVector pine_scores(const gat::GatModel<double>&, const AttributedGraph&, std::size_t);

Calibration parse_calibration(std::string_view name) {
    if (name == "none") return Calibration::None;
    if (name == "log-degree") return Calibration::LogDegree;
    if (name == "degree") return Calibration::Degree;
    throw std::invalid_argument("unknown calibration '" + std::string(name) + "' (expected none, log-degree, degree)");
}

std::string_view calibration_name(Calibration c) {
    switch (c) {
        case Calibration::None: return "none";
        case Calibration::LogDegree: return "log-degree";
        case Calibration::Degree: return "degree";
    }
    return "?";
}

ScoreVector calibrate_by_out_degree(const ScoreVector& scores, const AttributedGraph& g, Calibration calibration) {
    if (scores.size() != g.num_nodes()) throw DimensionError("score vector length does not match node count");
    ScoreVector out{scores.values, scores.method_name};
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const auto k = static_cast<double>(g.out_degree(v));
        switch (calibration) {
            case Calibration::None: break;
            case Calibration::LogDegree: out.values[v] *= std::log1p(k); break;
            case Calibration::Degree: out.values[v] *= k; break;
        }
    }
    return out;
}

TypeSelection select_edge_types(const AttributedGraph& g, std::span<const LabeledNode> val_labels,
                                const TypeSelectionOptions& options) {
    if (!g.has_edge_types()) throw GraphError("edge-type selection needs a typed graph");
    if (val_labels.empty()) throw std::invalid_argument("edge-type selection needs validation labels");

    TypeSelection selection;
    std::vector<std::pair<std::size_t, EdgeType>> sizes;
    {
        std::map<EdgeType, std::size_t> counts;
        for (std::size_t k = 0; k < g.num_edges(); ++k) ++counts[g.out_edge_type(k)];
        for (const auto& [type, count] : counts) sizes.emplace_back(count, type);
        std::stable_sort(sizes.begin(), sizes.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        if (sizes.size() > options.top_k_types) sizes.resize(options.top_k_types);
    }
    for (const auto& [count, type] : sizes) {
        TypeCandidate c;
        c.type = type;
        c.num_edges = count;
        selection.candidates.push_back(std::move(c));
    }

    const bool constant = std::all_of(val_labels.begin(), val_labels.end(), [&](const LabeledNode& l) {
        return l.importance == val_labels.front().importance;
    });
    if (constant) {
        selection.warnings.push_back("validation labels are constant; Spearman is undefined and no edge type is selected");
        for (auto& c : selection.candidates) {
            c.spearman = std::numeric_limits<double>::quiet_NaN();
            c.note = "skipped: constant labels";
        }
        return selection;
    }

    const unsigned workers = options.workers ? options.workers : default_worker_count();
    parallel_for(selection.candidates.size(), workers, [&](std::size_t idx) {
        auto& c = selection.candidates[idx];
        const auto sub = subgraph_by_edge_type(g, c.type);
        try {
            const auto split = split_edges(sub, options.split);
            auto trained = train(sub, split, options.train);
            c.model = std::move(trained.model);
            c.test_auc = trained.test_auc;
            c.trained = true;
        } catch (const SplitError& e) {
            c.note = fmt::format("skipped: {}", e.what());
            c.spearman = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        c.model.forward(sub);
        c.scores = pine_scores(c.model, sub, options.layer);
        c.scores.method_name = fmt::format("pine[type={}]", c.type);

        std::vector<double> predicted, truth;
        for (const auto& l : val_labels) {
            if (sub.in_degree(l.node) + sub.out_degree(l.node) == 0) continue;
            predicted.push_back(c.scores.values[l.node]);
            truth.push_back(l.importance);
        }
        c.spearman = metrics::spearman(predicted, truth);
        c.selected = c.spearman > 0.0;
    });

    for (const auto& c : selection.candidates) {
        if (!c.note.empty()) selection.warnings.push_back(fmt::format("edge type {}: {}", c.type, c.note));
        if (c.selected) selection.selected.push_back(c.type);
    }
    std::sort(selection.selected.begin(), selection.selected.end());
    if (selection.selected.empty()) selection.warnings.push_back("no edge type correlates positively with the labels");
    return selection;
}

ScoreVector heterogeneous_pine(const AttributedGraph& g, std::span<const EdgeType> selected,
                               std::map<EdgeType, gat::GatModel<float>>& models, std::size_t layer,
                               std::vector<std::string>* warnings) {
    ScoreVector total{std::vector<double>(g.num_nodes(), 0.0), "pine_heterogeneous"};
    if (selected.empty() && warnings) warnings->push_back("empty edge-type selection; heterogeneous PINE is all zeros");
    for (EdgeType type : selected) {
        const auto it = models.find(type);
        if (it == models.end()) throw std::invalid_argument(fmt::format("no trained model for edge type {}", type));
        const auto sub = subgraph_by_edge_type(g, type);
        it->second.forward(sub);
        const auto scores = pine_scores(it->second, sub, layer);
        for (NodeId v = 0; v < g.num_nodes(); ++v) total.values[v] += scores.values[v];
    }
    return total;
}

ScoreVector heterogeneous_pine(const AttributedGraph& g, const TypeSelection& selection,
                               std::vector<std::string>* warnings) {
    ScoreVector total{std::vector<double>(g.num_nodes(), 0.0), "pine_heterogeneous"};
    if (selection.selected.empty() && warnings)
        warnings->push_back("empty edge-type selection; heterogeneous PINE is all zeros");
    for (EdgeType type : selection.selected) {
        const auto it = std::find_if(selection.candidates.begin(), selection.candidates.end(),
                                     [type](const TypeCandidate& c) { return c.type == type; });
        if (it == selection.candidates.end() || it->scores.size() != g.num_nodes())
            throw std::invalid_argument(fmt::format("no scores for selected edge type {}", type));
        for (NodeId v = 0; v < g.num_nodes(); ++v) total.values[v] += it->scores.values[v];
    }
    return total;
}

}  // namespace pine
