#include "pine/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pine {

ParseError::ParseError(const std::string& file, std::size_t line, const std::string& what)
    : GraphError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

AttributedGraph AttributedGraph::from_edges(std::size_t num_nodes, std::vector<Edge> edges,
                                            std::vector<float> features, std::size_t feature_dim,
                                            bool typed, std::vector<std::string> labels) {
    if (feature_dim == 0) throw DimensionError("feature dimension must be at least 1");
    if (features.size() != num_nodes * feature_dim)
        throw DimensionError("feature matrix has " + std::to_string(features.size()) + " values, expected " +
                             std::to_string(num_nodes) + " x " + std::to_string(feature_dim));
    if (!labels.empty() && labels.size() != num_nodes)
        throw DimensionError("label count " + std::to_string(labels.size()) + " does not match node count " +
                             std::to_string(num_nodes));
    if (labels.empty()) {
        labels.resize(num_nodes);
        for (std::size_t i = 0; i < num_nodes; ++i) labels[i] = std::to_string(i);
    }
    AttributedGraph g;
    g.num_nodes_ = num_nodes;
    g.feature_dim_ = feature_dim;
    g.typed_ = typed;
    g.features_ = std::make_shared<const std::vector<float>>(std::move(features));
    g.labels_ = std::make_shared<const std::vector<std::string>>(std::move(labels));
    g.build(std::move(edges));
    return g;
}

AttributedGraph AttributedGraph::with_edges(const AttributedGraph& base, std::vector<Edge> edges) {
    AttributedGraph g;
    g.num_nodes_ = base.num_nodes_;
    g.feature_dim_ = base.feature_dim_;
    g.typed_ = base.typed_;
    g.features_ = base.features_;
    g.labels_ = base.labels_;
    g.build(std::move(edges));
    return g;
}

AttributedGraph AttributedGraph::with_edges(const AttributedGraph& base, std::span<const NodePair> pairs) {
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (const auto& p : pairs) edges.push_back({p.src, p.dst, 0});
    AttributedGraph g;
    g.num_nodes_ = base.num_nodes_;
    g.feature_dim_ = base.feature_dim_;
    g.features_ = base.features_;
    g.labels_ = base.labels_;
    g.build(std::move(edges));
    return g;
}

void AttributedGraph::build(std::vector<Edge> edges) {
    const std::size_t n = num_nodes_;
    for (const auto& e : edges) {
        if (e.src >= n || e.dst >= n)
            throw GraphError("edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                             ") references a node outside [0, " + std::to_string(n) + ")");
    }
    if (!typed_)
        for (auto& e : edges) e.type = 0;

    const auto loops = std::erase_if(edges, [](const Edge& e) { return e.src == e.dst; });
    dropped_self_loops_ = loops;
    std::sort(edges.begin(), edges.end());
    const auto before = edges.size();
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    collapsed_duplicates_ = before - edges.size();

    const std::size_t m = edges.size();
    out_offsets_.assign(n + 1, 0);
    in_offsets_.assign(n + 1, 0);
    for (const auto& e : edges) {
        ++out_offsets_[e.src + 1];
        ++in_offsets_[e.dst + 1];
    }
    std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
    std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());

    out_targets_.resize(m);
    in_sources_.resize(m);
    out_to_in_.resize(m);
    if (typed_) {
        out_types_.resize(m);
        in_types_.resize(m);
    } else {
        out_types_.clear();
        in_types_.clear();
    }
    // Edges are sorted by (src, dst, type), so filling the in-CSR in this
    // order leaves each in-range sorted by (src, type).
    std::vector<std::size_t> in_cursor(in_offsets_.begin(), in_offsets_.end() - 1);
    for (std::size_t k = 0; k < m; ++k) {
        const auto& e = edges[k];
        out_targets_[k] = e.dst;
        const std::size_t slot = in_cursor[e.dst]++;
        in_sources_[slot] = e.src;
        out_to_in_[k] = slot;
        if (typed_) {
            out_types_[k] = e.type;
            in_types_[slot] = e.type;
        }
    }
}

std::vector<EdgeType> AttributedGraph::edge_types() const {
    if (!typed_) return num_edges() > 0 ? std::vector<EdgeType>{0} : std::vector<EdgeType>{};
    std::vector<EdgeType> types(out_types_);
    std::sort(types.begin(), types.end());
    types.erase(std::unique(types.begin(), types.end()), types.end());
    return types;
}

bool AttributedGraph::has_edge(NodeId j, NodeId i) const {
    const auto nbrs = out_neighbors(j);
    return std::binary_search(nbrs.begin(), nbrs.end(), i);
}

std::vector<Edge> AttributedGraph::edges() const {
    std::vector<Edge> result;
    result.reserve(num_edges());
    for (NodeId j = 0; j < num_nodes_; ++j)
        for (std::size_t k = out_offsets_[j]; k < out_offsets_[j + 1]; ++k)
            result.push_back({j, out_targets_[k], out_edge_type(k)});
    return result;
}

AttributedGraph subgraph_by_edge_type(const AttributedGraph& g, EdgeType type) {
    if (!g.has_edge_types()) throw GraphError("graph carries no edge types");
    const auto types = g.edge_types();
    if (!std::binary_search(types.begin(), types.end(), type))
        throw GraphError("unknown edge type " + std::to_string(type));
    auto all = g.edges();
    std::erase_if(all, [type](const Edge& e) { return e.type != type; });
    return AttributedGraph::with_edges(g, std::move(all));
}

namespace {

struct DisjointSets {
    std::vector<NodeId> parent;
    std::vector<std::size_t> size;

    explicit DisjointSets(std::size_t n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0); }

    NodeId find(NodeId x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    void unite(NodeId a, NodeId b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
    }
};

}  // namespace

AttributedGraph largest_weak_component(const AttributedGraph& g) {
    const std::size_t n = g.num_nodes();
    if (n == 0) return g;
    DisjointSets sets(n);
    for (NodeId j = 0; j < n; ++j)
        for (NodeId i : g.out_neighbors(j)) sets.unite(j, i);

    // Scanning ids in ascending order makes the first root reaching the
    // maximum size the one containing the smallest id.
    NodeId best_root = sets.find(0);
    for (NodeId v = 1; v < n; ++v) {
        const NodeId r = sets.find(v);
        if (sets.size[r] > sets.size[best_root]) best_root = r;
    }
    if (sets.size[best_root] == n) return g;

    std::vector<NodeId> remap(n, static_cast<NodeId>(-1));
    std::vector<std::string> labels;
    std::vector<float> features;
    const std::size_t d = g.feature_dim();
    NodeId next = 0;
    for (NodeId v = 0; v < n; ++v) {
        if (sets.find(v) != best_root) continue;
        remap[v] = next++;
        labels.push_back(g.label(v));
        const auto row = g.features(v);
        features.insert(features.end(), row.begin(), row.end());
    }
    std::vector<Edge> edges;
    for (const auto& e : g.edges())
        if (remap[e.src] != static_cast<NodeId>(-1)) edges.push_back({remap[e.src], remap[e.dst], e.type});
    return AttributedGraph::from_edges(next, std::move(edges), std::move(features), d, g.has_edge_types(),
                                       std::move(labels));
}

std::vector<double> feature_norms(const AttributedGraph& g) {
    std::vector<double> norms(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        double sq = 0.0;
        for (float x : g.features(v)) sq += static_cast<double>(x) * x;
        norms[v] = std::sqrt(sq);
    }
    return norms;
}

double cosine_similarity(const AttributedGraph& g, std::span<const double> norms, NodeId j, NodeId i) {
    const double denom = norms[j] * norms[i];
    if (denom == 0.0) return 0.0;
    const auto a = g.features(j);
    const auto b = g.features(i);
    double dot = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) dot += static_cast<double>(a[k]) * b[k];
    return std::clamp(dot / denom, -1.0, 1.0);
}

double cosine_similarity(const AttributedGraph& g, NodeId j, NodeId i) {
    const auto a = g.features(j);
    const auto b = g.features(i);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += static_cast<double>(a[k]) * b[k];
        na += static_cast<double>(a[k]) * a[k];
        nb += static_cast<double>(b[k]) * b[k];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace pine
