#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "pine/graph.hpp"

namespace pine {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

constexpr char kFeatureMagic[] = {'P', 'I', 'N', 'E', 'F', '1'};

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
        if (pos >= line.size()) break;
        std::size_t end = pos;
        while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r') ++end;
        tokens.push_back(line.substr(pos, end - pos));
        pos = end;
    }
    return tokens;
}

bool is_comment_or_blank(std::string_view line) {
    const auto first = line.find_first_not_of(" \t\r");
    return first == std::string_view::npos || line[first] == '#';
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, out);
    return ec == std::errc() && ptr == end;
}

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw GraphError("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw GraphError("cannot write " + path.string());
    return out;
}

struct RawEdge {
    std::string src;
    std::string dst;
    EdgeType type;
    std::size_t line;
};

FeatureTable read_binary_features(std::ifstream& in, const std::filesystem::path& path) {
    char magic[sizeof(kFeatureMagic)];
    std::uint64_t header[2];
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(header), sizeof header);
    if (!in || std::memcmp(magic, kFeatureMagic, sizeof magic) != 0)
        throw ParseError(path.string(), 1, "truncated PINEF1 header");
    FeatureTable table;
    table.rows = header[0];
    table.dim = header[1];
    table.values.resize(table.rows * table.dim);
    in.read(reinterpret_cast<char*>(table.values.data()),
            static_cast<std::streamsize>(table.values.size() * sizeof(float)));
    if (!in) throw ParseError(path.string(), 1, "PINEF1 payload shorter than N x d floats");
    return table;
}

FeatureTable read_csv_features(std::ifstream& in, const std::filesystem::path& path, bool id_column) {
    FeatureTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        std::string_view rest(line);
        std::size_t fields = 0;
        std::size_t start = 0;
        bool first = true;
        while (start <= rest.size()) {
            auto comma = rest.find(',', start);
            if (comma == std::string_view::npos) comma = rest.size();
            std::string_view field = rest.substr(start, comma - start);
            while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
            while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
                field.remove_suffix(1);
            if (first && id_column) {
                table.row_labels.emplace_back(field);
            } else {
                float v = 0.0f;
                if (!parse_number(field, v))
                    throw ParseError(path.string(), line_no, "bad feature value '" + std::string(field) + "'");
                table.values.push_back(v);
                ++fields;
            }
            first = false;
            start = comma + 1;
        }
        if (table.rows == 0) {
            table.dim = fields;
        } else if (fields != table.dim) {
            throw ParseError(path.string(), line_no,
                             fmt::format("expected {} feature values, found {}", table.dim, fields));
        }
        ++table.rows;
    }
    if (table.rows > 0 && table.dim == 0) throw DimensionError(path.string() + ": feature rows are empty");
    return table;
}

}  // namespace

FeatureTable read_features(const std::filesystem::path& path, bool id_column) {
    auto in = open_input(path, std::ios::in | std::ios::binary);
    char probe[sizeof(kFeatureMagic)] = {};
    in.read(probe, sizeof probe);
    const bool binary = in.gcount() == sizeof probe && std::memcmp(probe, kFeatureMagic, sizeof probe) == 0;
    in.clear();
    in.seekg(0);
    if (binary) return read_binary_features(in, path);
    return read_csv_features(in, path, id_column);
}

AttributedGraph load_graph(const std::filesystem::path& edge_list,
                           const std::optional<std::filesystem::path>& feature_path, const LoadOptions& options) {
    auto in = open_input(edge_list);
    std::vector<RawEdge> raw;
    std::string line;
    std::size_t line_no = 0;
    std::optional<bool> typed;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        const auto tokens = split_ws(line);
        if (tokens.size() != 2 && tokens.size() != 3)
            throw ParseError(edge_list.string(), line_no, "expected 'src dst [type]'");
        const bool has_type = tokens.size() == 3;
        if (typed && *typed != has_type)
            throw ParseError(edge_list.string(), line_no, "mixed typed and untyped edge lines");
        typed = has_type;
        EdgeType type = 0;
        if (has_type && !parse_number(tokens[2], type))
            throw ParseError(edge_list.string(), line_no, "edge type must be a non-negative integer");
        RawEdge e{std::string(tokens[0]), std::string(tokens[1]), type, line_no};
        if (options.reverse_edges) std::swap(e.src, e.dst);
        raw.push_back(std::move(e));
    }

    std::vector<std::string> labels;
    std::vector<float> features;
    std::size_t dim = 1;
    std::unordered_map<std::string, NodeId> index;

    if (feature_path) {
        FeatureTable table = read_features(*feature_path, options.feature_id_column);
        dim = table.dim;
        features = std::move(table.values);
        if (options.feature_id_column) {
            labels = std::move(table.row_labels);
            for (NodeId v = 0; v < labels.size(); ++v)
                if (!index.emplace(labels[v], v).second)
                    throw ParseError(feature_path->string(), v + 1, "duplicate node id '" + labels[v] + "'");
        } else {
            labels.resize(table.rows);
            for (NodeId v = 0; v < table.rows; ++v) {
                labels[v] = std::to_string(v);
                index.emplace(labels[v], v);
            }
        }
        for (const auto& e : raw) {
            for (const auto* id : {&e.src, &e.dst}) {
                if (index.count(*id)) continue;
                std::uint64_t numeric = 0;
                if (!options.feature_id_column && parse_number(std::string_view(*id), numeric))
                    throw DimensionError(fmt::format("{}:{}: node id {} outside the {} feature rows of {}",
                                                     edge_list.string(), e.line, *id, table.rows,
                                                     feature_path->string()));
                throw ParseError(edge_list.string(), e.line, "unknown node id '" + *id + "'");
            }
        }
    } else {
        // No features: node universe is the set of ids seen in the edge list,
        // numerically sorted when all ids are integers, else first-seen order.
        std::vector<std::string> seen;
        for (const auto& e : raw)
            for (const auto* id : {&e.src, &e.dst})
                if (index.emplace(*id, 0).second) seen.push_back(*id);
        const bool numeric = std::all_of(seen.begin(), seen.end(), [](const std::string& s) {
            std::uint64_t v = 0;
            return parse_number(std::string_view(s), v);
        });
        if (numeric) {
            std::sort(seen.begin(), seen.end(), [](const std::string& a, const std::string& b) {
                return std::stoull(a) < std::stoull(b);
            });
        }
        for (NodeId v = 0; v < seen.size(); ++v) index[seen[v]] = v;
        labels = std::move(seen);
        features.assign(labels.size(), 1.0f);
    }

    std::vector<Edge> edges;
    edges.reserve(raw.size());
    for (const auto& e : raw) edges.push_back({index.at(e.src), index.at(e.dst), e.type});
    const std::size_t n = labels.size();
    return AttributedGraph::from_edges(n, std::move(edges), std::move(features), dim, typed.value_or(false),
                                       std::move(labels));
}

void write_edge_list(const AttributedGraph& g, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const auto& e : g.edges()) {
        out << g.label(e.src) << ' ' << g.label(e.dst);
        if (g.has_edge_types()) out << ' ' << e.type;
        out << '\n';
    }
}

void write_features_binary(const AttributedGraph& g, const std::filesystem::path& path) {
    auto out = open_output(path, std::ios::out | std::ios::binary);
    const std::uint64_t header[2] = {g.num_nodes(), g.feature_dim()};
    out.write(kFeatureMagic, sizeof kFeatureMagic);
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    const auto values = g.feature_matrix();
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
}

void write_features_csv(const AttributedGraph& g, const std::filesystem::path& path, bool id_column) {
    auto out = open_output(path);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        if (id_column) out << g.label(v) << ',';
        const auto row = g.features(v);
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << fmt::format("{}", row[k]);
        out << '\n';
    }
}

void write_id_map(const AttributedGraph& g, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (NodeId v = 0; v < g.num_nodes(); ++v) out << v << '\t' << g.label(v) << '\n';
}

namespace {

std::unordered_map<std::string_view, NodeId> label_index(const AttributedGraph& g) {
    std::unordered_map<std::string_view, NodeId> index;
    index.reserve(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) index.emplace(g.label(v), v);
    return index;
}

}  // namespace

std::vector<NodeId> read_node_list(const AttributedGraph& g, const std::filesystem::path& path) {
    const auto index = label_index(g);
    auto in = open_input(path);
    std::vector<NodeId> nodes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        const auto tokens = split_ws(line);
        const auto it = index.find(tokens[0]);
        if (it == index.end()) throw ParseError(path.string(), line_no, "unknown node '" + std::string(tokens[0]) + "'");
        nodes.push_back(it->second);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

std::vector<LabeledNode> read_node_values(const AttributedGraph& g, const std::filesystem::path& path) {
    const auto index = label_index(g);
    auto in = open_input(path);
    std::vector<LabeledNode> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        const auto tokens = split_ws(line);
        if (tokens.size() < 2) throw ParseError(path.string(), line_no, "expected 'node value'");
        const auto it = index.find(tokens[0]);
        if (it == index.end()) throw ParseError(path.string(), line_no, "unknown node '" + std::string(tokens[0]) + "'");
        double v = 0.0;
        if (!parse_number(tokens[1], v)) throw ParseError(path.string(), line_no, "bad value");
        values.push_back({it->second, v});
    }
    return values;
}

void write_scores(const AttributedGraph& g, const ScoreVector& scores, const std::filesystem::path& path) {
    if (scores.size() != g.num_nodes()) throw DimensionError("score vector length does not match node count");
    std::vector<NodeId> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId a, NodeId b) { return scores.values[a] > scores.values[b]; });
    auto out = open_output(path);
    for (NodeId v : order) out << g.label(v) << '\t' << fmt::format("{:.17g}", scores.values[v]) << '\n';
}

}  // namespace pine
