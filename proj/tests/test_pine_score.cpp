#include <doctest.h>

#include <cmath>
#include <numeric>

#include "pine/metrics.hpp"
#include "pine/pine_score.hpp"
#include "support/gat_helpers.hpp"
#include "support/planted.hpp"
#include "support/random_graphs.hpp"

using namespace pine;

namespace {

gat::GatModel<double> random_model(std::size_t in, std::size_t layers, std::uint64_t seed) {
    gat::ModelShape shape{in, 6, layers};
    gat::GatModel<double> m(shape);
    testing::randomize(m, seed);
    return m;
}

TypeSelectionOptions fast_selection() {
    TypeSelectionOptions o;
    o.train.hidden_size = 16;
    o.train.learning_rate = 5e-3;
    o.train.max_epochs = 60;
    o.train.patience = 10;
    o.workers = 2;
    return o;
}

}  // namespace

TEST_CASE("PINE on a single edge and a star") {
    const auto edge = testing::graph_from_pairs(2, {{0, 1}}, 2, 3);
    auto m = random_model(2, 1, 1);
    m.forward(edge);
    const auto s = pine_scores(m, edge);
    CHECK(s[0] == 1.0);
    CHECK(s[1] == 0.0);

    const auto star = testing::graph_from_pairs(6, {{1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}}, 2, 4);
    auto ms = random_model(2, 1, 2);
    ms.forward(star);
    const auto p = pine_scores(ms, star);
    const auto alpha = ms.attention(0, star);
    double leaves = 0;
    for (NodeId v = 1; v < 6; ++v) {
        const auto src = star.in_neighbors(0);
        const auto k = std::find(src.begin(), src.end(), v) - src.begin();
        CHECK(p[v] == doctest::Approx(alpha[star.in_begin(0) + k]));
        leaves += p[v];
    }
    CHECK(leaves == doctest::Approx(1.0));
    CHECK(p[0] == 0.0);
}

TEST_CASE("PINE conserves attention mass and is bounded by out-degree") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto g = testing::random_graph(10 + seed, 0.2, 3, seed);
        for (std::size_t layers : {1, 2}) {
            auto m = random_model(3, layers, seed);
            m.forward(g);
            for (std::size_t l = 0; l < layers; ++l) {
                const auto s = pine_scores(m, g, l);
                std::size_t receiving = 0;
                for (NodeId v = 0; v < g.num_nodes(); ++v) {
                    receiving += g.in_degree(v) > 0;
                    CHECK(s[v] <= static_cast<double>(g.out_degree(v)) + 1e-12);
                    if (g.out_degree(v) == 0) CHECK(s[v] == 0.0);
                }
                CHECK(std::accumulate(s.values.begin(), s.values.end(), 0.0) ==
                      doctest::Approx(static_cast<double>(receiving)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("PINE needs a forward pass") {
    const auto g = testing::random_graph(8, 0.3, 2, 1);
    auto m = random_model(2, 1, 1);
    CHECK_THROWS_AS(pine_scores(m, g), gat::StateError);
}

TEST_CASE("calibration by out-degree") {
    const auto g = testing::graph_from_pairs(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}});
    const ScoreVector uniform{{1, 1, 1, 1}, "u"};
    const auto c = calibrate_by_out_degree(uniform, g);
    CHECK(c[0] == doctest::Approx(std::log(4.0)));
    CHECK(c[1] == doctest::Approx(std::log(2.0)));
    CHECK(c[2] == 0.0);
    CHECK(calibrate_by_out_degree(uniform, g, Calibration::Degree)[0] == 3.0);
    CHECK(calibrate_by_out_degree(uniform, g, Calibration::None).values == uniform.values);

    const auto isolated = testing::graph_from_pairs(3, {});
    for (double v : calibrate_by_out_degree(ScoreVector{{0.3, 2, 5}, "x"}, isolated).values) CHECK(v == 0.0);

    // Ranking of uniform scores follows out-degree; equal degrees keep their order.
    const auto r = testing::random_graph(30, 0.15, 1, 3);
    CounterRng rng(2, 0);
    ScoreVector s{std::vector<double>(30), "s"};
    for (auto& v : s.values) v = rng.uniform();
    const auto cal = calibrate_by_out_degree(s, r);
    for (NodeId a = 0; a < 30; ++a) {
        CHECK(cal[a] == doctest::Approx(s[a] * std::log1p(static_cast<double>(r.out_degree(a)))));
        for (NodeId b = 0; b < 30; ++b)
            if (r.out_degree(a) == r.out_degree(b) && r.out_degree(a) > 0 && s[a] < s[b]) CHECK(cal[a] < cal[b]);
    }
    CHECK_THROWS_AS(calibrate_by_out_degree(ScoreVector{{1}, "x"}, r), DimensionError);
    CHECK(parse_calibration("log-degree") == Calibration::LogDegree);
    CHECK_THROWS(parse_calibration("sqrt"));
}

TEST_CASE("heterogeneous PINE adds per-type scores") {
    const auto g = testing::random_graph(25, 0.2, 3, 5, 3);
    std::map<EdgeType, gat::GatModel<float>> models;
    std::vector<ScoreVector> per_type;
    for (EdgeType t = 0; t < 3; ++t) {
        models.emplace(t, random_model(3, 1, 10 + t).cast<float>());
        const auto sub = subgraph_by_edge_type(g, t);
        auto m = models.at(t);
        m.forward(sub);
        per_type.push_back(pine_scores(m, sub));
    }
    const std::vector<EdgeType> one{1}, two{0, 2};
    const auto single = heterogeneous_pine(g, one, models);
    for (NodeId v = 0; v < g.num_nodes(); ++v) CHECK(single[v] == per_type[1][v]);
    const auto pair = heterogeneous_pine(g, two, models);
    for (NodeId v = 0; v < g.num_nodes(); ++v) CHECK(pair[v] == doctest::Approx(per_type[0][v] + per_type[2][v]));

    std::vector<std::string> warnings;
    const auto none = heterogeneous_pine(g, std::vector<EdgeType>{}, models, 0, &warnings);
    for (double v : none.values) CHECK(v == 0.0);
    CHECK(warnings.size() == 1);
    CHECK_THROWS(heterogeneous_pine(g, std::vector<EdgeType>{7}, models));
}

TEST_CASE("type selection finds the planted type") {
    const auto planted = testing::planted_heterogeneous(300, 2, 3.0, 1);
    const auto sel = select_edge_types(planted.graph, planted.validation, fast_selection());
    REQUIRE(sel.candidates.size() == 2);
    const auto& aligned = *std::find_if(sel.candidates.begin(), sel.candidates.end(),
                                        [&](const TypeCandidate& c) { return c.type == planted.aligned_type; });
    const auto& noise = *std::find_if(sel.candidates.begin(), sel.candidates.end(),
                                      [&](const TypeCandidate& c) { return c.type != planted.aligned_type; });
    CHECK(aligned.selected);
    CHECK(aligned.spearman > 0.3);
    CHECK(std::abs(noise.spearman) < 0.25);
    CHECK(aligned.spearman > noise.spearman);
    CHECK(std::find(sel.selected.begin(), sel.selected.end(), planted.aligned_type) != sel.selected.end());

    // Combined scores are the sum over the selected candidates.
    const auto total = heterogeneous_pine(planted.graph, sel);
    for (NodeId v = 0; v < planted.graph.num_nodes(); ++v) {
        double expected = 0;
        for (const auto& c : sel.candidates)
            if (c.selected) expected += c.scores[v];
        CHECK(total[v] == doctest::Approx(expected));
    }
}

TEST_CASE("type selection degenerate cases") {
    auto opts = fast_selection();
    SUBCASE("constant labels select nothing") {
        const auto planted = testing::planted_heterogeneous(200, 2, 3.0, 2);
        std::vector<LabeledNode> flat = planted.validation;
        for (auto& l : flat) l.importance = 1.0;
        const auto sel = select_edge_types(planted.graph, flat, opts);
        CHECK(sel.selected.empty());
        CHECK_FALSE(sel.warnings.empty());
    }
    SUBCASE("a single positively correlated type is selected") {
        const auto planted = testing::planted_heterogeneous(200, 1, 3.0, 3);
        const auto sel = select_edge_types(planted.graph, planted.validation, opts);
        CHECK(sel.selected == std::vector<EdgeType>{0});
    }
    SUBCASE("types too small to split are skipped") {
        auto planted = testing::planted_heterogeneous(200, 1, 3.0, 4);
        auto edges = planted.graph.edges();
        edges.push_back({0, 1, 9});
        edges.push_back({1, 2, 9});
        const auto g = AttributedGraph::with_edges(planted.graph, edges);
        const auto sel = select_edge_types(g, planted.validation, opts);
        const auto tiny = std::find_if(sel.candidates.begin(), sel.candidates.end(),
                                       [](const TypeCandidate& c) { return c.type == 9; });
        REQUIRE(tiny != sel.candidates.end());
        CHECK_FALSE(tiny->trained);
        CHECK_FALSE(tiny->selected);
        CHECK_FALSE(tiny->note.empty());
    }
    SUBCASE("top_k_types keeps the largest types") {
        const auto planted = testing::planted_heterogeneous(150, 3, 2.0, 5);
        opts.top_k_types = 1;
        CHECK(select_edge_types(planted.graph, planted.validation, opts).candidates.size() == 1);
    }
    CHECK_THROWS(select_edge_types(testing::path_graph(4), std::vector<LabeledNode>{{0, 1.0}}, opts));
}

TEST_CASE("type selection does not depend on the worker count") {
    const auto planted = testing::planted_heterogeneous(150, 3, 2.0, 6);
    auto opts = fast_selection();
    opts.workers = 1;
    const auto a = select_edge_types(planted.graph, planted.validation, opts);
    opts.workers = 3;
    const auto b = select_edge_types(planted.graph, planted.validation, opts);
    CHECK(a.selected == b.selected);
    for (std::size_t k = 0; k < a.candidates.size(); ++k) CHECK(a.candidates[k].scores.values == b.candidates[k].scores.values);
}
