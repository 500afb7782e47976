#include <doctest.h>

#include <cmath>
#include <numeric>

#include "pine/diffusion.hpp"
#include "support/oracles.hpp"
#include "support/random_graphs.hpp"

using namespace pine;
using namespace pine::diffusion;

namespace {

std::vector<NodeId> all_nodes(const AttributedGraph& g) {
    std::vector<NodeId> v(g.num_nodes());
    std::iota(v.begin(), v.end(), 0);
    return v;
}

DiffusionConfig config(Model m, std::size_t runs, std::uint64_t seed = 42) {
    DiffusionConfig c;
    c.model = m;
    c.num_runs = runs;
    c.rng_seed = seed;
    return c;
}

// Fixed point of the threshold rule, iterated to convergence.
std::vector<NodeId> lt_fixed_point(const AttributedGraph& g, const std::vector<double>& w,
                                   const std::vector<NodeId>& seeds, const std::vector<double>& theta) {
    std::vector<char> active(g.num_nodes(), 0);
    for (NodeId s : seeds) active[s] = 1;
    for (bool changed = true; changed;) {
        changed = false;
        for (NodeId i = 0; i < g.num_nodes(); ++i) {
            if (active[i]) continue;
            double sum = 0;
            for (std::size_t e = g.in_begin(i); e < g.in_end(i); ++e)
                if (active[g.in_sources()[e]]) sum += w[e];
            if (sum >= theta[i]) active[i] = changed = 1;
        }
    }
    std::vector<NodeId> out;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (active[v]) out.push_back(v);
    return out;
}

}  // namespace

TEST_CASE("influence weights follow the definition") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto g = testing::random_graph(15, 0.25, 4, seed);
        const auto w = compute_influence_weights(g, 0.3, 0.7);
        const auto expected = oracle::influence_weights(g, 0.3, 0.7);
        for (std::size_t e = 0; e < g.num_edges(); ++e) {
            CHECK(w.combined[e] == doctest::Approx(expected[e]).epsilon(1e-12));
            CHECK(w.combined[e] >= 0.0);
            CHECK(w.combined[e] <= 1.0);
        }
        for (NodeId i = 0; i < g.num_nodes(); ++i) {
            if (g.in_degree(i) == 0) continue;
            double s = 0, t = 0, c = 0;
            for (std::size_t e = g.in_begin(i); e < g.in_end(i); ++e) {
                s += w.structural[e];
                t += w.semantic[e];
                c += w.combined[e];
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(t == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("influence weight examples") {
    SUBCASE("identical in-neighbors share equally") {
        const auto g = testing::graph_from_pairs(5, {{1, 0}, {2, 0}, {3, 0}, {4, 0}});
        const auto w = compute_influence_weights(g, 0.5, 0.5);
        for (double x : w.combined) CHECK(x == doctest::Approx(0.25));
    }
    SUBCASE("a single in-neighbor gets everything") {
        const auto g = testing::graph_from_pairs(2, {{0, 1}}, 3, 5);
        for (double a : {0.0, 0.4, 1.0}) CHECK(compute_influence_weights(g, a, 1.0 - a).combined[0] == doctest::Approx(1.0));
    }
    SUBCASE("softmax of similarities 1 and 0") {
        // Node 0 is the target; node 1 is parallel to it, node 2 orthogonal.
        std::vector<float> f{1, 0, 1, 0, 0, 1};
        const auto g = AttributedGraph::from_edges(3, {{1, 0, 0}, {2, 0, 0}}, f, 2);
        const auto w = compute_influence_weights(g, 0.0, 1.0);
        CHECK(w.combined[0] == doctest::Approx(0.7311).epsilon(1e-4));
        CHECK(w.combined[1] == doctest::Approx(0.2689).epsilon(1e-4));
    }
    CHECK_THROWS_AS(compute_influence_weights(testing::path_graph(2), 0.6, 0.6), ParameterError);
    CHECK_THROWS_AS(compute_influence_weights(testing::path_graph(2), -0.5, 1.5), ParameterError);
}

TEST_CASE("LT+ with explicit thresholds") {
    const auto single = testing::graph_from_pairs(2, {{0, 1}});
    const auto w1 = compute_influence_weights(single, 0.5, 0.5);
    const std::vector<NodeId> seed0{0};
    CHECK(run_lt_plus(single, w1, seed0, std::vector<double>{0.9, 0.5}) == NodeSet{0, 1});

    // Diamond 0 -> {1, 2} -> 3 checked against the fixed point for a grid of thresholds.
    const auto diamond = testing::graph_from_pairs(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, 2, 11);
    const auto w = compute_influence_weights(diamond, 0.5, 0.5);
    for (double t1 : {0.2, 0.6, 1.0})
        for (double t3 : {0.1, 0.4, 0.55, 0.9, 1.0}) {
            const std::vector<double> theta{0.5, t1, 0.3, t3};
            CHECK(run_lt_plus(diamond, w, seed0, theta) == lt_fixed_point(diamond, w.combined, seed0, theta));
        }
}

TEST_CASE("trivial seed sets") {
    const auto g = testing::random_graph(12, 0.2, 3, 2);
    for (Model m : {Model::LinearThresholdPlus, Model::IndependentCascadePlus, Model::Sir}) {
        const auto every = influence_spread(g, config(m, 50), all_nodes(g));
        CHECK(every.mean_spread == 1.0);
        CHECK(every.std_spread == 0.0);
        const auto none = influence_spread(g, config(m, 50), std::vector<NodeId>{});
        CHECK(none.mean_spread == 0.0);
        CHECK(none.runs == 50);
        CHECK(none.activated_counts.size() == 50);
    }
}

TEST_CASE("IC+ on a chain of weight-one edges reaches everything") {
    const auto g = testing::path_graph(6);
    const auto w = compute_influence_weights(g, 0.5, 0.5);
    CounterRng rng(1, 0);
    CHECK(run_ic_plus(g, w, std::vector<NodeId>{0}, rng).size() == 6);
    CHECK(run_ic_plus(g, w, std::vector<NodeId>{0}, rng, 2) == NodeSet{0, 1, 2});
}

TEST_CASE("SIR examples") {
    const auto path = testing::path_graph(5);
    CounterRng rng(3, 0);
    CHECK(run_sir(path, 1.0, 1.0, std::vector<NodeId>{0}, kNoStepLimit, rng).size() == 5);
    CHECK(run_sir(path, 1.0, 1.0, std::vector<NodeId>{0}, 2, rng) == NodeSet{0, 1, 2});
    CHECK(run_sir(path, 0.0, 0.5, std::vector<NodeId>{1}, kNoStepLimit, rng) == NodeSet{1});
    CHECK_THROWS_AS(run_sir(path, 1.5, 1.0, std::vector<NodeId>{0}, 5, rng), ParameterError);
    CHECK_THROWS_AS(run_sir(path, 0.5, -0.1, std::vector<NodeId>{0}, 5, rng), ParameterError);

    // Single edge, gamma = 1: node 1 is infected with probability beta.
    const auto edge = testing::path_graph(2);
    auto c = config(Model::Sir, 100000, 5);
    c.sir_beta = 0.3;
    const auto r = influence_spread(edge, c, std::vector<NodeId>{0});
    const double p = 2.0 * r.mean_spread - 1.0;
    const double se = std::sqrt(0.3 * 0.7 / 100000.0);
    CHECK(std::abs(p - 0.3) < 3 * se);
}

TEST_CASE("IC+ and LT+ agree with exhaustive enumeration") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const std::size_t n = 3 + seed % 3;
        const auto g = testing::random_graph(n, 0.5, 3, seed);
        const auto weights = compute_influence_weights(g, 0.5, 0.5);
        const std::vector<NodeId> seeds{0};
        const std::size_t runs = 20000;
        for (Model m : {Model::IndependentCascadePlus, Model::LinearThresholdPlus}) {
            const auto r = influence_spread(g, config(m, runs, seed), seeds, weights);
            const double exact = m == Model::IndependentCascadePlus ? oracle::ic_spread(g, weights.combined, seeds)
                                                                    : oracle::lt_spread(g, weights.combined, seeds);
            const double se = r.std_spread / std::sqrt(static_cast<double>(runs));
            CAPTURE(seed);
            CAPTURE(model_name(m));
            CHECK(std::abs(r.mean_spread - exact) <= std::max(4 * se, 1e-12));
        }
    }
}

TEST_CASE("results do not depend on the worker count") {
    const auto g = testing::random_graph(60, 0.06, 4, 8);
    const std::vector<NodeId> seeds{0, 5, 9};
    for (Model m : {Model::LinearThresholdPlus, Model::IndependentCascadePlus, Model::Sir}) {
        auto c = config(m, 300, 17);
        c.workers = 1;
        const auto a = influence_spread(g, c, seeds);
        c.workers = 8;
        const auto b = influence_spread(g, c, seeds);
        CHECK(a.activated_counts == b.activated_counts);
        CHECK(a.mean_spread == b.mean_spread);
        CHECK(a.std_spread == b.std_spread);
    }
}

TEST_CASE("spread grows with the seed set") {
    const auto g = testing::random_graph(40, 0.08, 3, 21);
    const std::vector<NodeId> small{1, 2}, large{1, 2, 3, 4, 5, 6};
    for (Model m : {Model::LinearThresholdPlus, Model::IndependentCascadePlus, Model::Sir}) {
        const auto a = influence_spread(g, config(m, 10000), small);
        const auto b = influence_spread(g, config(m, 10000), large);
        const double pooled = std::sqrt((a.std_spread * a.std_spread + b.std_spread * b.std_spread) / 10000.0);
        CHECK(b.mean_spread >= a.mean_spread - 3 * pooled);
        CHECK(a.mean_spread >= 2.0 / 40.0);
    }
}

TEST_CASE("with alpha2 = 0 the features are irrelevant") {
    const auto g = testing::random_graph(30, 0.1, 4, 2);
    std::vector<float> other(g.num_nodes() * 4);
    CounterRng rng(99, 0);
    for (auto& f : other) f = static_cast<float>(rng.uniform() - 0.5);
    const auto h = AttributedGraph::from_edges(g.num_nodes(), g.edges(), other, 4);
    auto c = config(Model::LinearThresholdPlus, 2000);
    c.alpha1 = 1.0;
    c.alpha2 = 0.0;
    const std::vector<NodeId> seeds{0, 1, 2};
    CHECK(influence_spread(g, c, seeds).activated_counts == influence_spread(h, c, seeds).activated_counts);
}

TEST_CASE("epidemic threshold on a star") {
    // Undirected degrees of a 4-leaf star: {4, 1, 1, 1, 1}; <k> = 1.6, <k^2> = 4.
    const auto g = testing::graph_from_pairs(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    CHECK(epidemic_threshold(g) == doctest::Approx(1.6 / (4.0 - 1.6)));
    DiffusionConfig c;
    CHECK(resolve_sir_beta(g, c) == doctest::Approx(1.0));
    c.sir_beta = 0.2;
    CHECK(resolve_sir_beta(g, c) == 0.2);
}

TEST_CASE("model names round trip") {
    for (Model m : {Model::LinearThresholdPlus, Model::IndependentCascadePlus, Model::Sir})
        CHECK(parse_model(model_name(m)) == m);
    CHECK_THROWS(parse_model("voter"));
}
