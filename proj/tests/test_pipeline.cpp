#include <doctest.h>

#include <sstream>

#include "pine/config.hpp"
#include "pine/pipeline.hpp"
#include "support/random_graphs.hpp"
#include "support/temp_dir.hpp"

using namespace pine;

namespace {

ExperimentConfig parse(const std::string& text, const std::filesystem::path& base = "/data") {
    std::istringstream in(text);
    return parse_config(in, base);
}

// Writes a random graph and a small config next to it.
std::filesystem::path write_experiment(testing::TempDir& dir, std::size_t n, double p, const std::string& extra) {
    const auto g = testing::random_graph(n, p, 4, 3);
    write_edge_list(g, dir.path() / "edges.txt");
    write_features_csv(g, dir.path() / "features.csv", true);
    return dir.write("run.ini",
                     "[graph]\nedges = edges.txt\nfeatures = features.csv\nfeature_id_column = true\n"
                     "[train]\nhidden_size = 8\nmax_epochs = 20\npatience = 5\n"
                     "[diffusion]\nruns = 10\n" +
                         extra);
}

}  // namespace

TEST_CASE("config files") {
    const auto c = parse("[graph]\nedges = g/edges.txt\n[train]\nhidden_size = 32\nnum_layers = 2\n"
                         "[diffusion]\nmodels = ltp, sir\nsir_beta = 0.2\nruns = 50\n"
                         "[pine]\nlayer = 1\ncalibration = log-degree\n[pipeline]\nmethods = pagerank,pine\n");
    CHECK(c.edges == std::filesystem::path("/data/g/edges.txt"));
    CHECK_FALSE(c.features);
    CHECK(c.train.hidden_size == 32);
    CHECK(c.models == std::vector<diffusion::Model>{diffusion::Model::LinearThresholdPlus, diffusion::Model::Sir});
    CHECK(c.diffusion.sir_beta == 0.2);
    CHECK(c.diffusion.num_runs == 50);
    CHECK(c.pine_layer == 1);
    CHECK(c.calibration == Calibration::LogDegree);
    CHECK(c.methods == std::vector<std::string>{"pagerank", "pine"});

    const auto abs = parse("[graph]\nedges = /x/e.txt\n");
    CHECK(abs.edges == std::filesystem::path("/x/e.txt"));

    CHECK_THROWS_AS(parse("[graph]\nedges = e\n[colour]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[graph]\nedges = e\nweight = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("[train]\nhidden_size = 8\n"), ConfigError);
    CHECK_THROWS_AS(parse("[graph]\nedges = e\n[train]\nhidden_size = eight\n"), ConfigError);
    CHECK_THROWS_AS(parse("[graph]\nedges = e\n[pipeline]\nmethods = magic\n"), ConfigError);
    CHECK_THROWS_AS(parse("[graph]\nedges = e\n[pipeline]\nseed_fraction = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse("[graph]\nedges = e\n[pine]\nlayer = 1\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), ConfigError);
}

TEST_CASE("settings list every resolved value") {
    const auto c = parse("[graph]\nedges = e.txt\n");
    const auto s = c.settings();
    auto value = [&](const std::string& key) {
        for (const auto& [k, v] : s)
            if (k == key) return v;
        FAIL("missing " << key);
        return std::string{};
    };
    CHECK(value("graph.features") == "none");
    CHECK(value("pipeline.methods") == "out_degree,pine");
    CHECK(value("diffusion.models") == "ltp");
    CHECK(value("split.train_fraction") == "0.7");
}

TEST_CASE("top fraction seed selection") {
    const ScoreVector s{{0.5, 0.9, 0.1, 0.9, 0.3, 0.7, 0.2, 0.8, 0.4, 0.6}, "s"};
    CHECK(select_top_fraction(s, 1.0).size() == 10);
    CHECK(select_top_fraction(s, 0.3) == std::vector<NodeId>{1, 3, 7});
    CHECK(select_top_fraction(s, 0.2) == std::vector<NodeId>{1, 3});
    CHECK(select_top_fraction(s, 0.05).empty());

    ScoreVector big{std::vector<double>(100), "b"};
    for (std::size_t k = 0; k < 100; ++k) big.values[k] = static_cast<double>((k * 37) % 100);
    const auto top = select_top_fraction(big, 0.1);
    REQUIRE(top.size() == 10);
    for (NodeId v : top) CHECK(big[v] >= 90.0);
}

TEST_CASE("pipeline end to end") {
    testing::TempDir dir;
    const auto path = write_experiment(dir, 50, 0.08, "[pipeline]\nmethods = out_degree,pagerank,pine\n");
    const auto config = load_config(path);
    const auto report = run_pipeline(config, 2);
    REQUIRE(report.rows.size() == 3);
    for (const auto& row : report.rows) {
        REQUIRE(row.results.size() == 1);
        CHECK(row.results[0].runs == 10);
        CHECK(row.results[0].mean_spread >= 5.0 / 50.0);
        CHECK(row.results[0].mean_spread <= 1.0);
    }
    const auto tsv = report.to_tsv();
    CHECK(tsv.find("# graph.num_nodes\t50") != std::string::npos);
    CHECK(tsv.find("method\tltp_mean\tltp_std") != std::string::npos);
    CHECK(tsv.find("# pine.test_auc\t") != std::string::npos);
    CHECK(tsv.find("\npagerank\t") != std::string::npos);

    // Byte-identical for any number of workers.
    CHECK(run_pipeline(config, 1).to_tsv() == tsv);
    CHECK(run_pipeline(config, 8).to_tsv() == tsv);
}

TEST_CASE("methods over the node budget are skipped") {
    testing::TempDir dir;
    const auto path =
        write_experiment(dir, 40, 0.1, "[centrality]\nnode_budget = 10\n[pipeline]\nmethods = closeness,degree\n");
    const auto report = run_pipeline(load_config(path));
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].results.empty());
    CHECK_FALSE(report.rows[0].skipped_reason.empty());
    CHECK(report.rows[1].results.size() == 1);
    CHECK(report.to_tsv().find("closeness\t-\t-") != std::string::npos);
}

TEST_CASE("failures name their stage") {
    testing::TempDir dir;
    auto config = load_config(write_experiment(dir, 30, 0.1, ""));
    config.edges = dir.path() / "missing.txt";
    try {
        run_pipeline(config);
        FAIL("expected a StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "load");
        CHECK(std::string(e.what()).rfind("load: ", 0) == 0);
    }

    // A graph with too few edges to split fails in the split stage.
    const auto tiny = testing::path_graph(3);
    write_edge_list(tiny, dir.path() / "tiny.txt");
    config.edges = dir.path() / "tiny.txt";
    config.features.reset();
    config.load.feature_id_column = false;
    try {
        run_pipeline(config);
        FAIL("expected a StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "split");
    }
}

TEST_CASE("benchmark rows") {
    testing::TempDir dir;
    const auto config = load_config(write_experiment(dir, 60, 0.05, "[pipeline]\nmethods = out_degree,betweenness,pine\n"));
    const auto rows = benchmark(config, 1);
    REQUIRE(rows.size() == 3);
    CHECK_FALSE(rows[0].train_seconds);
    CHECK(rows[2].train_seconds);
    for (const auto& r : rows) {
        CHECK(r.score_seconds >= 0.0);
        CHECK(r.total_seconds > 0.0);
        CHECK(r.total_seconds >= r.score_seconds);
    }
    const auto tsv = benchmark_tsv(rows);
    CHECK(tsv.rfind("method\ttrain_s\tscore_s\ttotal_s\n", 0) == 0);
    CHECK(tsv.find("out_degree\t-\t") != std::string::npos);
}

TEST_CASE("closeness cost grows faster than linearly") {
    // Doubling N at fixed average degree should more than double the time.
    auto time_for = [](std::size_t n) {
        testing::TempDir dir;
        const auto config = load_config(write_experiment(dir, n, 6.0 / static_cast<double>(n), "[pipeline]\nmethods = closeness\n"));
        double best = 1e300;
        for (int rep = 0; rep < 3; ++rep) best = std::min(best, benchmark(config, 1)[0].score_seconds);
        return best;
    };
    const double small = time_for(800), large = time_for(1600);
    CAPTURE(small);
    CAPTURE(large);
    CHECK(large / small > 2.0);
}
