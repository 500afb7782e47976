#include "pine/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "pine/centrality.hpp"
#include "pine/metrics.hpp"
#include "pine/parallel.hpp"
#include "pine/pine_score.hpp"
#include "pine/train.hpp"

namespace pine {

StageError::StageError(std::string stage, const std::string& cause)
    : std::runtime_error(stage + ": " + cause), stage_(std::move(stage)) {}

std::vector<NodeId> select_top_fraction(const ScoreVector& scores, double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("seed fraction must lie in [0, 1]");
    const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(scores.size())));
    const auto idx = metrics::top_k(scores.values, k);
    std::vector<NodeId> seeds(idx.begin(), idx.end());
    std::sort(seeds.begin(), seeds.end());
    return seeds;
}

namespace {

template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

bool over_budget(const std::string& method, const AttributedGraph& g, const centrality::Options& options) {
    return (method == "closeness" || method == "betweenness") && g.num_nodes() > options.node_budget;
}

std::string budget_reason(const AttributedGraph& g, const centrality::Options& options) {
    return fmt::format("{} nodes exceeds node budget {}", g.num_nodes(), options.node_budget);
}

struct PineOutcome {
    ScoreVector scores;
    TrainResult trained;
};

PineOutcome pine_method(const ExperimentConfig& config, const AttributedGraph& g) {
    const auto split = stage("split", [&] { return split_edges(g, config.split); });
    PineOutcome out;
    out.trained = stage("train", [&] { return train(g, split, config.train); });
    out.scores = stage("score:pine", [&] {
        out.trained.model.forward(g);
        auto s = pine_scores(out.trained.model, g, config.pine_layer);
        return calibrate_by_out_degree(s, g, config.calibration);
    });
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string PipelineReport::to_tsv() const {
    std::string out = "# pine pipeline report\n";
    for (const auto& [k, v] : header) out += fmt::format("# {}\t{}\n", k, v);
    out += "method";
    for (auto m : models) out += fmt::format("\t{0}_mean\t{0}_std", diffusion::model_name(m));
    out += '\n';
    for (const auto& row : rows) {
        out += row.method;
        if (row.results.empty()) {
            for (std::size_t k = 0; k < models.size(); ++k) out += "\t-\t-";
        } else {
            for (const auto& r : row.results) out += fmt::format("\t{:.6f}\t{:.6f}", r.mean_spread, r.std_spread);
        }
        out += '\n';
    }
    return out;
}

PipelineReport run_pipeline(const ExperimentConfig& config, unsigned workers) {
    if (workers == 0) workers = default_worker_count();
    const auto g = stage("load", [&] { return load_graph(config.edges, config.features, config.load); });

    PipelineReport report;
    report.header = config.settings();
    report.models = config.models;
    report.header.emplace_back("graph.num_nodes", fmt::format("{}", g.num_nodes()));
    report.header.emplace_back("graph.num_edges", fmt::format("{}", g.num_edges()));
    report.header.emplace_back("graph.feature_dim", fmt::format("{}", g.feature_dim()));
    report.header.emplace_back("graph.dropped_self_loops", fmt::format("{}", g.dropped_self_loops()));
    report.header.emplace_back("graph.collapsed_duplicates", fmt::format("{}", g.collapsed_duplicates()));
    report.header.emplace_back(
        "seeds.count",
        fmt::format("{}", static_cast<std::size_t>(std::floor(config.seed_fraction * static_cast<double>(g.num_nodes())))));
    for (auto m : config.models)
        if (m == diffusion::Model::Sir)
            report.header.emplace_back("diffusion.sir_beta_resolved",
                                       fmt::format("{}", stage("simulate", [&] { return diffusion::resolve_sir_beta(g, config.diffusion); })));

    centrality::Options copts = config.centrality;
    copts.workers = workers;
    diffusion::DiffusionConfig dconf = config.diffusion;
    dconf.workers = workers;
    const auto weights = stage("simulate", [&] {
        return diffusion::compute_influence_weights(g, dconf.alpha1, dconf.alpha2);
    });

    for (const auto& method : config.methods) {
        PipelineRow row;
        row.method = method;
        if (over_budget(method, g, copts)) {
            row.skipped_reason = budget_reason(g, copts);
            report.header.emplace_back(fmt::format("skipped.{}", method), row.skipped_reason);
            report.rows.push_back(std::move(row));
            continue;
        }
        ScoreVector scores;
        if (method == "pine") {
            auto outcome = pine_method(config, g);
            scores = std::move(outcome.scores);
            report.header.emplace_back("pine.best_epoch", fmt::format("{}", outcome.trained.best_epoch));
            report.header.emplace_back("pine.best_val_auc", fmt::format("{:.6f}", outcome.trained.best_val_auc));
            report.header.emplace_back("pine.test_auc", fmt::format("{:.6f}", outcome.trained.test_auc));
        } else {
            scores = stage("score:" + method, [&] { return centrality::compute(method, g, copts); });
        }
        const auto seeds = stage("seeds", [&] { return select_top_fraction(scores, config.seed_fraction); });
        for (auto model : config.models) {
            dconf.model = model;
            row.results.push_back(stage(fmt::format("simulate:{}/{}", method, diffusion::model_name(model)),
                                        [&] { return diffusion::influence_spread(g, dconf, seeds, weights); }));
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::vector<BenchmarkRow> benchmark(const ExperimentConfig& config, unsigned workers) {
    if (workers == 0) workers = default_worker_count();
    const auto g = stage("load", [&] { return load_graph(config.edges, config.features, config.load); });
    centrality::Options copts = config.centrality;
    copts.workers = workers;

    std::vector<BenchmarkRow> rows;
    for (const auto& method : config.methods) {
        BenchmarkRow row;
        row.method = method;
        if (over_budget(method, g, copts)) {
            row.skipped_reason = budget_reason(g, copts);
            rows.push_back(std::move(row));
            continue;
        }
        if (method == "pine") {
            auto start = std::chrono::steady_clock::now();
            auto trained = stage("train", [&] { return train(g, split_edges(g, config.split), config.train); });
            row.train_seconds = seconds_since(start);
            start = std::chrono::steady_clock::now();
            stage("score:pine", [&] {
                trained.model.forward(g);
                return pine_scores(trained.model, g, config.pine_layer);
            });
            row.score_seconds = seconds_since(start);
        } else {
            const auto start = std::chrono::steady_clock::now();
            stage("score:" + method, [&] { return centrality::compute(method, g, copts); });
            row.score_seconds = seconds_since(start);
        }
        row.total_seconds = row.train_seconds.value_or(0.0) + row.score_seconds;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string benchmark_tsv(const std::vector<BenchmarkRow>& rows) {
    std::string out = "method\ttrain_s\tscore_s\ttotal_s\n";
    for (const auto& r : rows) {
        if (!r.skipped_reason.empty()) {
            out += fmt::format("{}\t-\t-\t-\n", r.method);
            continue;
        }
        out += fmt::format("{}\t{}\t{:.9f}\t{:.9f}\n", r.method,
                           r.train_seconds ? fmt::format("{:.9f}", *r.train_seconds) : std::string("-"),
                           r.score_seconds, r.total_seconds);
    }
    return out;
}

}  // namespace pine
