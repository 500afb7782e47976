// Command-line front end: one subcommand per stage of the workflow.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pine/centrality.hpp"
#include "pine/config.hpp"
#include "pine/diffusion.hpp"
#include "pine/graph.hpp"
#include "pine/metrics.hpp"
#include "pine/model_io.hpp"
#include "pine/parallel.hpp"
#include "pine/pine_score.hpp"
#include "pine/pipeline.hpp"
#include "pine/train.hpp"

namespace fs = std::filesystem;
using namespace pine;

namespace {

struct GraphArgs {
    std::string edges;
    std::string features;
    bool reverse = false;
    bool id_column = false;

    void add(CLI::App* app) {
        app->add_option("--edges,--graph", edges, "edge list: src dst [type] per line")->required()->check(CLI::ExistingFile);
        app->add_option("--features", features, "feature file (CSV or PINEF1 binary)")->check(CLI::ExistingFile);
        app->add_flag("--reverse,--reverse-edges", reverse, "swap the direction of every edge");
        app->add_flag("--feature-ids", id_column, "first CSV column holds the node id");
    }
    AttributedGraph load() const {
        LoadOptions opts;
        opts.reverse_edges = reverse;
        opts.feature_id_column = id_column;
        std::optional<fs::path> f;
        if (!features.empty()) f = features;
        return load_graph(edges, f, opts);
    }
};

struct TrainArgs {
    TrainConfig config;
    SplitOptions split;
    std::string activation = "elu";

    void add(CLI::App* app) {
        app->add_option("--lr", config.learning_rate, "learning rate")->capture_default_str();
        app->add_option("--hidden", config.hidden_size, "hidden size")->capture_default_str();
        app->add_option("--layers", config.num_layers, "GAT layers")->capture_default_str();
        app->add_option("--epochs", config.max_epochs, "maximum epochs")->capture_default_str();
        app->add_option("--patience", config.patience, "early-stopping patience")->capture_default_str();
        app->add_option("--seed", config.seed, "initialisation and negative-sampling seed")->capture_default_str();
        app->add_option("--split-seed", split.seed, "edge split seed")->capture_default_str();
        app->add_option("--leaky-slope", config.leaky_slope, "LeakyReLU slope")->capture_default_str();
        app->add_option("--activation", activation, "between-layer activation")
            ->check(CLI::IsMember({"elu", "identity"}))
            ->capture_default_str();
    }
    TrainConfig resolved() const {
        TrainConfig c = config;
        c.activation = activation == "identity" ? gat::Activation::Identity : gat::Activation::Elu;
        return c;
    }
};

class Failure : public std::runtime_error {
public:
    Failure(std::string stage, const std::string& what) : std::runtime_error(what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

template <typename F>
auto at(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Failure&) {
        throw;
    } catch (const StageError& e) {
        throw Failure(e.stage(), e.what());
    } catch (const std::exception& e) {
        throw Failure(stage, e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

void write_pairs(const AttributedGraph& g, std::span<const NodePair> pairs, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& p : pairs) out << g.label(p.src) << ' ' << g.label(p.dst) << '\n';
}

/// label -> value, for score and truth TSVs.
std::map<std::string, double> read_value_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::map<std::string, double> table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find_first_of("\t ");
        if (tab == std::string::npos) throw ParseError(path, lineno, "expected 'label<TAB>value'");
        const std::string label = line.substr(0, tab);
        try {
            std::size_t used = 0;
            const double v = std::stod(line.substr(tab + 1), &used);
            if (!table.emplace(label, v).second) throw ParseError(path, lineno, "duplicate label " + label);
        } catch (const std::logic_error&) {
            throw ParseError(path, lineno, "bad value");
        }
    }
    return table;
}

int run_centrality(const GraphArgs& ga, const std::string& method, const std::string& out, centrality::Options opts) {
    const auto g = at("load", [&] { return ga.load(); });
    const auto scores = at("score", [&] { return centrality::compute(method, g, opts); });
    at("write", [&] {
        if (out.empty() || out == "-") {
            const auto order = metrics::top_k(scores.values, scores.size());
            for (auto v : order) fmt::print("{}\t{:.17g}\n", g.label(static_cast<NodeId>(v)), scores[v]);
        } else {
            write_scores(g, scores, out);
        }
        return 0;
    });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attention-based node importance, centrality baselines and diffusion simulation"};
    app.require_subcommand(1);

    // centrality
    auto* c_cmd = app.add_subcommand("centrality", "compute a centrality baseline");
    GraphArgs c_graph;
    c_graph.add(c_cmd);
    std::string c_method, c_out;
    centrality::Options c_opts;
    c_cmd->add_option("--method", c_method, "centrality method")
        ->required()
        ->check(CLI::IsMember(centrality::method_names()));
    c_cmd->add_option("--out", c_out, "score TSV (default stdout)");
    c_cmd->add_option("--tuning", c_opts.relative_tuning, "relative out-degree tuning")->capture_default_str();
    c_cmd->add_option("--damping", c_opts.pagerank.damping, "PageRank damping")->capture_default_str();
    c_cmd->add_option("--katz-attenuation", c_opts.katz.attenuation, "Katz attenuation")->capture_default_str();
    c_cmd->add_option("--voterank-k", c_opts.voterank_k, "VoteRank elections (0: N/10)")->capture_default_str();
    c_cmd->add_option("--node-budget", c_opts.node_budget, "closeness/betweenness node limit")->capture_default_str();

    // train
    auto* t_cmd = app.add_subcommand("train", "train the link-prediction GAT");
    GraphArgs t_graph;
    t_graph.add(t_cmd);
    TrainArgs t_args;
    t_args.add(t_cmd);
    std::string t_model_out, t_log;
    t_cmd->add_option("--model-out,--out", t_model_out, "where to save the trained model")->required();
    t_cmd->add_option("--log", t_log, "per-epoch TSV log");

    // score
    auto* s_cmd = app.add_subcommand("score", "PINE importance scores");
    GraphArgs s_graph;
    s_graph.add(s_cmd);
    TrainArgs s_args;
    s_args.add(s_cmd);
    std::string s_model, s_out, s_labels, s_calibration = "none";
    std::size_t s_layer = 0, s_top_types = 100;
    s_cmd->add_option("--model", s_model, "trained model (trains a new one when omitted)")->check(CLI::ExistingFile);
    s_cmd->add_option("--layer", s_layer, "attention layer to score")->capture_default_str();
    s_cmd->add_option("--calibrate,--calibration", s_calibration, "out-degree calibration")
        ->check(CLI::IsMember({"none", "log-degree", "degree"}))
        ->capture_default_str();
    s_cmd->add_option("--labels", s_labels, "validation labels; enables per-edge-type selection")
        ->check(CLI::ExistingFile);
    s_cmd->add_option("--top-types", s_top_types, "largest edge types considered")->capture_default_str();
    s_cmd->add_option("--out", s_out, "score TSV (default stdout)");

    // simulate
    auto* m_cmd = app.add_subcommand("simulate", "Monte Carlo influence spread of a seed set");
    GraphArgs m_graph;
    m_graph.add(m_cmd);
    diffusion::DiffusionConfig m_conf;
    std::string m_model = "ltp", m_seeds, m_scores, m_counts;
    double m_fraction = 0.1;
    std::size_t m_max_steps = 0;
    m_cmd->add_option("--model", m_model, "diffusion model")
        ->check(CLI::IsMember({"ltp", "icp", "sir"}))
        ->capture_default_str();
    auto* seeds_opt = m_cmd->add_option("--seeds", m_seeds, "seed node ids, one per line")->check(CLI::ExistingFile);
    auto* scores_opt = m_cmd->add_option("--scores", m_scores, "score TSV; seeds are its top fraction")
                           ->check(CLI::ExistingFile);
    seeds_opt->excludes(scores_opt);
    m_cmd->add_option("--fraction", m_fraction, "seed fraction with --scores")->capture_default_str();
    m_cmd->add_option("--runs", m_conf.num_runs, "Monte Carlo runs")->capture_default_str();
    m_cmd->add_option("--seed", m_conf.rng_seed, "random seed")->capture_default_str();
    m_cmd->add_option("--alpha1", m_conf.alpha1, "structural weight")->capture_default_str();
    m_cmd->add_option("--alpha2", m_conf.alpha2, "semantic weight")->capture_default_str();
    m_cmd->add_option("--beta", m_conf.sir_beta, "SIR infection probability (negative: auto)")->capture_default_str();
    m_cmd->add_option("--gamma", m_conf.sir_gamma, "SIR recovery probability")->capture_default_str();
    m_cmd->add_option("--max-steps", m_max_steps, "round limit (0: none)")->capture_default_str();
    m_cmd->add_option("--counts", m_counts, "per-run activated counts, one per line");

    // evaluate
    auto* e_cmd = app.add_subcommand("evaluate", "compare predicted scores with ground truth");
    std::string e_scores, e_truth, e_metrics = "ndcg@100,spearman,precision@100";
    e_cmd->add_option("--scores", e_scores, "predicted label<TAB>score")->required()->check(CLI::ExistingFile);
    e_cmd->add_option("--truth", e_truth, "true label<TAB>value")->required()->check(CLI::ExistingFile);
    e_cmd->add_option("--metrics", e_metrics, "comma-separated: ndcg@k, spearman, precision@k")->capture_default_str();

    // pipeline / bench
    auto* p_cmd = app.add_subcommand("pipeline", "run the configured experiment grid");
    std::string p_config, p_out;
    p_cmd->add_option("--config", p_config, "experiment INI file")->required()->check(CLI::ExistingFile);
    p_cmd->add_option("--out", p_out, "report TSV (default stdout)");
    auto* b_cmd = app.add_subcommand("bench", "time every configured method");
    std::string b_config, b_out;
    b_cmd->add_option("--config", b_config, "experiment INI file")->required()->check(CLI::ExistingFile);
    b_cmd->add_option("--out", b_out, "timing TSV (default stdout)");

    // split
    auto* x_cmd = app.add_subcommand("split", "write a link-prediction edge split");
    GraphArgs x_graph;
    x_graph.add(x_cmd);
    SplitOptions x_split;
    std::string x_dir;
    x_cmd->add_option("--seed", x_split.seed, "split seed")->capture_default_str();
    x_cmd->add_option("--out-dir", x_dir, "output directory")->required();

    // component
    auto* w_cmd = app.add_subcommand("component", "extract the largest weakly connected component");
    GraphArgs w_graph;
    w_graph.add(w_cmd);
    std::string w_edges_out, w_features_out, w_ids_out;
    w_cmd->add_option("--out-edges", w_edges_out, "edge list of the component")->required();
    w_cmd->add_option("--out-features", w_features_out, "CSV features of the component, first column the node id");
    w_cmd->add_option("--out-ids", w_ids_out, "dense id to label map");

    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        if (cmd == "centrality") return run_centrality(c_graph, c_method, c_out, c_opts);

        if (cmd == "train") {
            const auto g = at("load", [&] { return t_graph.load(); });
            const auto split = at("split", [&] { return split_edges(g, t_args.split); });
            const auto result = at("train", [&] { return train(g, split, t_args.resolved()); });
            at("write", [&] {
                save_model(result.model, t_model_out);
                if (!t_log.empty()) {
                    std::string text = "epoch\tloss\treference_loss\tval_auc\n";
                    for (const auto& e : result.log) text += fmt::format("{}\t{:.9g}\t{:.9g}\t{:.6f}\n", e.epoch, e.loss, e.reference_loss, e.val_auc);
                    write_text(t_log, text);
                }
                return 0;
            });
            fmt::print("best_epoch\t{}\nbest_val_auc\t{:.6f}\ntest_auc\t{:.6f}\n", result.best_epoch,
                       result.best_val_auc, result.test_auc);
            return 0;
        }

        if (cmd == "score") {
            const auto g = at("load", [&] { return s_graph.load(); });
            const auto calibration = parse_calibration(s_calibration);
            ScoreVector scores;
            if (!s_labels.empty()) {
                const auto labels = at("load", [&] { return read_node_values(g, s_labels); });
                TypeSelectionOptions opts;
                opts.top_k_types = s_top_types;
                opts.train = s_args.resolved();
                opts.split = s_args.split;
                opts.layer = s_layer;
                const auto selection = at("select", [&] { return select_edge_types(g, labels, opts); });
                std::vector<std::string> warnings = selection.warnings;
                scores = heterogeneous_pine(g, selection, &warnings);
                for (const auto& w : warnings) fmt::print(stderr, "warning: {}\n", w);
                for (const auto& c : selection.candidates)
                    fmt::print(stderr, "type {}\tedges {}\tspearman {:.4f}\t{}\n", c.type, c.num_edges, c.spearman,
                               c.selected ? "selected" : "rejected");
            } else {
                gat::GatModel<float> model = at("train", [&] {
                    if (!s_model.empty()) return load_model(s_model);
                    return train(g, split_edges(g, s_args.split), s_args.resolved()).model;
                });
                scores = at("score", [&] {
                    model.forward(g);
                    return pine_scores(model, g, s_layer);
                });
            }
            scores = calibrate_by_out_degree(scores, g, calibration);
            at("write", [&] {
                if (s_out.empty() || s_out == "-") {
                    for (auto v : metrics::top_k(scores.values, scores.size()))
                        fmt::print("{}\t{:.17g}\n", g.label(static_cast<NodeId>(v)), scores[v]);
                } else {
                    write_scores(g, scores, s_out);
                }
                return 0;
            });
            return 0;
        }

        if (cmd == "simulate") {
            const auto g = at("load", [&] { return m_graph.load(); });
            m_conf.model = diffusion::parse_model(m_model);
            if (m_max_steps) m_conf.max_steps = m_max_steps;
            const auto seeds = at("seeds", [&] {
                if (!m_seeds.empty()) return read_node_list(g, m_seeds);
                if (m_scores.empty()) throw std::invalid_argument("either --seeds or --scores is required");
                const auto values = read_node_values(g, m_scores);
                ScoreVector sv{std::vector<double>(g.num_nodes(), 0.0), "input"};
                for (const auto& v : values) sv.values[v.node] = v.importance;
                return select_top_fraction(sv, m_fraction);
            });
            const auto result = at("simulate", [&] { return diffusion::influence_spread(g, m_conf, seeds); });
            fmt::print("model\t{}\nseeds\t{}\nruns\t{}\nmean_spread\t{:.6f}\nstd_spread\t{:.6f}\n", m_model,
                       seeds.size(), result.runs, result.mean_spread, result.std_spread);
            if (!m_counts.empty()) {
                std::ofstream out(m_counts);
                if (!out) throw StageError("write", "cannot open " + m_counts);
                for (auto c : result.activated_counts) out << c << '\n';
            }
            return 0;
        }

        if (cmd == "evaluate") {
            const auto predicted = at("load", [&] { return read_value_table(e_scores); });
            const auto truth = at("load", [&] { return read_value_table(e_truth); });
            std::vector<double> p, t;
            for (const auto& [label, value] : truth) {
                const auto it = predicted.find(label);
                if (it == predicted.end()) throw Failure("evaluate", "no predicted score for node " + label);
                p.push_back(it->second);
                t.push_back(value);
            }
            std::string metric;
            std::stringstream list(e_metrics);
            while (std::getline(list, metric, ',')) {
                const auto value = at("evaluate", [&] {
                    if (metric == "spearman") return metrics::spearman(p, t);
                    const auto atpos = metric.find('@');
                    if (atpos == std::string::npos) throw std::invalid_argument("unknown metric " + metric);
                    const auto k = static_cast<std::size_t>(std::stoul(metric.substr(atpos + 1)));
                    const auto name = metric.substr(0, atpos);
                    if (name == "ndcg") return metrics::ndcg_at_k(p, t, k);
                    if (name == "precision") return metrics::precision_at_k(p, t, k);
                    throw std::invalid_argument("unknown metric " + metric);
                });
                fmt::print("{}\t{:.6f}\n", metric, value);
            }
            return 0;
        }

        if (cmd == "pipeline") {
            const auto config = at("config", [&] { return load_config(p_config); });
            const auto report = at("pipeline", [&] { return run_pipeline(config); });
            at("write", [&] {
                write_text(p_out, report.to_tsv());
                return 0;
            });
            return 0;
        }

        if (cmd == "bench") {
            const auto config = at("config", [&] { return load_config(b_config); });
            const auto rows = at("bench", [&] { return benchmark(config); });
            at("write", [&] {
                write_text(b_out, benchmark_tsv(rows));
                return 0;
            });
            return 0;
        }

        if (cmd == "split") {
            const auto g = at("load", [&] { return x_graph.load(); });
            const auto split = at("split", [&] { return split_edges(g, x_split); });
            at("write", [&] {
                fs::create_directories(x_dir);
                const fs::path dir(x_dir);
                write_pairs(g, split.message_edges, dir / "message.txt");
                write_pairs(g, split.supervision_pos, dir / "supervision.txt");
                write_pairs(g, split.val_pos, dir / "val_pos.txt");
                write_pairs(g, split.val_neg, dir / "val_neg.txt");
                write_pairs(g, split.test_pos, dir / "test_pos.txt");
                write_pairs(g, split.test_neg, dir / "test_neg.txt");
                return 0;
            });
            fmt::print("message\t{}\nsupervision\t{}\nval\t{}\ntest\t{}\n", split.message_edges.size(),
                       split.supervision_pos.size(), split.val_pos.size(), split.test_pos.size());
            return 0;
        }

        if (cmd == "component") {
            const auto g = at("load", [&] { return w_graph.load(); });
            const auto c = at("component", [&] { return largest_weak_component(g); });
            at("write", [&] {
                write_edge_list(c, w_edges_out);
                if (!w_features_out.empty()) write_features_csv(c, w_features_out, true);
                if (!w_ids_out.empty()) write_id_map(c, w_ids_out);
                return 0;
            });
            fmt::print("nodes\t{}\nedges\t{}\n", c.num_nodes(), c.num_edges());
            return 0;
        }
    } catch (const Failure& f) {
        fmt::print(stderr, "pine {}: [{}] {}\n", cmd, f.stage(), f.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "pine {}: [{}] {}\n", cmd, cmd, e.what());
        return 1;
    }
    return 1;
}
