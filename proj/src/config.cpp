#include "pine/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace pine {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ConfigError(fmt::format("{}: '{}' is not a valid number", key, raw));
    return value;
}

bool parse_bool(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, raw));
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
    static const std::map<std::string, std::map<std::string, Setter>> table = [] {
        std::map<std::string, std::map<std::string, Setter>> t;
        t["graph"]["edges"] = [](ExperimentConfig& c, auto&, const std::string& v) { c.edges = trim(v); };
        t["graph"]["features"] = [](ExperimentConfig& c, auto&, const std::string& v) {
            const auto s = trim(v);
            if (s.empty() || s == "none") c.features.reset();
            else c.features = s;
        };
        t["graph"]["reverse_edges"] = [](ExperimentConfig& c, auto& k, auto& v) { c.load.reverse_edges = parse_bool(k, v); };
        t["graph"]["feature_id_column"] = [](ExperimentConfig& c, auto& k, auto& v) {
            c.load.feature_id_column = parse_bool(k, v);
        };

        t["split"]["train_fraction"] = [](ExperimentConfig& c, auto& k, auto& v) { c.split.train_fraction = parse_number<double>(k, v); };
        t["split"]["val_fraction"] = [](ExperimentConfig& c, auto& k, auto& v) { c.split.val_fraction = parse_number<double>(k, v); };
        t["split"]["test_fraction"] = [](ExperimentConfig& c, auto& k, auto& v) { c.split.test_fraction = parse_number<double>(k, v); };
        t["split"]["supervision_fraction"] = [](ExperimentConfig& c, auto& k, auto& v) {
            c.split.supervision_fraction = parse_number<double>(k, v);
        };
        t["split"]["seed"] = [](ExperimentConfig& c, auto& k, auto& v) { c.split.seed = parse_number<std::uint64_t>(k, v); };

        t["train"]["learning_rate"] = [](ExperimentConfig& c, auto& k, auto& v) { c.train.learning_rate = parse_number<double>(k, v); };
        t["train"]["hidden_size"] = [](ExperimentConfig& c, auto& k, auto& v) { c.train.hidden_size = parse_number<std::size_t>(k, v); };
        t["train"]["num_layers"] = [](ExperimentConfig& c, auto& k, auto& v) { c.train.num_layers = parse_number<std::size_t>(k, v); };
        t["train"]["max_epochs"] = [](ExperimentConfig& c, auto& k, auto& v) { c.train.max_epochs = parse_number<std::size_t>(k, v); };
        t["train"]["patience"] = [](ExperimentConfig& c, auto& k, auto& v) { c.train.patience = parse_number<std::size_t>(k, v); };
        t["train"]["seed"] = [](ExperimentConfig& c, auto& k, auto& v) { c.train.seed = parse_number<std::uint64_t>(k, v); };
        t["train"]["leaky_slope"] = [](ExperimentConfig& c, auto& k, auto& v) { c.train.leaky_slope = parse_number<double>(k, v); };
        t["train"]["activation"] = [](ExperimentConfig& c, auto& k, const std::string& v) {
            const auto s = trim(v);
            if (s == "elu") c.train.activation = gat::Activation::Elu;
            else if (s == "identity") c.train.activation = gat::Activation::Identity;
            else throw ConfigError(fmt::format("{}: expected elu or identity, got '{}'", k, v));
        };

        t["diffusion"]["models"] = [](ExperimentConfig& c, auto& k, const std::string& v) {
            c.models.clear();
            for (const auto& name : split_list(v)) {
                try {
                    c.models.push_back(diffusion::parse_model(name));
                } catch (const std::exception& e) {
                    throw ConfigError(fmt::format("{}: {}", k, e.what()));
                }
            }
            if (c.models.empty()) throw ConfigError(fmt::format("{}: no diffusion model given", k));
        };
        t["diffusion"]["alpha1"] = [](ExperimentConfig& c, auto& k, auto& v) { c.diffusion.alpha1 = parse_number<double>(k, v); };
        t["diffusion"]["alpha2"] = [](ExperimentConfig& c, auto& k, auto& v) { c.diffusion.alpha2 = parse_number<double>(k, v); };
        t["diffusion"]["sir_beta"] = [](ExperimentConfig& c, auto& k, const std::string& v) {
            c.diffusion.sir_beta = trim(v) == "auto" ? -1.0 : parse_number<double>(k, v);
        };
        t["diffusion"]["sir_gamma"] = [](ExperimentConfig& c, auto& k, auto& v) { c.diffusion.sir_gamma = parse_number<double>(k, v); };
        t["diffusion"]["max_steps"] = [](ExperimentConfig& c, auto& k, const std::string& v) {
            c.diffusion.max_steps = trim(v) == "none" ? diffusion::kNoStepLimit : parse_number<std::size_t>(k, v);
        };
        t["diffusion"]["runs"] = [](ExperimentConfig& c, auto& k, auto& v) { c.diffusion.num_runs = parse_number<std::size_t>(k, v); };
        t["diffusion"]["seed"] = [](ExperimentConfig& c, auto& k, auto& v) { c.diffusion.rng_seed = parse_number<std::uint64_t>(k, v); };

        t["centrality"]["relative_tuning"] = [](ExperimentConfig& c, auto& k, auto& v) {
            c.centrality.relative_tuning = parse_number<double>(k, v);
        };
        t["centrality"]["pagerank_damping"] = [](ExperimentConfig& c, auto& k, auto& v) {
            c.centrality.pagerank.damping = parse_number<double>(k, v);
        };
        t["centrality"]["pagerank_tolerance"] = [](ExperimentConfig& c, auto& k, auto& v) {
            c.centrality.pagerank.tolerance = parse_number<double>(k, v);
        };
        t["centrality"]["pagerank_max_iterations"] = [](ExperimentConfig& c, auto& k, auto& v) {
            c.centrality.pagerank.max_iterations = parse_number<std::size_t>(k, v);
        };
        t["centrality"]["katz_attenuation"] = [](ExperimentConfig& c, auto& k, auto& v) {
            c.centrality.katz.attenuation = parse_number<double>(k, v);
        };
        t["centrality"]["katz_tolerance"] = [](ExperimentConfig& c, auto& k, auto& v) {
            c.centrality.katz.tolerance = parse_number<double>(k, v);
        };
        t["centrality"]["katz_max_iterations"] = [](ExperimentConfig& c, auto& k, auto& v) {
            c.centrality.katz.max_iterations = parse_number<std::size_t>(k, v);
        };
        t["centrality"]["voterank_k"] = [](ExperimentConfig& c, auto& k, auto& v) {
            c.centrality.voterank_k = parse_number<std::size_t>(k, v);
        };
        t["centrality"]["node_budget"] = [](ExperimentConfig& c, auto& k, auto& v) {
            c.centrality.node_budget = parse_number<std::size_t>(k, v);
        };

        t["pine"]["layer"] = [](ExperimentConfig& c, auto& k, auto& v) { c.pine_layer = parse_number<std::size_t>(k, v); };
        t["pine"]["calibration"] = [](ExperimentConfig& c, auto& k, const std::string& v) {
            try {
                c.calibration = parse_calibration(trim(v));
            } catch (const std::exception& e) {
                throw ConfigError(fmt::format("{}: {}", k, e.what()));
            }
        };

        t["pipeline"]["methods"] = [](ExperimentConfig& c, auto& k, const std::string& v) {
            c.methods = split_list(v);
            if (c.methods.empty()) throw ConfigError(fmt::format("{}: no method given", k));
            for (const auto& m : c.methods)
                if (m != "pine" && !centrality::is_method(m))
                    throw ConfigError(fmt::format("{}: unknown method '{}'", k, m));
        };
        t["pipeline"]["seed_fraction"] = [](ExperimentConfig& c, auto& k, auto& v) { c.seed_fraction = parse_number<double>(k, v); };
        return t;
    }();
    return table;
}

std::string fmt_path(const std::optional<std::filesystem::path>& p) { return p ? p->generic_string() : "none"; }

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir, const std::string& source) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("{}:{}: {}", source, e.line(), e.message()));
    }

    ExperimentConfig config;
    const auto& table = schema();
    for (const auto& [section, body] : tree) {
        const auto sec = table.find(section);
        if (sec == table.end()) {
            if (body.empty()) throw ConfigError(fmt::format("{}: key '{}' outside any section", source, section));
            throw ConfigError(fmt::format("{}: unknown section [{}]", source, section));
        }
        for (const auto& [key, node] : body) {
            const auto setter = sec->second.find(key);
            if (setter == sec->second.end())
                throw ConfigError(fmt::format("{}: unknown key '{}' in [{}]", source, key, section));
            setter->second(config, section + "." + key, node.data());
        }
    }

    if (config.edges.empty()) throw ConfigError(fmt::format("{}: [graph] edges is required", source));
    if (config.edges.is_relative()) config.edges = base_dir / config.edges;
    if (config.features && config.features->is_relative()) config.features = base_dir / *config.features;
    if (!(config.seed_fraction > 0.0 && config.seed_fraction <= 1.0))
        throw ConfigError(fmt::format("{}: pipeline.seed_fraction must lie in (0, 1]", source));
    if (config.pine_layer >= config.train.num_layers)
        throw ConfigError(fmt::format("{}: pine.layer {} is out of range for {} layer(s)", source, config.pine_layer,
                                      config.train.num_layers));
    try {
        config.train.validate();
    } catch (const std::exception& e) {
        throw ConfigError(fmt::format("{}: {}", source, e.what()));
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
    return parse_config(in, path.parent_path(), path.string());
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::settings() const {
    std::vector<std::pair<std::string, std::string>> s;
    auto add = [&](std::string key, std::string value) { s.emplace_back(std::move(key), std::move(value)); };
    add("graph.edges", edges.generic_string());
    add("graph.features", fmt_path(features));
    add("graph.reverse_edges", load.reverse_edges ? "true" : "false");
    add("graph.feature_id_column", load.feature_id_column ? "true" : "false");
    add("split.train_fraction", fmt::format("{}", split.train_fraction));
    add("split.val_fraction", fmt::format("{}", split.val_fraction));
    add("split.test_fraction", fmt::format("{}", split.test_fraction));
    add("split.supervision_fraction", fmt::format("{}", split.supervision_fraction));
    add("split.seed", fmt::format("{}", split.seed));
    add("train.learning_rate", fmt::format("{}", train.learning_rate));
    add("train.hidden_size", fmt::format("{}", train.hidden_size));
    add("train.num_layers", fmt::format("{}", train.num_layers));
    add("train.max_epochs", fmt::format("{}", train.max_epochs));
    add("train.patience", fmt::format("{}", train.patience));
    add("train.seed", fmt::format("{}", train.seed));
    add("train.leaky_slope", fmt::format("{}", train.leaky_slope));
    add("train.activation", train.activation == gat::Activation::Elu ? "elu" : "identity");
    add("train.adam", fmt::format("beta1={} beta2={} epsilon={}", train.beta1, train.beta2, train.adam_epsilon));
    add("train.negatives", "1:1 uniform, resampled each epoch; validation/test negatives fixed at split time");
    std::string model_list;
    for (auto m : models) model_list += (model_list.empty() ? "" : ",") + std::string(diffusion::model_name(m));
    add("diffusion.models", model_list);
    add("diffusion.alpha1", fmt::format("{}", diffusion.alpha1));
    add("diffusion.alpha2", fmt::format("{}", diffusion.alpha2));
    add("diffusion.sir_beta", diffusion.sir_beta < 0 ? "auto (1.5 x epidemic threshold)" : fmt::format("{}", diffusion.sir_beta));
    add("diffusion.sir_gamma", fmt::format("{}", diffusion.sir_gamma));
    add("diffusion.max_steps",
        diffusion.max_steps == diffusion::kNoStepLimit ? "none" : fmt::format("{}", diffusion.max_steps));
    add("diffusion.runs", fmt::format("{}", diffusion.num_runs));
    add("diffusion.seed", fmt::format("{}", diffusion.rng_seed));
    add("diffusion.lt_thresholds", "uniform on (0,1), redrawn each run");
    add("centrality.relative_tuning", fmt::format("{}", centrality.relative_tuning));
    add("centrality.pagerank_damping", fmt::format("{}", centrality.pagerank.damping));
    add("centrality.pagerank_tolerance", fmt::format("{}", centrality.pagerank.tolerance));
    add("centrality.pagerank_max_iterations", fmt::format("{}", centrality.pagerank.max_iterations));
    add("centrality.katz_attenuation", fmt::format("{}", centrality.katz.attenuation));
    add("centrality.katz_tolerance", fmt::format("{}", centrality.katz.tolerance));
    add("centrality.katz_max_iterations", fmt::format("{}", centrality.katz.max_iterations));
    add("centrality.voterank_k", centrality.voterank_k ? fmt::format("{}", centrality.voterank_k) : "auto (N/10)");
    add("centrality.node_budget", fmt::format("{}", centrality.node_budget));
    add("pine.layer", fmt::format("{}", pine_layer));
    add("pine.calibration", std::string(calibration_name(calibration)));
    std::string method_list;
    for (const auto& m : methods) method_list += (method_list.empty() ? "" : ",") + m;
    add("pipeline.methods", method_list);
    add("pipeline.seed_fraction", fmt::format("{}", seed_fraction));
    return s;
}

}  // namespace pine
