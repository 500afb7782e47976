#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pine/centrality.hpp"
#include "pine/diffusion.hpp"
#include "pine/graph.hpp"
#include "pine/pine_score.hpp"
#include "pine/train.hpp"

namespace pine {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything a pipeline or benchmark run needs, read from an INI file with
/// sections [graph], [split], [train], [diffusion], [centrality], [pine] and
/// [pipeline]. Unknown sections or keys are rejected.
struct ExperimentConfig {
    std::filesystem::path edges;
    std::optional<std::filesystem::path> features;
    LoadOptions load;

    SplitOptions split;
    TrainConfig train;

    diffusion::DiffusionConfig diffusion;
    std::vector<diffusion::Model> models{diffusion::Model::LinearThresholdPlus};

    centrality::Options centrality;

    std::size_t pine_layer = 0;
    Calibration calibration = Calibration::None;

    /// Centrality method names plus "pine".
    std::vector<std::string> methods{"out_degree", "pine"};
    double seed_fraction = 0.1;

    /// Resolved `section.key  value` pairs, in a fixed order, for report headers.
    std::vector<std::pair<std::string, std::string>> settings() const;
};

/// Relative paths resolve against `base_dir`.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace pine
