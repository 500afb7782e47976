#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pine/config.hpp"
#include "pine/diffusion.hpp"
#include "pine/graph.hpp"

namespace pine {

/// Failure inside one pipeline stage; what() is "stage: cause".
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& cause);
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// The floor(fraction * N) highest scores; ties by ascending id. Returned sorted by id.
std::vector<NodeId> select_top_fraction(const ScoreVector& scores, double fraction);

struct PipelineRow {
    std::string method;
    /// Empty results with a reason when the method was not run (node budget).
    std::vector<diffusion::DiffusionResult> results;
    std::string skipped_reason;
};

struct PipelineReport {
    std::vector<std::pair<std::string, std::string>> header;
    std::vector<diffusion::Model> models;
    std::vector<PipelineRow> rows;

    /// `# key<TAB>value` header lines, then one row per method with mean and
    /// std spread per diffusion model.
    std::string to_tsv() const;
};

/// load -> split -> train -> score -> seed selection -> simulate, for every
/// configured method and diffusion model. Throws StageError.
PipelineReport run_pipeline(const ExperimentConfig& config, unsigned workers = 0);

struct BenchmarkRow {
    std::string method;
    /// Only set for methods with a training stage.
    std::optional<double> train_seconds;
    double score_seconds = 0.0;
    double total_seconds = 0.0;
    std::string skipped_reason;
};

/// Wall-clock time to produce each method's scores on the configured graph.
std::vector<BenchmarkRow> benchmark(const ExperimentConfig& config, unsigned workers = 0);
std::string benchmark_tsv(const std::vector<BenchmarkRow>& rows);

}  // namespace pine
