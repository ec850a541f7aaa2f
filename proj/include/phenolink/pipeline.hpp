#pragma once

// Stage orchestration. Every stage reads only files written by earlier stages
// into the output directory, so stages can run separately or back to back.
//
// Fixed artifact names under the output directory:
//   ingest:   associations.tsv nodes.tsv graph.tsv validation.json
//             graph_stats.json graph_stats.txt degree_histogram.csv
//   sample:   pairs.csv residual.tsv sampling.json
//   embed:    embedding.txt embedding.json
//   train:    model_<family>.json
//   evaluate: report_<family>.json report_<family>.txt roc_<family>.csv pr_<family>.csv
//   pipeline: manifest.json

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "phenolink/embedding.hpp"
#include "phenolink/ingest.hpp"
#include "phenolink/metrics.hpp"
#include "phenolink/model.hpp"
#include "phenolink/sampling.hpp"
#include "phenolink/skipgram.hpp"
#include "phenolink/walks.hpp"

namespace phenolink {

inline constexpr const char* library_version = "1.0.0";

struct PipelineConfig {
    std::filesystem::path input;
    ColumnSpec columns;
    SamplingConfig sampling;
    double train_fraction = 0.8;
    bool stratified = true;
    WalkConfig walks;
    SkipGramConfig skipgram;
    EdgeOperator edge_operator = EdgeOperator::hadamard;
    std::vector<ModelFamily> models{ModelFamily::gbdt_leaf};
    TrainConfig training;
    double threshold = 0.5;
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    // Pushes stage seeds (derived from `seed`) and the worker count into the
    // nested configs. Call after changing either.
    void apply_seed();
    // Throws ConfigError.
    void validate() const;
};

// Stage seeds are derive_seed(seed, k) for these k.
enum class Stage : std::uint64_t { sample = 1, walks = 2, skipgram = 3, split = 4, models = 5 };
std::uint64_t stage_seed(std::uint64_t seed, Stage s) noexcept;

// Reads a JSON config. Relative input paths resolve against the config file's
// directory. Throws ConfigError.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);

struct StageResult {
    std::string stage;
    double seconds = 0.0;
    std::vector<std::string> artifacts;  // file names relative to the output directory
    std::vector<std::string> warnings;
    nlohmann::ordered_json summary;
};

StageResult run_ingest(const PipelineConfig& cfg, const std::filesystem::path& out);
StageResult run_sample(const PipelineConfig& cfg, const std::filesystem::path& out);
StageResult run_embed(const PipelineConfig& cfg, const std::filesystem::path& out);
StageResult run_train(const PipelineConfig& cfg, const std::filesystem::path& out, ModelFamily family);
StageResult run_evaluate(const PipelineConfig& cfg, const std::filesystem::path& out, ModelFamily family,
                         EvaluationReport* report = nullptr);

struct PipelineRun {
    std::vector<StageResult> stages;
    std::vector<EvaluationReport> reports;  // one per model, in config order
};

// Runs every stage and writes manifest.json. Progress lines go to `log` when
// given.
PipelineRun run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out, std::ostream* log = nullptr);

// Loaders for stage artifacts.
NodeIndex load_node_index(const std::filesystem::path& out);
Graph load_graph(const std::filesystem::path& file, const NodeIndex& index);
LabeledPairs load_pairs(const std::filesystem::path& out, const NodeIndex& index);
EmbeddingMatrix load_embedding(const std::filesystem::path& out, const NodeIndex& index);
Model load_model(const std::filesystem::path& file);

std::string model_file_name(ModelFamily f);
std::string report_file_name(ModelFamily f, const char* extension);

}  // namespace phenolink
