#pragma once

// Common train/score surface over the learner families, plus versioned JSON
// persistence.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "phenolink/features.hpp"
#include "phenolink/linear.hpp"
#include "phenolink/mlp.hpp"
#include "phenolink/trees.hpp"

namespace phenolink {

enum class ModelFamily { logistic, forest, mlp, gbdt_level, gbdt_leaf };

const char* family_name(ModelFamily f) noexcept;
// Throws ConfigError naming the valid choices.
ModelFamily parse_family(const std::string& name);
std::vector<ModelFamily> all_families();

struct TrainConfig {
    LogisticConfig logistic;
    MlpConfig mlp;
    ForestConfig forest;
    GbdtConfig gbdt_level = GbdtConfig::level_wise();
    GbdtConfig gbdt_leaf = GbdtConfig::leaf_wise();

    // Sets every family's seed.
    void set_seed(std::uint64_t seed);
};

nlohmann::ordered_json config_to_json(ModelFamily f, const TrainConfig& cfg);
// Applies the keys present in j on top of cfg's current values for family f.
void config_from_json(ModelFamily f, const nlohmann::json& j, TrainConfig& cfg);

struct Model {
    ModelFamily family = ModelFamily::logistic;
    std::variant<LinearModel, MlpModel, TreeEnsemble> params;
    nlohmann::ordered_json config;  // echo of the training configuration

    std::size_t input_dim() const;
    double score(std::span<const double> x) const;
};

struct TrainLog {
    std::vector<double> loss_trace;  // per iteration, epoch or round
    std::vector<std::string> warnings;
};

Model train_model(ModelFamily family, const FeatureMatrix& x, std::span<const int> y, const TrainConfig& cfg,
                  TrainLog* log = nullptr);

// Scores every row (OpenMP over rows). Throws InputError on a feature
// dimension mismatch; an empty matrix gives an empty vector.
std::vector<double> predict_proba(const Model& m, const FeatureMatrix& x);
std::vector<double> predict_proba_serial(const Model& m, const FeatureMatrix& x);

inline constexpr int model_format_version = 1;

nlohmann::ordered_json model_to_json(const Model& m);
// Throws InputError on schema problems.
Model model_from_json(const nlohmann::json& j);
// Keeps the config key order, so saving a loaded model reproduces the file.
Model model_from_json(const nlohmann::ordered_json& j);

}  // namespace phenolink
