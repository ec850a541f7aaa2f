#pragma once

// Tree ensembles: bagged Gini trees (random forest) and logistic-loss
// gradient boosting with level-wise or leaf-wise growth.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "phenolink/features.hpp"
#include "phenolink/histogram.hpp"

namespace phenolink {

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // x[feature] <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;         // leaf output
    std::uint32_t depth = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(std::span<const double> x) const;
    std::size_t depth() const;
    std::size_t leaf_count() const;
    bool operator==(const Tree&) const = default;
};

enum class EnsembleMode { bagging, boosting };
enum class Growth { level, leaf };

struct TreeEnsemble {
    std::vector<Tree> trees;
    EnsembleMode mode = EnsembleMode::boosting;
    Growth growth = Growth::level;
    double learning_rate = 0.1;  // already folded into leaf values
    double base_score = 0.5;

    // Boosting: sigmoid(logit(base_score) + sum of leaves).
    // Bagging: mean leaf probability.
    double predict_proba(std::span<const double> x) const;
    double margin(std::span<const double> x) const;
    bool operator==(const TreeEnsemble&) const = default;
};

struct ForestConfig {
    std::size_t trees = 100;
    std::size_t max_depth = 12;
    bool bootstrap = true;
    std::size_t features_per_split = 0;  // 0 means floor(sqrt(D))
    std::size_t bins = 64;
    std::size_t min_samples_per_leaf = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GbdtConfig {
    Growth growth = Growth::leaf;
    double learning_rate = 0.1;
    std::size_t max_depth = 10;
    std::size_t rounds = 100;
    std::size_t max_leaves = 31;  // leaf-wise only
    double scale_pos_weight = 99.0;
    std::size_t bins = 64;
    std::size_t min_samples_per_leaf = 20;
    double lambda = 1.0;
    double min_child_hessian = 1e-3;
    double base_score = 0.5;
    std::uint64_t seed = 0;

    static GbdtConfig level_wise() {
        GbdtConfig c;
        c.growth = Growth::level;
        c.max_depth = 12;
        return c;
    }
    static GbdtConfig leaf_wise() { return GbdtConfig{}; }

    void validate() const;
};

struct GbdtReport {
    // Weighted mean logistic loss on the training rows after each round.
    std::vector<double> round_loss;
};

TreeEnsemble train_forest(const FeatureMatrix& x, std::span<const int> y, const ForestConfig& cfg);
TreeEnsemble train_gbdt(const FeatureMatrix& x, std::span<const int> y, const GbdtConfig& cfg,
                        GbdtReport* report = nullptr);

// Per-row logistic gradient and hessian at the given margins, positive rows
// scaled by scale_pos_weight.
void logistic_gradients(std::span<const double> margin, std::span<const int> y, double scale_pos_weight,
                        std::span<double> grad, std::span<double> hess);

}  // namespace phenolink
