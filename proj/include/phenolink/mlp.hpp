#pragma once

// Fully connected network: rectifier hidden layers, sigmoid output, trained
// on binary cross-entropy with Adam.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "phenolink/features.hpp"

namespace phenolink {

struct MlpConfig {
    std::vector<std::size_t> hidden{64, 32};
    double step_size = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t epochs = 100;
    std::size_t batch_size = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

// Parameters are flat: for each layer l, a (out x in) row-major weight block
// followed by `out` biases.
struct MlpModel {
    std::vector<std::size_t> layers;  // input, hidden..., 1
    std::vector<double> params;

    std::size_t weight_offset(std::size_t l) const;
    std::size_t bias_offset(std::size_t l) const { return weight_offset(l) + layers[l + 1] * layers[l]; }
    std::size_t parameter_count() const;
    std::size_t input_dim() const { return layers.front(); }

    double margin(std::span<const double> x) const;
    double score(std::span<const double> x) const;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
MlpModel init_mlp(std::vector<std::size_t> layers, std::uint64_t seed);

// Mean cross-entropy over `rows` (all rows when empty); gradient w.r.t. params.
double mlp_loss_and_gradient(const MlpModel& m, const FeatureMatrix& x, std::span<const int> y,
                             std::span<const std::size_t> rows, std::span<double> grad);

struct MlpFit {
    MlpModel model;
    std::vector<double> epoch_loss;
};

// Throws TrainingError when the loss becomes non-finite.
MlpFit train_mlp(const FeatureMatrix& x, std::span<const int> y, const MlpConfig& cfg);

}  // namespace phenolink
