#pragma once

// Skip-gram with negative sampling over a walk corpus.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "phenolink/embedding.hpp"
#include "phenolink/walks.hpp"

namespace phenolink {

struct SkipGramConfig {
    std::size_t dimensions = 128;
    std::size_t window = 10;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double initial_step_size = 0.025;
    double noise_exponent = 0.75;
    std::uint64_t seed = 0;
    // 1 = deterministic. More workers update shared parameters without
    // synchronization and give run-to-run differences.
    std::size_t workers = 1;

    void validate() const;
};

struct SkipGramReport {
    std::vector<double> epoch_loss;  // mean per (center, context) pair
    std::size_t updates = 0;
};

template <class T>
T logistic(T x) noexcept {
    return T(1) / (T(1) + std::exp(-x));
}

// log(sigmoid(x)) without overflow.
inline double log_sigmoid(double x) noexcept {
    return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

// Negative-sampling loss of one (center, context) pair with noise vectors:
//   -log s(c . o) - sum_k log s(-c . n_k)
// Gradients are written to grad_center, grad_context and grad_noise (one span
// per noise vector, each of dim entries).
double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      std::span<const std::span<const double>> noise, std::span<double> grad_center,
                      std::span<double> grad_context, std::span<const std::span<double>> grad_noise);

// One stochastic step on a (center, context) pair: every vector moves by
// -step * (its gradient of sgns_pair_loss), all gradients taken at the
// pre-step values. `scratch` must hold center.size() entries. Returns the
// pair loss before the step. Noise targets equal to the context are skipped by
// the caller, not here.
template <class T, class NoiseRow>
double sgns_step(std::span<T> center, std::span<T> context, std::span<const NoiseRow> noise, T step,
                 std::span<T> scratch) {
    const std::size_t d = center.size();
    std::fill(scratch.begin(), scratch.end(), T(0));
    double loss = 0.0;
    const auto update = [&](std::span<T> target, T label) {
        T dot = 0;
        for (std::size_t k = 0; k < d; ++k) dot += center[k] * target[k];
        loss -= label > 0 ? log_sigmoid(static_cast<double>(dot)) : log_sigmoid(-static_cast<double>(dot));
        const T g = (label - logistic(dot)) * step;
        for (std::size_t k = 0; k < d; ++k) scratch[k] += g * target[k];
        for (std::size_t k = 0; k < d; ++k) target[k] += g * center[k];
        return dot;
    };
    update(context, T(1));
    for (const auto& row : noise) update(std::span<T>(row), T(0));
    for (std::size_t k = 0; k < d; ++k) center[k] += scratch[k];
    return loss;
}

// Trains on the corpus. Rows = 1 + largest node id in the corpus unless
// node_count is larger. Noise distribution: corpus frequency ^ noise_exponent.
// Throws TrainingError on a non-finite score.
EmbeddingMatrix train_skipgram(const WalkCorpus& corpus, const SkipGramConfig& cfg, std::size_t node_count = 0,
                               SkipGramReport* report = nullptr);

}  // namespace phenolink
