#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "phenolink/embedding.hpp"
#include "phenolink/sampling.hpp"

namespace phenolink {

// Dense row-major R x D matrix of doubles.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }

    bool all_finite() const noexcept;
    FeatureMatrix select_rows(std::span<const std::size_t> idx) const;
};

// One edge-feature row per labeled pair (OpenMP over rows).
FeatureMatrix pair_features(const EmbeddingMatrix& emb, const LabeledPairs& pairs, EdgeOperator op);
FeatureMatrix pair_features_serial(const EmbeddingMatrix& emb, const LabeledPairs& pairs, EdgeOperator op);

// Row indices with the given split tag, in dataset order.
std::vector<std::size_t> rows_with_split(const LabeledPairs& pairs, Split split);
std::vector<int> labels_of(const LabeledPairs& pairs, std::span<const std::size_t> idx);

}  // namespace phenolink
