#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "phenolink/ingest.hpp"

namespace phenolink {

// Per-node input vectors (the published embedding) plus the skip-gram
// context vectors. Row-major, rows x dim.
struct EmbeddingMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<float> input;
    std::vector<float> context;

    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::size_t n, std::size_t d) : rows(n), dim(d), input(n * d, 0.0f), context(n * d, 0.0f) {}

    std::span<float> input_row(std::size_t i) { return {input.data() + i * dim, dim}; }
    std::span<const float> input_row(std::size_t i) const { return {input.data() + i * dim, dim}; }
    std::span<float> context_row(std::size_t i) { return {context.data() + i * dim, dim}; }
    std::span<const float> context_row(std::size_t i) const { return {context.data() + i * dim, dim}; }

    bool all_finite() const noexcept;
};

// Full-vocabulary softmax of input(center) . context(w), evaluated at
// `context`. O(rows * dim); meant as a reference, not for training.
double softmax_probability_exact(const EmbeddingMatrix& emb, std::size_t center, std::size_t context);

enum class EdgeOperator { hadamard, average, l1, l2, concat };

const char* edge_operator_name(EdgeOperator op) noexcept;
// Throws ConfigError for unknown names.
EdgeOperator parse_edge_operator(const std::string& name);
std::size_t edge_feature_dim(EdgeOperator op, std::size_t dim) noexcept;

// Writes edge_feature_dim(op, dim) values into out.
void edge_features(std::span<const float> a, std::span<const float> b, EdgeOperator op, std::span<double> out);
std::vector<double> edge_features(const EmbeddingMatrix& emb, std::size_t u, std::size_t v, EdgeOperator op);

// Text format: `N D` header, then `label v1 ... vD` per node in id order.
// Values are written in shortest round-trip form.
void write_embedding(std::ostream& out, const EmbeddingMatrix& emb, const NodeIndex& index);

// Input vectors only; rows are placed by label through `index`, and every
// indexed node must be present. Throws ParseError on malformed files.
EmbeddingMatrix read_embedding(std::istream& in, const NodeIndex& index);

}  // namespace phenolink
