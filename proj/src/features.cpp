#include "phenolink/features.hpp"

#include <algorithm>
#include <cmath>

#include "phenolink/error.hpp"

namespace phenolink {

bool FeatureMatrix::all_finite() const noexcept {
    return std::all_of(data.begin(), data.end(), [](double x) { return std::isfinite(x); });
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> idx) const {
    FeatureMatrix out(idx.size(), cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto src = row(idx[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

namespace {

void check_ids(const EmbeddingMatrix& emb, const LabeledPairs& pairs) {
    for (const auto& r : pairs.rows) {
        if (r.u >= emb.rows || r.v >= emb.rows) throw InputError("pair references a node without an embedding");
    }
}

void fill_row(const EmbeddingMatrix& emb, const LabeledPair& r, EdgeOperator op, std::span<double> out) {
    // concat canonicalizes to (min id, max id); rows are already canonical.
    edge_features(emb.input_row(r.u), emb.input_row(r.v), op, out);
}

}  // namespace

FeatureMatrix pair_features_serial(const EmbeddingMatrix& emb, const LabeledPairs& pairs, EdgeOperator op) {
    check_ids(emb, pairs);
    FeatureMatrix x(pairs.size(), edge_feature_dim(op, emb.dim));
    for (std::size_t i = 0; i < pairs.size(); ++i) fill_row(emb, pairs.rows[i], op, x.row(i));
    return x;
}

FeatureMatrix pair_features(const EmbeddingMatrix& emb, const LabeledPairs& pairs, EdgeOperator op) {
    check_ids(emb, pairs);
    FeatureMatrix x(pairs.size(), edge_feature_dim(op, emb.dim));
    const auto n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        fill_row(emb, pairs.rows[static_cast<std::size_t>(i)], op, x.row(static_cast<std::size_t>(i)));
    }
    return x;
}

std::vector<std::size_t> rows_with_split(const LabeledPairs& pairs, Split split) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs.rows[i].split == split) idx.push_back(i);
    }
    return idx;
}

std::vector<int> labels_of(const LabeledPairs& pairs, std::span<const std::size_t> idx) {
    std::vector<int> y;
    y.reserve(idx.size());
    for (std::size_t i : idx) y.push_back(pairs.rows[i].label);
    return y;
}

}  // namespace phenolink
