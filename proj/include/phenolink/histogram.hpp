#pragma once

// Quantile binning, gradient histograms and best-split search shared by the
// boosted and bagged tree learners.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "phenolink/features.hpp"

namespace phenolink {

// cuts[f] ascending; a value x falls in bin b = #{cuts < x}, so "x <= cuts[f][b]"
// is the same test as "bin(x) <= b".
struct BinCuts {
    std::vector<std::vector<double>> cuts;

    std::size_t features() const noexcept { return cuts.size(); }
    std::size_t bins(std::size_t f) const noexcept { return cuts[f].size() + 1; }
    std::uint8_t bin_of(std::size_t f, double x) const;
};

// At most max_bins (<= 256) bins per feature. With no more distinct values
// than bins, every midpoint between consecutive distinct values is a cut;
// otherwise cuts sit at evenly spaced quantiles.
BinCuts compute_bin_cuts(const FeatureMatrix& x, std::size_t max_bins);

// Column-major bin codes.
struct BinnedMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> codes;

    std::span<const std::uint8_t> column(std::size_t f) const { return {codes.data() + f * rows, rows}; }
};

BinnedMatrix bin_features(const FeatureMatrix& x, const BinCuts& cuts);
BinnedMatrix bin_features_serial(const FeatureMatrix& x, const BinCuts& cuts);

struct GradStats {
    double grad = 0.0;
    double hess = 0.0;
    std::size_t count = 0;

    GradStats& operator+=(const GradStats& o) noexcept {
        grad += o.grad;
        hess += o.hess;
        count += o.count;
        return *this;
    }
    friend GradStats operator-(GradStats a, const GradStats& b) noexcept {
        a.grad -= b.grad;
        a.hess -= b.hess;
        a.count -= b.count;
        return a;
    }
};

struct Histogram {
    std::vector<std::size_t> offset;  // feature f occupies [offset[f], offset[f + 1])
    std::vector<GradStats> bins;

    std::span<const GradStats> feature(std::size_t f) const {
        return {bins.data() + offset[f], offset[f + 1] - offset[f]};
    }
};

// Sums (grad, hess, count) per bin over `rows`. Parallel across features;
// each feature is summed serially in row order, so the result does not depend
// on the thread count.
void build_histogram(const BinnedMatrix& m, const BinCuts& cuts, std::span<const std::uint32_t> rows,
                     std::span<const double> grad, std::span<const double> hess, Histogram& out);
void build_histogram_serial(const BinnedMatrix& m, const BinCuts& cuts, std::span<const std::uint32_t> rows,
                            std::span<const double> grad, std::span<const double> hess, Histogram& out);

enum class SplitCriterion {
    // G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)
    newton,
    // weighted Gini decrease; grad = positive weight, hess = total weight
    gini,
};

struct SplitParams {
    SplitCriterion criterion = SplitCriterion::newton;
    double lambda = 1.0;
    std::size_t min_samples_per_leaf = 1;
    double min_child_hessian = 0.0;
};

struct SplitDecision {
    bool valid = false;
    std::size_t feature = 0;
    std::size_t bin = 0;  // rows with bin <= this go left
    double threshold = 0.0;
    double gain = 0.0;
    GradStats left;
    GradStats right;
};

double split_gain(const GradStats& left, const GradStats& right, const SplitParams& p);

// Scans every cut of the listed features (all when empty). Ties go to the
// lowest feature index, then the lowest threshold. Newton splits need gain > 0;
// Gini splits need an impure node and gain >= 0.
SplitDecision find_best_split(const Histogram& hist, const BinCuts& cuts, const GradStats& total,
                              const SplitParams& params, std::span<const std::size_t> features = {});

}  // namespace phenolink
