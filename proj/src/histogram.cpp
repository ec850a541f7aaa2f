#include "phenolink/histogram.hpp"

#include <algorithm>
#include <cmath>

#include "phenolink/error.hpp"

namespace phenolink {

std::uint8_t BinCuts::bin_of(std::size_t f, double x) const {
    const auto& c = cuts[f];
    return static_cast<std::uint8_t>(std::lower_bound(c.begin(), c.end(), x) - c.begin());
}

BinCuts compute_bin_cuts(const FeatureMatrix& x, std::size_t max_bins) {
    if (max_bins < 2 || max_bins > 256) throw ConfigError("bin count must lie in [2, 256]");
    BinCuts out;
    out.cuts.resize(x.cols);
    std::vector<double> column(x.rows);
    for (std::size_t f = 0; f < x.cols; ++f) {
        for (std::size_t i = 0; i < x.rows; ++i) column[i] = x(i, f);
        std::sort(column.begin(), column.end());
        std::vector<double> distinct;
        std::vector<std::size_t> upto;  // rows with value <= distinct[k]
        for (std::size_t i = 0; i < column.size(); ++i) {
            if (distinct.empty() || column[i] != distinct.back()) {
                distinct.push_back(column[i]);
                upto.push_back(0);
            }
            upto.back() = i + 1;
        }
        auto& cuts = out.cuts[f];
        if (distinct.size() <= max_bins) {
            for (std::size_t k = 0; k + 1 < distinct.size(); ++k) cuts.push_back((distinct[k] + distinct[k + 1]) / 2.0);
            continue;
        }
        std::size_t k = 0;
        for (std::size_t q = 1; q < max_bins; ++q) {
            const double target = static_cast<double>(q) * static_cast<double>(x.rows) / static_cast<double>(max_bins);
            while (k + 1 < distinct.size() && static_cast<double>(upto[k]) < target) ++k;
            if (k + 1 >= distinct.size()) break;
            const double cut = (distinct[k] + distinct[k + 1]) / 2.0;
            if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
        }
    }
    return out;
}

BinnedMatrix bin_features_serial(const FeatureMatrix& x, const BinCuts& cuts) {
    BinnedMatrix m{x.rows, x.cols, std::vector<std::uint8_t>(x.rows * x.cols)};
    for (std::size_t f = 0; f < x.cols; ++f) {
        for (std::size_t i = 0; i < x.rows; ++i) m.codes[f * x.rows + i] = cuts.bin_of(f, x(i, f));
    }
    return m;
}

BinnedMatrix bin_features(const FeatureMatrix& x, const BinCuts& cuts) {
    BinnedMatrix m{x.rows, x.cols, std::vector<std::uint8_t>(x.rows * x.cols)};
    const auto cols = static_cast<std::int64_t>(x.cols);
#pragma omp parallel for schedule(static)
    for (std::int64_t f = 0; f < cols; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        for (std::size_t i = 0; i < x.rows; ++i) m.codes[fi * x.rows + i] = cuts.bin_of(fi, x(i, fi));
    }
    return m;
}

namespace {

void layout(const BinCuts& cuts, Histogram& out) {
    out.offset.assign(cuts.features() + 1, 0);
    for (std::size_t f = 0; f < cuts.features(); ++f) out.offset[f + 1] = out.offset[f] + cuts.bins(f);
    out.bins.assign(out.offset.back(), GradStats{});
}

void accumulate_feature(const BinnedMatrix& m, std::size_t f, std::span<const std::uint32_t> rows,
                        std::span<const double> grad, std::span<const double> hess, GradStats* bins) {
    const auto col = m.column(f);
    for (std::uint32_t r : rows) {
        GradStats& b = bins[col[r]];
        b.grad += grad[r];
        b.hess += hess[r];
        ++b.count;
    }
}

}  // namespace

void build_histogram_serial(const BinnedMatrix& m, const BinCuts& cuts, std::span<const std::uint32_t> rows,
                            std::span<const double> grad, std::span<const double> hess, Histogram& out) {
    layout(cuts, out);
    for (std::size_t f = 0; f < m.cols; ++f) accumulate_feature(m, f, rows, grad, hess, out.bins.data() + out.offset[f]);
}

void build_histogram(const BinnedMatrix& m, const BinCuts& cuts, std::span<const std::uint32_t> rows,
                     std::span<const double> grad, std::span<const double> hess, Histogram& out) {
    layout(cuts, out);
    const auto cols = static_cast<std::int64_t>(m.cols);
#pragma omp parallel for schedule(static) if (rows.size() * m.cols > 65536)
    for (std::int64_t f = 0; f < cols; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        accumulate_feature(m, fi, rows, grad, hess, out.bins.data() + out.offset[fi]);
    }
}

namespace {

double newton_score(const GradStats& s, double lambda) {
    return s.grad * s.grad / (s.hess + lambda);
}

// Weighted Gini impurity times node weight: 2 G (H - G) / H.
double gini_mass(const GradStats& s) {
    return s.hess > 0.0 ? 2.0 * s.grad * (s.hess - s.grad) / s.hess : 0.0;
}

}  // namespace

double split_gain(const GradStats& left, const GradStats& right, const SplitParams& p) {
    GradStats total = left;
    total += right;
    if (p.criterion == SplitCriterion::newton) {
        return newton_score(left, p.lambda) + newton_score(right, p.lambda) - newton_score(total, p.lambda);
    }
    return gini_mass(total) - gini_mass(left) - gini_mass(right);
}

SplitDecision find_best_split(const Histogram& hist, const BinCuts& cuts, const GradStats& total,
                              const SplitParams& params, std::span<const std::size_t> features) {
    SplitDecision best;
    if (params.criterion == SplitCriterion::gini) {
        const bool pure = total.grad <= 0.0 || total.grad >= total.hess;
        if (pure) return best;
    }
    const auto consider = [&](std::size_t f) {
        const auto bins = hist.feature(f);
        GradStats left;
        for (std::size_t b = 0; b + 1 < bins.size(); ++b) {
            left += bins[b];
            // an empty bin repeats the previous partition; the lower threshold wins
            if (bins[b].count == 0) continue;
            const GradStats right = total - left;
            if (right.count == 0) break;
            if (left.count < params.min_samples_per_leaf || right.count < params.min_samples_per_leaf) continue;
            if (left.hess < params.min_child_hessian || right.hess < params.min_child_hessian) continue;
            const double gain = split_gain(left, right, params);
            const bool acceptable = params.criterion == SplitCriterion::newton ? gain > 0.0 : gain >= -1e-12;
            if (!acceptable) continue;
            if (!best.valid || gain > best.gain) {
                best.valid = true;
                best.feature = f;
                best.bin = b;
                best.threshold = cuts.cuts[f][b];
                best.gain = gain;
                best.left = left;
                best.right = right;
            }
        }
    };
    if (features.empty()) {
        for (std::size_t f = 0; f < cuts.features(); ++f) consider(f);
    } else {
        std::vector<std::size_t> sorted(features.begin(), features.end());
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t f : sorted) consider(f);
    }
    return best;
}

}  // namespace phenolink
