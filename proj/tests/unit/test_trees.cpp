#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "phenolink/error.hpp"
#include "phenolink/histogram.hpp"
#include "phenolink/metrics.hpp"
#include "phenolink/trees.hpp"

using namespace phenolink;

namespace {

struct SplitCase {
    FeatureMatrix x;
    std::vector<double> g, h;
};

SplitDecision histogram_split(const SplitCase& c, std::size_t min_leaf = 1) {
    const auto cuts = compute_bin_cuts(c.x, 64);
    const auto binned = bin_features(c.x, cuts);
    std::vector<std::uint32_t> rows(c.x.rows);
    for (std::uint32_t i = 0; i < rows.size(); ++i) rows[i] = i;
    Histogram hist;
    build_histogram(binned, cuts, rows, c.g, c.h, hist);
    GradStats total;
    for (std::size_t i = 0; i < c.x.rows; ++i) total += GradStats{c.g[i], c.h[i], 1};
    SplitParams p;
    p.min_samples_per_leaf = min_leaf;
    return find_best_split(hist, cuts, total, p);
}

std::vector<std::vector<double>> as_rows(const FeatureMatrix& x) {
    std::vector<std::vector<double>> r(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) r[i].assign(x.row(i).begin(), x.row(i).end());
    return r;
}

GbdtConfig small_gbdt(Growth growth) {
    GbdtConfig c = growth == Growth::level ? GbdtConfig::level_wise() : GbdtConfig::leaf_wise();
    c.min_samples_per_leaf = 1;
    c.min_child_hessian = 0;
    c.scale_pos_weight = 1;
    return c;
}

}  // namespace

TEST_CASE("first boosting split on a separable column") {
    SplitCase c{FeatureMatrix(4, 1), {0.5, 0.5, -0.5, -0.5}, {0.25, 0.25, 0.25, 0.25}};
    c.x.data = {1, 2, 3, 4};
    const auto s = histogram_split(c);
    REQUIRE(s.valid);
    CHECK(s.threshold > 2);
    CHECK(s.threshold < 3);
}

TEST_CASE("constant column and pure node give no split") {
    SplitCase c{FeatureMatrix(4, 1), {0.5, 0.5, -0.5, -0.5}, {0.25, 0.25, 0.25, 0.25}};
    c.x.data = {7, 7, 7, 7};
    CHECK_FALSE(histogram_split(c).valid);

    SplitCase pure{FeatureMatrix(4, 1), {-0.5, -0.5, -0.5, -0.5}, {0.25, 0.25, 0.25, 0.25}};
    pure.x.data = {1, 2, 3, 4};
    CHECK_FALSE(histogram_split(pure).valid);
}

TEST_CASE("histogram split equals the exhaustive scan") {
    std::mt19937_64 gen(44);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t rows = 2 + gen() % 63, cols = 1 + gen() % 8;
        SplitCase c{FeatureMatrix(rows, cols), std::vector<double>(rows), std::vector<double>(rows)};
        for (auto& v : c.x.data) v = (trial % 3 == 0) ? static_cast<double>(gen() % 5) : n(gen);
        for (std::size_t i = 0; i < rows; ++i) {
            c.g[i] = n(gen);
            c.h[i] = 0.05 + std::abs(n(gen));
        }
        const auto got = histogram_split(c);
        const auto want = oracle::exhaustive_split(as_rows(c.x), c.g, c.h, 1.0, 1);
        REQUIRE(got.valid == want.valid);
        if (!want.valid) continue;
        CHECK(got.gain == doctest::Approx(want.gain).epsilon(1e-9));
        CHECK(oracle::gain_at(as_rows(c.x), c.g, c.h, 1.0, got.feature, got.threshold) ==
              doctest::Approx(want.gain).epsilon(1e-9));
    }
}

TEST_CASE("bins agree with thresholds") {
    std::mt19937_64 gen(2);
    std::normal_distribution<double> n(0, 1);
    FeatureMatrix x(500, 3);
    for (auto& v : x.data) v = n(gen);
    for (std::size_t i = 0; i < 500; ++i) x(i, 2) = static_cast<double>(i % 4);
    const auto cuts = compute_bin_cuts(x, 64);
    CHECK(cuts.bins(0) <= 64);
    CHECK(cuts.bins(2) == 4);
    const auto binned = bin_features(x, cuts);
    CHECK(binned.codes == bin_features_serial(x, cuts).codes);
    for (std::size_t f = 0; f < 3; ++f) {
        for (std::size_t i = 0; i < 500; ++i) {
            const auto b = binned.column(f)[i];
            for (std::size_t k = 0; k < cuts.cuts[f].size(); ++k) CHECK((x(i, f) <= cuts.cuts[f][k]) == (b <= k));
        }
    }
    CHECK_THROWS_AS(compute_bin_cuts(x, 1), ConfigError);
}

TEST_CASE("parallel histogram equals serial histogram") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> n(0, 1);
    FeatureMatrix x(3000, 30);
    for (auto& v : x.data) v = n(gen);
    std::vector<double> g(3000), h(3000, 1.0);
    for (auto& v : g) v = n(gen);
    const auto cuts = compute_bin_cuts(x, 64);
    const auto binned = bin_features(x, cuts);
    std::vector<std::uint32_t> rows;
    for (std::uint32_t i = 0; i < 3000; i += 2) rows.push_back(i);
    Histogram a, b;
    build_histogram(binned, cuts, rows, g, h, a);
    build_histogram_serial(binned, cuts, rows, g, h, b);
    REQUIRE(a.bins.size() == b.bins.size());
    for (std::size_t k = 0; k < a.bins.size(); ++k) {
        CHECK(a.bins[k].grad == b.bins[k].grad);
        CHECK(a.bins[k].count == b.bins[k].count);
    }
}

TEST_CASE("one deep tree fits eight distinct rows") {
    FeatureMatrix x(8, 2);
    const std::vector<int> y{0, 1, 1, 0, 1, 0, 0, 1};
    for (std::size_t i = 0; i < 8; ++i) {
        x(i, 0) = static_cast<double>(i);
        x(i, 1) = static_cast<double>((i * 5) % 8);
    }
    ForestConfig cfg;
    cfg.trees = 1;
    cfg.bootstrap = false;
    cfg.max_depth = 64;
    cfg.features_per_split = 2;
    const auto forest = train_forest(x, y, cfg);
    for (std::size_t i = 0; i < 8; ++i) CHECK((forest.predict_proba(x.row(i)) >= 0.5) == (y[i] == 1));
}

TEST_CASE("forest scores stay in range and are seeded") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> n(0, 1);
    FeatureMatrix x(300, 6);
    for (auto& v : x.data) v = n(gen);
    std::vector<int> y(300);
    for (std::size_t i = 0; i < 300; ++i) y[i] = x(i, 0) + x(i, 1) > 0.3;
    ForestConfig cfg;
    cfg.trees = 20;
    cfg.seed = 8;
    const auto a = train_forest(x, y, cfg);
    const auto b = train_forest(x, y, cfg);
    CHECK(a == b);
    for (std::size_t i = 0; i < 300; ++i) {
        const double p = a.predict_proba(x.row(i));
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    for (const auto& t : a.trees) CHECK(t.depth() <= 12);
}

TEST_CASE("level and leaf growth agree on a single useful split") {
    FeatureMatrix x(6, 1);
    x.data = {0, 0, 0, 1, 1, 1};
    const std::vector<int> y{0, 0, 0, 1, 1, 1};
    auto level = small_gbdt(Growth::level);
    auto leaf = small_gbdt(Growth::leaf);
    level.rounds = leaf.rounds = 1;
    const auto a = train_gbdt(x, y, level);
    const auto b = train_gbdt(x, y, leaf);
    REQUIRE(a.trees.size() == 1);
    CHECK(a.trees[0].leaf_count() == 2);
    CHECK(a.trees[0] == b.trees[0]);
}

TEST_CASE("boosting loss does not increase") {
    std::mt19937_64 gen(6);
    std::normal_distribution<double> n(0, 1);
    FeatureMatrix x(200, 4);
    for (auto& v : x.data) v = n(gen);
    std::vector<int> y(200);
    for (std::size_t i = 0; i < 200; ++i) y[i] = x(i, 0) * x(i, 1) + 0.3 * n(gen) > 0;
    for (auto growth : {Growth::level, Growth::leaf}) {
        auto cfg = small_gbdt(growth);
        cfg.rounds = 30;
        GbdtReport rep;
        train_gbdt(x, y, cfg, &rep);
        REQUIRE(rep.round_loss.size() == 30);
        for (std::size_t r = 1; r < rep.round_loss.size(); ++r) CHECK(rep.round_loss[r] <= rep.round_loss[r - 1] + 1e-12);
    }
}

TEST_CASE("positive weighting raises recall on a rare class") {
    std::mt19937_64 gen(9);
    std::normal_distribution<double> n(0, 1);
    const std::size_t rows = 2000;
    FeatureMatrix x(rows, 3);
    std::vector<int> y(rows, 0);
    for (std::size_t i = 0; i < rows; ++i) {
        y[i] = i % 100 == 0;
        for (std::size_t f = 0; f < 3; ++f) x(i, f) = n(gen) + (y[i] ? 1.2 : 0.0);
    }
    auto cfg = GbdtConfig::leaf_wise();
    cfg.rounds = 30;
    cfg.seed = 1;
    cfg.scale_pos_weight = 99;
    const auto weighted = train_gbdt(x, y, cfg);
    cfg.scale_pos_weight = 1;
    const auto plain = train_gbdt(x, y, cfg);
    const auto recall = [&](const TreeEnsemble& m) {
        std::vector<double> s(rows);
        for (std::size_t i = 0; i < rows; ++i) s[i] = m.predict_proba(x.row(i));
        return evaluation_report(y, s).class_wise.classes[1].recall;
    };
    CHECK(recall(weighted) > recall(plain));
}

TEST_CASE("single stump is monotone in its feature") {
    FeatureMatrix x(40, 1);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        x(i, 0) = static_cast<double>(i);
        y[i] = i >= 25;
    }
    auto cfg = small_gbdt(Growth::level);
    cfg.rounds = 1;
    cfg.max_depth = 1;
    const auto m = train_gbdt(x, y, cfg);
    REQUIRE(m.trees[0].leaf_count() == 2);
    double prev = 0;
    for (double v = -5; v < 50; v += 0.5) {
        const double p = m.predict_proba(std::vector<double>{v});
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("leaf values follow the Newton step") {
    FeatureMatrix x(4, 1);
    x.data = {0, 0, 1, 1};
    const std::vector<int> y{0, 0, 1, 1};
    auto cfg = small_gbdt(Growth::level);
    cfg.rounds = 1;
    const auto m = train_gbdt(x, y, cfg);
    // left leaf: G = 2 * 0.5, H = 2 * 0.25, value = -G / (H + 1) * lr
    const double left = -1.0 / 1.5 * 0.1;
    CHECK(m.margin(std::vector<double>{0.0}) == doctest::Approx(left));
    CHECK(m.margin(std::vector<double>{1.0}) == doctest::Approx(-left));
}

TEST_CASE("gradient scaling") {
    const std::vector<double> margin{0.0, 0.0};
    const std::vector<int> y{1, 0};
    std::vector<double> g(2), h(2);
    logistic_gradients(margin, y, 99, g, h);
    CHECK(g[0] == doctest::Approx(-0.5 * 99));
    CHECK(h[0] == doctest::Approx(0.25 * 99));
    CHECK(g[1] == doctest::Approx(0.5));
    CHECK(h[1] == doctest::Approx(0.25));
}

TEST_CASE("tree config validation") {
    GbdtConfig g;
    g.learning_rate = 0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    ForestConfig f;
    f.trees = 0;
    CHECK_THROWS_AS(f.validate(), ConfigError);
}
