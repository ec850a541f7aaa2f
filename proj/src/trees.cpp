#include "phenolink/trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "phenolink/error.hpp"
#include "phenolink/random.hpp"
#include "phenolink/skipgram.hpp"

namespace phenolink {

double Tree::predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
}

std::size_t Tree::depth() const {
    std::uint32_t d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return d;
}

std::size_t Tree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double TreeEnsemble::margin(std::span<const double> x) const {
    double z = std::log(base_score / (1.0 - base_score));
    for (const auto& t : trees) z += t.predict(x);
    return z;
}

double TreeEnsemble::predict_proba(std::span<const double> x) const {
    if (mode == EnsembleMode::boosting) return logistic(margin(x));
    if (trees.empty()) return base_score;
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
}

void ForestConfig::validate() const {
    if (trees < 1) throw ConfigError("forest needs at least one tree");
    if (bins < 2 || bins > 256) throw ConfigError("bins must lie in [2, 256]");
}

void GbdtConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (rounds < 1) throw ConfigError("rounds must be >= 1");
    if (growth == Growth::leaf && max_leaves < 2) throw ConfigError("max_leaves must be >= 2");
    if (!(scale_pos_weight > 0.0)) throw ConfigError("scale_pos_weight must be positive");
    if (bins < 2 || bins > 256) throw ConfigError("bins must lie in [2, 256]");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    if (!(base_score > 0.0 && base_score < 1.0)) throw ConfigError("base_score must lie in (0, 1)");
}

void logistic_gradients(std::span<const double> margin, std::span<const int> y, double scale_pos_weight,
                        std::span<double> grad, std::span<double> hess) {
    for (std::size_t i = 0; i < margin.size(); ++i) {
        const double p = logistic(margin[i]);
        const double w = y[i] ? scale_pos_weight : 1.0;
        grad[i] = w * (p - static_cast<double>(y[i]));
        hess[i] = w * std::max(p * (1.0 - p), 1e-16);
    }
}

namespace {

void check_training_inputs(const FeatureMatrix& x, std::span<const int> y) {
    if (y.size() != x.rows) throw InputError("label count does not match feature rows");
    if (x.rows == 0) throw InputError("cannot train on an empty matrix");
    if (!x.all_finite()) throw InputError("feature matrix contains non-finite values");
    for (int v : y) {
        if (v != 0 && v != 1) throw InputError("labels must be 0 or 1");
    }
}

struct Pending {
    std::int32_t node = 0;
    std::vector<std::uint32_t> rows;
    GradStats total;
    SplitDecision split;
    bool evaluated = false;
};

// Grows one tree over binned data. `pick_split` decides the split of a node
// (or returns an invalid decision); `leaf_value` maps node statistics to the
// leaf output.
class TreeGrower {
public:
    using SplitFn = std::function<SplitDecision(const Pending&, const Histogram&)>;
    using LeafFn = std::function<double(const GradStats&)>;

    TreeGrower(const BinnedMatrix& m, const BinCuts& cuts, std::span<const double> grad, std::span<const double> hess,
               SplitFn pick_split, LeafFn leaf_value)
        : m_(m), cuts_(cuts), grad_(grad), hess_(hess), pick_split_(std::move(pick_split)),
          leaf_value_(std::move(leaf_value)) {}

    Tree level_wise(std::vector<std::uint32_t> rows, std::size_t max_depth) {
        Tree tree;
        std::vector<Pending> frontier;
        frontier.push_back(make_root(tree, std::move(rows)));
        for (std::size_t depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
            std::vector<Pending> next;
            for (auto& p : frontier) {
                evaluate(p);
                if (!p.split.valid) continue;
                auto [l, r] = split(tree, p);
                next.push_back(std::move(l));
                next.push_back(std::move(r));
            }
            frontier = std::move(next);
        }
        return tree;
    }

    Tree leaf_wise(std::vector<std::uint32_t> rows, std::size_t max_depth, std::size_t max_leaves) {
        Tree tree;
        std::vector<Pending> leaves;
        leaves.push_back(make_root(tree, std::move(rows)));
        while (leaves.size() < max_leaves) {
            std::size_t best = leaves.size();
            for (std::size_t i = 0; i < leaves.size(); ++i) {
                auto& p = leaves[i];
                if (tree.nodes[static_cast<std::size_t>(p.node)].depth >= max_depth) continue;
                evaluate(p);
                if (!p.split.valid) continue;
                // ties: the leaf created first
                if (best == leaves.size() || p.split.gain > leaves[best].split.gain ||
                    (p.split.gain == leaves[best].split.gain && p.node < leaves[best].node)) {
                    best = i;
                }
            }
            if (best == leaves.size()) break;
            Pending chosen = std::move(leaves[best]);
            leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(best));
            auto [l, r] = split(tree, chosen);
            leaves.push_back(std::move(l));
            leaves.push_back(std::move(r));
        }
        return tree;
    }

private:
    Pending make_root(Tree& tree, std::vector<std::uint32_t> rows) {
        Pending p;
        p.node = 0;
        p.rows = std::move(rows);
        for (auto r : p.rows) p.total += GradStats{grad_[r], hess_[r], 1};
        TreeNode root;
        root.value = leaf_value_(p.total);
        tree.nodes.push_back(root);
        return p;
    }

    void evaluate(Pending& p) {
        if (p.evaluated) return;
        p.evaluated = true;
        build_histogram(m_, cuts_, p.rows, grad_, hess_, hist_);
        p.split = pick_split_(p, hist_);
    }

    std::pair<Pending, Pending> split(Tree& tree, Pending& p) {
        const auto& s = p.split;
        Pending l, r;
        const auto col = m_.column(s.feature);
        for (auto row : p.rows) (col[row] <= s.bin ? l.rows : r.rows).push_back(row);
        l.total = s.left;
        r.total = s.right;
        const auto depth = tree.nodes[static_cast<std::size_t>(p.node)].depth + 1;
        l.node = static_cast<std::int32_t>(tree.nodes.size());
        r.node = l.node + 1;
        TreeNode ln, rn;
        ln.depth = rn.depth = depth;
        ln.value = leaf_value_(l.total);
        rn.value = leaf_value_(r.total);
        auto& parent = tree.nodes[static_cast<std::size_t>(p.node)];
        parent.feature = static_cast<std::int32_t>(s.feature);
        parent.threshold = s.threshold;
        parent.left = l.node;
        parent.right = r.node;
        tree.nodes.push_back(ln);
        tree.nodes.push_back(rn);
        p.rows.clear();
        p.rows.shrink_to_fit();
        return {std::move(l), std::move(r)};
    }

    const BinnedMatrix& m_;
    const BinCuts& cuts_;
    std::span<const double> grad_, hess_;
    SplitFn pick_split_;
    LeafFn leaf_value_;
    Histogram hist_;
};

double weighted_logloss(std::span<const double> margin, std::span<const int> y, double spw) {
    double loss = 0.0, weight = 0.0;
    for (std::size_t i = 0; i < margin.size(); ++i) {
        const double w = y[i] ? spw : 1.0;
        loss += w * (y[i] ? -log_sigmoid(margin[i]) : -log_sigmoid(-margin[i]));
        weight += w;
    }
    return loss / weight;
}

}  // namespace

TreeEnsemble train_gbdt(const FeatureMatrix& x, std::span<const int> y, const GbdtConfig& cfg, GbdtReport* report) {
    cfg.validate();
    check_training_inputs(x, y);

    const BinCuts cuts = compute_bin_cuts(x, cfg.bins);
    const BinnedMatrix binned = bin_features(x, cuts);

    TreeEnsemble ens;
    ens.mode = EnsembleMode::boosting;
    ens.growth = cfg.growth;
    ens.learning_rate = cfg.learning_rate;
    ens.base_score = cfg.base_score;

    const double base_margin = std::log(cfg.base_score / (1.0 - cfg.base_score));
    std::vector<double> margin(x.rows, base_margin), grad(x.rows), hess(x.rows);
    std::vector<std::uint32_t> all_rows(x.rows);
    std::iota(all_rows.begin(), all_rows.end(), 0u);

    SplitParams params;
    params.criterion = SplitCriterion::newton;
    params.lambda = cfg.lambda;
    params.min_samples_per_leaf = std::max<std::size_t>(1, cfg.min_samples_per_leaf);
    params.min_child_hessian = cfg.min_child_hessian;

    const auto pick = [&](const Pending& p, const Histogram& h) {
        if (p.rows.size() < 2 * params.min_samples_per_leaf) return SplitDecision{};
        return find_best_split(h, cuts, p.total, params);
    };
    const auto leaf = [&](const GradStats& s) { return -s.grad / (s.hess + cfg.lambda) * cfg.learning_rate; };

    GbdtReport rep;
    for (std::size_t round = 0; round < cfg.rounds; ++round) {
        logistic_gradients(margin, y, cfg.scale_pos_weight, grad, hess);
        TreeGrower grower(binned, cuts, grad, hess, pick, leaf);
        Tree tree = cfg.growth == Growth::level ? grower.level_wise(all_rows, cfg.max_depth)
                                                : grower.leaf_wise(all_rows, cfg.max_depth, cfg.max_leaves);
        for (std::size_t i = 0; i < x.rows; ++i) margin[i] += tree.predict(x.row(i));
        ens.trees.push_back(std::move(tree));
        rep.round_loss.push_back(weighted_logloss(margin, y, cfg.scale_pos_weight));
        if (!std::isfinite(rep.round_loss.back())) {
            throw TrainingError("non-finite boosting loss in round " + std::to_string(round));
        }
    }
    if (report) *report = std::move(rep);
    return ens;
}

TreeEnsemble train_forest(const FeatureMatrix& x, std::span<const int> y, const ForestConfig& cfg) {
    cfg.validate();
    check_training_inputs(x, y);

    const BinCuts cuts = compute_bin_cuts(x, cfg.bins);
    const BinnedMatrix binned = bin_features(x, cuts);
    const std::size_t d = x.cols;
    const std::size_t mtry = std::clamp<std::size_t>(
        cfg.features_per_split ? cfg.features_per_split
                               : static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))),
        1, d);

    SplitParams params;
    params.criterion = SplitCriterion::gini;
    params.min_samples_per_leaf = std::max<std::size_t>(1, cfg.min_samples_per_leaf);

    TreeEnsemble ens;
    ens.mode = EnsembleMode::bagging;
    ens.growth = Growth::level;
    ens.learning_rate = 1.0;

    std::vector<double> weight(x.rows), positive(x.rows);
    std::vector<std::size_t> features(d);
    for (std::size_t t = 0; t < cfg.trees; ++t) {
        Rng rng(derive_seed(cfg.seed, t));
        std::fill(weight.begin(), weight.end(), cfg.bootstrap ? 0.0 : 1.0);
        if (cfg.bootstrap) {
            for (std::size_t i = 0; i < x.rows; ++i) weight[uniform_index(rng, x.rows)] += 1.0;
        }
        std::vector<std::uint32_t> rows;
        for (std::size_t i = 0; i < x.rows; ++i) {
            positive[i] = weight[i] * static_cast<double>(y[i]);
            if (weight[i] > 0.0) rows.push_back(static_cast<std::uint32_t>(i));
        }

        // Try a random subset of mtry features first; when none of them splits
        // an impure node, fall back to the remaining features.
        const auto pick = [&](const Pending& p, const Histogram& h) {
            if (p.rows.size() < 2 * params.min_samples_per_leaf) return SplitDecision{};
            std::iota(features.begin(), features.end(), std::size_t{0});
            for (std::size_t k = 0; k < mtry; ++k) {
                std::swap(features[k], features[k + uniform_index(rng, d - k)]);
            }
            const std::span<const std::size_t> first(features.data(), mtry);
            SplitDecision s = find_best_split(h, cuts, p.total, params, first);
            if (!s.valid && mtry < d) {
                const std::span<const std::size_t> rest(features.data() + mtry, d - mtry);
                s = find_best_split(h, cuts, p.total, params, rest);
            }
            return s;
        };
        const auto leaf = [](const GradStats& s) { return s.hess > 0.0 ? s.grad / s.hess : 0.0; };
        TreeGrower grower(binned, cuts, positive, weight, pick, leaf);
        ens.trees.push_back(grower.level_wise(std::move(rows), cfg.max_depth));
    }
    return ens;
}

}  // namespace phenolink
