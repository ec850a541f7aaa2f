#include "phenolink/model.hpp"

#include <set>

#include "phenolink/error.hpp"

namespace phenolink {

using nlohmann::json;
using nlohmann::ordered_json;

const char* family_name(ModelFamily f) noexcept {
    switch (f) {
        case ModelFamily::logistic: return "logistic";
        case ModelFamily::forest: return "forest";
        case ModelFamily::mlp: return "mlp";
        case ModelFamily::gbdt_level: return "gbdt-level";
        case ModelFamily::gbdt_leaf: return "gbdt-leaf";
    }
    return "?";
}

std::vector<ModelFamily> all_families() {
    return {ModelFamily::logistic, ModelFamily::forest, ModelFamily::mlp, ModelFamily::gbdt_level,
            ModelFamily::gbdt_leaf};
}

ModelFamily parse_family(const std::string& name) {
    for (auto f : all_families()) {
        if (name == family_name(f)) return f;
    }
    throw ConfigError("unknown model '" + name + "' (expected logistic, forest, mlp, gbdt-level or gbdt-leaf)");
}

void TrainConfig::set_seed(std::uint64_t seed) {
    mlp.seed = derive_seed(seed, 1);
    forest.seed = derive_seed(seed, 2);
    gbdt_level.seed = derive_seed(seed, 3);
    gbdt_leaf.seed = derive_seed(seed, 4);
}

namespace {

const char* growth_name(Growth g) { return g == Growth::level ? "level" : "leaf"; }

Growth parse_growth(const std::string& s) {
    if (s == "level") return Growth::level;
    if (s == "leaf") return Growth::leaf;
    throw ConfigError("growth must be 'level' or 'leaf'");
}

ordered_json gbdt_json(const GbdtConfig& c) {
    ordered_json j;
    j["growth"] = growth_name(c.growth);
    j["learning_rate"] = c.learning_rate;
    j["max_depth"] = c.max_depth;
    j["rounds"] = c.rounds;
    j["max_leaves"] = c.max_leaves;
    j["scale_pos_weight"] = c.scale_pos_weight;
    j["bins"] = c.bins;
    j["min_samples_per_leaf"] = c.min_samples_per_leaf;
    j["lambda"] = c.lambda;
    j["min_child_hessian"] = c.min_child_hessian;
    j["base_score"] = c.base_score;
    j["seed"] = c.seed;
    return j;
}

// Reads key into field when present; rejects unknown keys.
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }
    template <class T>
    Reader& operator()(const char* key, T& field) {
        known_.insert(key);
        if (auto it = j_.find(key); it != j_.end()) {
            try {
                field = it->get<T>();
            } catch (const json::exception& e) {
                throw ConfigError(where_ + "." + key + ": " + e.what());
            }
        }
        return *this;
    }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!known_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> known_;
};

void gbdt_from(const json& j, GbdtConfig& c, const std::string& where) {
    std::string growth = growth_name(c.growth);
    Reader(j, where)("growth", growth)("learning_rate", c.learning_rate)("max_depth", c.max_depth)(
        "rounds", c.rounds)("max_leaves", c.max_leaves)("scale_pos_weight", c.scale_pos_weight)("bins", c.bins)(
        "min_samples_per_leaf", c.min_samples_per_leaf)("lambda", c.lambda)("min_child_hessian", c.min_child_hessian)(
        "base_score", c.base_score)("seed", c.seed)
        .finish();
    c.growth = parse_growth(growth);
}

}  // namespace

ordered_json config_to_json(ModelFamily f, const TrainConfig& cfg) {
    ordered_json j;
    switch (f) {
        case ModelFamily::logistic:
            j["max_iterations"] = cfg.logistic.max_iterations;
            j["tolerance"] = cfg.logistic.tolerance;
            j["l2"] = cfg.logistic.l2;
            j["history"] = cfg.logistic.history;
            break;
        case ModelFamily::mlp:
            j["hidden"] = cfg.mlp.hidden;
            j["step_size"] = cfg.mlp.step_size;
            j["beta1"] = cfg.mlp.beta1;
            j["beta2"] = cfg.mlp.beta2;
            j["epsilon"] = cfg.mlp.epsilon;
            j["epochs"] = cfg.mlp.epochs;
            j["batch_size"] = cfg.mlp.batch_size;
            j["seed"] = cfg.mlp.seed;
            break;
        case ModelFamily::forest:
            j["trees"] = cfg.forest.trees;
            j["max_depth"] = cfg.forest.max_depth;
            j["bootstrap"] = cfg.forest.bootstrap;
            j["features_per_split"] = cfg.forest.features_per_split;
            j["bins"] = cfg.forest.bins;
            j["min_samples_per_leaf"] = cfg.forest.min_samples_per_leaf;
            j["seed"] = cfg.forest.seed;
            break;
        case ModelFamily::gbdt_level: j = gbdt_json(cfg.gbdt_level); break;
        case ModelFamily::gbdt_leaf: j = gbdt_json(cfg.gbdt_leaf); break;
    }
    return j;
}

void config_from_json(ModelFamily f, const json& j, TrainConfig& cfg) {
    const std::string where = std::string("models.") + family_name(f);
    switch (f) {
        case ModelFamily::logistic:
            Reader(j, where)("max_iterations", cfg.logistic.max_iterations)("tolerance", cfg.logistic.tolerance)(
                "l2", cfg.logistic.l2)("history", cfg.logistic.history)
                .finish();
            break;
        case ModelFamily::mlp:
            Reader(j, where)("hidden", cfg.mlp.hidden)("step_size", cfg.mlp.step_size)("beta1", cfg.mlp.beta1)(
                "beta2", cfg.mlp.beta2)("epsilon", cfg.mlp.epsilon)("epochs", cfg.mlp.epochs)(
                "batch_size", cfg.mlp.batch_size)("seed", cfg.mlp.seed)
                .finish();
            break;
        case ModelFamily::forest:
            Reader(j, where)("trees", cfg.forest.trees)("max_depth", cfg.forest.max_depth)(
                "bootstrap", cfg.forest.bootstrap)("features_per_split", cfg.forest.features_per_split)(
                "bins", cfg.forest.bins)("min_samples_per_leaf", cfg.forest.min_samples_per_leaf)(
                "seed", cfg.forest.seed)
                .finish();
            break;
        case ModelFamily::gbdt_level: gbdt_from(j, cfg.gbdt_level, where); break;
        case ModelFamily::gbdt_leaf: gbdt_from(j, cfg.gbdt_leaf, where); break;
    }
}

std::size_t Model::input_dim() const {
    return std::visit(
        [this](const auto& p) -> std::size_t {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                return p.weights.size();
            } else if constexpr (std::is_same_v<T, MlpModel>) {
                return p.input_dim();
            } else {
                return config.contains("input_dim") ? config["input_dim"].get<std::size_t>() : 0;
            }
        },
        params);
}

double Model::score(std::span<const double> x) const {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, TreeEnsemble>) {
                return p.predict_proba(x);
            } else {
                return p.score(x);
            }
        },
        params);
}

Model train_model(ModelFamily family, const FeatureMatrix& x, std::span<const int> y, const TrainConfig& cfg,
                  TrainLog* log) {
    Model m;
    m.family = family;
    m.config = config_to_json(family, cfg);
    TrainLog local;
    switch (family) {
        case ModelFamily::logistic: {
            try {
                auto fit = train_logistic(x, y, {}, cfg.logistic);
                if (!fit.converged) local.warnings.push_back("logistic regression hit max_iterations");
                m.params = std::move(fit.model);
            } catch (const LineSearchError& e) {
                local.warnings.push_back(std::string(e.what()) + "; keeping last iterate");
                m.params = e.fit().model;
            }
            break;
        }
        case ModelFamily::mlp: {
            auto fit = train_mlp(x, y, cfg.mlp);
            local.loss_trace = std::move(fit.epoch_loss);
            m.params = std::move(fit.model);
            break;
        }
        case ModelFamily::forest: m.params = train_forest(x, y, cfg.forest); break;
        case ModelFamily::gbdt_level:
        case ModelFamily::gbdt_leaf: {
            GbdtReport rep;
            m.params = train_gbdt(x, y, family == ModelFamily::gbdt_level ? cfg.gbdt_level : cfg.gbdt_leaf, &rep);
            local.loss_trace = std::move(rep.round_loss);
            break;
        }
    }
    if (family == ModelFamily::forest || family == ModelFamily::gbdt_level || family == ModelFamily::gbdt_leaf) {
        m.config["input_dim"] = x.cols;
    }
    if (log) *log = std::move(local);
    return m;
}

namespace {

void check_dim(const Model& m, const FeatureMatrix& x) {
    const std::size_t expected = m.input_dim();
    if (x.rows > 0 && x.cols != expected) {
        throw InputError("model expects " + std::to_string(expected) + " features, got " + std::to_string(x.cols));
    }
}

}  // namespace

std::vector<double> predict_proba_serial(const Model& m, const FeatureMatrix& x) {
    check_dim(m, x);
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = m.score(x.row(i));
    return out;
}

std::vector<double> predict_proba(const Model& m, const FeatureMatrix& x) {
    check_dim(m, x);
    std::vector<double> out(x.rows);
    const auto n = static_cast<std::int64_t>(x.rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = m.score(x.row(static_cast<std::size_t>(i)));
    return out;
}

namespace {

ordered_json tree_to_json(const Tree& t) {
    ordered_json feature = ordered_json::array(), threshold = ordered_json::array(), left = ordered_json::array(),
                 right = ordered_json::array(), value = ordered_json::array(), depth = ordered_json::array();
    for (const auto& n : t.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
        depth.push_back(n.depth);
    }
    return {{"feature", feature}, {"threshold", threshold}, {"left", left},
            {"right", right},     {"value", value},         {"depth", depth}};
}

Tree tree_from_json(const json& j) {
    const auto feature = j.at("feature").get<std::vector<std::int32_t>>();
    const auto threshold = j.at("threshold").get<std::vector<double>>();
    const auto left = j.at("left").get<std::vector<std::int32_t>>();
    const auto right = j.at("right").get<std::vector<std::int32_t>>();
    const auto value = j.at("value").get<std::vector<double>>();
    const auto depth = j.at("depth").get<std::vector<std::uint32_t>>();
    const std::size_t n = feature.size();
    if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n || depth.size() != n) {
        throw InputError("tree arrays differ in length");
    }
    Tree t;
    t.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i], depth[i]};
        if (feature[i] >= 0) {
            const auto bad = [n, i](std::int32_t c) { return c <= static_cast<std::int32_t>(i) || c >= static_cast<std::int32_t>(n); };
            if (bad(left[i]) || bad(right[i])) throw InputError("tree child index out of range");
        }
    }
    if (n == 0) throw InputError("tree without nodes");
    return t;
}

}  // namespace

ordered_json model_to_json(const Model& m) {
    ordered_json j;
    j["format"] = "phenolink-model";
    j["version"] = model_format_version;
    j["family"] = family_name(m.family);
    j["config"] = m.config;
    ordered_json p;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                p["weights"] = v.weights;
                p["bias"] = v.bias;
            } else if constexpr (std::is_same_v<T, MlpModel>) {
                p["layers"] = v.layers;
                p["params"] = v.params;
            } else {
                p["mode"] = v.mode == EnsembleMode::bagging ? "bagging" : "boosting";
                p["growth"] = growth_name(v.growth);
                p["learning_rate"] = v.learning_rate;
                p["base_score"] = v.base_score;
                ordered_json trees = ordered_json::array();
                for (const auto& t : v.trees) trees.push_back(tree_to_json(t));
                p["trees"] = std::move(trees);
            }
        },
        m.params);
    j["params"] = std::move(p);
    return j;
}

Model model_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != "phenolink-model") throw InputError("not a phenolink model file");
        const int version = j.at("version").get<int>();
        if (version != model_format_version) {
            throw InputError("unsupported model format version " + std::to_string(version));
        }
        Model m;
        m.family = parse_family(j.at("family").get<std::string>());
        m.config = j.at("config");
        const auto& p = j.at("params");
        switch (m.family) {
            case ModelFamily::logistic: {
                LinearModel lm;
                lm.weights = p.at("weights").get<std::vector<double>>();
                lm.bias = p.at("bias").get<double>();
                m.params = std::move(lm);
                break;
            }
            case ModelFamily::mlp: {
                MlpModel mm;
                mm.layers = p.at("layers").get<std::vector<std::size_t>>();
                mm.params = p.at("params").get<std::vector<double>>();
                if (mm.layers.size() < 2 || mm.params.size() != mm.parameter_count()) {
                    throw InputError("mlp parameter count does not match layers");
                }
                m.params = std::move(mm);
                break;
            }
            default: {
                TreeEnsemble e;
                e.mode = p.at("mode").get<std::string>() == "bagging" ? EnsembleMode::bagging : EnsembleMode::boosting;
                e.growth = parse_growth(p.at("growth").get<std::string>());
                e.learning_rate = p.at("learning_rate").get<double>();
                e.base_score = p.at("base_score").get<double>();
                for (const auto& t : p.at("trees")) e.trees.push_back(tree_from_json(t));
                m.params = std::move(e);
                break;
            }
        }
        return m;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed model file: ") + e.what());
    } catch (const ConfigError& e) {
        throw InputError(std::string("malformed model file: ") + e.what());
    }
}

Model model_from_json(const ordered_json& j) {
    Model m = model_from_json(json(j));
    m.config = j.at("config");
    return m;
}

}  // namespace phenolink
