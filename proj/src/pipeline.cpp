#include "phenolink/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "phenolink/error.hpp"
#include "phenolink/features.hpp"
#include "phenolink/graph.hpp"

namespace phenolink {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t stage_seed(std::uint64_t seed, Stage s) noexcept {
    return derive_seed(seed, static_cast<std::uint64_t>(s));
}

void PipelineConfig::apply_seed() {
    sampling.seed = stage_seed(seed, Stage::sample);
    walks.seed = stage_seed(seed, Stage::walks);
    skipgram.seed = stage_seed(seed, Stage::skipgram);
    skipgram.workers = workers;
    training.set_seed(stage_seed(seed, Stage::models));
}

void PipelineConfig::validate() const {
    columns.validate();
    sampling.validate();
    walks.validate();
    skipgram.validate();
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
    if (workers == 0) throw ConfigError("workers must be at least 1");
    if (models.empty()) throw ConfigError("at least one model is required");
    training.logistic.validate();
    training.mlp.validate();
    training.forest.validate();
    training.gbdt_level.validate();
    training.gbdt_leaf.validate();
}

namespace {

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
                throw ConfigError(where_ + key + ": " + e.what());
            }
        }
        return *this;
    }
    const json* sub(const char* key) {
        known_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!known_.count(it.key())) throw ConfigError("unknown config key '" + where_ + it.key() + "'");
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> known_;
};

char parse_delimiter(const std::string& s) {
    if (s == "\\t" || s == "tab") return '\t';
    if (s.size() != 1) throw ConfigError("delimiter must be a single character");
    return s[0];
}

std::string delimiter_text(char c) { return c == '\t' ? "\\t" : std::string(1, c); }

// "all" or a count.
std::optional<std::size_t> parse_count(const json& j, const char* what) {
    if (j.is_null() || (j.is_string() && j.get<std::string>() == "all")) return std::nullopt;
    if (j.is_number_unsigned()) return j.get<std::size_t>();
    throw ConfigError(std::string(what) + " must be a non-negative integer or \"all\"");
}

}  // namespace

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
    PipelineConfig cfg;
    Reader top(j, "");
    std::string input;
    top("input", input)("seed", cfg.seed)("workers", cfg.workers)("threshold", cfg.threshold);
    if (!input.empty()) {
        cfg.input = input;
        if (cfg.input.is_relative() && !base_dir.empty()) cfg.input = base_dir / cfg.input;
    }
    if (const json* c = top.sub("columns")) {
        std::string delim = delimiter_text(cfg.columns.delimiter);
        Reader(*c, "columns.")("delimiter", delim)("source_column", cfg.columns.source_column)(
            "target_column", cfg.columns.target_column)("has_header", cfg.columns.has_header)(
            "comment_prefix", cfg.columns.comment_prefix)("source_kind", cfg.columns.source_kind)(
            "target_kind", cfg.columns.target_kind)
            .finish();
        cfg.columns.delimiter = parse_delimiter(delim);
    }
    if (const json* s = top.sub("sampling")) {
        Reader r(*s, "sampling.");
        r("positive_fraction", cfg.sampling.positive_fraction)("max_connectivity_checks",
                                                                cfg.sampling.max_connectivity_checks)(
            "train_fraction", cfg.train_fraction)("stratified", cfg.stratified);
        if (const json* pc = r.sub("positive_count")) cfg.sampling.positive_count = parse_count(*pc, "positive_count");
        if (const json* nc = r.sub("negative_count")) cfg.sampling.negative_count = parse_count(*nc, "negative_count");
        r.finish();
    }
    if (const json* w = top.sub("walks")) {
        Reader(*w, "walks.")("walk_length", cfg.walks.walk_length)("walks_per_node", cfg.walks.walks_per_node)(
            "return_parameter", cfg.walks.return_parameter)("inout_parameter", cfg.walks.inout_parameter)
            .finish();
    }
    if (const json* s = top.sub("skipgram")) {
        Reader(*s, "skipgram.")("dimensions", cfg.skipgram.dimensions)("window", cfg.skipgram.window)(
            "negatives", cfg.skipgram.negatives)("epochs", cfg.skipgram.epochs)(
            "initial_step_size", cfg.skipgram.initial_step_size)("noise_exponent", cfg.skipgram.noise_exponent)
            .finish();
    }
    std::string op = edge_operator_name(cfg.edge_operator);
    top("edge_operator", op);
    cfg.edge_operator = parse_edge_operator(op);
    if (const json* m = top.sub("models")) {
        if (!m->is_array()) throw ConfigError("models must be a list of model names");
        cfg.models.clear();
        for (const auto& name : *m) cfg.models.push_back(parse_family(name.get<std::string>()));
    }
    if (const json* mp = top.sub("model_params")) {
        if (!mp->is_object()) throw ConfigError("model_params must be an object");
        for (auto it = mp->begin(); it != mp->end(); ++it) {
            config_from_json(parse_family(it.key()), it.value(), cfg.training);
        }
    }
    top.finish();
    cfg.apply_seed();
    return cfg;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

ordered_json config_to_json(const PipelineConfig& cfg) {
    ordered_json j;
    j["input"] = cfg.input.string();
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["threshold"] = cfg.threshold;
    j["columns"] = {{"delimiter", delimiter_text(cfg.columns.delimiter)},
                    {"source_column", cfg.columns.source_column},
                    {"target_column", cfg.columns.target_column},
                    {"has_header", cfg.columns.has_header},
                    {"comment_prefix", cfg.columns.comment_prefix},
                    {"source_kind", cfg.columns.source_kind},
                    {"target_kind", cfg.columns.target_kind}};
    ordered_json s;
    s["positive_fraction"] = cfg.sampling.positive_fraction;
    s["positive_count"] = cfg.sampling.positive_count ? ordered_json(*cfg.sampling.positive_count) : ordered_json();
    s["negative_count"] = cfg.sampling.negative_count ? ordered_json(*cfg.sampling.negative_count) : ordered_json("all");
    s["max_connectivity_checks"] = cfg.sampling.max_connectivity_checks;
    s["train_fraction"] = cfg.train_fraction;
    s["stratified"] = cfg.stratified;
    j["sampling"] = std::move(s);
    j["walks"] = {{"walk_length", cfg.walks.walk_length},
                  {"walks_per_node", cfg.walks.walks_per_node},
                  {"return_parameter", cfg.walks.return_parameter},
                  {"inout_parameter", cfg.walks.inout_parameter}};
    j["skipgram"] = {{"dimensions", cfg.skipgram.dimensions},
                     {"window", cfg.skipgram.window},
                     {"negatives", cfg.skipgram.negatives},
                     {"epochs", cfg.skipgram.epochs},
                     {"initial_step_size", cfg.skipgram.initial_step_size},
                     {"noise_exponent", cfg.skipgram.noise_exponent}};
    j["edge_operator"] = edge_operator_name(cfg.edge_operator);
    auto models = ordered_json::array();
    for (auto f : cfg.models) models.push_back(family_name(f));
    j["models"] = std::move(models);
    ordered_json params;
    for (auto f : all_families()) params[family_name(f)] = config_to_json(f, cfg.training);
    j["model_params"] = std::move(params);
    return j;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot open " + p.string() + " (run the earlier stage first?)");
    return in;
}

// Writes via a temporary file so a failed stage never leaves a truncated artifact.
template <class Fn>
void write_file(const fs::path& p, Fn&& fn) {
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp.string());
        fn(out);
        out.flush();
        if (!out) throw InputError("write failed for " + tmp.string());
    }
    fs::rename(tmp, p);
}

void write_json(const fs::path& p, const ordered_json& j) {
    write_file(p, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

void ensure_dir(const fs::path& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw InputError("cannot create output directory " + out.string());
}

FeatureMatrix split_features(const EmbeddingMatrix& emb, const LabeledPairs& pairs, Split split, EdgeOperator op,
                             std::vector<int>& labels) {
    const auto idx = rows_with_split(pairs, split);
    LabeledPairs subset;
    subset.rows.reserve(idx.size());
    for (auto i : idx) subset.rows.push_back(pairs.rows[i]);
    labels = labels_of(pairs, idx);
    return pair_features(emb, subset, op);
}

}  // namespace

NodeIndex load_node_index(const fs::path& out) {
    auto in = open_in(out / "nodes.tsv");
    return read_node_index(in);
}

Graph load_graph(const fs::path& file, const NodeIndex& index) {
    auto in = open_in(file);
    return read_graph_edges(in, index);
}

LabeledPairs load_pairs(const fs::path& out, const NodeIndex& index) {
    auto in = open_in(out / "pairs.csv");
    return read_pairs_csv(in, index);
}

EmbeddingMatrix load_embedding(const fs::path& out, const NodeIndex& index) {
    auto in = open_in(out / "embedding.txt");
    return read_embedding(in, index);
}

Model load_model(const fs::path& file) {
    auto in = open_in(file);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(file.string() + ": " + e.what());
    }
    return model_from_json(j);
}

std::string model_file_name(ModelFamily f) { return std::string("model_") + family_name(f) + ".json"; }

std::string report_file_name(ModelFamily f, const char* extension) {
    return std::string("report_") + family_name(f) + extension;
}

StageResult run_ingest(const PipelineConfig& cfg, const fs::path& out) {
    const auto t0 = Clock::now();
    cfg.columns.validate();
    if (!fs::is_regular_file(cfg.input)) throw InputError("input file not found: " + cfg.input.string());
    ensure_dir(out);
    const AssociationList list = read_annotations(cfg.input.string(), cfg.columns);
    if (list.empty()) throw InputError("no associations in " + cfg.input.string());
    const ValidationReport v = validate_associations(list);
    const NodeIndex index = build_node_index(list);
    const GraphBuild built = build_graph(list, index);
    const GraphStats stats = graph_stats(built.graph, index);

    StageResult r{"ingest", 0.0, {}, {}, {}};
    write_file(out / "associations.tsv", [&](std::ostream& os) { write_edge_list(os, list); });
    write_file(out / "nodes.tsv", [&](std::ostream& os) { write_node_index(os, index); });
    write_file(out / "graph.tsv", [&](std::ostream& os) { write_graph_edges(os, built.graph, index); });
    ordered_json vj;
    vj["records"] = v.record_count;
    vj["duplicates"] = v.duplicate_count;
    vj["self_loops"] = v.self_loop_count;
    vj["distinct_sources"] = v.distinct_sources;
    vj["distinct_targets"] = v.distinct_targets;
    vj["distinct_labels"] = v.distinct_labels;
    vj["duplicates_collapsed"] = built.duplicates_collapsed;
    vj["self_loops_dropped"] = built.self_loops_dropped;
    write_json(out / "validation.json", vj);
    write_file(out / "graph_stats.json", [&](std::ostream& os) { os << graph_stats_json(stats) << '\n'; });
    write_file(out / "graph_stats.txt", [&](std::ostream& os) { write_graph_stats_text(os, stats); });
    write_file(out / "degree_histogram.csv", [&](std::ostream& os) { write_degree_histogram_csv(os, stats); });
    r.artifacts = {"associations.tsv", "nodes.tsv",        "graph.tsv",           "validation.json",
                   "graph_stats.json", "graph_stats.txt", "degree_histogram.csv"};
    if (v.self_loop_count) r.warnings.push_back(std::to_string(v.self_loop_count) + " self-associations dropped");
    if (stats.isolated_nodes) r.warnings.push_back(std::to_string(stats.isolated_nodes) + " isolated nodes");
    r.summary = vj;
    r.summary["nodes"] = stats.node_count;
    r.summary["edges"] = stats.edge_count;
    r.summary["components"] = stats.component_count;
    r.seconds = seconds_since(t0);
    return r;
}

StageResult run_sample(const PipelineConfig& cfg, const fs::path& out) {
    const auto t0 = Clock::now();
    cfg.sampling.validate();
    const NodeIndex index = load_node_index(out);
    const Graph g = load_graph(out / "graph.tsv", index);

    Rng rng(cfg.sampling.seed);
    PositiveSample pos = sample_positive_edges(g, cfg.sampling, rng);
    const PairSet neg = enumerate_negative_pairs(g, cfg.sampling, rng);
    LabeledPairs dataset = assemble_dataset(pos.positives, neg);
    Rng split_rng(stage_seed(cfg.seed, Stage::split));
    dataset = split_dataset(dataset, cfg.train_fraction, cfg.stratified, split_rng);

    StageResult r{"sample", 0.0, {}, {}, {}};
    write_file(out / "pairs.csv", [&](std::ostream& os) { write_pairs_csv(os, dataset, index); });
    write_file(out / "residual.tsv", [&](std::ostream& os) { write_graph_edges(os, pos.residual, index); });
    if (pos.shortfall()) {
        r.warnings.push_back("only " + std::to_string(pos.positives.pairs.size()) + " of " +
                             std::to_string(pos.requested) + " requested edges could be removed safely");
    }
    std::size_t train_rows = 0, test_pos = 0, train_pos = 0;
    for (const auto& row : dataset.rows) {
        if (row.split == Split::train) {
            ++train_rows;
            train_pos += row.label == 1;
        } else if (row.label == 1) {
            ++test_pos;
        }
    }
    ordered_json s;
    s["positives_requested"] = pos.requested;
    s["positives"] = pos.positives.pairs.size();
    s["negatives"] = neg.pairs.size();
    s["unconnected_pairs"] = unconnected_pair_count(g);
    s["rows"] = dataset.size();
    s["positive_rate"] = dataset.positive_rate();
    s["train_rows"] = train_rows;
    s["train_positives"] = train_pos;
    s["test_rows"] = dataset.size() - train_rows;
    s["test_positives"] = test_pos;
    s["residual_edges"] = pos.residual.edge_count();
    s["candidates_checked"] = pos.candidates_checked;
    s["shortfall"] = pos.shortfall();
    write_json(out / "sampling.json", s);
    r.artifacts = {"pairs.csv", "residual.tsv", "sampling.json"};
    r.summary = std::move(s);
    r.seconds = seconds_since(t0);
    return r;
}

StageResult run_embed(const PipelineConfig& cfg, const fs::path& out) {
    const auto t0 = Clock::now();
    cfg.walks.validate();
    cfg.skipgram.validate();
    const NodeIndex index = load_node_index(out);
    const Graph g = load_graph(out / "residual.tsv", index);

    const auto tables = build_transition_tables(g, cfg.walks.return_parameter, cfg.walks.inout_parameter);
    const WalkCorpus corpus = generate_walks(g, tables, cfg.walks);
    const double walk_seconds = seconds_since(t0);
    SkipGramReport rep;
    const EmbeddingMatrix emb = train_skipgram(corpus, cfg.skipgram, index.size(), &rep);

    StageResult r{"embed", 0.0, {}, {}, {}};
    write_file(out / "embedding.txt", [&](std::ostream& os) { write_embedding(os, emb, index); });
    ordered_json s;
    s["nodes"] = emb.rows;
    s["dimensions"] = emb.dim;
    s["walks"] = corpus.walk_count();
    s["tokens"] = corpus.token_count();
    s["updates"] = rep.updates;
    s["epoch_loss"] = rep.epoch_loss;
    write_json(out / "embedding.json", s);
    if (cfg.skipgram.workers > 1) r.warnings.push_back("multi-worker skip-gram training is not bit-reproducible");
    r.artifacts = {"embedding.txt", "embedding.json"};
    r.summary = std::move(s);
    r.summary["walk_seconds"] = walk_seconds;
    r.seconds = seconds_since(t0);
    return r;
}

StageResult run_train(const PipelineConfig& cfg, const fs::path& out, ModelFamily family) {
    const auto t0 = Clock::now();
    const NodeIndex index = load_node_index(out);
    const LabeledPairs pairs = load_pairs(out, index);
    const EmbeddingMatrix emb = load_embedding(out, index);
    std::vector<int> y;
    const FeatureMatrix x = split_features(emb, pairs, Split::train, cfg.edge_operator, y);
    if (x.rows == 0) throw InputError("no training rows in pairs.csv");

    TrainLog log;
    const Model m = train_model(family, x, y, cfg.training, &log);
    StageResult r{std::string("train ") + family_name(family), 0.0, {}, log.warnings, {}};
    const std::string name = model_file_name(family);
    write_json(out / name, model_to_json(m));
    r.artifacts = {name};
    r.summary["rows"] = x.rows;
    r.summary["features"] = x.cols;
    r.summary["config"] = m.config;
    if (!log.loss_trace.empty()) r.summary["final_loss"] = log.loss_trace.back();
    r.seconds = seconds_since(t0);
    return r;
}

StageResult run_evaluate(const PipelineConfig& cfg, const fs::path& out, ModelFamily family,
                         EvaluationReport* report) {
    const auto t0 = Clock::now();
    const NodeIndex index = load_node_index(out);
    const LabeledPairs pairs = load_pairs(out, index);
    const EmbeddingMatrix emb = load_embedding(out, index);
    const Model m = load_model(out / model_file_name(family));
    if (m.family != family) throw InputError(model_file_name(family) + " holds a " + family_name(m.family) + " model");
    std::vector<int> y;
    const FeatureMatrix x = split_features(emb, pairs, Split::test, cfg.edge_operator, y);
    const auto scores = predict_proba(m, x);
    const EvaluationReport rep = evaluation_report(y, scores, cfg.threshold);

    const std::string name = family_name(family);
    const std::string json_name = report_file_name(family, ".json"), text_name = report_file_name(family, ".txt");
    const std::string roc_name = "roc_" + name + ".csv", pr_name = "pr_" + name + ".csv";
    write_json(out / json_name, report_json(rep, name));
    write_file(out / text_name, [&](std::ostream& os) { write_report_text(os, rep, name); });
    write_file(out / roc_name, [&](std::ostream& os) { write_roc_csv(os, rep); });
    write_file(out / pr_name, [&](std::ostream& os) { write_pr_csv(os, rep); });

    StageResult r{"evaluate " + name, 0.0, {json_name, text_name, roc_name, pr_name}, {}, {}};
    r.summary["auroc"] = rep.auroc;
    r.summary["aucpr"] = rep.aucpr;
    r.summary["positive_rate"] = rep.positive_rate();
    r.summary["weighted_f1"] = rep.aggregate.weighted.f1;
    r.summary["positive_recall"] = rep.class_wise.classes[1].recall;
    r.seconds = seconds_since(t0);
    if (report) *report = rep;
    return r;
}

PipelineRun run_pipeline(const PipelineConfig& cfg, const fs::path& out, std::ostream* log) {
    cfg.validate();
    if (!fs::is_regular_file(cfg.input)) throw InputError("input file not found: " + cfg.input.string());
    const auto t0 = Clock::now();
    PipelineRun run;
    const auto note = [&](const StageResult& s) {
        if (!log) return;
        *log << "[" << s.stage << "] " << s.seconds << " s";
        for (const auto& a : s.artifacts) *log << ' ' << a;
        *log << '\n';
        for (const auto& w : s.warnings) *log << "  warning: " << w << '\n';
    };
    const auto stage = [&](StageResult s) {
        note(s);
        run.stages.push_back(std::move(s));
    };
    stage(run_ingest(cfg, out));
    stage(run_sample(cfg, out));
    stage(run_embed(cfg, out));
    for (auto f : cfg.models) {
        stage(run_train(cfg, out, f));
        run.reports.emplace_back();
        stage(run_evaluate(cfg, out, f, &run.reports.back()));
    }

    ordered_json manifest;
    manifest["library_version"] = library_version;
    manifest["config"] = config_to_json(cfg);
    manifest["seeds"] = {{"global", cfg.seed},
                         {"sample", cfg.sampling.seed},
                         {"split", stage_seed(cfg.seed, Stage::split)},
                         {"walks", cfg.walks.seed},
                         {"skipgram", cfg.skipgram.seed},
                         {"models", stage_seed(cfg.seed, Stage::models)}};
    auto stages = ordered_json::array();
    auto artifacts = ordered_json::array();
    for (const auto& s : run.stages) {
        stages.push_back(
            {{"stage", s.stage}, {"seconds", s.seconds}, {"warnings", s.warnings}, {"summary", s.summary}});
        for (const auto& a : s.artifacts) artifacts.push_back(a);
    }
    artifacts.push_back("manifest.json");
    manifest["stages"] = std::move(stages);
    manifest["artifacts"] = std::move(artifacts);
    manifest["total_seconds"] = seconds_since(t0);
    write_json(out / "manifest.json", manifest);
    if (log) *log << "[pipeline] " << seconds_since(t0) << " s total, manifest.json\n";
    return run;
}

}  // namespace phenolink
