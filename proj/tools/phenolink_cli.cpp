// phenolink: phenotype-gene link prediction from annotation dumps.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <omp.h>

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "phenolink/error.hpp"
#include "phenolink/pipeline.hpp"

namespace {

using namespace phenolink;

struct Overrides {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::string> input;
    std::optional<std::string> delimiter;
    std::optional<std::size_t> source_col, target_col;
    std::optional<bool> header;
    std::optional<double> positive_fraction;
    std::optional<std::string> negative_count;
    std::optional<double> train_fraction;
    std::optional<std::size_t> walk_length, walks_per_node;
    std::optional<double> p, q;
    std::optional<std::size_t> dim, window, negatives, epochs;
    std::optional<double> step_size;
    std::optional<std::string> edge_operator;
    std::vector<std::string> models;
    std::optional<double> threshold;
    std::optional<double> scale_pos_weight;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("-c,--config", o.config, "JSON config file");
    app->add_option("-o,--out", o.out, "output directory")->capture_default_str();
    app->add_option("--seed", o.seed, "global seed");
    app->add_option("--workers", o.workers, "worker threads");
}

void add_ingest_flags(CLI::App* app, Overrides& o) {
    app->add_option("-i,--input", o.input, "annotation file");
    app->add_option("--delimiter", o.delimiter, "field delimiter (\\t for tab)");
    app->add_option("--source-col", o.source_col, "0-based phenotype column");
    app->add_option("--target-col", o.target_col, "0-based gene column");
    app->add_flag("--header,!--no-header", o.header, "first non-comment line is a header");
}

void add_sample_flags(CLI::App* app, Overrides& o) {
    app->add_option("--positive-fraction", o.positive_fraction, "fraction of edges to hide as positives");
    app->add_option("--negative-count", o.negative_count, "negative pairs to draw, or 'all'");
    app->add_option("--train-fraction", o.train_fraction, "train share of the stratified split");
}

void add_embed_flags(CLI::App* app, Overrides& o) {
    app->add_option("--walk-length", o.walk_length);
    app->add_option("--walks-per-node", o.walks_per_node);
    app->add_option("--p", o.p, "return parameter");
    app->add_option("--q", o.q, "in-out parameter");
    app->add_option("--dim", o.dim, "embedding dimensions");
    app->add_option("--window", o.window);
    app->add_option("--negatives", o.negatives, "noise samples per pair");
    app->add_option("--epochs", o.epochs);
    app->add_option("--step-size", o.step_size, "initial skip-gram step size");
}

void add_model_flags(CLI::App* app, Overrides& o) {
    app->add_option("-m,--model", o.models, "logistic, forest, mlp, gbdt-level or gbdt-leaf (repeatable)");
    app->add_option("--edge-operator", o.edge_operator, "hadamard, average, l1, l2 or concat");
    app->add_option("--threshold", o.threshold, "decision threshold");
    app->add_option("--scale-pos-weight", o.scale_pos_weight, "positive weight for both boosting configs");
}

PipelineConfig resolve(const Overrides& o) {
    PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.workers) cfg.workers = *o.workers;
    if (o.input) cfg.input = *o.input;
    if (o.delimiter) {
        if (*o.delimiter == "\\t" || *o.delimiter == "tab") {
            cfg.columns.delimiter = '\t';
        } else if (o.delimiter->size() == 1) {
            cfg.columns.delimiter = (*o.delimiter)[0];
        } else {
            throw ConfigError("--delimiter must be a single character");
        }
    }
    if (o.source_col) cfg.columns.source_column = *o.source_col;
    if (o.target_col) cfg.columns.target_column = *o.target_col;
    if (o.header) cfg.columns.has_header = *o.header;
    if (o.positive_fraction) cfg.sampling.positive_fraction = *o.positive_fraction;
    if (o.negative_count) {
        if (*o.negative_count == "all") {
            cfg.sampling.negative_count.reset();
        } else {
            try {
                cfg.sampling.negative_count = std::stoull(*o.negative_count);
            } catch (const std::exception&) {
                throw ConfigError("--negative-count must be a number or 'all'");
            }
        }
    }
    if (o.train_fraction) cfg.train_fraction = *o.train_fraction;
    if (o.walk_length) cfg.walks.walk_length = *o.walk_length;
    if (o.walks_per_node) cfg.walks.walks_per_node = *o.walks_per_node;
    if (o.p) cfg.walks.return_parameter = *o.p;
    if (o.q) cfg.walks.inout_parameter = *o.q;
    if (o.dim) cfg.skipgram.dimensions = *o.dim;
    if (o.window) cfg.skipgram.window = *o.window;
    if (o.negatives) cfg.skipgram.negatives = *o.negatives;
    if (o.epochs) cfg.skipgram.epochs = *o.epochs;
    if (o.step_size) cfg.skipgram.initial_step_size = *o.step_size;
    if (o.edge_operator) cfg.edge_operator = parse_edge_operator(*o.edge_operator);
    if (!o.models.empty()) {
        cfg.models.clear();
        for (const auto& m : o.models) cfg.models.push_back(parse_family(m));
    }
    if (o.threshold) cfg.threshold = *o.threshold;
    if (o.scale_pos_weight) {
        cfg.training.gbdt_level.scale_pos_weight = *o.scale_pos_weight;
        cfg.training.gbdt_leaf.scale_pos_weight = *o.scale_pos_weight;
    }
    cfg.apply_seed();
    cfg.validate();
    omp_set_num_threads(static_cast<int>(cfg.workers));
    return cfg;
}

void report(const StageResult& r) {
    std::cout << r.stage << ": " << r.summary.dump() << '\n';
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phenotype-gene link prediction: ingest, sample, embed, train, evaluate"};
    app.require_subcommand(1);
    Overrides o;

    auto* ingest = app.add_subcommand("ingest", "parse annotations and write the node index and graph");
    add_common(ingest, o);
    add_ingest_flags(ingest, o);

    auto* sample = app.add_subcommand("sample", "hide edges and draw negatives into pairs.csv");
    add_common(sample, o);
    add_sample_flags(sample, o);

    auto* embed = app.add_subcommand("embed", "node2vec walks and skip-gram on the residual graph");
    add_common(embed, o);
    add_embed_flags(embed, o);

    auto* train = app.add_subcommand("train", "fit models on the train split");
    add_common(train, o);
    add_model_flags(train, o);

    auto* evaluate = app.add_subcommand("evaluate", "score the test split and write reports");
    add_common(evaluate, o);
    add_model_flags(evaluate, o);

    auto* pipeline = app.add_subcommand("pipeline", "run every stage and write manifest.json");
    add_common(pipeline, o);
    add_ingest_flags(pipeline, o);
    add_sample_flags(pipeline, o);
    add_embed_flags(pipeline, o);
    add_model_flags(pipeline, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const PipelineConfig cfg = resolve(o);
        const std::filesystem::path out = o.out;
        if (ingest->parsed()) {
            report(run_ingest(cfg, out));
        } else if (sample->parsed()) {
            report(run_sample(cfg, out));
        } else if (embed->parsed()) {
            report(run_embed(cfg, out));
        } else if (train->parsed()) {
            for (auto f : cfg.models) report(run_train(cfg, out, f));
        } else if (evaluate->parsed()) {
            for (auto f : cfg.models) {
                report(run_evaluate(cfg, out, f));
                std::ifstream text(out / report_file_name(f, ".txt"));
                std::cout << text.rdbuf() << '\n';
            }
        } else if (pipeline->parsed()) {
            const auto run = run_pipeline(cfg, out, &std::cerr);
            for (std::size_t k = 0; k < cfg.models.size(); ++k) {
                write_report_text(std::cout, run.reports[k], family_name(cfg.models[k]));
                std::cout << '\n';
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ColumnError& e) {
        std::cerr << "column spec does not fit the input: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
