#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string cli = PHENOLINK_CLI;

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("phenolink_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string out, err;
};

Run run(const fs::path& dir, const std::string& args) {
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = cli + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

// Three planted communities in the genes_to_phenotype layout.
fs::path write_dataset(const fs::path& dir) {
    const fs::path p = dir / "assoc.tsv";
    std::ofstream os(p);
    os << "ncbi_gene_id\tgene_symbol\thpo_id\thpo_name\n";
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 24; ++i) {
        for (int j = 0; j < 36; ++j) {
            const bool same = i % 3 == j % 3;
            if (u(gen) < (same ? 0.45 : 0.02) || j == i) {
                os << 1000 + j << "\tG" << j << "\tHP:" << 100 + i << "\tterm\n";
            }
        }
    }
    return p;
}

fs::path write_config(const fs::path& dir, const fs::path& input) {
    const fs::path p = dir / "small.config";
    nlohmann::json j = {
        {"input", input.string()},
        {"seed", 3},
        {"sampling", {{"positive_fraction", 0.1}, {"negative_count", 300}}},
        {"walks", {{"walk_length", 10}, {"walks_per_node", 4}}},
        {"skipgram", {{"dimensions", 8}, {"window", 3}, {"epochs", 1}}},
        {"models", {"gbdt-leaf"}},
        {"model_params", {{"gbdt-leaf", {{"rounds", 10}}}}},
    };
    std::ofstream(p) << j.dump(2);
    return p;
}

}  // namespace

TEST_CASE("cli usage errors exit 2") {
    const auto dir = scratch("usage");
    const auto data = write_dataset(dir);
    CHECK(run(dir, "").code == 2);
    CHECK(run(dir, "frobnicate").code == 2);
    CHECK(run(dir, "ingest -i " + data.string() + " -o " + (dir / "a").string() + " --source-col 9").code == 2);
    CHECK(run(dir, "ingest -i " + data.string() + " -o " + (dir / "a").string() + " --source-col -1").code == 2);
    CHECK(run(dir, "ingest -i " + data.string() + " -o " + (dir / "a").string() +
                       " --source-col 1 --target-col 1")
              .code == 2);
    const auto cfg = write_config(dir, data);
    const auto bad_model = run(dir, "pipeline -c " + cfg.string() + " -o " + (dir / "b").string() + " -m svm");
    CHECK(bad_model.code == 2);
    CHECK(bad_model.err.find("gbdt-leaf") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "b" / "nodes.tsv"));

    std::ofstream(dir / "typo.config") << R"({"skipgram": {"dimension": 16}})";
    CHECK(run(dir, "embed -c " + (dir / "typo.config").string()).code == 2);
}

TEST_CASE("missing input fails before any stage runs") {
    const auto dir = scratch("missing");
    const auto r = run(dir, "pipeline -i " + (dir / "nope.tsv").string() + " -o " + (dir / "out").string());
    CHECK(r.code == 1);
    CHECK(r.err.find("nope.tsv") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out" / "nodes.tsv"));
}

TEST_CASE("stage commands chain through files") {
    const auto dir = scratch("stages");
    const auto cfg = write_config(dir, write_dataset(dir));
    const auto out = (dir / "out").string();
    const std::string c = " -c " + cfg.string() + " -o " + out;
    REQUIRE(run(dir, "ingest" + c).code == 0);
    for (const char* f : {"nodes.tsv", "graph.tsv", "associations.tsv", "graph_stats.json", "degree_histogram.csv"})
        CHECK(fs::exists(dir / "out" / f));
    REQUIRE(run(dir, "sample" + c).code == 0);
    REQUIRE(run(dir, "embed" + c + " --dim 16").code == 0);
    const auto emb = slurp(dir / "out" / "embedding.txt");
    CHECK(emb.substr(emb.find(' ') + 1, 3) == "16\n");
    REQUIRE(run(dir, "train" + c).code == 0);
    CHECK(fs::exists(dir / "out" / "model_gbdt-leaf.json"));
    const auto ev = run(dir, "evaluate" + c);
    REQUIRE(ev.code == 0);
    CHECK(ev.out.find("AUROC") != std::string::npos);

    const auto rep = nlohmann::json::parse(slurp(dir / "out" / "report_gbdt-leaf.json"));
    for (const char* k : {"model", "threshold", "rows", "positives", "positive_rate", "confusion", "class_wise",
                          "aggregate", "auroc", "aucpr"})
        CHECK(rep.contains(k));
    CHECK(slurp(dir / "out" / "roc_gbdt-leaf.csv").rfind("fpr,tpr\n", 0) == 0);
    CHECK(slurp(dir / "out" / "pr_gbdt-leaf.csv").rfind("recall,precision\n", 0) == 0);

    // evaluating a model that was never trained is a runtime failure
    CHECK(run(dir, "evaluate" + c + " -m mlp").code == 1);
}

TEST_CASE("sampling is reproducible and its rate matches the file") {
    const auto dir = scratch("sample");
    const auto cfg = write_config(dir, write_dataset(dir));
    for (const char* o : {"a", "b"}) {
        const std::string c = " -c " + cfg.string() + " -o " + (dir / o).string();
        REQUIRE(run(dir, "ingest" + c).code == 0);
        REQUIRE(run(dir, "sample" + c).code == 0);
    }
    const auto a = slurp(dir / "a" / "pairs.csv");
    CHECK(a == slurp(dir / "b" / "pairs.csv"));

    std::istringstream in(a);
    std::string line;
    std::getline(in, line);
    CHECK(line == "source_label,target_label,label,split");
    std::size_t rows = 0, pos = 0;
    while (std::getline(in, line)) {
        ++rows;
        pos += line.find(",1,") != std::string::npos;
    }
    const auto s = nlohmann::json::parse(slurp(dir / "a" / "sampling.json"));
    CHECK(s["rows"] == rows);
    CHECK(s["positives"] == pos);
    CHECK(s["positive_rate"].get<double>() == doctest::Approx(double(pos) / double(rows)));

    const std::string other = " -c " + cfg.string() + " -o " + (dir / "c").string() + " --seed 4";
    REQUIRE(run(dir, "ingest" + other).code == 0);
    REQUIRE(run(dir, "sample" + other).code == 0);
    CHECK(slurp(dir / "c" / "pairs.csv") != a);
}

TEST_CASE("a star graph reports a positive shortfall") {
    const auto dir = scratch("star");
    {
        std::ofstream os(dir / "star.tsv");
        for (int k = 0; k < 6; ++k) os << "HP:1\tG" << k << '\n';
    }
    const std::string out = " -o " + (dir / "out").string();
    REQUIRE(run(dir, "ingest -i " + (dir / "star.tsv").string() + " --no-header --source-col 0 --target-col 1" + out)
                .code == 0);
    const auto r = run(dir, "sample --positive-fraction 0.5" + out);
    CHECK(r.err.find("could be removed safely") != std::string::npos);
    if (r.code == 0) {
        const auto s = nlohmann::json::parse(slurp(dir / "out" / "sampling.json"));
        CHECK(s["positives"] == 0);
        CHECK(s["shortfall"] == true);
    }
}

TEST_CASE("pipeline manifest echoes the configuration") {
    const auto dir = scratch("manifest");
    const auto cfg = write_config(dir, write_dataset(dir));
    const auto r = run(dir, "pipeline -c " + cfg.string() + " -o " + (dir / "out").string());
    REQUIRE(r.code == 0);
    const auto m = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
    const auto& params = m["config"]["model_params"];
    CHECK(params["gbdt-leaf"]["max_depth"] == 10);
    CHECK(params["gbdt-leaf"]["scale_pos_weight"] == 99.0);
    CHECK(params["gbdt-leaf"]["rounds"] == 10);
    CHECK(params["gbdt-level"]["max_depth"] == 12);
    CHECK(params["gbdt-level"]["learning_rate"] == 0.1);
    CHECK(m["config"]["skipgram"]["dimensions"] == 8);
    CHECK(m["seeds"]["global"] == 3);
    for (const auto& a : m["artifacts"]) CHECK(fs::exists(dir / "out" / a.get<std::string>()));
}
