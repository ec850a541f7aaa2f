// Serial reference vs OpenMP for each parallel kernel.
#include <benchmark/benchmark.h>

#include <random>

#include "phenolink/features.hpp"
#include "phenolink/histogram.hpp"
#include "phenolink/model.hpp"
#include "phenolink/sampling.hpp"
#include "phenolink/walks.hpp"

using namespace phenolink;

namespace {

Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::bernoulli_distribution coin(p);
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (coin(gen)) edges.emplace_back(u, v);
    return Graph::from_edges(n, edges);
}

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0, 1);
    FeatureMatrix x(rows, cols);
    for (auto& v : x.data) v = n(gen);
    return x;
}

const Graph& bench_graph() {
    static const Graph g = random_graph(600, 0.02, 1);
    return g;
}

void BM_Negatives(benchmark::State& st) {
    const auto& g = bench_graph();
    for (auto _ : st) benchmark::DoNotOptimize(st.range(0) ? all_unconnected_pairs(g) : all_unconnected_pairs_serial(g));
}

void BM_TransitionTables(benchmark::State& st) {
    const auto& g = bench_graph();
    for (auto _ : st)
        benchmark::DoNotOptimize(st.range(0) ? build_transition_tables(g, 0.5, 2.0)
                                             : build_transition_tables_serial(g, 0.5, 2.0));
}

void BM_Walks(benchmark::State& st) {
    const auto& g = bench_graph();
    const auto tables = build_transition_tables(g, 0.5, 2.0);
    WalkConfig cfg;
    cfg.walks_per_node = 20;
    for (auto _ : st)
        benchmark::DoNotOptimize(st.range(0) ? generate_walks(g, tables, cfg) : generate_walks_serial(g, tables, cfg));
}

void BM_PairFeatures(benchmark::State& st) {
    EmbeddingMatrix emb(600, 128);
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<float> u(-1, 1);
    for (auto& v : emb.input) v = u(gen);
    LabeledPairs pairs;
    for (NodeId i = 0; i < 20000; ++i)
        pairs.rows.push_back({static_cast<NodeId>(gen() % 600), static_cast<NodeId>(gen() % 600), 0, Split::train});
    for (auto _ : st)
        benchmark::DoNotOptimize(st.range(0) ? pair_features(emb, pairs, EdgeOperator::hadamard)
                                             : pair_features_serial(emb, pairs, EdgeOperator::hadamard));
}

void BM_Binning(benchmark::State& st) {
    const auto x = random_matrix(20000, 128, 3);
    const auto cuts = compute_bin_cuts(x, 64);
    for (auto _ : st) benchmark::DoNotOptimize(st.range(0) ? bin_features(x, cuts) : bin_features_serial(x, cuts));
}

void BM_Histogram(benchmark::State& st) {
    const auto x = random_matrix(20000, 128, 4);
    const auto cuts = compute_bin_cuts(x, 64);
    const auto binned = bin_features(x, cuts);
    std::vector<double> g(x.rows, 0.3), h(x.rows, 0.21);
    std::vector<std::uint32_t> rows(x.rows);
    for (std::uint32_t i = 0; i < rows.size(); ++i) rows[i] = i;
    Histogram hist;
    for (auto _ : st) {
        if (st.range(0))
            build_histogram(binned, cuts, rows, g, h, hist);
        else
            build_histogram_serial(binned, cuts, rows, g, h, hist);
        benchmark::DoNotOptimize(hist.bins.data());
    }
}

void BM_PredictProba(benchmark::State& st) {
    const auto x = random_matrix(4000, 128, 5);
    std::vector<int> y(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) y[i] = x(i, 0) + x(i, 1) > 1;
    TrainConfig cfg;
    cfg.gbdt_leaf.rounds = 50;
    const auto m = train_model(ModelFamily::gbdt_leaf, x, y, cfg);
    for (auto _ : st) benchmark::DoNotOptimize(st.range(0) ? predict_proba(m, x) : predict_proba_serial(m, x));
}

}  // namespace

// Arg 0 is the serial reference, arg 1 the OpenMP kernel.
BENCHMARK(BM_Negatives)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TransitionTables)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Walks)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairFeatures)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Binning)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Histogram)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictProba)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
