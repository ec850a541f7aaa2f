#pragma once

// Second-order (node2vec) biased random walks.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "phenolink/graph.hpp"
#include "phenolink/random.hpp"

namespace phenolink {

struct WalkConfig {
    std::size_t walk_length = 30;    // nodes per walk, start included
    std::size_t walks_per_node = 200;
    double return_parameter = 1.0;   // p
    double inout_parameter = 1.0;    // q
    std::uint64_t seed = 0;

    void validate() const;
};

// One alias table per directed edge t->v, over the neighbors of v in
// adjacency order. Table for arc a = arc_index(t, v) occupies
// [table_offset[a], table_offset[a + 1]) of prob/alias.
struct TransitionTables {
    double return_parameter = 1.0;
    double inout_parameter = 1.0;
    std::vector<std::size_t> table_offset;
    std::vector<double> prob;
    std::vector<std::uint32_t> alias;

    std::span<const double> prob_of(std::size_t arc) const {
        return {prob.data() + table_offset[arc], table_offset[arc + 1] - table_offset[arc]};
    }
    std::span<const std::uint32_t> alias_of(std::size_t arc) const {
        return {alias.data() + table_offset[arc], table_offset[arc + 1] - table_offset[arc]};
    }
};

// Unnormalized weight of stepping to x from v after arriving from t.
inline double transition_weight(const Graph& g, NodeId t, NodeId x, double p, double q) {
    if (x == t) return 1.0 / p;
    if (g.has_edge(x, t)) return 1.0;
    return 1.0 / q;
}

// Builds tables for every arc; OpenMP-parallel over arcs. Throws InputError
// if the graph has no edges or p, q are not positive.
TransitionTables build_transition_tables(const Graph& g, double p, double q);
TransitionTables build_transition_tables_serial(const Graph& g, double p, double q);

// Normalized next-step distribution for the arc t->v, straight from the
// weight rule (no alias tables); indexed like g.neighbors(v).
std::vector<double> transition_probabilities(const Graph& g, NodeId t, NodeId v, double p, double q);

struct WalkCorpus {
    std::vector<NodeId> nodes;          // all walks back to back
    std::vector<std::size_t> offsets;   // walk i is [offsets[i], offsets[i + 1])

    std::size_t walk_count() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::span<const NodeId> walk(std::size_t i) const {
        return {nodes.data() + offsets[i], offsets[i + 1] - offsets[i]};
    }
    std::size_t token_count() const noexcept { return nodes.size(); }
};

// walks_per_node walks from every node, round-major: walk r * N + s starts at
// s in round r. Each walk draws from its own generator seeded by
// (cfg.seed, s, r), so the corpus does not depend on the thread count.
WalkCorpus generate_walks(const Graph& g, const TransitionTables& tables, const WalkConfig& cfg);
WalkCorpus generate_walks_serial(const Graph& g, const TransitionTables& tables, const WalkConfig& cfg);

// Writes one walk of up to `length` nodes from `start` into out; returns the
// number written.
std::size_t random_walk(const Graph& g, const TransitionTables& tables, NodeId start, std::size_t length, Rng& rng,
                        NodeId* out);

}  // namespace phenolink
