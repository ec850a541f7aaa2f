#pragma once

// Supervised pair dataset construction: unconnected pairs as negatives,
// connectivity-safe edge removal for positives, stratified train/test split.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "phenolink/graph.hpp"
#include "phenolink/random.hpp"

namespace phenolink {

struct PairSet {
    std::vector<Edge> pairs;  // canonical u < v
    int label = 0;
};

struct SamplingConfig {
    // Fraction of the full graph's edges to try to hide. Ignored when
    // positive_count is set.
    double positive_fraction = 0.1;
    std::optional<std::size_t> positive_count;
    // nullopt means every unconnected pair.
    std::optional<std::size_t> negative_count;
    std::uint64_t seed = 0;
    // Upper bound on candidate edges examined by the removal loop.
    std::size_t max_connectivity_checks = std::numeric_limits<std::size_t>::max();

    void validate() const;
    std::size_t positive_target(std::size_t edge_count) const;
};

// Total number of unconnected node pairs above the diagonal.
std::uint64_t unconnected_pair_count(const Graph& g) noexcept;

// Zero entries of the strict upper triangle of the (never materialized)
// adjacency matrix, row-major. With a finite negative_count a uniform sample
// without replacement is returned, still in row-major order. Throws InputError
// when more pairs are requested than exist.
PairSet enumerate_negative_pairs(const Graph& g, const SamplingConfig& cfg, Rng& rng);

// Row-parallel (OpenMP) enumeration of all unconnected pairs; same output as
// the serial scan.
std::vector<Edge> all_unconnected_pairs(const Graph& g);
std::vector<Edge> all_unconnected_pairs_serial(const Graph& g);

struct PositiveSample {
    Graph residual;
    PairSet positives;  // label 1, in drop order
    std::size_t requested = 0;
    std::size_t candidates_checked = 0;
    bool shortfall() const noexcept { return positives.pairs.size() < requested; }
};

// Edges are visited in a seeded random order; an edge is hidden only when both
// endpoints keep degree >= 1 and stay mutually reachable in the residual graph.
PositiveSample sample_positive_edges(const Graph& g, const SamplingConfig& cfg, Rng& rng);

enum class Split : std::uint8_t { unassigned, train, test };

struct LabeledPair {
    NodeId u = 0;
    NodeId v = 0;
    int label = 0;
    Split split = Split::unassigned;

    bool operator==(const LabeledPair&) const = default;
};

struct LabeledPairs {
    std::vector<LabeledPair> rows;

    std::size_t size() const noexcept { return rows.size(); }
    std::size_t positives() const noexcept;
    double positive_rate() const noexcept;
    bool operator==(const LabeledPairs&) const = default;
};

// Positives first then negatives, each in their given order. Throws InputError
// when a pair appears in both sets.
LabeledPairs assemble_dataset(const PairSet& positives, const PairSet& negatives);

// Per stratum: floor(fraction * n) rows go to train, then the leftover of
// floor(fraction * total) is handed out by largest remainder (ties to the
// lower label). Which rows go where is a seeded shuffle. Throws InputError for
// a stratum with fewer than two rows.
LabeledPairs split_dataset(const LabeledPairs& d, double train_fraction, bool stratified, Rng& rng);

// `source_label,target_label,label,split` with a header row.
void write_pairs_csv(std::ostream& out, const LabeledPairs& d, const NodeIndex& index);
LabeledPairs read_pairs_csv(std::istream& in, const NodeIndex& index);

const char* split_name(Split s) noexcept;

}  // namespace phenolink
