#pragma once

// Walker/Vose alias tables: O(1) draws from a fixed discrete distribution.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "phenolink/random.hpp"

namespace phenolink {

// Builds the (prob, alias) pair for `weights` into the given output spans,
// which must have weights.size() entries. Weights must be non-negative with a
// positive sum. `scratch` is reused between calls.
void build_alias(std::span<const double> weights, std::span<double> prob, std::span<std::uint32_t> alias,
                 std::vector<std::uint32_t>& scratch);

inline std::uint32_t sample_alias(std::span<const double> prob, std::span<const std::uint32_t> alias, Rng& rng) {
    const auto i = static_cast<std::uint32_t>(uniform_index(rng, prob.size()));
    return uniform01(rng) < prob[i] ? i : alias[i];
}

class AliasTable {
public:
    AliasTable() = default;
    explicit AliasTable(std::span<const double> weights);

    std::size_t size() const noexcept { return prob_.size(); }
    bool empty() const noexcept { return prob_.empty(); }
    std::uint32_t sample(Rng& rng) const { return sample_alias(prob_, alias_, rng); }

    const std::vector<double>& prob() const noexcept { return prob_; }
    const std::vector<std::uint32_t>& alias() const noexcept { return alias_; }

    // Category probabilities implied by the table; equal to the normalized
    // input weights up to rounding.
    std::vector<double> reconstruct() const;

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

}  // namespace phenolink
