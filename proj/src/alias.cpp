#include "phenolink/alias.hpp"

#include <numeric>

#include "phenolink/error.hpp"

namespace phenolink {

void build_alias(std::span<const double> weights, std::span<double> prob, std::span<std::uint32_t> alias,
                 std::vector<std::uint32_t>& scratch) {
    const std::size_t n = weights.size();
    if (n == 0) throw InputError("alias table needs at least one category");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw InputError("alias weights must have a positive sum");

    // scratch holds the small worklist growing from the front and the large
    // one growing from the back.
    scratch.resize(n);
    std::size_t small_end = 0, large_begin = n;
    for (std::size_t i = 0; i < n; ++i) {
        prob[i] = weights[i] * static_cast<double>(n) / total;
        alias[i] = static_cast<std::uint32_t>(i);
        if (prob[i] < 1.0) {
            scratch[small_end++] = static_cast<std::uint32_t>(i);
        } else {
            scratch[--large_begin] = static_cast<std::uint32_t>(i);
        }
    }
    while (small_end > 0 && large_begin < n) {
        const std::uint32_t s = scratch[--small_end];
        const std::uint32_t l = scratch[large_begin];
        alias[s] = l;
        prob[l] = (prob[l] + prob[s]) - 1.0;
        if (prob[l] < 1.0) {
            ++large_begin;
            scratch[small_end++] = l;
        }
    }
    // Leftovers are 1 up to rounding.
    for (std::size_t i = 0; i < small_end; ++i) prob[scratch[i]] = 1.0;
    for (std::size_t i = large_begin; i < n; ++i) prob[scratch[i]] = 1.0;
}

AliasTable::AliasTable(std::span<const double> weights) : prob_(weights.size()), alias_(weights.size()) {
    std::vector<std::uint32_t> scratch;
    build_alias(weights, prob_, alias_, scratch);
}

std::vector<double> AliasTable::reconstruct() const {
    const std::size_t n = prob_.size();
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] += prob_[i];
        p[alias_[i]] += 1.0 - prob_[i];
    }
    for (double& x : p) x /= static_cast<double>(n);
    return p;
}

}  // namespace phenolink
