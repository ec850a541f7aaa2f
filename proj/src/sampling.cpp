#include "phenolink/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "phenolink/error.hpp"

namespace phenolink {

void SamplingConfig::validate() const {
    if (!positive_count && !(positive_fraction > 0.0 && positive_fraction < 1.0)) {
        throw ConfigError("positive_fraction must lie in (0, 1)");
    }
    if (negative_count && *negative_count == 0) throw ConfigError("negative_count must be >= 1 or \"all\"");
}

std::size_t SamplingConfig::positive_target(std::size_t edge_count) const {
    if (positive_count) return *positive_count;
    return static_cast<std::size_t>(std::floor(positive_fraction * static_cast<double>(edge_count) + 1e-9));
}

std::uint64_t unconnected_pair_count(const Graph& g) noexcept {
    const std::uint64_t n = g.node_count();
    return n * (n > 0 ? n - 1 : 0) / 2 - g.edge_count();
}

namespace {

// Calls fn(u, v) for every v > u not adjacent to u, ascending.
template <class Fn>
void for_each_gap(const Graph& g, NodeId u, Fn&& fn) {
    const auto n = static_cast<NodeId>(g.node_count());
    auto adj = g.neighbors(u);
    auto it = std::upper_bound(adj.begin(), adj.end(), u);
    for (NodeId v = u + 1; v < n; ++v) {
        if (it != adj.end() && *it == v) {
            ++it;
            continue;
        }
        fn(u, v);
    }
}

std::size_t row_gap_count(const Graph& g, NodeId u) {
    auto adj = g.neighbors(u);
    const auto above = static_cast<std::size_t>(adj.end() - std::upper_bound(adj.begin(), adj.end(), u));
    return g.node_count() - 1 - u - above;
}

}  // namespace

std::vector<Edge> all_unconnected_pairs_serial(const Graph& g) {
    std::vector<Edge> out;
    out.reserve(unconnected_pair_count(g));
    for (NodeId u = 0; u < g.node_count(); ++u) {
        for_each_gap(g, u, [&](NodeId a, NodeId b) { out.emplace_back(a, b); });
    }
    return out;
}

std::vector<Edge> all_unconnected_pairs(const Graph& g) {
    const auto n = static_cast<std::int64_t>(g.node_count());
    std::vector<std::size_t> start(g.node_count() + 1, 0);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t u = 0; u < n; ++u) start[u + 1] = row_gap_count(g, static_cast<NodeId>(u));
    std::partial_sum(start.begin(), start.end(), start.begin());

    std::vector<Edge> out(start.back());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t u = 0; u < n; ++u) {
        std::size_t pos = start[u];
        for_each_gap(g, static_cast<NodeId>(u), [&](NodeId a, NodeId b) { out[pos++] = {a, b}; });
    }
    return out;
}

PairSet enumerate_negative_pairs(const Graph& g, const SamplingConfig& cfg, Rng& rng) {
    cfg.validate();
    PairSet set;
    set.label = 0;
    const std::uint64_t total = unconnected_pair_count(g);
    if (!cfg.negative_count) {
        set.pairs = all_unconnected_pairs(g);
        return set;
    }
    const std::uint64_t wanted = *cfg.negative_count;
    if (wanted > total) {
        throw InputError("requested " + std::to_string(wanted) + " negative pairs but only " +
                         std::to_string(total) + " unconnected pairs exist");
    }
    // Selection sampling (Knuth, Algorithm S): one pass, output stays in scan order.
    set.pairs.reserve(wanted);
    std::uint64_t seen = 0;
    for (NodeId u = 0; u < g.node_count() && set.pairs.size() < wanted; ++u) {
        for_each_gap(g, u, [&](NodeId a, NodeId b) {
            const std::uint64_t remaining_needed = wanted - set.pairs.size();
            const std::uint64_t remaining_total = total - seen;
            if (remaining_needed > 0 && uniform_index(rng, remaining_total) < remaining_needed) {
                set.pairs.emplace_back(a, b);
            }
            ++seen;
        });
    }
    return set;
}

namespace {

class MutableAdjacency {
public:
    explicit MutableAdjacency(const Graph& g) : adj_(g.node_count()), stamp_(g.node_count(), 0) {
        for (NodeId u = 0; u < g.node_count(); ++u) {
            auto nb = g.neighbors(u);
            adj_[u].assign(nb.begin(), nb.end());
        }
    }

    std::size_t degree(NodeId u) const { return adj_[u].size(); }

    void erase(NodeId u, NodeId v) {
        erase_one(adj_[u], v);
        erase_one(adj_[v], u);
    }

    void insert(NodeId u, NodeId v) {
        insert_one(adj_[u], v);
        insert_one(adj_[v], u);
    }

    bool reachable(NodeId from, NodeId to) {
        if (++epoch_ == 0) {
            std::fill(stamp_.begin(), stamp_.end(), 0);
            epoch_ = 1;
        }
        queue_.clear();
        queue_.push_back(from);
        stamp_[from] = epoch_;
        for (std::size_t head = 0; head < queue_.size(); ++head) {
            for (NodeId w : adj_[queue_[head]]) {
                if (stamp_[w] == epoch_) continue;
                if (w == to) return true;
                stamp_[w] = epoch_;
                queue_.push_back(w);
            }
        }
        return false;
    }

private:
    static void erase_one(std::vector<NodeId>& row, NodeId x) {
        row.erase(std::lower_bound(row.begin(), row.end(), x));
    }
    static void insert_one(std::vector<NodeId>& row, NodeId x) {
        row.insert(std::lower_bound(row.begin(), row.end(), x), x);
    }

    std::vector<std::vector<NodeId>> adj_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t epoch_ = 0;
    std::vector<NodeId> queue_;
};

}  // namespace

PositiveSample sample_positive_edges(const Graph& g, const SamplingConfig& cfg, Rng& rng) {
    cfg.validate();
    PositiveSample out;
    out.positives.label = 1;
    out.requested = std::min(cfg.positive_target(g.edge_count()), g.edge_count());

    std::vector<Edge> order = g.edges();
    shuffle(order, rng);

    MutableAdjacency residual(g);
    std::vector<Edge> dropped;
    for (const auto& [u, v] : order) {
        if (dropped.size() >= out.requested || out.candidates_checked >= cfg.max_connectivity_checks) break;
        ++out.candidates_checked;
        if (residual.degree(u) < 2 || residual.degree(v) < 2) continue;
        residual.erase(u, v);
        if (residual.reachable(u, v)) {
            dropped.emplace_back(u, v);
        } else {
            residual.insert(u, v);
        }
    }
    out.residual = remove_edges(g, dropped);
    out.positives.pairs = std::move(dropped);
    return out;
}

std::size_t LabeledPairs::positives() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const LabeledPair& r) { return r.label == 1; }));
}

double LabeledPairs::positive_rate() const noexcept {
    return rows.empty() ? 0.0 : static_cast<double>(positives()) / static_cast<double>(rows.size());
}

LabeledPairs assemble_dataset(const PairSet& positives, const PairSet& negatives) {
    std::set<Edge> pos(positives.pairs.begin(), positives.pairs.end());
    for (const auto& p : negatives.pairs) {
        if (pos.count(canonical(p.first, p.second))) {
            throw InputError("pair (" + std::to_string(p.first) + ", " + std::to_string(p.second) +
                             ") is both positive and negative");
        }
    }
    LabeledPairs d;
    d.rows.reserve(positives.pairs.size() + negatives.pairs.size());
    for (const auto& [u, v] : positives.pairs) d.rows.push_back({std::min(u, v), std::max(u, v), 1, Split::unassigned});
    for (const auto& [u, v] : negatives.pairs) d.rows.push_back({std::min(u, v), std::max(u, v), 0, Split::unassigned});
    return d;
}

LabeledPairs split_dataset(const LabeledPairs& d, double train_fraction, bool stratified, Rng& rng) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");

    // strata[k] holds row indices; label order 0 then 1 for stratified runs
    std::vector<std::vector<std::size_t>> strata;
    if (stratified) {
        strata.resize(2);
        for (std::size_t i = 0; i < d.rows.size(); ++i) strata[d.rows[i].label == 1 ? 1 : 0].push_back(i);
        strata.erase(std::remove_if(strata.begin(), strata.end(), [](const auto& s) { return s.empty(); }),
                     strata.end());
    } else {
        strata.emplace_back(d.rows.size());
        std::iota(strata[0].begin(), strata[0].end(), std::size_t{0});
    }
    for (const auto& s : strata) {
        if (s.size() < 2) throw InputError("cannot split a stratum with fewer than 2 rows");
    }

    const auto exact_floor = [&](std::size_t n) {
        return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
    };
    std::vector<std::size_t> take(strata.size());
    std::vector<double> remainder(strata.size());
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < strata.size(); ++k) {
        take[k] = exact_floor(strata[k].size());
        remainder[k] = train_fraction * static_cast<double>(strata[k].size()) - static_cast<double>(take[k]);
        assigned += take[k];
    }
    std::size_t leftover = exact_floor(d.rows.size()) - std::min(assigned, exact_floor(d.rows.size()));
    std::vector<std::size_t> by_remainder(strata.size());
    std::iota(by_remainder.begin(), by_remainder.end(), std::size_t{0});
    std::stable_sort(by_remainder.begin(), by_remainder.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k : by_remainder) {
        if (leftover == 0) break;
        if (take[k] < strata[k].size()) {
            ++take[k];
            --leftover;
        }
    }

    LabeledPairs out = d;
    for (std::size_t k = 0; k < strata.size(); ++k) {
        auto idx = strata[k];
        shuffle(idx, rng);
        for (std::size_t i = 0; i < idx.size(); ++i) out.rows[idx[i]].split = i < take[k] ? Split::train : Split::test;
    }
    return out;
}

const char* split_name(Split s) noexcept {
    switch (s) {
        case Split::train: return "train";
        case Split::test: return "test";
        default: return "unassigned";
    }
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    q += '"';
    return q;
}

std::vector<std::string> csv_split(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    out.back() += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else if (c != '\r') {
            out.back() += c;
        }
    }
    if (quoted) throw ParseError(line_no, "unterminated quoted field");
    return out;
}

}  // namespace

void write_pairs_csv(std::ostream& out, const LabeledPairs& d, const NodeIndex& index) {
    out << "source_label,target_label,label,split\n";
    for (const auto& r : d.rows) {
        out << csv_field(index.label_of(r.u)) << ',' << csv_field(index.label_of(r.v)) << ',' << r.label << ','
            << split_name(r.split) << '\n';
    }
}

LabeledPairs read_pairs_csv(std::istream& in, const NodeIndex& index) {
    LabeledPairs d;
    std::string line;
    std::size_t line_no = 0;
    bool header = true;
    std::set<Edge> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (header) {
            header = false;
            continue;
        }
        const auto f = csv_split(line, line_no);
        if (f.size() != 4) throw ParseError(line_no, "expected 4 columns");
        LabeledPair r;
        try {
            const NodeId a = index.id_of(f[0]);
            const NodeId b = index.id_of(f[1]);
            r.u = std::min(a, b);
            r.v = std::max(a, b);
        } catch (const InputError& e) {
            throw ParseError(line_no, e.what());
        }
        if (f[2] == "0" || f[2] == "1") {
            r.label = f[2][0] - '0';
        } else {
            throw ParseError(line_no, "label must be 0 or 1");
        }
        if (f[3] == "train") {
            r.split = Split::train;
        } else if (f[3] == "test") {
            r.split = Split::test;
        } else if (f[3] == "unassigned") {
            r.split = Split::unassigned;
        } else {
            throw ParseError(line_no, "unknown split tag " + f[3]);
        }
        if (!seen.insert({r.u, r.v}).second) throw ParseError(line_no, "duplicate pair");
        d.rows.push_back(r);
    }
    return d;
}

}  // namespace phenolink
