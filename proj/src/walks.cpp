#include "phenolink/walks.hpp"

#include "phenolink/alias.hpp"
#include "phenolink/error.hpp"

namespace phenolink {

void WalkConfig::validate() const {
    if (walk_length < 2) throw ConfigError("walk_length must be >= 2");
    if (walks_per_node < 1) throw ConfigError("walks_per_node must be >= 1");
    if (!(return_parameter > 0.0) || !(inout_parameter > 0.0)) throw ConfigError("p and q must be positive");
}

namespace {

void check_table_inputs(const Graph& g, double p, double q) {
    if (g.edge_count() == 0) throw InputError("transition tables need a graph with at least one edge");
    if (!(p > 0.0) || !(q > 0.0)) throw InputError("p and q must be positive");
}

TransitionTables allocate_tables(const Graph& g, double p, double q) {
    TransitionTables t;
    t.return_parameter = p;
    t.inout_parameter = q;
    t.table_offset.assign(g.arc_count() + 1, 0);
    for (std::size_t a = 0; a < g.arc_count(); ++a) {
        t.table_offset[a + 1] = t.table_offset[a] + g.degree(g.arc_target(a));
    }
    t.prob.resize(t.table_offset.back());
    t.alias.resize(t.table_offset.back());
    return t;
}

// Fills the table of every arc leaving `source`.
void fill_source(const Graph& g, NodeId source, TransitionTables& t, std::vector<double>& weights,
                 std::vector<std::uint32_t>& scratch) {
    const double p = t.return_parameter, q = t.inout_parameter;
    for (std::size_t a = g.arc_begin(source); a < g.arc_begin(source) + g.degree(source); ++a) {
        const NodeId v = g.arc_target(a);
        auto next = g.neighbors(v);
        weights.resize(next.size());
        for (std::size_t k = 0; k < next.size(); ++k) weights[k] = transition_weight(g, source, next[k], p, q);
        const std::size_t off = t.table_offset[a], len = next.size();
        build_alias(weights, {t.prob.data() + off, len}, {t.alias.data() + off, len}, scratch);
    }
}

}  // namespace

TransitionTables build_transition_tables_serial(const Graph& g, double p, double q) {
    check_table_inputs(g, p, q);
    TransitionTables t = allocate_tables(g, p, q);
    std::vector<double> weights;
    std::vector<std::uint32_t> scratch;
    for (NodeId s = 0; s < g.node_count(); ++s) fill_source(g, s, t, weights, scratch);
    return t;
}

TransitionTables build_transition_tables(const Graph& g, double p, double q) {
    check_table_inputs(g, p, q);
    TransitionTables t = allocate_tables(g, p, q);
    const auto n = static_cast<std::int64_t>(g.node_count());
#pragma omp parallel
    {
        std::vector<double> weights;
        std::vector<std::uint32_t> scratch;
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t s = 0; s < n; ++s) fill_source(g, static_cast<NodeId>(s), t, weights, scratch);
    }
    return t;
}

std::vector<double> transition_probabilities(const Graph& g, NodeId t, NodeId v, double p, double q) {
    auto next = g.neighbors(v);
    std::vector<double> w(next.size());
    double total = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) {
        w[k] = transition_weight(g, t, next[k], p, q);
        total += w[k];
    }
    for (double& x : w) x /= total;
    return w;
}

std::size_t random_walk(const Graph& g, const TransitionTables& tables, NodeId start, std::size_t length, Rng& rng,
                        NodeId* out) {
    if (length == 0) return 0;
    out[0] = start;
    if (length == 1 || g.degree(start) == 0) return 1;
    // First step has no predecessor: uniform over neighbors.
    std::size_t arc = g.arc_begin(start) + uniform_index(rng, g.degree(start));
    NodeId cur = g.arc_target(arc);
    out[1] = cur;
    std::size_t written = 2;
    while (written < length) {
        const std::size_t k = sample_alias(tables.prob_of(arc), tables.alias_of(arc), rng);
        arc = g.arc_begin(cur) + k;
        cur = g.arc_target(arc);
        out[written++] = cur;
    }
    return written;
}

namespace {

WalkCorpus allocate_corpus(const Graph& g, const WalkConfig& cfg) {
    WalkCorpus c;
    const std::size_t count = g.node_count() * cfg.walks_per_node;
    c.nodes.resize(count * cfg.walk_length);
    c.offsets.resize(count + 1);
    return c;
}

std::size_t walk_into(const Graph& g, const TransitionTables& tables, const WalkConfig& cfg, std::size_t w,
                      NodeId* slot) {
    const std::size_t n = g.node_count();
    const auto start = static_cast<NodeId>(w % n);
    const std::size_t round = w / n;
    Rng rng(derive_seed(cfg.seed, start, round));
    return random_walk(g, tables, start, cfg.walk_length, rng, slot);
}

// Walks are written into fixed-size slots; squeeze out the unused tail of any
// walk that stopped early.
void compact(WalkCorpus& c, const std::vector<std::size_t>& lengths, std::size_t slot) {
    std::size_t pos = 0;
    for (std::size_t w = 0; w < lengths.size(); ++w) {
        c.offsets[w] = pos;
        if (pos != w * slot) {
            std::copy_n(c.nodes.begin() + static_cast<std::ptrdiff_t>(w * slot), lengths[w],
                        c.nodes.begin() + static_cast<std::ptrdiff_t>(pos));
        }
        pos += lengths[w];
    }
    c.offsets[lengths.size()] = pos;
    c.nodes.resize(pos);
}

}  // namespace

WalkCorpus generate_walks_serial(const Graph& g, const TransitionTables& tables, const WalkConfig& cfg) {
    cfg.validate();
    WalkCorpus c = allocate_corpus(g, cfg);
    std::vector<std::size_t> lengths(c.offsets.size() - 1);
    for (std::size_t w = 0; w < lengths.size(); ++w) {
        lengths[w] = walk_into(g, tables, cfg, w, c.nodes.data() + w * cfg.walk_length);
    }
    compact(c, lengths, cfg.walk_length);
    return c;
}

WalkCorpus generate_walks(const Graph& g, const TransitionTables& tables, const WalkConfig& cfg) {
    cfg.validate();
    WalkCorpus c = allocate_corpus(g, cfg);
    std::vector<std::size_t> lengths(c.offsets.size() - 1);
    const auto count = static_cast<std::int64_t>(lengths.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t w = 0; w < count; ++w) {
        const auto i = static_cast<std::size_t>(w);
        lengths[i] = walk_into(g, tables, cfg, i, c.nodes.data() + i * cfg.walk_length);
    }
    compact(c, lengths, cfg.walk_length);
    return c;
}

}  // namespace phenolink
