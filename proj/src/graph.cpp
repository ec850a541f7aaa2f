#include "phenolink/graph.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "phenolink/error.hpp"

namespace phenolink {

Graph Graph::from_edges(std::size_t node_count, std::span<const Edge> edges, std::size_t* duplicates_collapsed,
                        std::size_t* self_loops_dropped) {
    if (node_count > std::numeric_limits<NodeId>::max()) throw InputError("too many nodes");
    std::size_t loops = 0;
    std::vector<Edge> canon;
    canon.reserve(edges.size());
    for (auto [u, v] : edges) {
        if (u >= node_count || v >= node_count) throw std::out_of_range("edge endpoint out of range");
        if (u == v) {
            ++loops;
            continue;
        }
        canon.push_back(canonical(u, v));
    }
    std::sort(canon.begin(), canon.end());
    const auto unique_end = std::unique(canon.begin(), canon.end());
    const std::size_t dups = static_cast<std::size_t>(canon.end() - unique_end);
    canon.erase(unique_end, canon.end());
    if (duplicates_collapsed) *duplicates_collapsed = dups;
    if (self_loops_dropped) *self_loops_dropped = loops;

    Graph g;
    g.offsets_.assign(node_count + 1, 0);
    for (auto [u, v] : canon) {
        ++g.offsets_[u + 1];
        ++g.offsets_[v + 1];
    }
    for (std::size_t i = 0; i < node_count; ++i) g.offsets_[i + 1] += g.offsets_[i];
    g.neighbors_.resize(2 * canon.size());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    // canon is sorted by (u, v): v's land in ascending order for u, and u's in
    // ascending order for v, so every row comes out sorted.
    for (auto [u, v] : canon) {
        g.neighbors_[cursor[u]++] = v;
        g.neighbors_[cursor[v]++] = u;
    }
    for (std::size_t u = 0; u < node_count; ++u) {
        std::sort(g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u]),
                  g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u + 1]));
    }
    return g;
}

std::span<const NodeId> Graph::neighbors(NodeId u) const {
    if (u >= node_count()) throw std::out_of_range("node id " + std::to_string(u) + " out of range");
    return {neighbors_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    if (v >= node_count()) throw std::out_of_range("node id " + std::to_string(v) + " out of range");
    auto adj = neighbors(u);
    return std::binary_search(adj.begin(), adj.end(), v);
}

std::size_t Graph::arc_index(NodeId u, NodeId v) const {
    auto adj = neighbors(u);
    auto it = std::lower_bound(adj.begin(), adj.end(), v);
    if (it == adj.end() || *it != v) throw InputError("not an edge");
    return offsets_[u] + static_cast<std::size_t>(it - adj.begin());
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < node_count(); ++u) {
        for (NodeId v : neighbors(u)) {
            if (u < v) out.emplace_back(u, v);
        }
    }
    return out;
}

GraphBuild build_graph(const AssociationList& list, const NodeIndex& index) {
    std::vector<Edge> edges;
    edges.reserve(list.records.size());
    for (const auto& rec : list.records) {
        edges.emplace_back(index.id_of(rec.source), index.id_of(rec.target));
    }
    GraphBuild b;
    b.graph = Graph::from_edges(index.size(), edges, &b.duplicates_collapsed, &b.self_loops_dropped);
    return b;
}

ComponentLabeling connected_components(const Graph& g) {
    constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
    ComponentLabeling out;
    out.component_of.assign(g.node_count(), unset);
    std::vector<NodeId> queue;
    queue.reserve(g.node_count());
    for (NodeId s = 0; s < g.node_count(); ++s) {
        if (out.component_of[s] != unset) continue;
        const auto c = static_cast<std::uint32_t>(out.component_count++);
        queue.clear();
        queue.push_back(s);
        out.component_of[s] = c;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            for (NodeId w : g.neighbors(queue[head])) {
                if (out.component_of[w] == unset) {
                    out.component_of[w] = c;
                    queue.push_back(w);
                }
            }
        }
    }
    return out;
}

Graph remove_edges(const Graph& g, std::span<const Edge> edges) {
    std::vector<Edge> drop;
    drop.reserve(edges.size());
    for (auto [u, v] : edges) {
        if (u >= g.node_count() || v >= g.node_count() || !g.has_edge(u, v)) {
            throw InputError("cannot remove (" + std::to_string(u) + ", " + std::to_string(v) +
                             "): not an edge");
        }
        drop.push_back(canonical(u, v));
    }
    std::sort(drop.begin(), drop.end());
    drop.erase(std::unique(drop.begin(), drop.end()), drop.end());

    std::vector<Edge> keep;
    const auto all = g.edges();
    keep.reserve(all.size() - drop.size());
    std::set_difference(all.begin(), all.end(), drop.begin(), drop.end(), std::back_inserter(keep));
    return Graph::from_edges(g.node_count(), keep);
}

GraphStats graph_stats(const Graph& g, const NodeIndex& index) {
    GraphStats s;
    s.node_count = g.node_count();
    s.edge_count = g.edge_count();
    if (s.node_count > 0) s.min_degree = std::numeric_limits<std::size_t>::max();
    for (NodeId u = 0; u < g.node_count(); ++u) {
        const std::size_t d = g.degree(u);
        s.min_degree = std::min(s.min_degree, d);
        s.max_degree = std::max(s.max_degree, d);
        ++s.degree_histogram[d];
        if (d == 0) ++s.isolated_nodes;
        if (u < index.size()) ++s.nodes_per_kind[index.kind_of(u)];
    }
    s.mean_degree = s.node_count ? 2.0 * static_cast<double>(s.edge_count) / static_cast<double>(s.node_count) : 0.0;
    s.component_count = connected_components(g).component_count;
    return s;
}

std::string graph_stats_json(const GraphStats& s) {
    nlohmann::ordered_json j;
    j["node_count"] = s.node_count;
    j["edge_count"] = s.edge_count;
    j["nodes_per_kind"] = s.nodes_per_kind;
    j["min_degree"] = s.min_degree;
    j["max_degree"] = s.max_degree;
    j["mean_degree"] = s.mean_degree;
    j["component_count"] = s.component_count;
    j["isolated_nodes"] = s.isolated_nodes;
    nlohmann::ordered_json hist = nlohmann::ordered_json::array();
    for (auto [d, c] : s.degree_histogram) hist.push_back({{"degree", d}, {"count", c}});
    j["degree_histogram"] = std::move(hist);
    return j.dump(2);
}

void write_graph_stats_text(std::ostream& out, const GraphStats& s) {
    out << "Graph statistics\n";
    out << "  nodes            " << s.node_count << '\n';
    for (const auto& [kind, count] : s.nodes_per_kind) out << "    " << kind << "  " << count << '\n';
    out << "  edges            " << s.edge_count << '\n';
    out << "  components       " << s.component_count << '\n';
    out << "  isolated nodes   " << s.isolated_nodes << '\n';
    out << "  degree min/max   " << s.min_degree << " / " << s.max_degree << '\n';
    out << "  degree mean      " << s.mean_degree << '\n';
    out << "Degree distribution\n";
    out << "  degree    count\n";
    for (auto [d, c] : s.degree_histogram) {
        std::string ds = std::to_string(d);
        out << "  " << ds << std::string(ds.size() < 10 ? 10 - ds.size() : 1, ' ') << c << '\n';
    }
}

void write_degree_histogram_csv(std::ostream& out, const GraphStats& s) {
    out << "degree,count\n";
    for (auto [d, c] : s.degree_histogram) out << d << ',' << c << '\n';
}

void write_graph_edges(std::ostream& out, const Graph& g, const NodeIndex& index) {
    for (auto [u, v] : g.edges()) out << index.label_of(u) << '\t' << index.label_of(v) << '\n';
}

Graph read_graph_edges(std::istream& in, const NodeIndex& index) {
    const auto list = parse_annotations(in, ColumnSpec::edge_list());
    std::vector<Edge> edges;
    edges.reserve(list.records.size());
    for (const auto& rec : list.records) edges.emplace_back(index.id_of(rec.source), index.id_of(rec.target));
    return Graph::from_edges(index.size(), edges);
}

}  // namespace phenolink
