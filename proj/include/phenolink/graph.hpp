#pragma once

// Immutable undirected simple graph in compressed sorted adjacency form.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phenolink/ingest.hpp"

namespace phenolink {

// Undirected edge; canonical form has first < second.
using Edge = std::pair<NodeId, NodeId>;

inline Edge canonical(NodeId u, NodeId v) noexcept {
    return u < v ? Edge{u, v} : Edge{v, u};
}

class Graph {
public:
    Graph() : offsets_(1, 0) {}

    // Builds a simple graph on `node_count` nodes. Duplicate edges (in either
    // orientation) are collapsed and self-loops dropped; the counts of both are
    // reported through the optional out-parameters.
    static Graph from_edges(std::size_t node_count, std::span<const Edge> edges,
                            std::size_t* duplicates_collapsed = nullptr,
                            std::size_t* self_loops_dropped = nullptr);

    std::size_t node_count() const noexcept { return offsets_.size() - 1; }
    std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }

    // Throws std::out_of_range for u >= node_count().
    std::span<const NodeId> neighbors(NodeId u) const;
    std::size_t degree(NodeId u) const { return neighbors(u).size(); }
    bool has_edge(NodeId u, NodeId v) const;

    // Position of the directed edge u->v in the flattened adjacency, i.e.
    // offsets[u] + rank of v among u's neighbors. Requires has_edge(u, v).
    std::size_t arc_index(NodeId u, NodeId v) const;
    std::size_t arc_begin(NodeId u) const noexcept { return offsets_[u]; }
    std::size_t arc_count() const noexcept { return neighbors_.size(); }
    NodeId arc_target(std::size_t arc) const noexcept { return neighbors_[arc]; }

    // Canonical edges in ascending (u, v) order.
    std::vector<Edge> edges() const;

    const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }
    const std::vector<NodeId>& flat_neighbors() const noexcept { return neighbors_; }

    bool operator==(const Graph&) const = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> neighbors_;
};

struct GraphBuild {
    Graph graph;
    std::size_t duplicates_collapsed = 0;
    std::size_t self_loops_dropped = 0;
};

// Throws InputError when a record label is missing from the index.
GraphBuild build_graph(const AssociationList& list, const NodeIndex& index);

struct ComponentLabeling {
    std::vector<std::uint32_t> component_of;
    std::size_t component_count = 0;
};

// Breadth-first labeling; component ids follow the smallest node id they contain.
ComponentLabeling connected_components(const Graph& g);

// Returns a new graph without the listed edges. Throws InputError if a pair is
// not an edge of g. Repeated pairs in the list count once.
Graph remove_edges(const Graph& g, std::span<const Edge> edges);

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::map<std::string, std::size_t> nodes_per_kind;
    std::size_t min_degree = 0;
    std::size_t max_degree = 0;
    double mean_degree = 0.0;
    std::map<std::size_t, std::size_t> degree_histogram;
    std::size_t component_count = 0;
    std::size_t isolated_nodes = 0;
};

GraphStats graph_stats(const Graph& g, const NodeIndex& index);

std::string graph_stats_json(const GraphStats& s);
void write_graph_stats_text(std::ostream& out, const GraphStats& s);
// `degree,count` with a header row.
void write_degree_histogram_csv(std::ostream& out, const GraphStats& s);

// Edge list of labels for a graph over `index`.
void write_graph_edges(std::ostream& out, const Graph& g, const NodeIndex& index);
// Reads an edge list written by write_graph_edges; every label must exist in index.
Graph read_graph_edges(std::istream& in, const NodeIndex& index);

}  // namespace phenolink
