#pragma once

// Annotation ingestion: column-oriented phenotype-gene association dumps
// into an association list and a dense node index.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace phenolink {

using NodeId = std::uint32_t;

struct Association {
    std::string source;
    std::string target;

    bool operator==(const Association&) const = default;
};

struct AssociationList {
    std::vector<Association> records;
    std::string source_kind = "HPO";
    std::string target_kind = "GENE";

    std::size_t size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }
    bool operator==(const AssociationList&) const = default;
};

// Which columns of a delimited text dump hold the two endpoints.
//
// The default matches the public HPO genes_to_phenotype.txt export
// (tab separated, header row, gene_symbol in column 1, hpo_id in column 2).
// edge_list() describes the canonical two-column format this library writes.
struct ColumnSpec {
    char delimiter = '\t';
    std::size_t source_column = 2;
    std::size_t target_column = 1;
    bool has_header = true;
    std::string comment_prefix = "#";
    std::string source_kind = "HPO";
    std::string target_kind = "GENE";

    static ColumnSpec edge_list() {
        ColumnSpec s;
        s.source_column = 0;
        s.target_column = 1;
        s.has_header = false;
        return s;
    }

    // Throws ConfigError.
    void validate() const;
};

struct ValidationReport {
    std::size_t record_count = 0;
    std::size_t duplicate_count = 0;  // repeats of an unordered pair beyond its first occurrence
    std::size_t self_loop_count = 0;
    std::size_t distinct_sources = 0;
    std::size_t distinct_targets = 0;
    std::size_t distinct_labels = 0;  // union of both sides
};

class NodeIndex {
public:
    NodeIndex() = default;

    // Returns the existing id when the label is already present.
    NodeId add(std::string_view label, std::string_view kind);

    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    bool contains(std::string_view label) const;

    // Throws InputError for unknown labels.
    NodeId id_of(std::string_view label) const;
    const std::string& label_of(NodeId id) const { return labels_.at(id); }
    const std::string& kind_of(NodeId id) const { return kinds_.at(id); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::vector<std::string>& kinds() const noexcept { return kinds_; }

    bool operator==(const NodeIndex& other) const {
        return labels_ == other.labels_ && kinds_ == other.kinds_;
    }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };
    std::unordered_map<std::string, NodeId, Hash, std::equal_to<>> ids_;
    std::vector<std::string> labels_;
    std::vector<std::string> kinds_;
};

// Every non-comment, non-header, non-blank line yields one record or throws
// ParseError (EncodingError for invalid UTF-8) carrying the 1-based line number.
AssociationList parse_annotations(std::istream& in, const ColumnSpec& spec);
AssociationList parse_annotations(std::string_view text, const ColumnSpec& spec);
AssociationList read_annotations(const std::string& path, const ColumnSpec& spec);

ValidationReport validate_associations(const AssociationList& list);

// Ids in first-appearance order, source before target within a record.
NodeIndex build_node_index(const AssociationList& list);

// Canonical `source<TAB>target` edge list with a `#` comment header naming the kinds.
void write_edge_list(std::ostream& out, const AssociationList& list);

// Node index as `id<TAB>label<TAB>kind` lines.
void write_node_index(std::ostream& out, const NodeIndex& index);
NodeIndex read_node_index(std::istream& in);

bool is_valid_utf8(std::string_view s) noexcept;

}  // namespace phenolink
