#include "phenolink/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "phenolink/error.hpp"

namespace phenolink {

namespace {

struct PairHash {
    std::size_t operator()(const std::pair<std::string_view, std::string_view>& p) const noexcept {
        const std::size_t a = std::hash<std::string_view>{}(p.first);
        const std::size_t b = std::hash<std::string_view>{}(p.second);
        return a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    }
};

// Splits on a single character; keeps empty fields.
void split_fields(std::string_view line, char delim, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

void ColumnSpec::validate() const {
    if (source_column == target_column) {
        throw ConfigError("source and target column must differ (both are " +
                          std::to_string(source_column) + ")");
    }
    if (delimiter == '\n' || delimiter == '\r') {
        throw ConfigError("delimiter cannot be a line terminator");
    }
    if (!comment_prefix.empty() && comment_prefix.size() == 1 && comment_prefix[0] == delimiter) {
        throw ConfigError("delimiter cannot equal the comment prefix");
    }
}

NodeId NodeIndex::add(std::string_view label, std::string_view kind) {
    if (auto it = ids_.find(label); it != ids_.end()) return it->second;
    const auto id = static_cast<NodeId>(labels_.size());
    labels_.emplace_back(label);
    kinds_.emplace_back(kind);
    ids_.emplace(labels_.back(), id);
    return id;
}

bool NodeIndex::contains(std::string_view label) const {
    return ids_.find(label) != ids_.end();
}

NodeId NodeIndex::id_of(std::string_view label) const {
    auto it = ids_.find(label);
    if (it == ids_.end()) throw InputError("label not in node index: " + std::string(label));
    return it->second;
}

bool is_valid_utf8(std::string_view s) noexcept {
    const auto* p = reinterpret_cast<const unsigned char*>(s.data());
    const auto* end = p + s.size();
    while (p < end) {
        const unsigned char c = *p;
        if (c < 0x80) {
            ++p;
            continue;
        }
        int extra;
        std::uint32_t cp;
        if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (end - p <= extra) return false;
        for (int i = 1; i <= extra; ++i) {
            if ((p[i] & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (p[i] & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
            (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
            return false;
        }
        p += extra + 1;
    }
    return true;
}

AssociationList parse_annotations(std::istream& in, const ColumnSpec& spec) {
    spec.validate();
    AssociationList list;
    list.source_kind = spec.source_kind;
    list.target_kind = spec.target_kind;

    const std::size_t needed = std::max(spec.source_column, spec.target_column);
    std::vector<std::string_view> fields;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = spec.has_header;

    while (std::getline(in, line)) {
        ++line_no;
        if (!is_valid_utf8(line)) throw EncodingError(line_no, "invalid UTF-8");
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (view.empty()) continue;
        if (!spec.comment_prefix.empty() && view.starts_with(spec.comment_prefix)) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        split_fields(view, spec.delimiter, fields);
        if (fields.size() <= needed) {
            throw ColumnError(line_no, "expected at least " + std::to_string(needed + 1) + " columns, found " +
                                          std::to_string(fields.size()));
        }
        const std::string_view src = trim(fields[spec.source_column]);
        const std::string_view dst = trim(fields[spec.target_column]);
        if (src.empty()) throw ParseError(line_no, "empty source field");
        if (dst.empty()) throw ParseError(line_no, "empty target field");
        list.records.push_back({std::string(src), std::string(dst)});
    }
    return list;
}

AssociationList parse_annotations(std::string_view text, const ColumnSpec& spec) {
    std::istringstream in{std::string(text)};
    return parse_annotations(in, spec);
}

AssociationList read_annotations(const std::string& path, const ColumnSpec& spec) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open annotation file: " + path);
    return parse_annotations(in, spec);
}

ValidationReport validate_associations(const AssociationList& list) {
    ValidationReport r;
    r.record_count = list.records.size();
    std::unordered_set<std::pair<std::string_view, std::string_view>, PairHash> seen;
    std::unordered_set<std::string_view> sources, targets, all;
    for (const auto& rec : list.records) {
        sources.insert(rec.source);
        targets.insert(rec.target);
        all.insert(rec.source);
        all.insert(rec.target);
        if (rec.source == rec.target) {
            ++r.self_loop_count;
            continue;
        }
        std::string_view a = rec.source, b = rec.target;
        if (b < a) std::swap(a, b);
        if (!seen.emplace(a, b).second) ++r.duplicate_count;
    }
    r.distinct_sources = sources.size();
    r.distinct_targets = targets.size();
    r.distinct_labels = all.size();
    return r;
}

NodeIndex build_node_index(const AssociationList& list) {
    NodeIndex index;
    for (const auto& rec : list.records) {
        index.add(rec.source, list.source_kind);
        index.add(rec.target, list.target_kind);
    }
    return index;
}

void write_edge_list(std::ostream& out, const AssociationList& list) {
    out << "# " << list.source_kind << '\t' << list.target_kind << '\n';
    for (const auto& rec : list.records) out << rec.source << '\t' << rec.target << '\n';
}

void write_node_index(std::ostream& out, const NodeIndex& index) {
    out << "# id\tlabel\tkind\n";
    for (std::size_t i = 0; i < index.size(); ++i) {
        out << i << '\t' << index.labels()[i] << '\t' << index.kinds()[i] << '\n';
    }
}

NodeIndex read_node_index(std::istream& in) {
    NodeIndex index;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string_view> fields;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (view.empty() || view.front() == '#') continue;
        split_fields(view, '\t', fields);
        if (fields.size() != 3) throw ParseError(line_no, "node index lines need 3 columns");
        const auto expected = index.size();
        if (fields[0] != std::to_string(expected)) {
            throw ParseError(line_no, "node ids must be dense and in order");
        }
        if (index.contains(fields[1])) throw ParseError(line_no, "duplicate label " + std::string(fields[1]));
        index.add(fields[1], fields[2]);
    }
    return index;
}

}  // namespace phenolink
