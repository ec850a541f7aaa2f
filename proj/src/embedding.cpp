#include "phenolink/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "phenolink/error.hpp"

namespace phenolink {

bool EmbeddingMatrix::all_finite() const noexcept {
    const auto finite = [](float x) { return std::isfinite(x); };
    return std::all_of(input.begin(), input.end(), finite) && std::all_of(context.begin(), context.end(), finite);
}

double softmax_probability_exact(const EmbeddingMatrix& emb, std::size_t center, std::size_t context) {
    if (center >= emb.rows || context >= emb.rows) throw InputError("node id out of range");
    const auto in = emb.input_row(center);
    std::vector<double> logits(emb.rows);
    for (std::size_t w = 0; w < emb.rows; ++w) {
        const auto c = emb.context_row(w);
        double dot = 0.0;
        for (std::size_t k = 0; k < emb.dim; ++k) dot += static_cast<double>(in[k]) * static_cast<double>(c[k]);
        logits[w] = dot;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - top);
    return std::exp(logits[context] - top) / z;
}

const char* edge_operator_name(EdgeOperator op) noexcept {
    switch (op) {
        case EdgeOperator::hadamard: return "hadamard";
        case EdgeOperator::average: return "average";
        case EdgeOperator::l1: return "l1";
        case EdgeOperator::l2: return "l2";
        case EdgeOperator::concat: return "concat";
    }
    return "?";
}

EdgeOperator parse_edge_operator(const std::string& name) {
    for (auto op : {EdgeOperator::hadamard, EdgeOperator::average, EdgeOperator::l1, EdgeOperator::l2,
                    EdgeOperator::concat}) {
        if (name == edge_operator_name(op)) return op;
    }
    throw ConfigError("unknown edge operator: " + name);
}

std::size_t edge_feature_dim(EdgeOperator op, std::size_t dim) noexcept {
    return op == EdgeOperator::concat ? 2 * dim : dim;
}

void edge_features(std::span<const float> a, std::span<const float> b, EdgeOperator op, std::span<double> out) {
    const std::size_t d = a.size();
    switch (op) {
        case EdgeOperator::hadamard:
            for (std::size_t k = 0; k < d; ++k) out[k] = static_cast<double>(a[k]) * static_cast<double>(b[k]);
            break;
        case EdgeOperator::average:
            for (std::size_t k = 0; k < d; ++k) out[k] = (static_cast<double>(a[k]) + static_cast<double>(b[k])) / 2.0;
            break;
        case EdgeOperator::l1:
            for (std::size_t k = 0; k < d; ++k) out[k] = std::abs(static_cast<double>(a[k]) - static_cast<double>(b[k]));
            break;
        case EdgeOperator::l2:
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = static_cast<double>(a[k]) - static_cast<double>(b[k]);
                out[k] = diff * diff;
            }
            break;
        case EdgeOperator::concat:
            for (std::size_t k = 0; k < d; ++k) {
                out[k] = a[k];
                out[d + k] = b[k];
            }
            break;
    }
}

std::vector<double> edge_features(const EmbeddingMatrix& emb, std::size_t u, std::size_t v, EdgeOperator op) {
    if (u >= emb.rows || v >= emb.rows) throw InputError("node id out of range");
    if (op == EdgeOperator::concat && v < u) std::swap(u, v);
    std::vector<double> out(edge_feature_dim(op, emb.dim));
    edge_features(emb.input_row(u), emb.input_row(v), op, out);
    return out;
}

void write_embedding(std::ostream& out, const EmbeddingMatrix& emb, const NodeIndex& index) {
    if (index.size() != emb.rows) throw InputError("index size does not match embedding rows");
    out << emb.rows << ' ' << emb.dim << '\n';
    char buf[64];
    std::string line;
    for (std::size_t i = 0; i < emb.rows; ++i) {
        line = index.label_of(static_cast<NodeId>(i));
        for (float x : emb.input_row(i)) {
            auto res = std::to_chars(buf, buf + sizeof(buf), x);
            line += ' ';
            line.append(buf, res.ptr);
        }
        line += '\n';
        out << line;
    }
}

EmbeddingMatrix read_embedding(std::istream& in, const NodeIndex& index) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "missing `N D` header");
    std::size_t n = 0, d = 0;
    {
        std::istringstream hs(line);
        std::string extra;
        if (!(hs >> n >> d) || (hs >> extra)) throw ParseError(1, "header must be `N D`");
    }
    if (d == 0) throw ParseError(1, "dimension must be positive");
    if (n != index.size()) {
        throw ParseError(1, "embedding has " + std::to_string(n) + " rows but the node index has " +
                                std::to_string(index.size()));
    }
    EmbeddingMatrix emb(n, d);
    std::vector<bool> filled(n, false);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t line_no = r + 2;
        if (!std::getline(in, line)) throw ParseError(line_no, "expected " + std::to_string(n) + " rows");
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        const auto sp = view.find(' ');
        if (sp == std::string_view::npos) throw ParseError(line_no, "row has no values");
        NodeId id;
        try {
            id = index.id_of(view.substr(0, sp));
        } catch (const InputError& e) {
            throw ParseError(line_no, e.what());
        }
        if (filled[id]) throw ParseError(line_no, "duplicate row label");
        filled[id] = true;
        const char* p = view.data() + sp;
        const char* end = view.data() + view.size();
        auto row = emb.input_row(id);
        for (std::size_t k = 0; k < d; ++k) {
            while (p < end && *p == ' ') ++p;
            auto res = std::from_chars(p, end, row[k]);
            if (res.ec != std::errc{}) {
                throw ParseError(line_no, "expected " + std::to_string(d) + " numeric values");
            }
            p = res.ptr;
        }
        while (p < end && *p == ' ') ++p;
        if (p != end) throw ParseError(line_no, "more than " + std::to_string(d) + " values");
    }
    return emb;
}

}  // namespace phenolink
