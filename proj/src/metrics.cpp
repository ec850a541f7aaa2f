#include "phenolink/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "phenolink/error.hpp"

namespace phenolink {

ConfusionMatrix confusion_matrix(std::span<const int> labels, std::span<const int> predictions) {
    if (labels.size() != predictions.size()) {
        throw InputError("labels and predictions differ in length (" + std::to_string(labels.size()) + " vs " +
                         std::to_string(predictions.size()) + ")");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i], p = predictions[i];
        if ((y != 0 && y != 1) || (p != 0 && p != 1)) throw InputError("non-binary entry at row " + std::to_string(i));
        if (y == 1) {
            (p == 1 ? cm.tp : cm.fn) += 1;
        } else {
            (p == 1 ? cm.fp : cm.tn) += 1;
        }
    }
    return cm;
}

ClassScore class_score(const ClassCounts& c) {
    ClassScore s;
    s.support = c.tp + c.fn;
    if (c.tp + c.fp == 0) {
        s.precision_undefined = true;
    } else {
        s.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    }
    if (c.tp + c.fn == 0) {
        s.recall_undefined = true;
    } else {
        s.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    }
    if (s.precision > 0.0 && s.recall > 0.0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

ClassMetrics class_metrics(const ConfusionMatrix& cm) {
    ClassMetrics m;
    m.counts[1] = {cm.tp, cm.fp, cm.fn};
    m.counts[0] = {cm.tn, cm.fn, cm.fp};
    for (std::size_t c = 0; c < 2; ++c) m.classes[c] = class_score(m.counts[c]);
    return m;
}

AverageMetrics micro_average(std::span<const ClassCounts> per_class) {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (const auto& c : per_class) {
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
    }
    const ClassScore s = class_score({tp, fp, fn});
    return {s.precision, s.recall, s.f1};
}

AverageMetrics macro_average(std::span<const ClassScore> per_class) {
    AverageMetrics a;
    if (per_class.empty()) return a;
    for (const auto& c : per_class) {
        a.precision += c.precision;
        a.recall += c.recall;
        a.f1 += c.f1;
    }
    const double n = static_cast<double>(per_class.size());
    a.precision /= n;
    a.recall /= n;
    a.f1 /= n;
    return a;
}

AverageMetrics weighted_average(std::span<const ClassScore> per_class, std::span<const double> supports) {
    if (per_class.size() != supports.size()) throw InputError("one support per class required");
    const double total = std::accumulate(supports.begin(), supports.end(), 0.0);
    if (!(total > 0.0)) throw InputError("class supports sum to zero");
    AverageMetrics a;
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        const double w = supports[c] / total;
        a.precision += w * per_class[c].precision;
        a.recall += w * per_class[c].recall;
        a.f1 += w * per_class[c].f1;
    }
    return a;
}

AggregateMetrics aggregate_metrics(const ClassMetrics& m) {
    AggregateMetrics a;
    a.class_count = m.classes.size();
    const std::array<double, 2> supports{static_cast<double>(m.classes[0].support),
                                         static_cast<double>(m.classes[1].support)};
    const double total = supports[0] + supports[1];
    for (double s : supports) a.class_weights.push_back(total > 0.0 ? s / total : 0.0);
    a.micro = micro_average(m.counts);
    a.macro = macro_average(m.classes);
    if (total > 0.0) a.weighted = weighted_average(m.classes, supports);
    return a;
}

namespace {

struct Sweep {
    std::size_t positives = 0, negatives = 0;
    // cumulative (tp, fp) after each distinct score, descending
    std::vector<std::pair<std::size_t, std::size_t>> steps;
};

Sweep sweep(std::span<const int> labels, std::span<const double> scores) {
    if (labels.size() != scores.size()) throw InputError("labels and scores differ in length");
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    Sweep s;
    std::size_t tp = 0, fp = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t i = order[k];
        if (labels[i] != 0 && labels[i] != 1) throw InputError("non-binary label at row " + std::to_string(i));
        (labels[i] == 1 ? tp : fp) += 1;
        if (k + 1 == order.size() || scores[order[k + 1]] != scores[i]) s.steps.emplace_back(tp, fp);
    }
    s.positives = tp;
    s.negatives = fp;
    return s;
}

}  // namespace

RankCurve roc_curve(std::span<const int> labels, std::span<const double> scores) {
    const Sweep s = sweep(labels, scores);
    if (s.positives == 0 || s.negatives == 0) throw UndefinedMetricError("AUROC needs both classes present");
    const double p = static_cast<double>(s.positives), n = static_cast<double>(s.negatives);
    RankCurve c;
    c.points.push_back({0.0, 0.0});
    // Trapezoids over tie groups give exactly the half-credit rank statistic.
    double area2 = 0.0;  // twice the area, in units of pairs
    std::size_t prev_tp = 0, prev_fp = 0;
    for (const auto& [tp, fp] : s.steps) {
        area2 += static_cast<double>(fp - prev_fp) * static_cast<double>(tp + prev_tp);
        c.points.push_back({static_cast<double>(fp) / n, static_cast<double>(tp) / p});
        prev_tp = tp;
        prev_fp = fp;
    }
    c.area = area2 / (2.0 * p * n);
    return c;
}

double auroc(std::span<const int> labels, std::span<const double> scores) { return roc_curve(labels, scores).area; }

RankCurve pr_curve(std::span<const int> labels, std::span<const double> scores) {
    const Sweep s = sweep(labels, scores);
    if (s.positives == 0) throw UndefinedMetricError("average precision needs at least one positive");
    const double p = static_cast<double>(s.positives);
    RankCurve c;
    double prev_recall = 0.0;
    for (const auto& [tp, fp] : s.steps) {
        const double recall = static_cast<double>(tp) / p;
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        c.area += (recall - prev_recall) * precision;
        c.points.push_back({recall, precision});
        prev_recall = recall;
    }
    return c;
}

double aucpr(std::span<const int> labels, std::span<const double> scores) { return pr_curve(labels, scores).area; }

std::vector<int> threshold_scores(std::span<const double> scores, double threshold) {
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold ? 1 : 0;
    return out;
}

EvaluationReport evaluation_report(std::span<const int> labels, std::span<const double> scores, double threshold) {
    EvaluationReport r;
    r.threshold = threshold;
    const auto predicted = threshold_scores(scores, threshold);
    r.confusion = confusion_matrix(labels, predicted);
    r.rows = labels.size();
    r.positives = r.confusion.tp + r.confusion.fn;
    r.class_wise = class_metrics(r.confusion);
    r.aggregate = aggregate_metrics(r.class_wise);
    auto roc = roc_curve(labels, scores);
    auto pr = pr_curve(labels, scores);
    r.auroc = roc.area;
    r.aucpr = pr.area;
    r.roc = std::move(roc.points);
    r.pr = std::move(pr.points);
    return r;
}

namespace {

nlohmann::ordered_json average_json(const AverageMetrics& a) {
    return {{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void write_points(std::ostream& os, const char* header, const std::vector<CurvePoint>& pts) {
    os << header << '\n';
    char buf[64];
    for (const auto& p : pts) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x, p.y);
        os << buf;
    }
}

}  // namespace

nlohmann::ordered_json report_json(const EvaluationReport& r, const std::string& model_name) {
    nlohmann::ordered_json j;
    j["model"] = model_name;
    j["threshold"] = r.threshold;
    j["rows"] = r.rows;
    j["positives"] = r.positives;
    j["positive_rate"] = r.positive_rate();
    j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn}};
    auto classes = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < r.class_wise.classes.size(); ++c) {
        const auto& s = r.class_wise.classes[c];
        classes.push_back({{"class", c},
                           {"precision", s.precision},
                           {"recall", s.recall},
                           {"f1", s.f1},
                           {"support", s.support},
                           {"precision_undefined", s.precision_undefined},
                           {"recall_undefined", s.recall_undefined}});
    }
    j["class_wise"] = std::move(classes);
    j["aggregate"] = {{"micro", average_json(r.aggregate.micro)},
                      {"macro", average_json(r.aggregate.macro)},
                      {"weighted", average_json(r.aggregate.weighted)},
                      {"class_weights", r.aggregate.class_weights}};
    j["auroc"] = r.auroc;
    j["aucpr"] = r.aucpr;
    return j;
}

void write_report_text(std::ostream& os, const EvaluationReport& r, const std::string& model_name) {
    char line[160];
    os << "Class-wise evaluation (threshold " << r.threshold << ")\n";
    std::snprintf(line, sizeof line, "%-12s %-6s %-10s %-10s %-10s %s\n", "Model", "Class", "Precision", "Recall",
                  "F1 score", "Support");
    os << line;
    for (std::size_t c = 0; c < r.class_wise.classes.size(); ++c) {
        const auto& s = r.class_wise.classes[c];
        std::snprintf(line, sizeof line, "%-12s %-6zu %-10s %-10s %-10s %llu\n", c == 0 ? model_name.c_str() : "", c,
                      fixed2(s.precision).c_str(), fixed2(s.recall).c_str(), fixed2(s.f1).c_str(),
                      static_cast<unsigned long long>(s.support));
        os << line;
    }
    os << "\nMicro, macro and weighted metrics\n";
    std::snprintf(line, sizeof line, "%-12s %-10s %-8s %-8s %-9s %-8s %s\n", "Model", "Metric", "Micro", "Macro",
                  "Weighted", "AUROC", "AUCPR");
    os << line;
    const auto& a = r.aggregate;
    const struct {
        const char* name;
        double micro, macro, weighted;
    } rows[] = {{"Precision", a.micro.precision, a.macro.precision, a.weighted.precision},
                {"Recall", a.micro.recall, a.macro.recall, a.weighted.recall},
                {"F1 score", a.micro.f1, a.macro.f1, a.weighted.f1}};
    for (std::size_t k = 0; k < 3; ++k) {
        std::snprintf(line, sizeof line, "%-12s %-10s %-8s %-8s %-9s %-8s %s\n", k == 0 ? model_name.c_str() : "",
                      rows[k].name, fixed2(rows[k].micro).c_str(), fixed2(rows[k].macro).c_str(),
                      fixed2(rows[k].weighted).c_str(), k == 0 ? fixed4(r.auroc).c_str() : "",
                      k == 0 ? fixed4(r.aucpr).c_str() : "");
        os << line;
    }
    os << "\nrows " << r.rows << ", positives " << r.positives << " (rate " << fixed4(r.positive_rate()) << ")\n";
    os << "confusion tp " << r.confusion.tp << " fp " << r.confusion.fp << " fn " << r.confusion.fn << " tn "
       << r.confusion.tn << '\n';
}

void write_roc_csv(std::ostream& os, const EvaluationReport& r) { write_points(os, "fpr,tpr", r.roc); }

void write_pr_csv(std::ostream& os, const EvaluationReport& r) { write_points(os, "recall,precision", r.pr); }

}  // namespace phenolink
