#pragma once

// Binary evaluation: confusion counts, per-class precision/recall/F1,
// micro/macro/weighted aggregates, AUROC and average precision with curves.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace phenolink {

struct ConfusionMatrix {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

// Throws InputError on length mismatch or a non-binary entry.
ConfusionMatrix confusion_matrix(std::span<const int> labels, std::span<const int> predictions);

// One-vs-rest counts for a single class.
struct ClassCounts {
    std::uint64_t tp = 0, fp = 0, fn = 0;
};

struct ClassScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
    bool precision_undefined = false;  // tp + fp == 0, reported as 0
    bool recall_undefined = false;     // tp + fn == 0, reported as 0
};

ClassScore class_score(const ClassCounts& c);

// classes[0] is the negative class, classes[1] the positive class.
struct ClassMetrics {
    std::array<ClassScore, 2> classes;
    std::array<ClassCounts, 2> counts;
};

ClassMetrics class_metrics(const ConfusionMatrix& cm);

struct AverageMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Pooled counts over classes; f1 is the harmonic mean of pooled P and R.
AverageMetrics micro_average(std::span<const ClassCounts> per_class);
// Plain means; f1 is the mean of the class F1s.
AverageMetrics macro_average(std::span<const ClassScore> per_class);
// Class weights support_c / sum(support). Throws InputError if supports sum to 0
// or the lengths differ.
AverageMetrics weighted_average(std::span<const ClassScore> per_class, std::span<const double> supports);

struct AggregateMetrics {
    AverageMetrics micro, macro, weighted;
    std::vector<double> class_weights;
    std::size_t class_count = 0;
};

AggregateMetrics aggregate_metrics(const ClassMetrics& m);

struct CurvePoint {
    double x = 0.0;
    double y = 0.0;
};

struct RankCurve {
    double area = 0.0;
    std::vector<CurvePoint> points;
};

// Mann-Whitney AUROC with half credit for ties. Points are (fpr, tpr) from
// (0,0) to (1,1), one per distinct score, in descending score order.
// Throws UndefinedMetricError unless both classes are present.
RankCurve roc_curve(std::span<const int> labels, std::span<const double> scores);
double auroc(std::span<const int> labels, std::span<const double> scores);

// Step-form average precision. Points are (recall, precision), one per
// distinct score in descending order. Throws UndefinedMetricError without
// positives.
RankCurve pr_curve(std::span<const int> labels, std::span<const double> scores);
double aucpr(std::span<const int> labels, std::span<const double> scores);

struct EvaluationReport {
    double threshold = 0.5;  // score >= threshold predicts 1
    std::size_t rows = 0;
    std::size_t positives = 0;
    ConfusionMatrix confusion;
    ClassMetrics class_wise;
    AggregateMetrics aggregate;
    double auroc = 0.0;
    double aucpr = 0.0;
    std::vector<CurvePoint> roc;
    std::vector<CurvePoint> pr;

    double positive_rate() const noexcept {
        return rows ? static_cast<double>(positives) / static_cast<double>(rows) : 0.0;
    }
};

std::vector<int> threshold_scores(std::span<const double> scores, double threshold);

EvaluationReport evaluation_report(std::span<const int> labels, std::span<const double> scores,
                                   double threshold = 0.5);

// Curves are left to the CSV writers.
nlohmann::ordered_json report_json(const EvaluationReport& r, const std::string& model_name);
// Class-wise and aggregate tables, laid out like the published tables.
void write_report_text(std::ostream& os, const EvaluationReport& r, const std::string& model_name);
void write_roc_csv(std::ostream& os, const EvaluationReport& r);
void write_pr_csv(std::ostream& os, const EvaluationReport& r);

}  // namespace phenolink
