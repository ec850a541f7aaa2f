#pragma once

// L2-regularized logistic regression fit with L-BFGS.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "phenolink/error.hpp"
#include "phenolink/features.hpp"

namespace phenolink {

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;

    double margin(std::span<const double> x) const;
    double score(std::span<const double> x) const;
};

struct LogisticConfig {
    std::size_t max_iterations = 500;
    double tolerance = 1e-6;  // on the max-norm of the gradient
    double l2 = 1e-4;
    std::size_t history = 10;

    void validate() const;
};

struct LogisticFit {
    LinearModel model;
    bool converged = false;
    std::size_t iterations = 0;
    double loss = 0.0;
    double gradient_norm = 0.0;
};

// Line search could not make progress; carries the last iterate.
class LineSearchError : public ConvergenceError {
public:
    LineSearchError(const std::string& what, LogisticFit fit) : ConvergenceError(what), fit_(std::move(fit)) {}
    const LogisticFit& fit() const noexcept { return fit_; }

private:
    LogisticFit fit_;
};

// Objective at params = [weights..., bias]:
//   sum_i w_i * logloss_i / sum_i w_i + l2 / 2 * |weights|^2
// The bias is not penalized. Writes the gradient into grad (same size as params).
double logistic_objective(std::span<const double> params, const FeatureMatrix& x, std::span<const int> y,
                          std::span<const double> row_weights, double l2, std::span<double> grad);

// Empty row_weights means all ones. Throws InputError for non-finite features
// or mismatched sizes, LineSearchError when the line search stalls.
LogisticFit train_logistic(const FeatureMatrix& x, std::span<const int> y, std::span<const double> row_weights,
                           const LogisticConfig& cfg);

}  // namespace phenolink
