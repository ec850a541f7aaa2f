#include "phenolink/linear.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "phenolink/skipgram.hpp"

namespace phenolink {

double LinearModel::margin(std::span<const double> x) const {
    double z = bias;
    for (std::size_t k = 0; k < weights.size(); ++k) z += weights[k] * x[k];
    return z;
}

double LinearModel::score(std::span<const double> x) const {
    return logistic(margin(x));
}

void LogisticConfig::validate() const {
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (l2 < 0.0) throw ConfigError("l2 must be non-negative");
    if (history < 1) throw ConfigError("history must be >= 1");
}

double logistic_objective(std::span<const double> params, const FeatureMatrix& x, std::span<const int> y,
                          std::span<const double> row_weights, double l2, std::span<double> grad) {
    const std::size_t d = x.cols;
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0, total_weight = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double w = row_weights.empty() ? 1.0 : row_weights[i];
        const auto row = x.row(i);
        double z = params[d];
        for (std::size_t k = 0; k < d; ++k) z += params[k] * row[k];
        // logloss = log(1 + e^z) - y z
        loss += w * (y[i] ? -log_sigmoid(z) : -log_sigmoid(-z));
        const double r = w * (logistic(z) - static_cast<double>(y[i]));
        for (std::size_t k = 0; k < d; ++k) grad[k] += r * row[k];
        grad[d] += r;
        total_weight += w;
    }
    if (total_weight > 0.0) {
        loss /= total_weight;
        for (double& g : grad) g /= total_weight;
    }
    for (std::size_t k = 0; k < d; ++k) {
        loss += 0.5 * l2 * params[k] * params[k];
        grad[k] += l2 * params[k];
    }
    return loss;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

LogisticFit train_logistic(const FeatureMatrix& x, std::span<const int> y, std::span<const double> row_weights,
                           const LogisticConfig& cfg) {
    cfg.validate();
    if (y.size() != x.rows) throw InputError("label count does not match feature rows");
    if (!row_weights.empty() && row_weights.size() != x.rows) throw InputError("row weight count mismatch");
    if (!x.all_finite()) throw InputError("feature matrix contains non-finite values");
    for (int v : y) {
        if (v != 0 && v != 1) throw InputError("labels must be 0 or 1");
    }

    const std::size_t n = x.cols + 1;
    std::vector<double> theta(n, 0.0), grad(n), next(n), next_grad(n), dir(n), alpha_buf;
    struct Pair {
        std::vector<double> s, y;
        double rho;
    };
    std::deque<Pair> hist;

    auto objective = [&](std::span<const double> p, std::span<double> g) {
        return logistic_objective(p, x, y, row_weights, cfg.l2, g);
    };

    LogisticFit fit;
    double f = objective(theta, grad);
    auto finish = [&](bool converged) {
        fit.model.weights.assign(theta.begin(), theta.end() - 1);
        fit.model.bias = theta.back();
        fit.converged = converged;
        fit.loss = f;
        fit.gradient_norm = max_abs(grad);
        return fit;
    };

    for (fit.iterations = 0; fit.iterations < cfg.max_iterations; ++fit.iterations) {
        if (max_abs(grad) <= cfg.tolerance) return finish(true);

        // two-loop recursion: dir = -H * grad
        std::copy(grad.begin(), grad.end(), dir.begin());
        alpha_buf.assign(hist.size(), 0.0);
        for (std::size_t k = hist.size(); k-- > 0;) {
            alpha_buf[k] = hist[k].rho * dot(hist[k].s, dir);
            for (std::size_t j = 0; j < n; ++j) dir[j] -= alpha_buf[k] * hist[k].y[j];
        }
        double gamma = 1.0;
        if (!hist.empty()) {
            gamma = dot(hist.back().s, hist.back().y) / dot(hist.back().y, hist.back().y);
        } else {
            gamma = 1.0 / std::max(1.0, std::sqrt(dot(grad, grad)));
        }
        for (double& v : dir) v *= gamma;
        for (std::size_t k = 0; k < hist.size(); ++k) {
            const double beta = hist[k].rho * dot(hist[k].y, dir);
            for (std::size_t j = 0; j < n; ++j) dir[j] += (alpha_buf[k] - beta) * hist[k].s[j];
        }
        for (double& v : dir) v = -v;

        double slope = dot(grad, dir);
        if (!(slope < 0.0)) {
            // not a descent direction: restart from steepest descent
            hist.clear();
            for (std::size_t j = 0; j < n; ++j) dir[j] = -grad[j];
            slope = dot(grad, dir);
        }

        // backtracking (Armijo)
        double step = 1.0;
        double f_next = 0.0;
        bool accepted = false;
        for (int tries = 0; tries < 60; ++tries) {
            for (std::size_t j = 0; j < n; ++j) next[j] = theta[j] + step * dir[j];
            f_next = objective(next, next_grad);
            if (std::isfinite(f_next) && f_next <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            throw LineSearchError("logistic line search failed at iteration " + std::to_string(fit.iterations),
                                  finish(false));
        }

        Pair pr{std::vector<double>(n), std::vector<double>(n), 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            pr.s[j] = next[j] - theta[j];
            pr.y[j] = next_grad[j] - grad[j];
        }
        const double sy = dot(pr.s, pr.y);
        if (sy > 1e-12) {
            pr.rho = 1.0 / sy;
            hist.push_back(std::move(pr));
            if (hist.size() > cfg.history) hist.pop_front();
        }
        theta.swap(next);
        grad.swap(next_grad);
        f = f_next;
    }
    return finish(max_abs(grad) <= cfg.tolerance);
}

}  // namespace phenolink
