#include "phenolink/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phenolink/error.hpp"
#include "phenolink/random.hpp"
#include "phenolink/skipgram.hpp"

namespace phenolink {

void MlpConfig::validate() const {
    if (hidden.empty()) throw ConfigError("mlp needs at least one hidden layer");
    for (auto h : hidden) {
        if (h == 0) throw ConfigError("hidden layer sizes must be positive");
    }
    if (!(step_size > 0.0)) throw ConfigError("step_size must be positive");
    if (epochs < 1 || batch_size < 1) throw ConfigError("epochs and batch_size must be >= 1");
}

std::size_t MlpModel::weight_offset(std::size_t l) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < l; ++k) off += layers[k + 1] * (layers[k] + 1);
    return off;
}

std::size_t MlpModel::parameter_count() const {
    return weight_offset(layers.size() - 1);
}

namespace {

// Forward pass; acts[l] holds the activations of layer l (acts[0] = input).
// pre[l] holds pre-activations of layer l + 1. Returns the output margin.
double forward(const MlpModel& m, std::span<const double> x, std::vector<std::vector<double>>& acts,
               std::vector<std::vector<double>>& pre) {
    const std::size_t depth = m.layers.size() - 1;
    acts.resize(depth + 1);
    pre.resize(depth);
    acts[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < depth; ++l) {
        const std::size_t in = m.layers[l], out = m.layers[l + 1];
        const double* w = m.params.data() + m.weight_offset(l);
        const double* b = m.params.data() + m.bias_offset(l);
        pre[l].resize(out);
        acts[l + 1].resize(out);
        for (std::size_t o = 0; o < out; ++o) {
            double z = b[o];
            const double* wr = w + o * in;
            for (std::size_t i = 0; i < in; ++i) z += wr[i] * acts[l][i];
            pre[l][o] = z;
            acts[l + 1][o] = l + 1 < depth ? std::max(0.0, z) : z;
        }
    }
    return acts[depth][0];
}

}  // namespace

double MlpModel::margin(std::span<const double> x) const {
    std::vector<std::vector<double>> acts, pre;
    return forward(*this, x, acts, pre);
}

double MlpModel::score(std::span<const double> x) const {
    return logistic(margin(x));
}

MlpModel init_mlp(std::vector<std::size_t> layers, std::uint64_t seed) {
    if (layers.size() < 2 || layers.back() != 1) throw ConfigError("mlp layers must end in a single output");
    MlpModel m;
    m.layers = std::move(layers);
    m.params.resize(m.parameter_count());
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(m.layers[l]));
        const std::size_t begin = m.weight_offset(l), end = m.weight_offset(l + 1);
        for (std::size_t k = begin; k < end; ++k) m.params[k] = (2.0 * uniform01(rng) - 1.0) * bound;
    }
    return m;
}

double mlp_loss_and_gradient(const MlpModel& m, const FeatureMatrix& x, std::span<const int> y,
                             std::span<const std::size_t> rows, std::span<double> grad) {
    const std::size_t depth = m.layers.size() - 1;
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<std::vector<double>> acts, pre;
    std::vector<double> delta, next_delta;
    const std::size_t count = rows.empty() ? x.rows : rows.size();
    double loss = 0.0;
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t i = rows.empty() ? r : rows[r];
        const double z = forward(m, x.row(i), acts, pre);
        const double t = static_cast<double>(y[i]);
        loss += t > 0 ? -log_sigmoid(z) : -log_sigmoid(-z);
        delta.assign(1, logistic(z) - t);
        for (std::size_t l = depth; l-- > 0;) {
            const std::size_t in = m.layers[l], out = m.layers[l + 1];
            double* gw = grad.data() + m.weight_offset(l);
            double* gb = grad.data() + m.bias_offset(l);
            const double* w = m.params.data() + m.weight_offset(l);
            for (std::size_t o = 0; o < out; ++o) {
                gb[o] += delta[o];
                double* gwr = gw + o * in;
                for (std::size_t k = 0; k < in; ++k) gwr[k] += delta[o] * acts[l][k];
            }
            if (l == 0) break;
            next_delta.assign(in, 0.0);
            for (std::size_t o = 0; o < out; ++o) {
                const double* wr = w + o * in;
                for (std::size_t k = 0; k < in; ++k) next_delta[k] += wr[k] * delta[o];
            }
            for (std::size_t k = 0; k < in; ++k) {
                if (pre[l - 1][k] <= 0.0) next_delta[k] = 0.0;
            }
            delta.swap(next_delta);
        }
    }
    if (count > 0) {
        loss /= static_cast<double>(count);
        for (double& g : grad) g /= static_cast<double>(count);
    }
    return loss;
}

MlpFit train_mlp(const FeatureMatrix& x, std::span<const int> y, const MlpConfig& cfg) {
    cfg.validate();
    if (y.size() != x.rows) throw InputError("label count does not match feature rows");
    if (!x.all_finite()) throw InputError("feature matrix contains non-finite values");

    std::vector<std::size_t> layers{x.cols};
    layers.insert(layers.end(), cfg.hidden.begin(), cfg.hidden.end());
    layers.push_back(1);

    MlpFit fit{init_mlp(layers, derive_seed(cfg.seed, 0)), {}};
    auto& params = fit.model.params;
    const std::size_t n = params.size();
    std::vector<double> grad(n), m1(n, 0.0), m2(n, 0.0);
    std::vector<std::size_t> order(x.rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, 1));
    std::size_t t = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(order, rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, order.size() - start);
            const std::span<const std::size_t> batch(order.data() + start, len);
            const double loss = mlp_loss_and_gradient(fit.model, x, y, batch, grad);
            if (!std::isfinite(loss)) {
                throw TrainingError("non-finite mlp loss in epoch " + std::to_string(epoch));
            }
            epoch_loss += loss * static_cast<double>(len);
            ++t;
            const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
            const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
            for (std::size_t k = 0; k < n; ++k) {
                m1[k] = cfg.beta1 * m1[k] + (1.0 - cfg.beta1) * grad[k];
                m2[k] = cfg.beta2 * m2[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
                params[k] -= cfg.step_size * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + cfg.epsilon);
            }
        }
        fit.epoch_loss.push_back(x.rows ? epoch_loss / static_cast<double>(x.rows) : 0.0);
    }
    return fit;
}

}  // namespace phenolink
