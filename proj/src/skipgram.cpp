#include "phenolink/skipgram.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "phenolink/alias.hpp"
#include "phenolink/error.hpp"
#include "phenolink/random.hpp"

namespace phenolink {

void SkipGramConfig::validate() const {
    if (dimensions < 1) throw ConfigError("dimensions must be >= 1");
    if (window < 1) throw ConfigError("window must be >= 1");
    if (negatives < 1) throw ConfigError("negatives must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(initial_step_size > 0.0)) throw ConfigError("initial_step_size must be positive");
    if (workers < 1) throw ConfigError("workers must be >= 1");
}

double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      std::span<const std::span<const double>> noise, std::span<double> grad_center,
                      std::span<double> grad_context, std::span<const std::span<double>> grad_noise) {
    const std::size_t d = center.size();
    const auto dot = [d](std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += a[k] * b[k];
        return s;
    };
    std::fill(grad_center.begin(), grad_center.end(), 0.0);

    const double pos = dot(center, context);
    double loss = -log_sigmoid(pos);
    // d/dx -log s(x) = -(1 - s(x))
    const double coef_pos = -(1.0 - logistic(pos));
    for (std::size_t k = 0; k < d; ++k) {
        grad_center[k] += coef_pos * context[k];
        grad_context[k] = coef_pos * center[k];
    }
    for (std::size_t n = 0; n < noise.size(); ++n) {
        const double neg = dot(center, noise[n]);
        loss -= log_sigmoid(-neg);
        // d/dx -log s(-x) = s(x)
        const double coef = logistic(neg);
        for (std::size_t k = 0; k < d; ++k) {
            grad_center[k] += coef * noise[n][k];
            grad_noise[n][k] = coef * center[k];
        }
    }
    return loss;
}

namespace {

struct Trainer {
    const WalkCorpus& corpus;
    const SkipGramConfig& cfg;
    EmbeddingMatrix& emb;
    AliasTable noise;
    double total_tokens = 0.0;

    double step_at(std::size_t epoch, std::size_t token) const {
        const double progress =
            (static_cast<double>(epoch) * static_cast<double>(corpus.token_count()) + static_cast<double>(token)) /
            total_tokens;
        const double floor = cfg.initial_step_size * 1e-4;
        return std::max(floor, cfg.initial_step_size * (1.0 - progress));
    }

    // Returns (loss sum, pair count) for one walk.
    std::pair<double, std::size_t> walk(std::size_t epoch, std::size_t w, Rng& rng, std::vector<float>& scratch,
                                        std::vector<std::span<float>>& noise_rows, std::size_t update_base) {
        const auto nodes = corpus.walk(w);
        const std::size_t len = nodes.size();
        const std::size_t window = cfg.window;
        double loss = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < len; ++i) {
            const auto step = static_cast<float>(step_at(epoch, corpus.offsets[w] + i));
            const NodeId center = nodes[i];
            const std::size_t lo = i >= window ? i - window : 0;
            const std::size_t hi = std::min(len - 1, i + window);
            for (std::size_t j = lo; j <= hi; ++j) {
                if (j == i) continue;
                const NodeId ctx = nodes[j];
                noise_rows.clear();
                for (std::size_t n = 0; n < cfg.negatives; ++n) {
                    const std::uint32_t target = noise.sample(rng);
                    if (target == ctx) continue;
                    noise_rows.push_back(emb.context_row(target));
                }
                const double l = sgns_step<float, std::span<float>>(emb.input_row(center), emb.context_row(ctx),
                                                                     noise_rows, step, scratch);
                if (!std::isfinite(l)) {
                    throw TrainingError("non-finite skip-gram loss at update " +
                                        std::to_string(update_base + pairs) + " (epoch " + std::to_string(epoch) +
                                        ", walk " + std::to_string(w) + ", position " + std::to_string(i) + ")");
                }
                loss += l;
                ++pairs;
            }
        }
        return {loss, pairs};
    }
};

}  // namespace

EmbeddingMatrix train_skipgram(const WalkCorpus& corpus, const SkipGramConfig& cfg, std::size_t node_count,
                               SkipGramReport* report) {
    cfg.validate();
    if (corpus.token_count() == 0) throw InputError("skip-gram needs a nonempty corpus");

    std::size_t rows = node_count;
    for (NodeId x : corpus.nodes) rows = std::max<std::size_t>(rows, x + std::size_t{1});

    std::vector<double> weights(rows, 0.0);
    for (NodeId x : corpus.nodes) weights[x] += 1.0;
    for (double& w : weights) w = w > 0.0 ? std::pow(w, cfg.noise_exponent) : 0.0;

    EmbeddingMatrix emb(rows, cfg.dimensions);
    {
        Rng init(derive_seed(cfg.seed, 0));
        const auto scale = static_cast<float>(1.0 / static_cast<double>(cfg.dimensions));
        for (float& x : emb.input) x = (static_cast<float>(uniform01(init)) - 0.5f) * scale;
    }

    Trainer t{corpus, cfg, emb, AliasTable(weights), static_cast<double>(cfg.epochs * corpus.token_count())};
    SkipGramReport rep;
    const std::size_t walks = corpus.walk_count();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss = 0.0;
        std::size_t pairs = 0;
        if (cfg.workers == 1) {
            Rng rng(derive_seed(cfg.seed, 1, epoch));
            std::vector<float> scratch(cfg.dimensions);
            std::vector<std::span<float>> noise_rows;
            for (std::size_t w = 0; w < walks; ++w) {
                auto [l, n] = t.walk(epoch, w, rng, scratch, noise_rows, rep.updates + pairs);
                loss += l;
                pairs += n;
            }
        } else {
            const auto count = static_cast<std::int64_t>(walks);
            bool failed = false;
            std::string failure;
#pragma omp parallel num_threads(static_cast<int>(cfg.workers)) reduction(+ : loss, pairs)
            {
                std::vector<float> scratch(cfg.dimensions);
                std::vector<std::span<float>> noise_rows;
#pragma omp for schedule(dynamic, 64)
                for (std::int64_t w = 0; w < count; ++w) {
                    Rng rng(derive_seed(cfg.seed, 2 + epoch, static_cast<std::uint64_t>(w)));
                    try {
                        auto [l, n] = t.walk(epoch, static_cast<std::size_t>(w), rng, scratch, noise_rows, 0);
                        loss += l;
                        pairs += n;
                    } catch (const TrainingError& e) {
#pragma omp critical
                        {
                            failed = true;
                            failure = e.what();
                        }
                    }
                }
            }
            if (failed) throw TrainingError(failure);
        }
        rep.updates += pairs;
        rep.epoch_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
    }
    if (report) *report = std::move(rep);
    return emb;
}

}  // namespace phenolink
