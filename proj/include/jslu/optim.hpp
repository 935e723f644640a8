#ifndef JSLU_OPTIM_HPP
#define JSLU_OPTIM_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "jslu/data.hpp"
#include "jslu/errors.hpp"
#include "jslu/eval.hpp"
#include "jslu/model.hpp"
#include "jslu/rng.hpp"
#include "jslu/tensor.hpp"

// Initialization, AdaDelta, and the epoch/minibatch training loop.

namespace jslu {

// Weights i.i.d. uniform on [-init_range, init_range], biases zero. Draws
// come from the supplied generator in manifest order, so a seed pins the
// whole initialization.
template <typename T>
ModelParams<T> init_params(const ModelConfig& cfg, std::size_t num_words,
                           double init_range, std::mt19937& rng) {
    if (!(init_range > 0.0)) throw config_error("init_range must be positive");
    ModelParams<T> p = make_params<T>(cfg, num_words);
    p.for_each([&](const std::string& name, Tensor<T>& t) {
        bool bias = name.rfind("b_", 0) == 0 || name.rfind("conv_b", 0) == 0;
        if (bias) return;  // already zero
        for (auto& v : t.data) v = T(uniform(rng, -init_range, init_range));
    });
    return p;
}

template <typename T>
ModelParams<T> init_params(const ModelConfig& cfg, std::size_t num_words,
                           double init_range, std::uint32_t seed) {
    std::mt19937 rng(seed);
    return init_params<T>(cfg, num_words, init_range, rng);
}

// AdaDelta with a learning-rate scale on the update:
//   Eg2 <- rho Eg2 + (1-rho) g^2
//   dx   = -lr sqrt(Edx2 + eps) / sqrt(Eg2 + eps) * g
//   Edx2 <- rho Edx2 + (1-rho) dx^2
// Elements with zero gradient are skipped outright: their parameter and
// both accumulators stay untouched, so unused tensors never decay.
template <typename T>
class AdaDelta {
public:
    AdaDelta(ModelParams<T>& params, double lr = 0.001, double rho = 0.95,
             double eps = 1e-6)
        : lr_(T(lr)), rho_(T(rho)), eps_(T(eps)) {
        if (!(lr > 0.0)) throw config_error("adadelta lr must be positive");
        if (!(rho > 0.0 && rho < 1.0))
            throw config_error("adadelta rho must lie in (0,1)");
        if (!(eps > 0.0)) throw config_error("adadelta eps must be positive");
        params.for_each([&](const std::string&, Tensor<T>& t) {
            eg2_.push_back(Tensor<T>::zeros(t.shape));
            edx2_.push_back(Tensor<T>::zeros(t.shape));
        });
    }

    // Applies one update from params' accumulated gradients. The whole
    // step is rejected before any mutation if a gradient is not finite.
    void step(ModelParams<T>& params) {
        params.for_each([&](const std::string& name, Tensor<T>& t) {
            if (t.grad.size() != t.data.size())
                throw dim_error("adadelta: no gradient buffer for " + name);
            for (T g : t.grad)
                if (!std::isfinite(double(g)))
                    throw numeric_error("adadelta: non-finite gradient in " + name);
        });
        std::size_t i = 0;
        params.for_each([&](const std::string&, Tensor<T>& t) {
            Tensor<T>& eg2 = eg2_[i];
            Tensor<T>& edx2 = edx2_[i];
            ++i;
            for (std::size_t j = 0; j < t.numel(); ++j) {
                T g = t.grad[j];
                if (g == T(0)) continue;
                eg2.data[j] = rho_ * eg2.data[j] + (T(1) - rho_) * g * g;
                T dx = -lr_ * std::sqrt(edx2.data[j] + eps_) /
                       std::sqrt(eg2.data[j] + eps_) * g;
                edx2.data[j] = rho_ * edx2.data[j] + (T(1) - rho_) * dx * dx;
                t.data[j] += dx;
            }
        });
    }

    const std::vector<Tensor<T>>& grad_accum() const { return eg2_; }
    const std::vector<Tensor<T>>& update_accum() const { return edx2_; }

private:
    T lr_, rho_, eps_;
    std::vector<Tensor<T>> eg2_, edx2_;
};

struct TrainConfig {
    std::size_t minibatch = 16;
    std::size_t epochs = 30;
    double lr = 0.001;
    double rho_ada = 0.95;
    double eps_ada = 1e-6;
    double init_range = 0.05;
    std::uint32_t seed = 1;
    bool shuffle = true;
    std::optional<std::size_t> patience = 5;  // epochs of dev intent stagnation
    std::string embeddings_path;              // optional pre-trained overlay
};

inline void validate_train_config(const TrainConfig& cfg) {
    if (cfg.minibatch == 0) throw config_error("minibatch size must be positive");
    if (cfg.epochs == 0) throw config_error("epochs must be positive");
    if (!(cfg.init_range > 0.0)) throw config_error("init_range must be positive");
    if (cfg.patience && *cfg.patience == 0)
        throw config_error("patience must be positive when set");
}

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double seq_loss = 0.0, sent_loss = 0.0, penalty = 0.0, total = 0.0;
    double dev_slot_f1 = std::numeric_limits<double>::quiet_NaN();
    double dev_intent_error = std::numeric_limits<double>::quiet_NaN();
};

template <typename T>
struct TrainResult {
    ModelConfig config;  // with label counts resolved
    ModelParams<T> params;
    std::vector<EpochRecord> curve;
    std::size_t epochs_run = 0;
    bool stopped_early = false;
};

// epoch, seq, sent, penalty, total, dev_slot_f1, dev_intent_error.
inline void write_curve(const std::vector<EpochRecord>& curve, std::ostream& out) {
    for (const EpochRecord& r : curve)
        out << r.epoch << "\t" << r.seq_loss << "\t" << r.sent_loss << "\t" << r.penalty
            << "\t" << r.total << "\t" << r.dev_slot_f1 << "\t" << r.dev_intent_error
            << "\n";
}

// After each epoch the callback sees the record and the current
// parameters; returning true stops training.
template <typename T>
using EpochCallback = std::function<bool(const EpochRecord&, const ModelParams<T>&)>;

// Fills in label counts from the vocabulary and checks the corpus carries
// what the mode trains on.
inline ModelConfig resolve_config(ModelConfig cfg, const Vocab& vocab,
                                  const Corpus& corpus) {
    cfg.num_tags = cfg.mode == Mode::latent ? 0 : vocab.num_tags();
    cfg.num_intents = vocab.num_intents();
    cfg = validate_config(cfg);
    if (cfg.trains_tags())
        for (std::size_t i = 0; i < corpus.size(); ++i)
            if (!corpus[i].tags)
                throw data_error("mode '" + format_mode(cfg.mode) + "': sentence " +
                                 std::to_string(i) + " has no tags");
    if (cfg.trains_intent())
        for (std::size_t i = 0; i < corpus.size(); ++i)
            if (!corpus[i].intent)
                throw data_error("mode '" + format_mode(cfg.mode) + "': sentence " +
                                 std::to_string(i) + " has no intent");
    return cfg;
}

// Seeded epoch/minibatch loop: shuffle, joint loss, backprop, AdaDelta.
// One generator drives initialization, shuffling, and dropout, so the
// whole run is a function of (corpus, configs, seed).
template <typename T>
TrainResult<T> train(const Corpus& corpus, const Corpus* dev, const Vocab& vocab,
                     const ModelConfig& model_cfg, const TrainConfig& tcfg,
                     const EpochCallback<T>& after_epoch = nullptr) {
    validate_train_config(tcfg);
    if (corpus.empty()) throw data_error("training corpus is empty");
    ModelConfig cfg = resolve_config(model_cfg, vocab, corpus);

    std::mt19937 rng(tcfg.seed);
    TrainResult<T> result;
    result.config = cfg;
    result.params = init_params<T>(cfg, vocab.num_words(), tcfg.init_range, rng);
    if (!tcfg.embeddings_path.empty())
        load_embeddings(tcfg.embeddings_path, vocab, result.params.word_emb);
    result.params.set_requires_grad(true);
    AdaDelta<T> opt(result.params, tcfg.lr, tcfg.rho_ada, tcfg.eps_ada);

    bool monitor_intent = cfg.trains_intent() && dev != nullptr;
    double best_dev_error = std::numeric_limits<double>::infinity();
    std::size_t stale_epochs = 0;

    for (std::size_t epoch = 1; epoch <= tcfg.epochs; ++epoch) {
        std::uint32_t epoch_seed = rng();
        std::vector<Batch> batches =
            make_batches(corpus, vocab, tcfg.minibatch, tcfg.shuffle, epoch_seed);
        EpochRecord rec;
        rec.epoch = epoch;
        std::size_t sentences = 0;
        for (const Batch& batch : batches) {
            result.params.zero_grads();
            Graph<T> g;
            ParamVars<T> pv = bind_params(g, result.params);
            ForwardOptions<T> opts;
            opts.training = true;
            opts.rng = &rng;
            BatchRun<T> out = joint_loss(g, pv, cfg, batch, opts);
            g.backward(out.total);
            harvest_grads(pv, result.params);
            opt.step(result.params);
            double w = double(batch.m);
            rec.seq_loss += w * double(out.breakdown.seq_loss);
            rec.sent_loss += w * double(out.breakdown.sent_loss);
            rec.penalty += w * double(out.breakdown.sparsity_penalty);
            rec.total += w * double(out.breakdown.total);
            sentences += batch.m;
        }
        rec.seq_loss /= double(sentences);
        rec.sent_loss /= double(sentences);
        rec.penalty /= double(sentences);
        rec.total /= double(sentences);

        if (dev) {
            EvalReport report = evaluate_model(result.params, cfg, vocab, *dev);
            if (report.has_slots) rec.dev_slot_f1 = report.slots.f1;
            if (report.has_intents) rec.dev_intent_error = report.intents.error;
        }
        result.curve.push_back(rec);
        result.epochs_run = epoch;
        if (after_epoch && after_epoch(rec, result.params)) break;

        if (monitor_intent && tcfg.patience && !std::isnan(rec.dev_intent_error)) {
            if (rec.dev_intent_error < best_dev_error) {
                best_dev_error = rec.dev_intent_error;
                stale_epochs = 0;
            } else if (++stale_epochs >= *tcfg.patience) {
                result.stopped_early = true;
                break;
            }
        }
    }
    return result;
}

} // namespace jslu

#endif
