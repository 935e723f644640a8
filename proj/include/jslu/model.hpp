#ifndef JSLU_MODEL_HPP
#define JSLU_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jslu/data.hpp"
#include "jslu/errors.hpp"
#include "jslu/rng.hpp"
#include "jslu/tensor.hpp"

// The joint tagging / classification architecture: windowed convolution
// over word embeddings and previous-tag embeddings, an LSTM over the
// convolved features, a per-step tag head, a pooled or attention-weighted
// sentence vector feeding an intent head, and a KL penalty that drives the
// batch-average attention activation toward a target budget.

namespace jslu {

enum class Mode { joint, latent, tagger_only, classifier_only };
enum class Aggregator { max_pool, avg_pool, attention };

inline Mode parse_mode(const std::string& s) {
    if (s == "joint") return Mode::joint;
    if (s == "latent") return Mode::latent;
    if (s == "tagger") return Mode::tagger_only;
    if (s == "classifier") return Mode::classifier_only;
    throw config_error("mode must be joint|latent|tagger|classifier, got '" + s + "'");
}

inline std::string format_mode(Mode m) {
    switch (m) {
        case Mode::joint: return "joint";
        case Mode::latent: return "latent";
        case Mode::tagger_only: return "tagger";
        case Mode::classifier_only: return "classifier";
    }
    throw config_error("bad mode value");
}

inline Aggregator parse_aggregator(const std::string& s) {
    if (s == "max") return Aggregator::max_pool;
    if (s == "avg") return Aggregator::avg_pool;
    if (s == "attention") return Aggregator::attention;
    throw config_error("aggregator must be max|avg|attention, got '" + s + "'");
}

inline std::string format_aggregator(Aggregator a) {
    switch (a) {
        case Aggregator::max_pool: return "max";
        case Aggregator::avg_pool: return "avg";
        case Aggregator::attention: return "attention";
    }
    throw config_error("bad aggregator value");
}

struct SparsityConfig {
    double rho = 0.05;      // target average attention activation
    double beta = 0.1;      // penalty weight
    double epsilon = 1e-6;  // clamp margin for the batch averages
};

struct ModelConfig {
    Mode mode = Mode::joint;
    std::size_t word_embed_dim = 100;
    std::size_t tag_embed_dim = 30;
    std::size_t hidden_dim = 100;
    std::vector<std::size_t> window_sizes = {3, 5, 7};
    std::size_t filters_per_window = 100;
    Aggregator aggregator = Aggregator::max_pool;
    std::optional<SparsityConfig> sparsity;
    std::size_t num_tags = 0;
    std::size_t num_intents = 0;
    double dropout_rate = 0.0;

    std::size_t conv_out_dim() const {
        return filters_per_window * window_sizes.size();
    }

    // Window of size 2k+1 sees 2k+1 word vectors and k previous-tag vectors.
    std::size_t window_input_dim(std::size_t window) const {
        std::size_t k = (window - 1) / 2;
        return window * word_embed_dim + k * tag_embed_dim;
    }

    bool uses_tag_channel() const { return mode != Mode::latent; }
    bool trains_tags() const { return mode == Mode::joint || mode == Mode::tagger_only; }
    bool trains_intent() const { return mode != Mode::tagger_only; }
};

// Checks invariants and applies the forced settings; call before allocating
// parameters.
inline ModelConfig validate_config(ModelConfig cfg) {
    if (cfg.word_embed_dim == 0) throw config_error("word_embed_dim must be positive");
    if (cfg.hidden_dim == 0) throw config_error("hidden_dim must be positive");
    if (cfg.filters_per_window == 0)
        throw config_error("filters_per_window must be positive");
    if (cfg.window_sizes.empty()) throw config_error("window_sizes must be nonempty");
    for (std::size_t w : cfg.window_sizes)
        if (w < 1 || w % 2 == 0)
            throw config_error("window sizes must be odd and >= 1, got " +
                               std::to_string(w));
    if (cfg.mode == Mode::latent)
        cfg.tag_embed_dim = cfg.hidden_dim;  // tag slots carry h_t instead
    if (cfg.tag_embed_dim == 0) throw config_error("tag_embed_dim must be positive");
    if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0))
        throw config_error("dropout_rate must lie in [0,1)");
    if (cfg.sparsity) {
        const SparsityConfig& s = *cfg.sparsity;
        if (!(s.rho > 0.0 && s.rho < 1.0))
            throw config_error("sparsity rho must lie in (0,1)");
        if (s.beta < 0.0) throw config_error("sparsity beta must be nonnegative");
        if (!(s.epsilon > 0.0 && s.epsilon < 0.5))
            throw config_error("sparsity epsilon must lie in (0,0.5)");
        if (cfg.aggregator != Aggregator::attention)
            throw config_error("sparsity penalty requires the attention aggregator");
    }
    if (cfg.trains_tags() && cfg.num_tags == 0)
        throw config_error("mode '" + format_mode(cfg.mode) + "' needs num_tags > 0");
    if (cfg.trains_intent() && cfg.num_intents == 0)
        throw config_error("mode '" + format_mode(cfg.mode) + "' needs num_intents > 0");
    return cfg;
}

// All trainable tensors. Tag embeddings carry one extra row: the
// begin-of-sentence tag used for out-of-range positions in the context
// window. for_each visits tensors in a fixed order, skipping empty ones;
// checkpoints and the optimizer both rely on that order.
template <typename T>
struct ModelParams {
    std::vector<std::size_t> window_sizes;
    Tensor<T> word_emb;
    Tensor<T> tag_emb;
    std::vector<Tensor<T>> conv_w;
    std::vector<Tensor<T>> conv_b;
    Tensor<T> w_lstm, b_lstm;
    Tensor<T> w_tag, b_tag;
    Tensor<T> alpha;
    Tensor<T> w_intent, b_intent;

    template <typename F>
    void for_each(F&& f) {
        auto visit = [&](const std::string& name, Tensor<T>& t) {
            if (t.numel() > 0) f(name, t);
        };
        visit("word_embeddings", word_emb);
        visit("tag_embeddings", tag_emb);
        for (std::size_t i = 0; i < window_sizes.size(); ++i) {
            visit("conv_w_" + std::to_string(window_sizes[i]), conv_w[i]);
            visit("conv_b_" + std::to_string(window_sizes[i]), conv_b[i]);
        }
        visit("w_lstm", w_lstm);
        visit("b_lstm", b_lstm);
        visit("w_tag", w_tag);
        visit("b_tag", b_tag);
        visit("alpha", alpha);
        visit("w_intent", w_intent);
        visit("b_intent", b_intent);
    }

    template <typename F>
    void for_each(F&& f) const {
        const_cast<ModelParams*>(this)->for_each(
            [&](const std::string& name, Tensor<T>& t) {
                f(name, const_cast<const Tensor<T>&>(t));
            });
    }

    void set_requires_grad(bool on) {
        for_each([on](const std::string&, Tensor<T>& t) { t.set_requires_grad(on); });
    }

    void zero_grads() {
        for_each([](const std::string&, Tensor<T>& t) { t.zero_grad(); });
    }

    bool finite() const {
        bool ok = true;
        for_each([&](const std::string&, const Tensor<T>& t) { ok = ok && t.finite(); });
        return ok;
    }
};

template <typename T>
ModelParams<T> make_params(const ModelConfig& cfg, std::size_t num_words) {
    ModelParams<T> p;
    std::size_t d = cfg.hidden_dim;
    p.window_sizes = cfg.window_sizes;
    p.word_emb = Tensor<T>::zeros({num_words, cfg.word_embed_dim});
    p.tag_emb = Tensor<T>::zeros({cfg.num_tags + 1, cfg.tag_embed_dim});
    for (std::size_t w : cfg.window_sizes) {
        p.conv_w.push_back(
            Tensor<T>::zeros({cfg.filters_per_window, cfg.window_input_dim(w)}));
        p.conv_b.push_back(Tensor<T>::zeros({cfg.filters_per_window}));
    }
    p.w_lstm = Tensor<T>::zeros({4 * d, cfg.conv_out_dim() + d});
    p.b_lstm = Tensor<T>::zeros({4 * d});
    p.w_tag = Tensor<T>::zeros({cfg.num_tags, d});
    p.b_tag = Tensor<T>::zeros({cfg.num_tags});
    p.alpha = Tensor<T>::zeros({d});
    p.w_intent = Tensor<T>::zeros({cfg.num_intents, d});
    p.b_intent = Tensor<T>::zeros({cfg.num_intents});
    return p;
}

// Graph handles for one binding of the parameters.
template <typename T>
struct ParamVars {
    Var<T> word_emb, tag_emb;
    std::vector<Var<T>> conv_w, conv_b;
    Var<T> w_lstm, b_lstm, w_tag, b_tag, alpha, w_intent, b_intent;
};

template <typename T>
ParamVars<T> bind_params(Graph<T>& g, const ModelParams<T>& p) {
    ParamVars<T> v;
    v.word_emb = g.leaf(p.word_emb);
    v.tag_emb = g.leaf(p.tag_emb);
    for (std::size_t i = 0; i < p.conv_w.size(); ++i) {
        v.conv_w.push_back(g.leaf(p.conv_w[i]));
        v.conv_b.push_back(g.leaf(p.conv_b[i]));
    }
    v.w_lstm = g.leaf(p.w_lstm);
    v.b_lstm = g.leaf(p.b_lstm);
    if (p.w_tag.numel() > 0) {
        v.w_tag = g.leaf(p.w_tag);
        v.b_tag = g.leaf(p.b_tag);
    }
    v.alpha = g.leaf(p.alpha);
    if (p.w_intent.numel() > 0) {
        v.w_intent = g.leaf(p.w_intent);
        v.b_intent = g.leaf(p.b_intent);
    }
    return v;
}

// Adds each bound node's gradient into the matching tensor's grad buffer.
template <typename T>
void harvest_grads(const ParamVars<T>& v, ModelParams<T>& p) {
    auto pull = [](Var<T> var, Tensor<T>& t) {
        if (!var.valid() || var.node()->grad.empty()) return;
        const auto& src = var.node()->grad;
        for (std::size_t i = 0; i < t.numel(); ++i) t.grad[i] += src[i];
    };
    pull(v.word_emb, p.word_emb);
    pull(v.tag_emb, p.tag_emb);
    for (std::size_t i = 0; i < p.conv_w.size(); ++i) {
        pull(v.conv_w[i], p.conv_w[i]);
        pull(v.conv_b[i], p.conv_b[i]);
    }
    pull(v.w_lstm, p.w_lstm);
    pull(v.b_lstm, p.b_lstm);
    pull(v.w_tag, p.w_tag);
    pull(v.b_tag, p.b_tag);
    pull(v.alpha, p.alpha);
    pull(v.w_intent, p.w_intent);
    pull(v.b_intent, p.b_intent);
}

template <typename T>
struct StepState {
    Var<T> h, c, i, f, o, chat;
};

// [i;f;o;c~] = [sigmoid;sigmoid;sigmoid;tanh](W [x~, h_prev] + b), then
// c = f*c_prev + i*c~ and h = o*tanh(c).
template <typename T>
StepState<T> lstm_step(Graph<T>& g, Var<T> w, Var<T> b, Var<T> x, Var<T> h_prev,
                       Var<T> c_prev) {
    std::size_t d = h_prev.numel();
    if (w.shape().size() != 2 || w.shape()[0] != 4 * d)
        throw dim_error("lstm_step: weight " + shape_str(w.shape()) +
                        " does not produce 4 gates of width " + std::to_string(d));
    Var<T> z = affine(g, w, concat<T>(g, {x, h_prev}), b);
    StepState<T> s;
    s.i = sigmoid(g, slice(g, z, 0, d));
    s.f = sigmoid(g, slice(g, z, d, 2 * d));
    s.o = sigmoid(g, slice(g, z, 2 * d, 3 * d));
    s.chat = tanh(g, slice(g, z, 3 * d, 4 * d));
    s.c = add(g, mul(g, s.f, c_prev), mul(g, s.i, s.chat));
    s.h = mul(g, s.o, tanh(g, s.c));
    return s;
}

namespace detail {

// Supplies word and previous-label vectors for window assembly.
template <typename T>
struct ContextSource {
    const std::vector<Var<T>>* word_rows;  // one per position
    Var<T> pad_row;
    const std::vector<Var<T>>* tag_rows;   // filled up to t-1; null in latent mode
    Var<T> bos_row;
    const std::vector<StepState<T>>* steps;  // latent mode history
    Var<T> zero_state;
};

} // namespace detail

// x_{t,k} = [x_{t-k} .. x_{t+k}, T_{t-k} .. T_{t-1}]. Out-of-range words
// use the pad embedding; out-of-range labels use the begin-of-sentence
// embedding, or the zero vector when labels are hidden states.
template <typename T>
Var<T> context_window(Graph<T>& g, const detail::ContextSource<T>& src, std::size_t t,
                      std::size_t k) {
    std::size_t n = src.word_rows->size();
    if (t >= n)
        throw index_error("context_window: position " + std::to_string(t) +
                          " out of range for length " + std::to_string(n));
    std::vector<Var<T>> parts;
    parts.reserve(2 * k + 1 + k);
    for (std::ptrdiff_t j = std::ptrdiff_t(t) - std::ptrdiff_t(k);
         j <= std::ptrdiff_t(t) + std::ptrdiff_t(k); ++j) {
        bool in = j >= 0 && j < std::ptrdiff_t(n);
        parts.push_back(in ? (*src.word_rows)[std::size_t(j)] : src.pad_row);
    }
    for (std::ptrdiff_t j = std::ptrdiff_t(t) - std::ptrdiff_t(k);
         j < std::ptrdiff_t(t); ++j) {
        if (src.tag_rows)
            parts.push_back(j < 0 ? src.bos_row : (*src.tag_rows)[std::size_t(j)]);
        else
            parts.push_back(j < 0 ? src.zero_state : (*src.steps)[std::size_t(j)].h);
    }
    return concat(g, parts);
}

// relu(W x + b) per window size, concatenated.
template <typename T>
Var<T> conv_features(Graph<T>& g, const ParamVars<T>& pv, const ModelConfig& cfg,
                     const detail::ContextSource<T>& src, std::size_t t) {
    std::vector<Var<T>> featmaps;
    featmaps.reserve(cfg.window_sizes.size());
    for (std::size_t wi = 0; wi < cfg.window_sizes.size(); ++wi) {
        std::size_t k = (cfg.window_sizes[wi] - 1) / 2;
        Var<T> window = context_window(g, src, t, k);
        featmaps.push_back(relu(g, affine(g, pv.conv_w[wi], window, pv.conv_b[wi])));
    }
    return featmaps.size() == 1 ? featmaps[0] : concat(g, featmaps);
}

template <typename T>
struct DecodeResult {
    Var<T> logits;
    std::size_t chosen = 0;
    Var<T> nll;  // valid iff a gold tag was supplied
};

// softmax(W_T h + b); greedy choice with ties toward the lowest index.
template <typename T>
DecodeResult<T> decode_tag(Graph<T>& g, const ParamVars<T>& pv, Var<T> h,
                           std::optional<std::size_t> gold) {
    DecodeResult<T> r;
    r.logits = affine(g, pv.w_tag, h, pv.b_tag);
    const auto& v = r.logits.value();
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[r.chosen]) r.chosen = i;
    if (gold) r.nll = softmax_nll(g, r.logits, *gold);
    return r;
}

template <typename T>
struct AggregateResult {
    Var<T> hhat;
    std::vector<Var<T>> weights;  // attention only; one scalar per position
};

// max-pool / avg-pool / unnormalized sigmoid attention over the valid
// hidden states. Attention weights are shared with the sparsity penalty,
// so the budget shapes both alpha and the hidden states themselves.
template <typename T>
AggregateResult<T> aggregate(Graph<T>& g, const ParamVars<T>& pv, Aggregator kind,
                             const std::vector<Var<T>>& hs) {
    if (hs.empty()) throw dim_error("aggregate: no valid positions");
    AggregateResult<T> r;
    switch (kind) {
        case Aggregator::max_pool:
            r.hhat = max_over(g, hs);
            return r;
        case Aggregator::avg_pool:
            r.hhat = scale(g, add_n(g, hs), T(1) / T(hs.size()));
            return r;
        case Aggregator::attention: {
            std::vector<Var<T>> terms;
            terms.reserve(hs.size());
            for (Var<T> h : hs) {
                Var<T> w = sigmoid(g, dot(g, h, pv.alpha));
                r.weights.push_back(w);
                terms.push_back(scale_by(g, h, w));
            }
            r.hhat = terms.size() == 1 ? terms[0] : add_n(g, terms);
            return r;
        }
    }
    throw config_error("bad aggregator value");
}

template <typename T>
struct ClassifyResult {
    Var<T> logits;
    std::size_t chosen = 0;
    Var<T> nll;  // valid iff a gold intent was supplied
};

template <typename T>
ClassifyResult<T> classify_sentence(Graph<T>& g, const ParamVars<T>& pv, Var<T> hhat,
                                    std::optional<std::size_t> gold) {
    ClassifyResult<T> r;
    r.logits = affine(g, pv.w_intent, hhat, pv.b_intent);
    const auto& v = r.logits.value();
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[r.chosen]) r.chosen = i;
    if (gold) {
        if (*gold >= v.size())
            throw index_error("classify_sentence: gold intent " + std::to_string(*gold) +
                              " out of range for " + std::to_string(v.size()) +
                              " intents");
        r.nll = softmax_nll(g, r.logits, *gold);
    }
    return r;
}

// Inverted dropout: components are zeroed with probability `rate` and the
// survivors scaled by 1/(1-rate), so expectations match inference, where
// this is the identity.
template <typename T>
Var<T> dropout(Graph<T>& g, Var<T> x, double rate, bool training, std::mt19937* rng) {
    if (!(rate >= 0.0 && rate < 1.0))
        throw config_error("dropout rate must lie in [0,1), got " + std::to_string(rate));
    if (!training || rate == 0.0) return x;
    if (!rng) throw config_error("dropout requires a random source during training");
    T keep = T(1.0 - rate);
    Shape shape = x.shape();
    std::vector<T> mask(x.numel());
    for (auto& v : mask)
        v = unit_uniform(*rng) < double(keep) ? T(1) / keep : T(0);
    return mul(g, x, g.constant(shape, std::move(mask)));
}

template <typename T>
struct ForwardOptions {
    bool training = false;       // enables dropout
    std::mt19937* rng = nullptr; // dropout randomness; required when active
};

template <typename T>
struct SentenceRun {
    std::vector<StepState<T>> steps;
    std::vector<std::size_t> predicted_tags;  // empty when no tag head ran
    std::vector<Var<T>> attention;            // per-position weights
    Var<T> seq_nll;   // summed over steps; valid iff the tag loss ran
    Var<T> hhat;      // valid iff the sentence path ran
    Var<T> intent_logits;
    std::ptrdiff_t predicted_intent = -1;
    Var<T> sent_nll;  // valid iff a gold intent was supplied
};

// Unrolls one sentence. Gold tags, when given, are teacher-forced into the
// context window and scored; otherwise the model's own greedy tags feed
// the window. Gold intent, when given, adds the sentence loss.
template <typename T>
SentenceRun<T> run_sentence(Graph<T>& g, const ParamVars<T>& pv, const ModelConfig& cfg,
                            const std::vector<std::size_t>& words,
                            const std::size_t* gold_tags,
                            std::optional<std::size_t> gold_intent,
                            const ForwardOptions<T>& opts) {
    if (words.empty()) throw dim_error("run_sentence: empty sentence");
    std::size_t n = words.size();
    std::size_t d = cfg.hidden_dim;
    bool latent = cfg.mode == Mode::latent;
    bool decode = cfg.uses_tag_channel() && cfg.num_tags > 0;
    bool score_tags = cfg.trains_tags() && gold_tags != nullptr;

    SentenceRun<T> run;
    std::vector<Var<T>> word_rows;
    word_rows.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        word_rows.push_back(row(g, pv.word_emb, words[j]));
    std::vector<Var<T>> tag_rows(n);

    detail::ContextSource<T> src;
    src.word_rows = &word_rows;
    src.pad_row = row(g, pv.word_emb, Vocab::pad);
    src.tag_rows = latent ? nullptr : &tag_rows;
    if (!latent) src.bos_row = row(g, pv.tag_emb, cfg.num_tags);
    src.steps = &run.steps;
    if (latent) src.zero_state = g.zeros(d);

    Var<T> h_prev = g.zeros(d);
    Var<T> c_prev = g.zeros(d);
    std::vector<Var<T>> nlls;
    for (std::size_t t = 0; t < n; ++t) {
        Var<T> feat = dropout(g, conv_features(g, pv, cfg, src, t), cfg.dropout_rate,
                              opts.training, opts.rng);
        StepState<T> s = lstm_step(g, pv.w_lstm, pv.b_lstm, feat, h_prev, c_prev);
        run.steps.push_back(s);
        h_prev = s.h;
        c_prev = s.c;

        if (decode) {
            DecodeResult<T> dec = decode_tag<T>(
                g, pv, s.h,
                score_tags ? std::optional<std::size_t>(gold_tags[t]) : std::nullopt);
            run.predicted_tags.push_back(dec.chosen);
            if (score_tags) nlls.push_back(dec.nll);
            std::size_t next_tag = gold_tags ? gold_tags[t] : dec.chosen;
            tag_rows[t] = row(g, pv.tag_emb, next_tag);
        } else if (!latent) {
            // No tag head: the label channel carries the begin-of-sentence
            // embedding throughout.
            tag_rows[t] = src.bos_row;
        }
    }
    if (score_tags)
        run.seq_nll = nlls.size() == 1 ? nlls[0] : add_n(g, nlls);

    if (cfg.trains_intent() && cfg.num_intents > 0) {
        std::vector<Var<T>> hs;
        hs.reserve(n);
        for (const StepState<T>& s : run.steps) hs.push_back(s.h);
        AggregateResult<T> agg = aggregate(g, pv, cfg.aggregator, hs);
        run.hhat = agg.hhat;
        run.attention = std::move(agg.weights);
        ClassifyResult<T> cls = classify_sentence(g, pv, run.hhat, gold_intent);
        run.intent_logits = cls.logits;
        run.predicted_intent = std::ptrdiff_t(cls.chosen);
        run.sent_nll = cls.nll;
    }
    return run;
}

// rho_hat_t = mean of the position-t weights over the sentences that reach
// position t, clamped into (epsilon, 1-epsilon). One element per position
// of the longest sentence.
template <typename T>
Var<T> batch_attention_mean(Graph<T>& g, const std::vector<SentenceRun<T>>& runs,
                            T epsilon) {
    std::size_t max_len = 0;
    for (const auto& r : runs) max_len = std::max(max_len, r.attention.size());
    if (max_len == 0) throw dim_error("batch_attention_mean: no attention weights");
    std::vector<Var<T>> means;
    means.reserve(max_len);
    for (std::size_t t = 0; t < max_len; ++t) {
        std::vector<Var<T>> at_t;
        for (const auto& r : runs)
            if (t < r.attention.size()) at_t.push_back(r.attention[t]);
        Var<T> mean = at_t.size() == 1
                          ? at_t[0]
                          : scale(g, add_n(g, at_t), T(1) / T(at_t.size()));
        means.push_back(mean);
    }
    return clamp(g, concat(g, means), epsilon, T(1) - epsilon);
}

template <typename T>
struct LossBreakdown {
    T seq_loss = T(0);
    T sent_loss = T(0);
    T sparsity_penalty = T(0);
    T total = T(0);
};

template <typename T>
struct BatchRun {
    std::vector<SentenceRun<T>> sentences;
    Var<T> seq_loss, sent_loss, penalty, total;
    LossBreakdown<T> breakdown;
};

// total = seq + sent + beta * penalty, built in the graph exactly as the
// breakdown reports it so the decomposition is bit-identical.
template <typename T>
BatchRun<T> joint_loss(Graph<T>& g, const ParamVars<T>& pv, const ModelConfig& cfg,
                       const Batch& batch, const ForwardOptions<T>& opts) {
    if (batch.m == 0) throw data_error("joint_loss: empty batch");
    if (cfg.trains_tags() && !batch.has_tags)
        throw data_error("mode '" + format_mode(cfg.mode) +
                         "' requires gold tags on every sentence");
    if (cfg.trains_intent())
        for (std::size_t i = 0; i < batch.m; ++i)
            if (batch.intents[i] < 0)
                throw data_error("mode '" + format_mode(cfg.mode) +
                                 "' requires a gold intent on every sentence");

    BatchRun<T> out;
    std::vector<Var<T>> seq_terms, sent_terms;
    std::vector<std::size_t> words, tags;
    for (std::size_t i = 0; i < batch.m; ++i) {
        words.assign(batch.words.begin() + std::ptrdiff_t(i * batch.L),
                     batch.words.begin() + std::ptrdiff_t(i * batch.L + batch.lengths[i]));
        const std::size_t* gold_tags = nullptr;
        if (batch.has_tags && cfg.trains_tags()) {
            tags.assign(batch.tags.begin() + std::ptrdiff_t(i * batch.L),
                        batch.tags.begin() + std::ptrdiff_t(i * batch.L + batch.lengths[i]));
            gold_tags = tags.data();
        }
        std::optional<std::size_t> gold_intent;
        if (cfg.trains_intent() && batch.intents[i] >= 0)
            gold_intent = std::size_t(batch.intents[i]);
        out.sentences.push_back(
            run_sentence(g, pv, cfg, words, gold_tags, gold_intent, opts));
        SentenceRun<T>& run = out.sentences.back();
        if (run.seq_nll.valid()) seq_terms.push_back(run.seq_nll);
        if (run.sent_nll.valid()) sent_terms.push_back(run.sent_nll);
    }

    T inv_m = T(1) / T(batch.m);
    out.seq_loss = seq_terms.empty()
                       ? g.scalar(T(0))
                       : scale(g, seq_terms.size() == 1 ? seq_terms[0]
                                                        : add_n(g, seq_terms),
                               inv_m);
    out.sent_loss = sent_terms.empty()
                        ? g.scalar(T(0))
                        : scale(g, sent_terms.size() == 1 ? sent_terms[0]
                                                          : add_n(g, sent_terms),
                                inv_m);

    T beta = T(0);
    bool penalize = cfg.sparsity && cfg.sparsity->beta > 0.0 &&
                    cfg.aggregator == Aggregator::attention && cfg.trains_intent();
    if (penalize) {
        beta = T(cfg.sparsity->beta);
        Var<T> rho_hat = batch_attention_mean(g, out.sentences, T(cfg.sparsity->epsilon));
        out.penalty = kl_bernoulli(g, T(cfg.sparsity->rho), rho_hat);
    } else {
        out.penalty = g.scalar(T(0));
    }
    out.total = add(g, add(g, out.seq_loss, out.sent_loss), scale(g, out.penalty, beta));

    out.breakdown.seq_loss = out.seq_loss.scalar();
    out.breakdown.sent_loss = out.sent_loss.scalar();
    out.breakdown.sparsity_penalty = out.penalty.scalar();
    out.breakdown.total = out.total.scalar();
    return out;
}

// ---- inference ----

template <typename T>
struct Prediction {
    std::vector<std::size_t> tags;    // empty when the model has no tag head
    std::ptrdiff_t intent = -1;       // -1 when the model has no intent head
    std::vector<T> intent_dist;
    std::vector<T> attention;         // raw weights, attention models only
};

// Greedy single-sentence inference: the model's own previous tags feed the
// context window; no dropout.
template <typename T>
Prediction<T> predict(const ModelParams<T>& params, const ModelConfig& cfg,
                      const std::vector<std::size_t>& words) {
    Graph<T> g;
    ParamVars<T> pv = bind_params(g, params);
    ForwardOptions<T> opts;
    SentenceRun<T> run = run_sentence(g, pv, cfg, words, nullptr, std::nullopt, opts);
    Prediction<T> out;
    out.tags = run.predicted_tags;
    out.intent = run.predicted_intent;
    if (run.intent_logits.valid()) out.intent_dist = softmax_values(run.intent_logits.value());
    out.attention.reserve(run.attention.size());
    for (Var<T> w : run.attention) out.attention.push_back(w.scalar());
    return out;
}

} // namespace jslu

#endif
