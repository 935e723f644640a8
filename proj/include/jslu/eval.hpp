#ifndef JSLU_EVAL_HPP
#define JSLU_EVAL_HPP

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "jslu/data.hpp"
#include "jslu/errors.hpp"
#include "jslu/model.hpp"

// Span-exact F1 for slot filling, intent accuracy / error rate, and
// attention trace export in JSON and terminal form.

namespace jslu {

struct Span {
    std::string type;
    std::size_t start = 0;  // token index
    std::size_t end = 0;    // inclusive

    auto operator<=>(const Span&) const = default;
};

struct SpanExtraction {
    std::vector<Span> spans;
    std::size_t repairs = 0;  // illegal I-X starts treated as B-X
};

// Maximal B/I runs per type. An I-X with no live span of type X is
// repaired to B-X, the usual convention for scoring greedy decoders.
inline SpanExtraction extract_spans(const std::vector<std::string>& tags) {
    SpanExtraction out;
    bool open = false;
    Span cur;
    auto close = [&](std::size_t end) {
        if (open) {
            cur.end = end;
            out.spans.push_back(cur);
            open = false;
        }
    };
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const std::string& t = tags[i];
        if (t == "O") {
            close(i - 1);
            continue;
        }
        if (!tag_well_formed(t)) throw data_error("malformed tag '" + t + "'");
        std::string type = t.substr(2);
        if (t[0] == 'I' && open && cur.type == type) continue;
        if (t[0] == 'I') ++out.repairs;
        close(i - 1);
        cur = Span{type, i, i};
        open = true;
    }
    close(tags.size() - 1);
    return out;
}

// Inverse of extract_spans for legal, non-overlapping span sets.
inline std::vector<std::string> render_bio(const std::vector<Span>& spans,
                                           std::size_t length) {
    std::vector<std::string> tags(length, "O");
    for (const Span& s : spans) {
        if (s.end >= length || s.start > s.end)
            throw data_error("span (" + s.type + "," + std::to_string(s.start) + "," +
                             std::to_string(s.end) + ") does not fit length " +
                             std::to_string(length));
        tags[s.start] = "B-" + s.type;
        for (std::size_t i = s.start + 1; i <= s.end; ++i) tags[i] = "I-" + s.type;
    }
    return tags;
}

struct SlotScore {
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    std::size_t gold_spans = 0, predicted_spans = 0, matched_spans = 0;
    std::size_t repairs = 0;  // on the predicted side
};

inline SlotScore slot_score(const std::vector<std::vector<std::string>>& gold,
                            const std::vector<std::vector<std::string>>& predicted) {
    if (gold.size() != predicted.size())
        throw data_error("slot_score: " + std::to_string(gold.size()) +
                         " gold sentences vs " + std::to_string(predicted.size()) +
                         " predictions");
    SlotScore s;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i].size() != predicted[i].size())
            throw data_error("slot_score: sentence " + std::to_string(i) + " has " +
                             std::to_string(gold[i].size()) + " gold tags vs " +
                             std::to_string(predicted[i].size()) + " predicted");
        SpanExtraction g = extract_spans(gold[i]);
        SpanExtraction p = extract_spans(predicted[i]);
        s.repairs += p.repairs;
        std::set<Span> gset(g.spans.begin(), g.spans.end());
        s.gold_spans += g.spans.size();
        s.predicted_spans += p.spans.size();
        for (const Span& span : p.spans) s.matched_spans += gset.count(span);
    }
    s.precision = s.predicted_spans ? double(s.matched_spans) / double(s.predicted_spans)
                                    : 0.0;
    s.recall = s.gold_spans ? double(s.matched_spans) / double(s.gold_spans) : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

struct IntentScore {
    double accuracy = 0.0, error = 1.0;
    std::size_t total = 0, correct = 0;
    std::vector<std::vector<std::size_t>> confusion;  // [gold][predicted]
};

inline IntentScore intent_score(const std::vector<std::size_t>& gold,
                                const std::vector<std::size_t>& predicted,
                                std::size_t num_intents) {
    if (gold.size() != predicted.size())
        throw data_error("intent_score: " + std::to_string(gold.size()) + " gold vs " +
                         std::to_string(predicted.size()) + " predictions");
    IntentScore s;
    s.total = gold.size();
    s.confusion.assign(num_intents, std::vector<std::size_t>(num_intents, 0));
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i] >= num_intents || predicted[i] >= num_intents)
            throw index_error("intent_score: label out of range at sentence " +
                              std::to_string(i));
        ++s.confusion[gold[i]][predicted[i]];
        if (gold[i] == predicted[i]) ++s.correct;
    }
    if (s.total) {
        s.accuracy = double(s.correct) / double(s.total);
        s.error = 1.0 - s.accuracy;
    }
    return s;
}

struct EvalReport {
    bool has_slots = false;
    bool has_intents = false;
    SlotScore slots;
    IntentScore intents;
    std::vector<std::string> intent_names;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["slot"] = nullptr;
        j["intent"] = nullptr;
        if (has_slots)
            j["slot"] = {{"precision", slots.precision},
                         {"recall", slots.recall},
                         {"f1", slots.f1},
                         {"gold_spans", slots.gold_spans},
                         {"predicted_spans", slots.predicted_spans},
                         {"matched_spans", slots.matched_spans},
                         {"bio_repairs", slots.repairs}};
        if (has_intents) {
            j["intent"] = {{"accuracy", intents.accuracy},
                           {"error", intents.error},
                           {"total", intents.total},
                           {"correct", intents.correct},
                           {"confusion", intents.confusion},
                           {"labels", intent_names}};
        }
        return j;
    }

    // Two headline columns, then supporting counts.
    std::string table() const {
        std::ostringstream os;
        os << "Slot\tIntent\n";
        os << std::fixed << std::setprecision(2);
        if (has_slots)
            os << 100.0 * slots.f1;
        else
            os << "-";
        os << "\t";
        if (has_intents)
            os << 100.0 * intents.error;
        else
            os << "-";
        os << "\n";
        if (has_slots)
            os << "slot precision " << 100.0 * slots.precision << "  recall "
               << 100.0 * slots.recall << "  spans " << slots.matched_spans << "/"
               << slots.predicted_spans << " predicted, " << slots.gold_spans
               << " gold, " << slots.repairs << " repaired\n";
        if (has_intents)
            os << "intent accuracy " << 100.0 * intents.accuracy << "  ("
               << intents.correct << "/" << intents.total << ")\n";
        return os.str();
    }
};

// Greedy inference over a corpus, scored against whatever gold labels the
// examples carry.
template <typename T>
EvalReport evaluate_model(const ModelParams<T>& params, const ModelConfig& cfg,
                          const Vocab& vocab, const Corpus& corpus) {
    std::vector<std::vector<std::string>> gold_tags, pred_tags;
    std::vector<std::size_t> gold_intents, pred_intents;
    bool tag_head = cfg.uses_tag_channel() && cfg.num_tags > 0;
    bool intent_head = cfg.trains_intent() && cfg.num_intents > 0;
    for (const Example& ex : corpus) {
        std::vector<std::size_t> words;
        words.reserve(ex.tokens.size());
        for (const std::string& w : ex.tokens) words.push_back(vocab.word(w));
        Prediction<T> pred = predict(params, cfg, words);
        if (tag_head && ex.tags) {
            gold_tags.push_back(*ex.tags);
            std::vector<std::string> tags;
            tags.reserve(pred.tags.size());
            for (std::size_t t : pred.tags) tags.push_back(vocab.tag_name(t));
            pred_tags.push_back(std::move(tags));
        }
        if (intent_head && ex.intent) {
            gold_intents.push_back(vocab.intent(*ex.intent));
            pred_intents.push_back(std::size_t(pred.intent));
        }
    }
    EvalReport report;
    if (!gold_tags.empty()) {
        report.has_slots = true;
        report.slots = slot_score(gold_tags, pred_tags);
    }
    if (!gold_intents.empty()) {
        report.has_intents = true;
        report.intents = intent_score(gold_intents, pred_intents, cfg.num_intents);
        for (std::size_t i = 0; i < cfg.num_intents; ++i)
            report.intent_names.push_back(vocab.intent_name(i));
    }
    return report;
}

// ---- attention traces ----

struct AttentionTrace {
    std::vector<std::string> tokens;
    std::vector<double> weights;  // raw, unnormalized
    std::string predicted_intent;
    std::string gold_intent;

    bool operator==(const AttentionTrace&) const = default;
};

template <typename T>
std::vector<AttentionTrace> attention_traces(const ModelParams<T>& params,
                                             const ModelConfig& cfg, const Vocab& vocab,
                                             const Corpus& corpus) {
    if (cfg.aggregator != Aggregator::attention)
        throw unsupported_error("attention traces require the attention aggregator");
    if (!cfg.trains_intent() || cfg.num_intents == 0)
        throw unsupported_error("attention traces require the sentence path");
    std::vector<AttentionTrace> traces;
    traces.reserve(corpus.size());
    for (const Example& ex : corpus) {
        std::vector<std::size_t> words;
        words.reserve(ex.tokens.size());
        for (const std::string& w : ex.tokens) words.push_back(vocab.word(w));
        Prediction<T> pred = predict(params, cfg, words);
        AttentionTrace tr;
        tr.tokens = ex.tokens;
        tr.weights.assign(pred.attention.begin(), pred.attention.end());
        if (pred.intent >= 0) tr.predicted_intent = vocab.intent_name(std::size_t(pred.intent));
        if (ex.intent) tr.gold_intent = *ex.intent;
        traces.push_back(std::move(tr));
    }
    return traces;
}

inline void export_attention_json(const std::vector<AttentionTrace>& traces,
                                  std::ostream& out) {
    for (const AttentionTrace& t : traces) {
        nlohmann::json j;
        j["tokens"] = t.tokens;
        j["weights"] = t.weights;
        j["predicted_intent"] = t.predicted_intent;
        j["gold_intent"] = t.gold_intent;
        out << j.dump() << "\n";
    }
}

inline std::vector<AttentionTrace> parse_attention_json(std::istream& in) {
    std::vector<AttentionTrace> traces;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            AttentionTrace t;
            t.tokens = j.at("tokens").get<std::vector<std::string>>();
            t.weights = j.at("weights").get<std::vector<double>>();
            t.predicted_intent = j.at("predicted_intent").get<std::string>();
            t.gold_intent = j.at("gold_intent").get<std::string>();
            traces.push_back(std::move(t));
        } catch (const nlohmann::json::exception& e) {
            throw data_error("attention trace line " + std::to_string(line_no) + ": " +
                             e.what());
        }
    }
    return traces;
}

// Tokens on a blue background whose intensity tracks the weight. The
// shading is min-max scaled per sentence for contrast only; JSON output
// carries the raw weights.
inline void export_attention_ansi(const std::vector<AttentionTrace>& traces,
                                  std::ostream& out) {
    static const int shades[] = {254, 153, 111, 69, 27};  // light to dark blue
    for (const AttentionTrace& t : traces) {
        double lo = 1.0, hi = 0.0;
        for (double w : t.weights) {
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
        for (std::size_t i = 0; i < t.tokens.size(); ++i) {
            int level = 2;
            if (hi > lo)
                level = int(std::lround(4.0 * (t.weights[i] - lo) / (hi - lo)));
            out << "\x1b[30;48;5;" << shades[level] << "m" << t.tokens[i] << "\x1b[0m ";
        }
        out << " [" << (t.predicted_intent.empty() ? "?" : t.predicted_intent);
        if (!t.gold_intent.empty()) out << " / gold " << t.gold_intent;
        out << "]\n";
    }
}

} // namespace jslu

#endif
