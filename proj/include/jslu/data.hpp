#ifndef JSLU_DATA_HPP
#define JSLU_DATA_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jslu/errors.hpp"
#include "jslu/rng.hpp"
#include "jslu/tensor.hpp"

// Corpus handling: column / JSON-lines parsing, vocabulary maps, padded
// minibatching, pre-trained embedding overlays, and a seeded synthetic
// corpus generator used by the desk-scale experiments.

namespace jslu {

struct Example {
    std::vector<std::string> tokens;
    std::optional<std::vector<std::string>> tags;
    std::optional<std::string> intent;

    bool operator==(const Example&) const = default;
};

using Corpus = std::vector<Example>;

enum class CorpusFormat { columns, jsonl };

inline CorpusFormat parse_format(const std::string& s) {
    if (s == "columns") return CorpusFormat::columns;
    if (s == "jsonl") return CorpusFormat::jsonl;
    throw config_error("format must be 'columns' or 'jsonl', got '" + s + "'");
}

// ---- BIO tags ----

inline bool tag_well_formed(const std::string& tag) {
    if (tag == "O") return true;
    return tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

// Index of the first I-X not preceded by B-X / I-X, or npos when legal.
inline std::size_t bio_violation(const std::vector<std::string>& tags) {
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (tags[i].size() < 2 || tags[i][0] != 'I') continue;
        std::string type = tags[i].substr(2);
        if (i == 0 || tags[i - 1].size() < 2 || tags[i - 1].substr(2) != type)
            return i;
    }
    return std::size_t(-1);
}

// ---- vocabulary ----

// Frozen string<->index maps. Word indices reserve PAD = 0 and UNK = 1;
// unknown words map to UNK. The tag table appends a BOS entry after the
// real tags so out-of-range tag context has an embedding row; BOS is never
// a prediction target.
class Vocab {
public:
    static constexpr std::size_t pad = 0;
    static constexpr std::size_t unk = 1;

    Vocab() = default;

    std::size_t num_words() const { return words_.size() + 2; }
    std::size_t num_tags() const { return tags_.size(); }
    std::size_t num_intents() const { return intents_.size(); }
    std::size_t bos_tag() const { return tags_.size(); }
    bool frozen() const { return frozen_; }

    std::size_t word(const std::string& w) const {
        auto it = word_index_.find(w);
        return it == word_index_.end() ? unk : it->second;
    }

    std::size_t tag(const std::string& t) const {
        auto it = tag_index_.find(t);
        if (it == tag_index_.end())
            throw data_error("unknown tag '" + t + "'");
        return it->second;
    }

    std::size_t intent(const std::string& s) const {
        auto it = intent_index_.find(s);
        if (it == intent_index_.end())
            throw data_error("unknown intent '" + s + "'");
        return it->second;
    }

    const std::string& word_name(std::size_t i) const {
        static const std::string pad_name = "<pad>", unk_name = "<unk>";
        if (i == pad) return pad_name;
        if (i == unk) return unk_name;
        if (i - 2 >= words_.size())
            throw index_error("word index " + std::to_string(i) + " out of range");
        return words_[i - 2];
    }

    const std::string& tag_name(std::size_t i) const {
        static const std::string bos_name = "<bos>";
        if (i == bos_tag()) return bos_name;
        if (i >= tags_.size())
            throw index_error("tag index " + std::to_string(i) + " out of range");
        return tags_[i];
    }

    const std::string& intent_name(std::size_t i) const {
        if (i >= intents_.size())
            throw index_error("intent index " + std::to_string(i) + " out of range");
        return intents_[i];
    }

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"words", words_}, {"tags", tags_}, {"intents", intents_}};
    }

    static Vocab from_json(const nlohmann::json& j) {
        Vocab v;
        v.words_ = j.at("words").get<std::vector<std::string>>();
        v.tags_ = j.at("tags").get<std::vector<std::string>>();
        v.intents_ = j.at("intents").get<std::vector<std::string>>();
        v.reindex();
        v.frozen_ = true;
        return v;
    }

    friend Vocab build_vocab(const Corpus& corpus, std::size_t min_count);

private:
    void reindex() {
        word_index_.clear();
        tag_index_.clear();
        intent_index_.clear();
        for (std::size_t i = 0; i < words_.size(); ++i) word_index_[words_[i]] = i + 2;
        for (std::size_t i = 0; i < tags_.size(); ++i) tag_index_[tags_[i]] = i;
        for (std::size_t i = 0; i < intents_.size(); ++i) intent_index_[intents_[i]] = i;
    }

    std::vector<std::string> words_;    // index 2..
    std::vector<std::string> tags_;     // index 0..; BOS implicit at the end
    std::vector<std::string> intents_;  // index 0..
    std::unordered_map<std::string, std::size_t> word_index_;
    std::unordered_map<std::string, std::size_t> tag_index_;
    std::unordered_map<std::string, std::size_t> intent_index_;
    bool frozen_ = false;
};

namespace detail {

// Count-descending, then lexicographic.
inline std::vector<std::string> ranked(const std::map<std::string, std::size_t>& counts) {
    std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    out.reserve(items.size());
    for (auto& [name, n] : items) out.push_back(name);
    return out;
}

} // namespace detail

inline Vocab build_vocab(const Corpus& corpus, std::size_t min_count = 1) {
    if (corpus.empty()) throw data_error("cannot build a vocabulary from an empty corpus");
    std::map<std::string, std::size_t> word_counts, tag_counts, intent_counts;
    for (const Example& ex : corpus) {
        for (const std::string& t : ex.tokens) ++word_counts[t];
        if (ex.tags)
            for (const std::string& t : *ex.tags) {
                ++tag_counts[t];
                // Pair up B-X / I-X so decoding can emit either even when
                // the corpus happens to contain only one of them.
                if (t.size() > 2 && (t[0] == 'B' || t[0] == 'I')) {
                    tag_counts.try_emplace("B-" + t.substr(2), 0);
                    tag_counts.try_emplace("I-" + t.substr(2), 0);
                }
            }
        if (ex.intent) ++intent_counts[*ex.intent];
    }
    Vocab v;
    for (const std::string& w : detail::ranked(word_counts))
        if (word_counts[w] >= min_count) v.words_.push_back(w);
    v.tags_ = detail::ranked(tag_counts);
    v.intents_ = detail::ranked(intent_counts);
    v.reindex();
    v.frozen_ = true;
    return v;
}

// ---- parsing ----

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
        std::size_t tab = line.find('\t', pos);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(pos));
            return fields;
        }
        fields.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
}

[[noreturn]] inline void parse_fail(std::size_t line_no, const std::string& msg) {
    throw data_error("line " + std::to_string(line_no) + ": " + msg);
}

inline void validate_example(const Example& ex, std::size_t line_no,
                             const std::vector<std::size_t>& body_lines) {
    if (ex.tokens.empty()) parse_fail(line_no, "sentence has no tokens");
    if (!ex.tags) return;
    if (ex.tags->size() != ex.tokens.size())
        parse_fail(line_no, "sentence has " + std::to_string(ex.tokens.size()) +
                                " tokens but " + std::to_string(ex.tags->size()) +
                                " tags");
    for (std::size_t i = 0; i < ex.tags->size(); ++i)
        if (!tag_well_formed((*ex.tags)[i]))
            parse_fail(body_lines.empty() ? line_no : body_lines[i],
                       "malformed tag '" + (*ex.tags)[i] + "'");
    std::size_t bad = bio_violation(*ex.tags);
    if (bad != std::size_t(-1))
        parse_fail(body_lines.empty() ? line_no : body_lines[bad],
                   "illegal transition into '" + (*ex.tags)[bad] +
                       "' (I- tag without a preceding span of the same type)");
}

} // namespace detail

inline Corpus parse_columns(std::istream& in) {
    static const std::string intent_prefix = "# intent:\t";
    Corpus corpus;
    Example cur;
    std::vector<std::string> cur_tags;
    std::vector<std::size_t> body_lines;
    std::size_t line_no = 0;
    // -1 unknown, 0 untagged, 1 tagged; the column layout is corpus-wide.
    int tagged = -1;

    auto flush = [&](std::size_t at_line) {
        if (cur.tokens.empty() && !cur.intent) return;
        if (tagged == 1) cur.tags = cur_tags;
        detail::validate_example(cur, at_line, body_lines);
        corpus.push_back(std::move(cur));
        cur = Example{};
        cur_tags.clear();
        body_lines.clear();
    };

    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush(line_no);
            continue;
        }
        if (line.rfind(intent_prefix, 0) == 0) {
            if (!cur.tokens.empty())
                detail::parse_fail(line_no, "intent header in the middle of a sentence");
            if (cur.intent)
                detail::parse_fail(line_no, "duplicate intent header");
            std::string label = line.substr(intent_prefix.size());
            if (label.empty()) detail::parse_fail(line_no, "empty intent label");
            cur.intent = label;
            continue;
        }
        std::vector<std::string> fields = detail::split_tabs(line);
        if (fields.size() > 2)
            detail::parse_fail(line_no, "expected 'token<TAB>tag' or 'token', got " +
                                            std::to_string(fields.size()) + " fields");
        if (fields[0].empty()) detail::parse_fail(line_no, "empty token");
        int line_tagged = fields.size() == 2 ? 1 : 0;
        if (tagged == -1) tagged = line_tagged;
        if (tagged != line_tagged)
            detail::parse_fail(line_no, tagged == 1
                                            ? "missing tag column in a tagged corpus"
                                            : "tag column in an untagged corpus");
        if (line_tagged == 1) {
            if (fields[1].empty()) detail::parse_fail(line_no, "empty tag");
            cur_tags.push_back(fields[1]);
        }
        cur.tokens.push_back(fields[0]);
        body_lines.push_back(line_no);
    }
    flush(line_no + 1);
    return corpus;
}

inline Corpus parse_jsonl(std::istream& in) {
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            detail::parse_fail(line_no, std::string("invalid JSON: ") + e.what());
        }
        Example ex;
        try {
            ex.tokens = j.at("tokens").get<std::vector<std::string>>();
            if (j.contains("tags") && !j["tags"].is_null())
                ex.tags = j["tags"].get<std::vector<std::string>>();
            if (j.contains("intent") && !j["intent"].is_null())
                ex.intent = j["intent"].get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            detail::parse_fail(line_no, std::string("bad record: ") + e.what());
        }
        detail::validate_example(ex, line_no, {});
        corpus.push_back(std::move(ex));
    }
    return corpus;
}

inline Corpus parse_corpus(std::istream& in, CorpusFormat format) {
    return format == CorpusFormat::columns ? parse_columns(in) : parse_jsonl(in);
}

inline Corpus parse_corpus(const std::string& path, CorpusFormat format) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open corpus file '" + path + "'");
    try {
        return parse_corpus(in, format);
    } catch (const data_error& e) {
        throw data_error(path + ": " + e.what());
    }
}

// ---- serialization ----

inline void serialize_columns(const Corpus& corpus, std::ostream& out) {
    for (std::size_t s = 0; s < corpus.size(); ++s) {
        if (s) out << "\n";
        const Example& ex = corpus[s];
        if (ex.intent) out << "# intent:\t" << *ex.intent << "\n";
        for (std::size_t i = 0; i < ex.tokens.size(); ++i) {
            out << ex.tokens[i];
            if (ex.tags) out << "\t" << (*ex.tags)[i];
            out << "\n";
        }
    }
}

inline void serialize_jsonl(const Corpus& corpus, std::ostream& out) {
    for (const Example& ex : corpus) {
        nlohmann::json j;
        j["tokens"] = ex.tokens;
        j["tags"] = ex.tags ? nlohmann::json(*ex.tags) : nlohmann::json(nullptr);
        j["intent"] = ex.intent ? nlohmann::json(*ex.intent) : nlohmann::json(nullptr);
        out << j.dump() << "\n";
    }
}

inline void serialize_corpus(const Corpus& corpus, std::ostream& out,
                             CorpusFormat format) {
    if (format == CorpusFormat::columns)
        serialize_columns(corpus, out);
    else
        serialize_jsonl(corpus, out);
}

// ---- batching ----

struct Batch {
    std::size_t m = 0;  // sentences
    std::size_t L = 0;  // padded length
    std::vector<std::size_t> words;      // m*L, PAD in masked cells
    std::vector<std::size_t> tags;       // m*L when has_tags
    bool has_tags = false;
    std::vector<std::ptrdiff_t> intents;  // -1 when absent
    std::vector<unsigned char> mask;      // m*L, 1 inside the sentence
    std::vector<std::size_t> lengths;

    std::size_t word(std::size_t i, std::size_t t) const { return words[i * L + t]; }
    std::size_t tag(std::size_t i, std::size_t t) const { return tags[i * L + t]; }
    bool inside(std::size_t i, std::size_t t) const { return mask[i * L + t] != 0; }
};

inline Batch pack_batch(const Corpus& corpus, const std::vector<std::size_t>& which,
                        const Vocab& vocab) {
    Batch b;
    b.m = which.size();
    for (std::size_t i : which) b.L = std::max(b.L, corpus[i].tokens.size());
    b.words.assign(b.m * b.L, Vocab::pad);
    b.mask.assign(b.m * b.L, 0);
    b.lengths.resize(b.m);
    b.intents.assign(b.m, -1);
    b.has_tags = true;
    for (std::size_t i : which)
        if (!corpus[i].tags) b.has_tags = false;
    if (b.has_tags) b.tags.assign(b.m * b.L, 0);
    for (std::size_t r = 0; r < b.m; ++r) {
        const Example& ex = corpus[which[r]];
        b.lengths[r] = ex.tokens.size();
        for (std::size_t t = 0; t < ex.tokens.size(); ++t) {
            b.words[r * b.L + t] = vocab.word(ex.tokens[t]);
            b.mask[r * b.L + t] = 1;
            if (b.has_tags) b.tags[r * b.L + t] = vocab.tag((*ex.tags)[t]);
        }
        if (ex.intent) b.intents[r] = std::ptrdiff_t(vocab.intent(*ex.intent));
    }
    return b;
}

inline std::vector<Batch> make_batches(const Corpus& corpus, const Vocab& vocab,
                                       std::size_t m, bool shuffle_order,
                                       std::uint32_t seed) {
    if (m == 0) throw config_error("minibatch size must be positive");
    if (!vocab.frozen()) throw data_error("vocabulary must be frozen before batching");
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (shuffle_order) {
        std::mt19937 rng(seed);
        shuffle(order, rng);
    }
    std::vector<Batch> batches;
    for (std::size_t begin = 0; begin < order.size(); begin += m) {
        std::size_t end = std::min(order.size(), begin + m);
        batches.push_back(pack_batch(
            corpus, std::vector<std::size_t>(order.begin() + begin, order.begin() + end),
            vocab));
    }
    return batches;
}

// ---- synthetic corpora ----

// One slot type: spans open with a head word drawn from `heads`, optionally
// extended by continuation words, and are always preceded by `marker` so a
// small convolution window suffices to type the span.
struct SlotDef {
    std::string type;
    std::string marker;
    std::vector<std::string> heads;
    std::vector<std::string> continuations;
    std::size_t max_extra = 0;
};

struct SynthTemplate {
    std::string intent;
    std::vector<std::string> slot_types;
    double weight = 1.0;
    // Emitted as the first token when nonempty; carries the intent signal
    // in corpora whose slot sets do not determine the intent.
    std::vector<std::string> cues;
};

struct SynthSpec {
    std::uint32_t seed = 1;
    std::size_t sentences = 100;
    std::vector<SynthTemplate> templates;
    std::vector<SlotDef> slots;
    std::vector<std::string> fillers;
    std::size_t min_gap_fillers = 0;  // fillers between consecutive slots
    std::size_t max_gap_fillers = 2;
    std::size_t prefix_fillers = 1;   // fillers before the first slot
    std::size_t max_prefix_extra = 2;
};

inline const SlotDef& find_slot(const SynthSpec& spec, const std::string& type) {
    for (const SlotDef& s : spec.slots)
        if (s.type == type) return s;
    throw config_error("template references undefined slot type '" + type + "'");
}

inline Corpus synth_generate(const SynthSpec& spec) {
    if (spec.templates.empty())
        throw config_error("synthetic corpus needs at least one template");
    if (spec.fillers.empty())
        throw config_error("synthetic corpus needs filler tokens");
    double total_weight = 0.0;
    for (const SynthTemplate& t : spec.templates) total_weight += t.weight;

    std::mt19937 rng(spec.seed);
    Corpus corpus;
    corpus.reserve(spec.sentences);
    for (std::size_t n = 0; n < spec.sentences; ++n) {
        double u = unit_uniform(rng) * total_weight;
        const SynthTemplate* tpl = &spec.templates.back();
        for (const SynthTemplate& t : spec.templates) {
            if (u < t.weight) {
                tpl = &t;
                break;
            }
            u -= t.weight;
        }

        Example ex;
        ex.tags.emplace();
        ex.intent = tpl->intent;
        auto filler = [&] {
            ex.tokens.push_back(pick(spec.fillers, rng));
            ex.tags->push_back("O");
        };
        if (!tpl->cues.empty()) {
            ex.tokens.push_back(pick(tpl->cues, rng));
            ex.tags->push_back("O");
        }
        std::size_t prefix =
            spec.prefix_fillers + bounded(rng, std::uint32_t(spec.max_prefix_extra + 1));
        for (std::size_t i = 0; i < prefix; ++i) filler();
        for (std::size_t s = 0; s < tpl->slot_types.size(); ++s) {
            if (s > 0) {
                std::size_t gap =
                    spec.min_gap_fillers +
                    bounded(rng, std::uint32_t(spec.max_gap_fillers -
                                               spec.min_gap_fillers + 1));
                for (std::size_t i = 0; i < gap; ++i) filler();
            }
            const SlotDef& slot = find_slot(spec, tpl->slot_types[s]);
            ex.tokens.push_back(slot.marker);
            ex.tags->push_back("O");
            ex.tokens.push_back(pick(slot.heads, rng));
            ex.tags->push_back("B-" + slot.type);
            if (slot.max_extra > 0 && !slot.continuations.empty()) {
                std::size_t extra = bounded(rng, std::uint32_t(slot.max_extra + 1));
                for (std::size_t i = 0; i < extra; ++i) {
                    ex.tokens.push_back(pick(slot.continuations, rng));
                    ex.tags->push_back("I-" + slot.type);
                }
            }
        }
        corpus.push_back(std::move(ex));
    }
    return corpus;
}

// Travel-query corpus: 4 intents, each a distinct set drawn from 8 slot
// types, every span typed by its marker word. Vocabulary lands near 60.
inline SynthSpec travel_synth_spec(std::uint32_t seed, std::size_t sentences) {
    SynthSpec spec;
    spec.seed = seed;
    spec.sentences = sentences;
    std::vector<std::string> cities = {"denver",  "boston", "dallas", "atlanta",
                                       "chicago", "seattle", "york",  "oakland"};
    std::vector<std::string> city_tails = {"airport", "downtown"};
    spec.slots = {
        {"FromCity", "from", cities, city_tails, 1},
        {"ToCity", "to", cities, city_tails, 1},
        {"Date", "on", {"monday", "tuesday", "friday", "sunday", "today", "tomorrow"},
         {"morning", "evening"}, 1},
        {"Airline", "with", {"delta", "united", "american", "lufthansa"}, {}, 0},
        {"City", "in", cities, city_tails, 1},
        {"Time", "at", {"noon", "dawn", "midnight", "ten"}, {}, 0},
        {"Meal", "serving", {"breakfast", "lunch", "dinner", "snacks"}, {}, 0},
        {"Class", "seated", {"economy", "business", "first", "coach"}, {}, 0},
    };
    spec.templates = {
        {"flight", {"FromCity", "ToCity", "Date"}, 1.0, {}},
        {"airfare", {"FromCity", "ToCity", "Class"}, 1.0, {}},
        {"ground_service", {"City", "Time"}, 1.0, {}},
        {"meal", {"Airline", "Meal"}, 1.0, {}},
    };
    spec.fillers = {"i",    "want", "would",  "like",  "a",     "the",  "please",
                    "show", "me",   "need",   "find",  "book",  "trip", "cheap",
                    "some", "info", "listing", "quote", "plan",  "give"};
    return spec;
}

// Two intents with identical slot sets; only the sentence-initial cue word
// separates them, and it also flips the tag types of both spans. The cue
// sits outside every convolution window over the spans (prefix of three or
// more fillers), so tagging those spans correctly requires carrying the cue
// through the recurrent state.
inline SynthSpec cue_synth_spec(std::uint32_t seed, std::size_t sentences) {
    SynthSpec spec;
    spec.seed = seed;
    spec.sentences = sentences;
    std::vector<std::string> cities = {"denver",  "boston", "dallas", "atlanta",
                                       "chicago", "seattle", "york",  "oakland"};
    std::vector<std::string> days = {"monday", "tuesday", "friday",
                                     "sunday", "today",  "tomorrow"};
    spec.slots = {
        {"ToCity", "to", cities, {}, 0},
        {"Date", "on", days, {}, 0},
        {"ReturnCity", "to", cities, {}, 0},
        {"ReturnDay", "on", days, {}, 0},
    };
    spec.templates = {
        {"outbound", {"ToCity", "Date"}, 1.0, {"depart", "outgoing"}},
        {"return", {"ReturnCity", "ReturnDay"}, 1.0, {"return", "back"}},
    };
    spec.fillers = {"i",    "want", "would", "like", "a",    "the", "please",
                    "show", "me",   "need",  "find", "book", "trip"};
    spec.prefix_fillers = 3;
    spec.max_prefix_extra = 2;
    return spec;
}

// Positions carrying a slot tag; these are the designated keywords for
// attention analysis on synthetic corpora.
inline std::vector<bool> keyword_positions(const Example& ex) {
    std::vector<bool> out(ex.tokens.size(), false);
    if (ex.tags)
        for (std::size_t i = 0; i < ex.tags->size(); ++i)
            out[i] = (*ex.tags)[i] != "O";
    return out;
}

// ---- pre-trained embeddings ----

// Overlays rows of `embedding` (num_words x dim) for words found in the
// file; returns how many vocabulary words were covered.
template <typename T>
std::size_t load_embeddings(const std::string& path, const Vocab& vocab,
                            Tensor<T>& embedding) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open embedding file '" + path + "'");
    if (embedding.shape.size() != 2 || embedding.shape[0] != vocab.num_words())
        throw dim_error("embedding matrix " + shape_str(embedding.shape) +
                        " does not cover a vocabulary of " +
                        std::to_string(vocab.num_words()) + " words");
    std::size_t dim = embedding.shape[1];
    std::size_t coverage = 0, line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string word;
        fields >> word;
        std::vector<T> values;
        double v;
        while (fields >> v) values.push_back(T(v));
        if (values.size() != dim)
            throw data_error(path + " line " + std::to_string(line_no) + ": vector of " +
                             std::to_string(values.size()) + " values, expected " +
                             std::to_string(dim));
        std::size_t idx = vocab.word(word);
        if (idx == Vocab::unk && word != vocab.word_name(Vocab::unk)) continue;
        for (std::size_t j = 0; j < dim; ++j) embedding.at(idx, j) = values[j];
        ++coverage;
    }
    return coverage;
}

} // namespace jslu

#endif
