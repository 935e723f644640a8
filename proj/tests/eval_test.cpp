#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "jslu/data.hpp"
#include "jslu/errors.hpp"
#include "jslu/eval.hpp"
#include "jslu/model.hpp"

using namespace jslu;

namespace {

std::vector<std::string> split_tags(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

} // namespace

TEST(Spans, ExtractsTypedRuns) {
    // "to come back to Los Angeles on Friday evening"
    auto tags = split_tags(
        "O O O O B-ReturnCity I-ReturnCity O B-RETURN.DAY B-RETURN.PERIODOFDAY");
    SpanExtraction ex = extract_spans(tags);
    ASSERT_EQ(ex.spans.size(), 3u);
    EXPECT_EQ(ex.spans[0], (Span{"ReturnCity", 4, 5}));
    EXPECT_EQ(ex.spans[1], (Span{"RETURN.DAY", 7, 7}));
    EXPECT_EQ(ex.spans[2], (Span{"RETURN.PERIODOFDAY", 8, 8}));
    EXPECT_EQ(ex.repairs, 0u);
}

TEST(Spans, AdjacentBStartsNewSpan) {
    auto ex = extract_spans(split_tags("B-City B-City I-City"));
    ASSERT_EQ(ex.spans.size(), 2u);
    EXPECT_EQ(ex.spans[0], (Span{"City", 0, 0}));
    EXPECT_EQ(ex.spans[1], (Span{"City", 1, 2}));
    EXPECT_EQ(ex.repairs, 0u);
}

TEST(Spans, TypeChangeInsideRunSplits) {
    auto ex = extract_spans(split_tags("B-From I-To"));
    ASSERT_EQ(ex.spans.size(), 2u);
    EXPECT_EQ(ex.spans[0], (Span{"From", 0, 0}));
    EXPECT_EQ(ex.spans[1], (Span{"To", 1, 1}));
    EXPECT_EQ(ex.repairs, 1u);
}

TEST(Spans, DanglingIRepairedToB) {
    auto ex = extract_spans(split_tags("O I-X I-X O I-Y"));
    ASSERT_EQ(ex.spans.size(), 2u);
    EXPECT_EQ(ex.spans[0], (Span{"X", 1, 2}));
    EXPECT_EQ(ex.spans[1], (Span{"Y", 4, 4}));
    EXPECT_EQ(ex.repairs, 2u);
}

TEST(Spans, MalformedTagRejected) {
    EXPECT_THROW(extract_spans({"B"}), data_error);
    EXPECT_THROW(extract_spans({"BCity"}), data_error);
    EXPECT_THROW(extract_spans({"Z-City"}), data_error);
}

TEST(Spans, RenderInvertsExtractOnLegalSequences) {
    std::vector<std::string> cases = {
        "O O O",
        "B-A I-A I-A",
        "O B-A I-A O B-B O",
        "B-A B-A B-B",
        "O O O O B-ReturnCity I-ReturnCity O B-RETURN.DAY B-RETURN.PERIODOFDAY",
    };
    for (const std::string& c : cases) {
        auto tags = split_tags(c);
        SpanExtraction ex = extract_spans(tags);
        EXPECT_EQ(ex.repairs, 0u) << c;
        EXPECT_EQ(render_bio(ex.spans, tags.size()), tags) << c;
    }
}

TEST(Spans, RenderRejectsSpansOutsideSentence) {
    EXPECT_THROW(render_bio({Span{"A", 2, 3}}, 3), data_error);
    EXPECT_THROW(render_bio({Span{"A", 2, 1}}, 5), data_error);
}

TEST(SlotScore, ExactBoundaryMatchRequired) {
    // Gold holds (FromCity,5,5) and (ToCity,7,7); the prediction gets the
    // first and overreaches the second, so one of two on each side.
    std::vector<std::string> gold(8, "O"), pred(8, "O");
    gold[5] = "B-FromCity";
    gold[7] = "B-ToCity";
    pred[5] = "B-FromCity";
    pred[6] = "B-ToCity";
    pred[7] = "I-ToCity";
    SlotScore s = slot_score({gold}, {pred});
    EXPECT_DOUBLE_EQ(s.precision, 0.5);
    EXPECT_DOUBLE_EQ(s.recall, 0.5);
    EXPECT_DOUBLE_EQ(s.f1, 0.5);
    EXPECT_EQ(s.gold_spans, 2u);
    EXPECT_EQ(s.predicted_spans, 2u);
    EXPECT_EQ(s.matched_spans, 1u);
}

TEST(SlotScore, EmptySidesScoreZeroWithoutDividing) {
    std::vector<std::string> gold = split_tags("O B-A O");
    std::vector<std::string> none = {"O", "O", "O"};
    SlotScore s = slot_score({gold}, {none});
    EXPECT_DOUBLE_EQ(s.precision, 0.0);
    EXPECT_DOUBLE_EQ(s.recall, 0.0);
    EXPECT_DOUBLE_EQ(s.f1, 0.0);

    SlotScore both = slot_score({none}, {none});
    EXPECT_DOUBLE_EQ(both.precision, 0.0);
    EXPECT_DOUBLE_EQ(both.recall, 0.0);
    EXPECT_DOUBLE_EQ(both.f1, 0.0);
}

TEST(SlotScore, F1GrowsWithEachCorrectedSpan) {
    // Four gold spans; predictions with k correct and 4-k misplaced give
    // precision = recall = k/4, so f1 = k/4 and must rise with k.
    std::vector<std::string> gold(16, "O");
    for (std::size_t j = 0; j < 4; ++j) gold[4 * j] = "B-S";
    double prev = -1.0;
    for (std::size_t k = 0; k <= 4; ++k) {
        std::vector<std::string> pred(16, "O");
        for (std::size_t j = 0; j < 4; ++j) pred[4 * j + (j < k ? 0 : 1)] = "B-S";
        SlotScore s = slot_score({gold}, {pred});
        EXPECT_DOUBLE_EQ(s.f1, double(k) / 4.0);
        EXPECT_GT(s.f1 + 1e-12, prev);
        prev = s.f1;
    }
}

TEST(SlotScore, InsensitiveToSentenceOrder) {
    std::vector<std::vector<std::string>> gold = {
        split_tags("B-A O"), split_tags("O B-B"), split_tags("B-C I-C O")};
    std::vector<std::vector<std::string>> pred = {
        split_tags("B-A O"), split_tags("B-B O"), split_tags("B-C O O")};
    SlotScore base = slot_score(gold, pred);
    std::vector<std::size_t> perm = {2, 0, 1};
    std::vector<std::vector<std::string>> gold2, pred2;
    for (std::size_t i : perm) {
        gold2.push_back(gold[i]);
        pred2.push_back(pred[i]);
    }
    SlotScore shuffled = slot_score(gold2, pred2);
    EXPECT_DOUBLE_EQ(base.precision, shuffled.precision);
    EXPECT_DOUBLE_EQ(base.recall, shuffled.recall);
    EXPECT_DOUBLE_EQ(base.f1, shuffled.f1);
    EXPECT_EQ(base.matched_spans, shuffled.matched_spans);
}

TEST(SlotScore, MismatchedShapesRejected) {
    EXPECT_THROW(slot_score({{"O"}}, {}), data_error);
    EXPECT_THROW(slot_score({{"O", "O"}}, {{"O"}}), data_error);
}

TEST(IntentScore, AccuracyAndConfusion) {
    std::vector<std::size_t> gold = {0, 0, 1, 2, 2, 2};
    std::vector<std::size_t> pred = {0, 1, 1, 2, 0, 2};
    IntentScore s = intent_score(gold, pred, 3);
    EXPECT_EQ(s.total, 6u);
    EXPECT_EQ(s.correct, 4u);
    EXPECT_DOUBLE_EQ(s.accuracy, 4.0 / 6.0);
    EXPECT_DOUBLE_EQ(s.error, 1.0 - 4.0 / 6.0);
    // Row sums recover the gold label counts.
    std::vector<std::size_t> row_sums(3, 0);
    for (std::size_t g = 0; g < 3; ++g)
        for (std::size_t p = 0; p < 3; ++p) row_sums[g] += s.confusion[g][p];
    EXPECT_EQ(row_sums, (std::vector<std::size_t>{2, 1, 3}));
    EXPECT_EQ(s.confusion[2][0], 1u);
    EXPECT_EQ(s.confusion[0][1], 1u);
}

TEST(IntentScore, OutOfRangeLabelRejected) {
    EXPECT_THROW(intent_score({3}, {0}, 3), index_error);
    EXPECT_THROW(intent_score({0}, {3}, 3), index_error);
}

namespace {

Corpus eval_corpus() {
    Corpus c;
    c.push_back({{"fly", "to", "boston", "now"},
                 std::vector<std::string>{"O", "O", "B-To", "O"},
                 std::string("flight")});
    c.push_back({{"show", "fares", "to", "denver"},
                 std::vector<std::string>{"O", "O", "O", "B-To"},
                 std::string("fares")});
    c.push_back({{"fly", "to", "denver", "now"},
                 std::vector<std::string>{"O", "O", "B-To", "O"},
                 std::string("flight")});
    return c;
}

ModelConfig eval_config(const Vocab& vocab) {
    ModelConfig cfg;
    cfg.mode = Mode::joint;
    cfg.word_embed_dim = 6;
    cfg.tag_embed_dim = 3;
    cfg.hidden_dim = 5;
    cfg.window_sizes = {3};
    cfg.filters_per_window = 4;
    cfg.aggregator = Aggregator::attention;
    cfg.num_tags = vocab.num_tags();
    cfg.num_intents = vocab.num_intents();
    return validate_config(cfg);
}

} // namespace

TEST(Evaluate, ZeroModelPredictsFirstLabels) {
    Corpus corpus = eval_corpus();
    Vocab vocab = build_vocab(corpus);
    ModelConfig cfg = eval_config(vocab);
    ModelParams<float> params = make_params<float>(cfg, vocab.num_words());

    // All-zero weights tie every logit, and ties resolve to index 0: tag
    // "O" everywhere and the first intent for every sentence.
    ASSERT_EQ(vocab.tag_name(0), "O");
    EvalReport report = evaluate_model(params, cfg, vocab, corpus);
    ASSERT_TRUE(report.has_slots);
    ASSERT_TRUE(report.has_intents);
    EXPECT_EQ(report.slots.predicted_spans, 0u);
    EXPECT_EQ(report.slots.gold_spans, 3u);
    EXPECT_DOUBLE_EQ(report.slots.f1, 0.0);
    std::size_t first_intent_count = 0;
    for (const Example& ex : corpus)
        if (*ex.intent == vocab.intent_name(0)) ++first_intent_count;
    EXPECT_DOUBLE_EQ(report.intents.accuracy,
                     double(first_intent_count) / double(corpus.size()));
    EXPECT_EQ(report.intent_names.size(), vocab.num_intents());
}

TEST(Evaluate, SkipsSidesWithoutGoldLabels) {
    Corpus corpus = eval_corpus();
    Vocab vocab = build_vocab(corpus);
    ModelConfig cfg = eval_config(vocab);
    ModelParams<float> params = make_params<float>(cfg, vocab.num_words());

    Corpus untagged = corpus;
    for (Example& ex : untagged) ex.tags.reset();
    EvalReport report = evaluate_model(params, cfg, vocab, untagged);
    EXPECT_FALSE(report.has_slots);
    EXPECT_TRUE(report.has_intents);

    Corpus unlabeled = corpus;
    for (Example& ex : unlabeled) ex.intent.reset();
    report = evaluate_model(params, cfg, vocab, unlabeled);
    EXPECT_TRUE(report.has_slots);
    EXPECT_FALSE(report.has_intents);
}

TEST(Evaluate, ReportSerializesAndTabulates) {
    Corpus corpus = eval_corpus();
    Vocab vocab = build_vocab(corpus);
    ModelConfig cfg = eval_config(vocab);
    ModelParams<float> params = make_params<float>(cfg, vocab.num_words());
    EvalReport report = evaluate_model(params, cfg, vocab, corpus);

    nlohmann::json j = report.to_json();
    EXPECT_TRUE(j.contains("slot"));
    EXPECT_TRUE(j.contains("intent"));
    EXPECT_DOUBLE_EQ(j["slot"]["f1"].get<double>(), report.slots.f1);
    EXPECT_DOUBLE_EQ(j["intent"]["error"].get<double>(), report.intents.error);

    std::string table = report.table();
    EXPECT_NE(table.find("Slot\tIntent"), std::string::npos);
    EXPECT_NE(table.find("intent accuracy"), std::string::npos);
}

TEST(Attention, TracesRoundTripThroughJson) {
    std::vector<AttentionTrace> traces;
    traces.push_back({{"list", "flights", "to", "denver"},
                      {0.125, 0.875, 0.03125, 0.99609375},
                      "flight",
                      "flight"});
    traces.push_back({{"hi"}, {0.4999999999123456}, "greet", ""});
    std::stringstream buf;
    export_attention_json(traces, buf);
    std::vector<AttentionTrace> parsed = parse_attention_json(buf);
    EXPECT_EQ(parsed, traces);
}

TEST(Attention, ParseReportsBadLine) {
    std::stringstream buf("{\"tokens\":[\"a\"]}\n");
    try {
        parse_attention_json(buf);
        FAIL() << "expected data_error";
    } catch (const data_error& e) {
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    }
}

TEST(Attention, TracesComeFromThePredictPath) {
    Corpus corpus = eval_corpus();
    Vocab vocab = build_vocab(corpus);
    ModelConfig cfg = eval_config(vocab);
    ModelParams<float> params = make_params<float>(cfg, vocab.num_words());

    std::vector<AttentionTrace> traces = attention_traces(params, cfg, vocab, corpus);
    ASSERT_EQ(traces.size(), corpus.size());
    for (std::size_t i = 0; i < traces.size(); ++i) {
        EXPECT_EQ(traces[i].tokens, corpus[i].tokens);
        ASSERT_EQ(traces[i].weights.size(), corpus[i].tokens.size());
        // Zero alpha puts every weight at exactly one half.
        for (double w : traces[i].weights) EXPECT_DOUBLE_EQ(w, 0.5);
        EXPECT_EQ(traces[i].gold_intent, *corpus[i].intent);
        EXPECT_EQ(traces[i].predicted_intent, vocab.intent_name(0));
    }
}

TEST(Attention, RequiresAttentionAggregatorAndSentencePath) {
    Corpus corpus = eval_corpus();
    Vocab vocab = build_vocab(corpus);
    ModelConfig cfg = eval_config(vocab);
    ModelParams<float> params = make_params<float>(cfg, vocab.num_words());

    ModelConfig pooled = cfg;
    pooled.aggregator = Aggregator::max_pool;
    EXPECT_THROW(attention_traces(params, pooled, vocab, corpus), unsupported_error);

    ModelConfig tagger = cfg;
    tagger.mode = Mode::tagger_only;
    tagger = validate_config(tagger);
    ModelParams<float> tparams = make_params<float>(tagger, vocab.num_words());
    EXPECT_THROW(attention_traces(tparams, tagger, vocab, corpus), unsupported_error);
}

TEST(Attention, AnsiRenderingShadesEveryToken) {
    std::vector<AttentionTrace> traces;
    traces.push_back({{"pale", "mid", "dark"}, {0.1, 0.5, 0.9}, "flight", "fares"});
    traces.push_back({{"flat", "flat"}, {0.3, 0.3}, "flight", ""});
    std::stringstream buf;
    export_attention_ansi(traces, buf);
    std::string out = buf.str();
    std::size_t marks = 0;
    for (std::size_t pos = out.find("\x1b[30;48;5;"); pos != std::string::npos;
         pos = out.find("\x1b[30;48;5;", pos + 1))
        ++marks;
    EXPECT_EQ(marks, 5u);
    EXPECT_NE(out.find("254m"), std::string::npos);  // lightest shade
    EXPECT_NE(out.find("27m"), std::string::npos);   // darkest shade
    EXPECT_NE(out.find("[flight / gold fares]"), std::string::npos);
    // Uniform weights fall back to the middle shade.
    EXPECT_NE(out.find("111mflat"), std::string::npos);
}
