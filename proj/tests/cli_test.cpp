#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "jslu/checkpoint.hpp"
#include "jslu/cli.hpp"
#include "jslu/data.hpp"

using namespace jslu;
namespace fs = std::filesystem;

namespace {

struct RunOutput {
    int code = 0;
    std::string out;
    std::string err;
};

RunOutput run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    RunOutput r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(bool(in)) << path;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::path(testing::TempDir()) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small corpora and a fast model so the pipeline tests stay quick.
fs::path write_workspace(const fs::path& dir) {
    for (auto [name, seed, count] :
         {std::tuple{"train.tsv", 101u, 60}, {"dev.tsv", 102u, 20}, {"test.tsv", 103u, 20}}) {
        Corpus c = synth_generate(travel_synth_spec(seed, std::size_t(count)));
        std::ofstream out(dir / name);
        serialize_columns(c, out);
    }
    nlohmann::json cfg = {
        {"model.word_embed_dim", 10},  {"model.tag_embed_dim", 4},
        {"model.hidden_dim", 10},      {"model.window_sizes", {3}},
        {"model.filters_per_window", 8}, {"model.aggregator", "attention"},
        {"train.epochs", 3},           {"train.lr", 1.0},
        {"data.train", (dir / "train.tsv").string()},
        {"data.dev", (dir / "dev.tsv").string()},
        {"data.test", (dir / "test.tsv").string()},
        {"seed", 9},
    };
    fs::path cfg_path = dir / "config.json";
    std::ofstream out(cfg_path);
    out << cfg.dump(2) << "\n";
    return cfg_path;
}

} // namespace

TEST(Cli, HelpAndMissingSubcommand) {
    RunOutput help = run_cli({"--help"});
    EXPECT_EQ(help.code, 0);
    for (const char* name : {"train", "eval", "predict", "gradcheck", "synth", "attention"})
        EXPECT_NE(help.out.find(name), std::string::npos) << name;

    RunOutput none = run_cli({});
    EXPECT_EQ(none.code, 1);
    EXPECT_NE(none.err.find("usage error"), std::string::npos);

    RunOutput bogus = run_cli({"frobnicate"});
    EXPECT_EQ(bogus.code, 1);
}

TEST(Cli, UnknownFlagIsUsageError) {
    RunOutput r = run_cli({"synth", "--wat", "7"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("usage error"), std::string::npos);
}

TEST(Cli, UnknownConfigKeyRejected) {
    fs::path dir = fresh_dir("cli_badkey");
    std::ofstream(dir / "bad.json") << "{\"model.hiden_dim\": 50}\n";
    RunOutput r = run_cli({"synth", "--config", (dir / "bad.json").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("unknown config key 'model.hiden_dim'"), std::string::npos);
}

TEST(Cli, MalformedConfigValueNamesKey) {
    fs::path dir = fresh_dir("cli_badvalue");
    std::ofstream(dir / "bad.json") << "{\"train.epochs\": \"soon\"}\n";
    RunOutput r = run_cli({"synth", "--config", (dir / "bad.json").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("train.epochs"), std::string::npos);
}

TEST(Cli, SynthIsDeterministicAndFormatAware) {
    fs::path a = fresh_dir("cli_synth_a"), b = fresh_dir("cli_synth_b");
    ASSERT_EQ(run_cli({"synth", "--seed", "7", "--sentences", "40",
                       "--out", a.string()}).code, 0);
    ASSERT_EQ(run_cli({"synth", "--seed", "7", "--sentences", "40",
                       "--out", b.string()}).code, 0);
    EXPECT_EQ(read_file(a / "synth.tsv"), read_file(b / "synth.tsv"));
    EXPECT_TRUE(fs::exists(a / "resolved.json"));

    RunOutput stdout_run = run_cli({"synth", "--seed", "7", "--sentences", "5",
                                    "--format", "jsonl", "--synth.corpus", "cue"});
    EXPECT_EQ(stdout_run.code, 0);
    std::istringstream lines(stdout_run.out);
    Corpus parsed = parse_jsonl(lines);
    EXPECT_EQ(parsed.size(), 5u);
}

TEST(Cli, TrainEvalPredictAttentionPipeline) {
    fs::path dir = fresh_dir("cli_pipeline");
    fs::path cfg = write_workspace(dir);
    fs::path run1 = dir / "run1";

    RunOutput trained = run_cli({"train", "--config", cfg.string(), "--out", run1.string()});
    ASSERT_EQ(trained.code, 0) << trained.err;
    EXPECT_TRUE(fs::exists(run1 / "model.jslu"));
    EXPECT_TRUE(fs::exists(run1 / "resolved.json"));
    EXPECT_NE(trained.out.find("trained 3 epoch(s)"), std::string::npos);
    EXPECT_NE(trained.out.find("Slot\tIntent"), std::string::npos);
    std::istringstream curve(read_file(run1 / "curve.tsv"));
    std::string line;
    std::size_t rows = 0;
    while (std::getline(curve, line)) ++rows;
    EXPECT_EQ(rows, 3u);

    std::string model = (run1 / "model.jslu").string();
    std::string test = (dir / "test.tsv").string();
    RunOutput eval = run_cli({"eval", "--checkpoint", model, "--data.test", test});
    ASSERT_EQ(eval.code, 0) << eval.err;
    EXPECT_NE(eval.out.find("Slot\tIntent"), std::string::npos);
    EXPECT_NE(eval.out.find("intent accuracy"), std::string::npos);

    RunOutput pred = run_cli({"predict", "--checkpoint", model, "--data.test", test});
    ASSERT_EQ(pred.code, 0) << pred.err;
    std::istringstream pred_in(pred.out);
    Corpus predicted = parse_columns(pred_in);
    ASSERT_EQ(predicted.size(), 20u);
    for (const Example& ex : predicted) {
        ASSERT_TRUE(ex.tags.has_value());
        EXPECT_EQ(ex.tags->size(), ex.tokens.size());
        EXPECT_TRUE(ex.intent.has_value());
    }

    RunOutput att = run_cli({"attention", "--checkpoint", model, "--data.test", test});
    ASSERT_EQ(att.code, 0) << att.err;
    std::istringstream att_in(att.out);
    std::vector<AttentionTrace> traces = parse_attention_json(att_in);
    EXPECT_EQ(traces.size(), 20u);

    RunOutput ansi = run_cli({"attention", "--checkpoint", model, "--data.test", test,
                              "--ansi"});
    ASSERT_EQ(ansi.code, 0);
    EXPECT_NE(ansi.out.find("\x1b[30;48;5;"), std::string::npos);
}

TEST(Cli, FlagsOverrideConfigFile) {
    fs::path dir = fresh_dir("cli_override");
    fs::path cfg = write_workspace(dir);
    fs::path run1 = dir / "short";
    RunOutput r = run_cli({"train", "--config", cfg.string(), "--train.epochs", "1",
                           "--out", run1.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream curve(read_file(run1 / "curve.tsv"));
    std::string line;
    std::size_t rows = 0;
    while (std::getline(curve, line)) ++rows;
    EXPECT_EQ(rows, 1u);

    nlohmann::json resolved = nlohmann::json::parse(read_file(run1 / "resolved.json"));
    EXPECT_EQ(resolved.at("train.epochs").get<std::size_t>(), 1u);
    EXPECT_EQ(resolved.at("model.hidden_dim").get<std::size_t>(), 10u);
}

TEST(Cli, ResolvedConfigReplaysTheRun) {
    fs::path dir = fresh_dir("cli_replay");
    fs::path cfg = write_workspace(dir);
    fs::path run1 = dir / "first", run2 = dir / "second";
    ASSERT_EQ(run_cli({"train", "--config", cfg.string(), "--train.epochs", "2",
                       "--out", run1.string()}).code, 0);
    ASSERT_EQ(run_cli({"train", "--config", (run1 / "resolved.json").string(),
                       "--out", run2.string()}).code, 0);
    EXPECT_EQ(read_file(run1 / "model.jslu"), read_file(run2 / "model.jslu"));
    EXPECT_EQ(read_file(run1 / "curve.tsv"), read_file(run2 / "curve.tsv"));
}

TEST(Cli, GradcheckPassesAtDefaultToleranceOnly) {
    RunOutput pass = run_cli({"gradcheck"});
    EXPECT_EQ(pass.code, 0) << pass.out;
    EXPECT_NE(pass.out.find("gradcheck passed"), std::string::npos);

    RunOutput fail = run_cli({"gradcheck", "--tolerance", "1e-15"});
    EXPECT_EQ(fail.code, 3);
    EXPECT_NE(fail.out.find("gradcheck FAILED"), std::string::npos);
}

TEST(Cli, ErrorExitCodes) {
    fs::path dir = fresh_dir("cli_errors");
    // Missing required keys: configuration problem.
    EXPECT_EQ(run_cli({"train", "--out", (dir / "x").string()}).code, 1);
    EXPECT_EQ(run_cli({"eval", "--data.test", "nope.tsv"}).code, 1);
    // Unreadable inputs: data problems.
    EXPECT_EQ(run_cli({"eval", "--checkpoint", (dir / "missing.jslu").string(),
                       "--data.test", "nope.tsv"}).code, 2);
    std::ofstream(dir / "empty.tsv") << "";
    EXPECT_EQ(run_cli({"train", "--data.train", (dir / "empty.tsv").string(),
                       "--out", (dir / "y").string()}).code, 2);
    EXPECT_EQ(run_cli({"train", "--data.train", (dir / "absent.tsv").string(),
                       "--out", (dir / "z").string()}).code, 2);
}

TEST(Cli, PredictWritesFilesWhenOutGiven) {
    fs::path dir = fresh_dir("cli_predict_out");
    fs::path cfg = write_workspace(dir);
    fs::path run1 = dir / "model_dir";
    ASSERT_EQ(run_cli({"train", "--config", cfg.string(), "--train.epochs", "1",
                       "--out", run1.string()}).code, 0);
    // The format key governs input parsing and output serialization alike.
    std::ifstream columns_in(dir / "test.tsv");
    Corpus test_set = parse_columns(columns_in);
    std::ofstream jsonl_out(dir / "test.jsonl");
    serialize_jsonl(test_set, jsonl_out);
    jsonl_out.close();
    fs::path pred_dir = dir / "preds";
    RunOutput r = run_cli({"predict", "--checkpoint", (run1 / "model.jslu").string(),
                           "--data.test", (dir / "test.jsonl").string(),
                           "--format", "jsonl", "--out", pred_dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(pred_dir / "predictions.jsonl");
    ASSERT_TRUE(bool(in));
    Corpus predicted = parse_jsonl(in);
    EXPECT_EQ(predicted.size(), 20u);
}
