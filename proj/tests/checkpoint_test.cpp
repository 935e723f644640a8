#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "jslu/checkpoint.hpp"
#include "jslu/data.hpp"
#include "jslu/errors.hpp"
#include "jslu/model.hpp"
#include "jslu/optim.hpp"
#include "jslu/rng.hpp"

using namespace jslu;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(bool(in)) << path;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

std::string temp_path(const std::string& name) {
    return testing::TempDir() + name;
}

struct Fixture {
    Corpus corpus;
    Vocab vocab;
    ModelConfig cfg;
    ModelParams<float> params;
};

Fixture make_fixture() {
    Fixture f;
    f.corpus = synth_generate(travel_synth_spec(71u, 30));
    f.vocab = build_vocab(f.corpus);
    ModelConfig cfg;
    cfg.mode = Mode::joint;
    cfg.word_embed_dim = 8;
    cfg.tag_embed_dim = 4;
    cfg.hidden_dim = 8;
    cfg.window_sizes = {3, 5};
    cfg.filters_per_window = 5;
    cfg.aggregator = Aggregator::attention;
    cfg.sparsity = SparsityConfig{0.05, 0.5, 1e-6};
    cfg.num_tags = f.vocab.num_tags();
    cfg.num_intents = f.vocab.num_intents();
    f.cfg = validate_config(cfg);
    f.params = init_params<float>(f.cfg, f.vocab.num_words(), 0.05, 17u);
    return f;
}

// Rewrites the embedded JSON header, fixing up the stored length.
std::string with_header(const std::string& blob,
                        const std::function<void(nlohmann::json&)>& edit) {
    std::size_t head_len = 0;
    for (int i = 0; i < 4; ++i)
        head_len |= std::size_t(std::uint8_t(blob[5 + i])) << (8 * i);
    nlohmann::json header = nlohmann::json::parse(blob.substr(9, head_len));
    edit(header);
    std::string head = header.dump();
    std::string out = blob.substr(0, 5);
    for (int i = 0; i < 4; ++i) out.push_back(char((head.size() >> (8 * i)) & 0xff));
    out += head;
    out += blob.substr(9 + head_len);
    return out;
}

} // namespace

TEST(Checkpoint, ConfigJsonRoundTrip) {
    Fixture f = make_fixture();
    ModelConfig back = config_from_json(config_to_json(f.cfg));
    EXPECT_EQ(back.mode, f.cfg.mode);
    EXPECT_EQ(back.word_embed_dim, f.cfg.word_embed_dim);
    EXPECT_EQ(back.tag_embed_dim, f.cfg.tag_embed_dim);
    EXPECT_EQ(back.hidden_dim, f.cfg.hidden_dim);
    EXPECT_EQ(back.window_sizes, f.cfg.window_sizes);
    EXPECT_EQ(back.filters_per_window, f.cfg.filters_per_window);
    EXPECT_EQ(back.aggregator, f.cfg.aggregator);
    ASSERT_TRUE(back.sparsity.has_value());
    EXPECT_DOUBLE_EQ(back.sparsity->rho, f.cfg.sparsity->rho);
    EXPECT_DOUBLE_EQ(back.sparsity->beta, f.cfg.sparsity->beta);
    EXPECT_DOUBLE_EQ(back.sparsity->epsilon, f.cfg.sparsity->epsilon);
    EXPECT_EQ(back.num_tags, f.cfg.num_tags);
    EXPECT_EQ(back.num_intents, f.cfg.num_intents);
    EXPECT_DOUBLE_EQ(back.dropout_rate, f.cfg.dropout_rate);

    ModelConfig plain = f.cfg;
    plain.sparsity.reset();
    plain.aggregator = Aggregator::avg_pool;
    EXPECT_FALSE(config_from_json(config_to_json(plain)).sparsity.has_value());
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
    Fixture f = make_fixture();
    std::string p1 = temp_path("ck_a.jslu"), p2 = temp_path("ck_b.jslu");
    save_checkpoint(f.params, f.cfg, f.vocab, p1);
    LoadedCheckpoint<float> loaded = load_checkpoint<float>(p1);
    save_checkpoint(loaded.params, loaded.config, loaded.vocab, p2);
    EXPECT_EQ(read_file(p1), read_file(p2));
}

TEST(Checkpoint, LoadRestoresParametersBitwise) {
    Fixture f = make_fixture();
    std::string path = temp_path("ck_restore.jslu");
    save_checkpoint(f.params, f.cfg, f.vocab, path);
    LoadedCheckpoint<float> loaded = load_checkpoint<float>(path);

    EXPECT_EQ(loaded.vocab.num_words(), f.vocab.num_words());
    EXPECT_EQ(loaded.vocab.num_tags(), f.vocab.num_tags());
    EXPECT_EQ(loaded.vocab.num_intents(), f.vocab.num_intents());
    std::vector<std::pair<std::string, const Tensor<float>*>> orig, back;
    f.params.for_each([&](const std::string& n, const Tensor<float>& t) {
        orig.emplace_back(n, &t);
    });
    loaded.params.for_each([&](const std::string& n, const Tensor<float>& t) {
        back.emplace_back(n, &t);
    });
    ASSERT_EQ(orig.size(), back.size());
    for (std::size_t i = 0; i < orig.size(); ++i) {
        EXPECT_EQ(orig[i].first, back[i].first);
        EXPECT_EQ(orig[i].second->shape, back[i].second->shape);
        EXPECT_EQ(orig[i].second->data, back[i].second->data) << orig[i].first;
    }
}

TEST(Checkpoint, PredictionsSurviveTheRoundTrip) {
    Fixture f = make_fixture();
    std::string path = temp_path("ck_predict.jslu");
    save_checkpoint(f.params, f.cfg, f.vocab, path);
    LoadedCheckpoint<float> loaded = load_checkpoint<float>(path);

    std::mt19937 rng(5);
    for (int s = 0; s < 20; ++s) {
        std::vector<std::size_t> words;
        std::size_t len = 1 + bounded(rng, 12);
        for (std::size_t t = 0; t < len; ++t)
            words.push_back(bounded(rng, f.vocab.num_words()));
        Prediction<float> before = predict(f.params, f.cfg, words);
        Prediction<float> after = predict(loaded.params, loaded.config, words);
        EXPECT_EQ(before.tags, after.tags);
        EXPECT_EQ(before.intent, after.intent);
        EXPECT_EQ(before.intent_dist, after.intent_dist);
        EXPECT_EQ(before.attention, after.attention);
    }
}

TEST(Checkpoint, DoubleParamsRoundAsFloats) {
    Fixture f = make_fixture();
    ModelParams<double> wide = make_params<double>(f.cfg, f.vocab.num_words());
    std::mt19937 rng(23);
    wide.for_each([&](const std::string&, Tensor<double>& t) {
        for (auto& v : t.data) v = uniform(rng, -0.05, 0.05);
    });
    std::string path = temp_path("ck_double.jslu");
    save_checkpoint(wide, f.cfg, f.vocab, path);
    LoadedCheckpoint<double> loaded = load_checkpoint<double>(path);
    bool any_rounded = false;
    std::size_t idx = 0;
    std::vector<const Tensor<double>*> orig;
    wide.for_each([&](const std::string&, const Tensor<double>& t) { orig.push_back(&t); });
    loaded.params.for_each([&](const std::string&, const Tensor<double>& t) {
        for (std::size_t i = 0; i < t.numel(); ++i) {
            EXPECT_EQ(t.data[i], double(float(orig[idx]->data[i])));
            if (t.data[i] != orig[idx]->data[i]) any_rounded = true;
        }
        ++idx;
    });
    EXPECT_TRUE(any_rounded);
}

TEST(Checkpoint, MissingAndTruncatedFilesAreCorrupt) {
    Fixture f = make_fixture();
    std::string path = temp_path("ck_trunc.jslu");
    save_checkpoint(f.params, f.cfg, f.vocab, path);
    std::string blob = read_file(path);

    auto expect_corrupt = [&](const std::string& bytes, const std::string& why) {
        std::string p = temp_path("ck_cut.jslu");
        write_file(p, bytes);
        try {
            load_checkpoint<float>(p);
            FAIL() << why;
        } catch (const checkpoint_error& e) {
            EXPECT_EQ(e.which(), checkpoint_error::kind::corrupt) << why;
        }
    };
    try {
        load_checkpoint<float>(temp_path("ck_nowhere.jslu"));
        FAIL() << "missing file";
    } catch (const checkpoint_error& e) {
        EXPECT_EQ(e.which(), checkpoint_error::kind::corrupt);
    }
    expect_corrupt(blob.substr(0, 3), "prelude cut");
    expect_corrupt(blob.substr(0, 40), "header cut");
    expect_corrupt(blob.substr(0, blob.size() - 5), "data cut");
    std::string junk = blob;
    junk[1] = 'X';
    expect_corrupt(junk, "magic tampered");
}

TEST(Checkpoint, VersionMismatchIsItsOwnKind) {
    Fixture f = make_fixture();
    std::string path = temp_path("ck_version.jslu");
    save_checkpoint(f.params, f.cfg, f.vocab, path);
    std::string blob = read_file(path);
    blob[4] = 2;
    write_file(path, blob);
    try {
        load_checkpoint<float>(path);
        FAIL();
    } catch (const checkpoint_error& e) {
        EXPECT_EQ(e.which(), checkpoint_error::kind::version_mismatch);
        EXPECT_NE(std::string(e.what()).find("version 2"), std::string::npos);
    }
}

TEST(Checkpoint, ShapeMismatchIsItsOwnKind) {
    Fixture f = make_fixture();
    std::string path = temp_path("ck_shape.jslu");
    save_checkpoint(f.params, f.cfg, f.vocab, path);
    std::string blob = read_file(path);

    // A header claiming a wider model than the stored tensors.
    write_file(path, with_header(blob, [](nlohmann::json& h) {
                   h["config"]["hidden_dim"] = 16;
               }));
    try {
        load_checkpoint<float>(path);
        FAIL();
    } catch (const checkpoint_error& e) {
        EXPECT_EQ(e.which(), checkpoint_error::kind::shape_mismatch);
    }

    // A manifest whose first tensor goes by the wrong name.
    write_file(path, with_header(blob, [](nlohmann::json& h) {
                   h["tensors"][0]["name"] = "mystery";
               }));
    try {
        load_checkpoint<float>(path);
        FAIL();
    } catch (const checkpoint_error& e) {
        EXPECT_EQ(e.which(), checkpoint_error::kind::shape_mismatch);
        EXPECT_NE(std::string(e.what()).find("mystery"), std::string::npos);
    }

    // A manifest with a trailing entry the model does not own.
    write_file(path, with_header(blob, [](nlohmann::json& h) {
                   h["tensors"].push_back({{"name", "extra"},
                                           {"shape", {1}},
                                           {"offset", 0}});
               }));
    try {
        load_checkpoint<float>(path);
        FAIL();
    } catch (const checkpoint_error& e) {
        EXPECT_EQ(e.which(), checkpoint_error::kind::shape_mismatch);
    }
}

TEST(Checkpoint, GarbageHeaderIsCorrupt) {
    std::string path = temp_path("ck_garbage.jslu");
    std::string blob;
    blob.append(checkpoint_magic, 4);
    blob.push_back(char(checkpoint_version));
    std::string head = "definitely not json";
    for (int i = 0; i < 4; ++i) blob.push_back(char((head.size() >> (8 * i)) & 0xff));
    blob += head;
    write_file(path, blob);
    try {
        load_checkpoint<float>(path);
        FAIL();
    } catch (const checkpoint_error& e) {
        EXPECT_EQ(e.which(), checkpoint_error::kind::corrupt);
    }
}
