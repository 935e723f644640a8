#ifndef JSLU_CLI_HPP
#define JSLU_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jslu/checkpoint.hpp"
#include "jslu/data.hpp"
#include "jslu/errors.hpp"
#include "jslu/eval.hpp"
#include "jslu/model.hpp"
#include "jslu/optim.hpp"
#include "jslu/tensor.hpp"

// Command-line front end. Configuration lives in a flat JSON object with
// dotted keys; every key doubles as a long flag (--train.epochs 5), and a
// handful of common ones have short aliases (--mode, --seed, ...). The
// fully resolved configuration is written next to any produced artifacts,
// so a run can be replayed from its output directory alone.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data or file
// error, 3 numerical failure.

namespace jslu::cli {

struct RunConfig {
    ModelConfig model;            // sparsity is folded in from the keys below
    double rho = 0.05;
    double beta = 0.0;            // > 0 turns the sparsity penalty on
    double sparsity_epsilon = 1e-6;
    TrainConfig train;
    std::string data_train, data_dev, data_test;
    CorpusFormat format = CorpusFormat::columns;
    std::string out;              // artifact directory; empty = stdout only
    std::string checkpoint_path;  // input model for eval/predict/attention
    std::uint32_t seed = 1;
    std::string synth_corpus = "travel";
    std::size_t synth_sentences = 1000;
    double gradcheck_tolerance = 1e-4;
    bool ansi = false;
};

namespace detail {

inline std::string json_repr(const nlohmann::json& j) {
    return j.is_string() ? "\"" + j.get<std::string>() + "\"" : j.dump();
}

inline std::size_t to_count(const std::string& key, const nlohmann::json& j) {
    if (j.is_number_unsigned()) return j.get<std::size_t>();
    if (j.is_string()) {
        const std::string& s = j.get<std::string>();
        std::size_t pos = 0;
        try {
            unsigned long long v = std::stoull(s, &pos);
            if (pos == s.size() && s[0] != '-') return std::size_t(v);
        } catch (const std::exception&) {
        }
    }
    throw config_error("key '" + key + "': expected a nonnegative integer, got " +
                       json_repr(j));
}

inline double to_real(const std::string& key, const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string& s = j.get<std::string>();
        std::size_t pos = 0;
        try {
            double v = std::stod(s, &pos);
            if (pos == s.size()) return v;
        } catch (const std::exception&) {
        }
    }
    throw config_error("key '" + key + "': expected a number, got " + json_repr(j));
}

inline bool to_flag(const std::string& key, const nlohmann::json& j) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_string()) {
        const std::string& s = j.get<std::string>();
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
    }
    throw config_error("key '" + key + "': expected true or false, got " + json_repr(j));
}

inline std::string to_text(const std::string& key, const nlohmann::json& j) {
    if (j.is_string()) return j.get<std::string>();
    throw config_error("key '" + key + "': expected a string, got " + json_repr(j));
}

inline std::vector<std::size_t> to_counts(const std::string& key,
                                          const nlohmann::json& j) {
    if (j.is_array()) {
        std::vector<std::size_t> out;
        for (const auto& item : j) out.push_back(to_count(key, item));
        return out;
    }
    if (j.is_string()) {
        std::vector<std::size_t> out;
        std::istringstream is(j.get<std::string>());
        std::string part;
        while (std::getline(is, part, ','))
            out.push_back(to_count(key, nlohmann::json(part)));
        if (!out.empty()) return out;
    }
    throw config_error("key '" + key +
                       "': expected a list of integers (e.g. \"3,5,7\"), got " +
                       json_repr(j));
}

struct KeySpec {
    std::string key;
    std::string alias;  // extra flag name, empty when none
    std::function<void(RunConfig&, const nlohmann::json&)> set;
    std::function<nlohmann::json(const RunConfig&)> get;
};

inline const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        {"model.mode", "--mode",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.model.mode = parse_mode(to_text("model.mode", j));
         },
         [](const RunConfig& rc) { return format_mode(rc.model.mode); }},
        {"model.word_embed_dim", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.model.word_embed_dim = to_count("model.word_embed_dim", j);
         },
         [](const RunConfig& rc) { return rc.model.word_embed_dim; }},
        {"model.tag_embed_dim", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.model.tag_embed_dim = to_count("model.tag_embed_dim", j);
         },
         [](const RunConfig& rc) { return rc.model.tag_embed_dim; }},
        {"model.hidden_dim", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.model.hidden_dim = to_count("model.hidden_dim", j);
         },
         [](const RunConfig& rc) { return rc.model.hidden_dim; }},
        {"model.window_sizes", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.model.window_sizes = to_counts("model.window_sizes", j);
         },
         [](const RunConfig& rc) { return rc.model.window_sizes; }},
        {"model.filters_per_window", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.model.filters_per_window = to_count("model.filters_per_window", j);
         },
         [](const RunConfig& rc) { return rc.model.filters_per_window; }},
        {"model.aggregator", "--aggregator",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.model.aggregator = parse_aggregator(to_text("model.aggregator", j));
         },
         [](const RunConfig& rc) { return format_aggregator(rc.model.aggregator); }},
        {"model.rho", "--rho",
         [](RunConfig& rc, const nlohmann::json& j) { rc.rho = to_real("model.rho", j); },
         [](const RunConfig& rc) { return rc.rho; }},
        {"model.beta", "--beta",
         [](RunConfig& rc, const nlohmann::json& j) { rc.beta = to_real("model.beta", j); },
         [](const RunConfig& rc) { return rc.beta; }},
        {"model.epsilon", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.sparsity_epsilon = to_real("model.epsilon", j);
         },
         [](const RunConfig& rc) { return rc.sparsity_epsilon; }},
        {"model.dropout_rate", "--dropout",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.model.dropout_rate = to_real("model.dropout_rate", j);
         },
         [](const RunConfig& rc) { return rc.model.dropout_rate; }},
        {"train.minibatch", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.train.minibatch = to_count("train.minibatch", j);
         },
         [](const RunConfig& rc) { return rc.train.minibatch; }},
        {"train.epochs", "--epochs",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.train.epochs = to_count("train.epochs", j);
         },
         [](const RunConfig& rc) { return rc.train.epochs; }},
        {"train.lr", "--lr",
         [](RunConfig& rc, const nlohmann::json& j) { rc.train.lr = to_real("train.lr", j); },
         [](const RunConfig& rc) { return rc.train.lr; }},
        {"train.rho_ada", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.train.rho_ada = to_real("train.rho_ada", j);
         },
         [](const RunConfig& rc) { return rc.train.rho_ada; }},
        {"train.eps_ada", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.train.eps_ada = to_real("train.eps_ada", j);
         },
         [](const RunConfig& rc) { return rc.train.eps_ada; }},
        {"train.init_range", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.train.init_range = to_real("train.init_range", j);
         },
         [](const RunConfig& rc) { return rc.train.init_range; }},
        {"train.shuffle", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.train.shuffle = to_flag("train.shuffle", j);
         },
         [](const RunConfig& rc) { return rc.train.shuffle; }},
        {"train.patience", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             std::size_t p = to_count("train.patience", j);
             if (p == 0)
                 rc.train.patience.reset();
             else
                 rc.train.patience = p;
         },
         [](const RunConfig& rc) {
             return rc.train.patience ? *rc.train.patience : std::size_t(0);
         }},
        {"train.embeddings", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.train.embeddings_path = to_text("train.embeddings", j);
         },
         [](const RunConfig& rc) { return rc.train.embeddings_path; }},
        {"data.train", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.data_train = to_text("data.train", j);
         },
         [](const RunConfig& rc) { return rc.data_train; }},
        {"data.dev", "",
         [](RunConfig& rc, const nlohmann::json& j) { rc.data_dev = to_text("data.dev", j); },
         [](const RunConfig& rc) { return rc.data_dev; }},
        {"data.test", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.data_test = to_text("data.test", j);
         },
         [](const RunConfig& rc) { return rc.data_test; }},
        {"data.format", "--format",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.format = parse_format(to_text("data.format", j));
         },
         [](const RunConfig& rc) {
             return rc.format == CorpusFormat::columns ? "columns" : "jsonl";
         }},
        {"out", "--out",
         [](RunConfig& rc, const nlohmann::json& j) { rc.out = to_text("out", j); },
         [](const RunConfig& rc) { return rc.out; }},
        {"checkpoint", "--checkpoint",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.checkpoint_path = to_text("checkpoint", j);
         },
         [](const RunConfig& rc) { return rc.checkpoint_path; }},
        {"seed", "--seed",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.seed = std::uint32_t(to_count("seed", j));
             rc.train.seed = rc.seed;
         },
         [](const RunConfig& rc) { return rc.seed; }},
        {"synth.corpus", "",
         [](RunConfig& rc, const nlohmann::json& j) {
             std::string c = to_text("synth.corpus", j);
             if (c != "travel" && c != "cue")
                 throw config_error("key 'synth.corpus': expected 'travel' or 'cue', got \"" +
                                    c + "\"");
             rc.synth_corpus = c;
         },
         [](const RunConfig& rc) { return rc.synth_corpus; }},
        {"synth.sentences", "--sentences",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.synth_sentences = to_count("synth.sentences", j);
         },
         [](const RunConfig& rc) { return rc.synth_sentences; }},
        {"gradcheck.tolerance", "--tolerance",
         [](RunConfig& rc, const nlohmann::json& j) {
             rc.gradcheck_tolerance = to_real("gradcheck.tolerance", j);
         },
         [](const RunConfig& rc) { return rc.gradcheck_tolerance; }},
        {"ansi", "--ansi",
         [](RunConfig& rc, const nlohmann::json& j) { rc.ansi = to_flag("ansi", j); },
         [](const RunConfig& rc) { return rc.ansi; }},
    };
    return table;
}

inline const KeySpec& find_key(const std::string& key) {
    for (const KeySpec& spec : key_table())
        if (spec.key == key) return spec;
    throw config_error("unknown config key '" + key + "'");
}

inline void apply_config_file(RunConfig& rc, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object())
        throw config_error("config file '" + path + "' must hold a JSON object");
    for (const auto& [key, value] : doc.items()) find_key(key).set(rc, value);
}

} // namespace detail

// Every key with its current value; written as resolved.json next to
// artifacts and accepted back via --config unchanged.
inline nlohmann::json resolved_config(const RunConfig& rc) {
    nlohmann::json j = nlohmann::json::object();
    for (const detail::KeySpec& spec : detail::key_table()) j[spec.key] = spec.get(rc);
    return j;
}

// The model configuration the run keys describe; label counts still unset.
inline ModelConfig model_config(const RunConfig& rc) {
    ModelConfig m = rc.model;
    if (rc.beta > 0.0) m.sparsity = SparsityConfig{rc.rho, rc.beta, rc.sparsity_epsilon};
    return m;
}

namespace detail {

namespace fs = std::filesystem;

inline void persist_resolved(const RunConfig& rc) {
    std::ofstream out(fs::path(rc.out) / "resolved.json");
    out << resolved_config(rc).dump(2) << "\n";
}

inline Corpus read_corpus(const RunConfig& rc, const std::string& key,
                          const std::string& path) {
    if (path.empty())
        throw config_error("this subcommand needs '" + key + "' (corpus path)");
    return parse_corpus(path, rc.format);
}

inline LoadedCheckpoint<float> read_checkpoint(const RunConfig& rc) {
    if (rc.checkpoint_path.empty())
        throw config_error("this subcommand needs '--checkpoint' (model file)");
    return load_checkpoint<float>(rc.checkpoint_path);
}

inline int cmd_train(const RunConfig& rc, std::ostream& out) {
    if (rc.out.empty()) throw config_error("train needs '--out' (artifact directory)");
    Corpus train_set = read_corpus(rc, "data.train", rc.data_train);
    std::optional<Corpus> dev;
    if (!rc.data_dev.empty()) dev = parse_corpus(rc.data_dev, rc.format);
    Vocab vocab = build_vocab(train_set);

    TrainResult<float> result = train<float>(train_set, dev ? &*dev : nullptr, vocab,
                                             model_config(rc), rc.train);

    fs::create_directories(rc.out);
    save_checkpoint(result.params, result.config, vocab, (fs::path(rc.out) / "model.jslu").string());
    std::ofstream curve(fs::path(rc.out) / "curve.tsv");
    write_curve(result.curve, curve);
    persist_resolved(rc);

    const EpochRecord& last = result.curve.back();
    out << "trained " << result.epochs_run << " epoch(s)"
        << (result.stopped_early ? " (stopped early)" : "") << ", final loss "
        << last.total << "\n";
    if (dev) {
        EvalReport report = evaluate_model(result.params, result.config, vocab, *dev);
        out << report.table();
    }
    out << "wrote " << (fs::path(rc.out) / "model.jslu").string() << "\n";
    return 0;
}

inline int cmd_eval(const RunConfig& rc, std::ostream& out) {
    LoadedCheckpoint<float> model = read_checkpoint(rc);
    Corpus test = read_corpus(rc, "data.test", rc.data_test);
    EvalReport report = evaluate_model(model.params, model.config, model.vocab, test);
    out << report.table();
    if (!rc.out.empty()) {
        fs::create_directories(rc.out);
        std::ofstream json_out(fs::path(rc.out) / "eval.json");
        json_out << report.to_json().dump(2) << "\n";
        persist_resolved(rc);
    }
    return 0;
}

inline int cmd_predict(const RunConfig& rc, std::ostream& out) {
    LoadedCheckpoint<float> model = read_checkpoint(rc);
    Corpus test = read_corpus(rc, "data.test", rc.data_test);
    const ModelConfig& cfg = model.config;
    bool tag_head = cfg.uses_tag_channel() && cfg.num_tags > 0;
    bool intent_head = cfg.trains_intent() && cfg.num_intents > 0;

    Corpus predicted;
    predicted.reserve(test.size());
    for (const Example& ex : test) {
        std::vector<std::size_t> words;
        words.reserve(ex.tokens.size());
        for (const std::string& w : ex.tokens) words.push_back(model.vocab.word(w));
        Prediction<float> pred = predict(model.params, cfg, words);
        Example out_ex;
        out_ex.tokens = ex.tokens;
        if (tag_head) {
            std::vector<std::string> tags;
            tags.reserve(pred.tags.size());
            for (std::size_t t : pred.tags) tags.push_back(model.vocab.tag_name(t));
            out_ex.tags = std::move(tags);
        }
        if (intent_head) out_ex.intent = model.vocab.intent_name(std::size_t(pred.intent));
        predicted.push_back(std::move(out_ex));
    }
    if (rc.out.empty()) {
        serialize_corpus(predicted, out, rc.format);
    } else {
        fs::create_directories(rc.out);
        std::string name =
            rc.format == CorpusFormat::columns ? "predictions.tsv" : "predictions.jsonl";
        std::ofstream file(fs::path(rc.out) / name);
        serialize_corpus(predicted, file, rc.format);
        persist_resolved(rc);
        out << "wrote " << (fs::path(rc.out) / name).string() << "\n";
    }
    return 0;
}

// A fixed small joint model with attention and an active penalty, so the
// check exercises every head; double precision throughout.
inline int cmd_gradcheck(const RunConfig& rc, std::ostream& out) {
    Corpus corpus = synth_generate(travel_synth_spec(rc.seed, 4));
    Vocab vocab = build_vocab(corpus);
    ModelConfig cfg;
    cfg.mode = Mode::joint;
    cfg.word_embed_dim = 6;
    cfg.tag_embed_dim = 3;
    cfg.hidden_dim = 6;
    cfg.window_sizes = {3};
    cfg.filters_per_window = 4;
    cfg.aggregator = Aggregator::attention;
    cfg.sparsity = SparsityConfig{0.05, 0.5, 1e-6};
    cfg.num_tags = vocab.num_tags();
    cfg.num_intents = vocab.num_intents();
    cfg = validate_config(cfg);

    ModelParams<double> params = make_params<double>(cfg, vocab.num_words());
    std::mt19937 rng(rc.seed);
    params.for_each([&](const std::string&, Tensor<double>& t) {
        for (auto& v : t.data) v = uniform(rng, -0.5, 0.5);
    });

    std::vector<std::size_t> which(corpus.size());
    for (std::size_t i = 0; i < which.size(); ++i) which[i] = i;
    Batch batch = pack_batch(corpus, which, vocab);

    std::vector<NamedParam> named;
    params.for_each(
        [&](const std::string& name, Tensor<double>& t) { named.emplace_back(name, &t); });
    auto fn = [&](bool with_grad) {
        Graph<double> g;
        ParamVars<double> pv = bind_params(g, params);
        BatchRun<double> run = joint_loss<double>(g, pv, cfg, batch, {});
        if (with_grad) {
            g.backward(run.total);
            harvest_grads(pv, params);
        }
        return double(run.breakdown.total);
    };
    GradCheckReport report = grad_check(fn, named, 1e-5);
    for (const GradCheckEntry& e : report.params)
        out << e.name << "\tmax rel err " << e.max_rel_err << "\t(" << e.checked
            << " elements)\n";
    out << "max relative error " << report.max_rel_err << " over " << named.size()
        << " tensors, tolerance " << rc.gradcheck_tolerance << "\n";
    if (report.ok(rc.gradcheck_tolerance)) {
        out << "gradcheck passed\n";
        return 0;
    }
    out << "gradcheck FAILED\n";
    return 3;
}

inline int cmd_synth(const RunConfig& rc, std::ostream& out) {
    SynthSpec spec = rc.synth_corpus == "travel"
                         ? travel_synth_spec(rc.seed, rc.synth_sentences)
                         : cue_synth_spec(rc.seed, rc.synth_sentences);
    Corpus corpus = synth_generate(spec);
    if (rc.out.empty()) {
        serialize_corpus(corpus, out, rc.format);
    } else {
        fs::create_directories(rc.out);
        std::string name = rc.format == CorpusFormat::columns ? "synth.tsv" : "synth.jsonl";
        std::ofstream file(fs::path(rc.out) / name);
        serialize_corpus(corpus, file, rc.format);
        persist_resolved(rc);
        out << "wrote " << (fs::path(rc.out) / name).string() << " (" << corpus.size()
            << " sentences)\n";
    }
    return 0;
}

inline int cmd_attention(const RunConfig& rc, std::ostream& out) {
    LoadedCheckpoint<float> model = read_checkpoint(rc);
    Corpus test = read_corpus(rc, "data.test", rc.data_test);
    std::vector<AttentionTrace> traces =
        attention_traces(model.params, model.config, model.vocab, test);
    if (rc.out.empty()) {
        if (rc.ansi)
            export_attention_ansi(traces, out);
        else
            export_attention_json(traces, out);
    } else {
        fs::create_directories(rc.out);
        std::string name = rc.ansi ? "attention.ansi" : "attention.jsonl";
        std::ofstream file(fs::path(rc.out) / name);
        if (rc.ansi)
            export_attention_ansi(traces, file);
        else
            export_attention_json(traces, file);
        persist_resolved(rc);
        out << "wrote " << (fs::path(rc.out) / name).string() << "\n";
    }
    return 0;
}

} // namespace detail

// Parses arguments (excluding the program name) and runs one subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"joint intent classification and slot filling"};
    app.require_subcommand(1);

    std::vector<std::string> subnames = {"train",     "eval",  "predict",
                                         "gradcheck", "synth", "attention"};
    std::map<std::string, CLI::App*> subs;
    std::map<const CLI::App*, std::map<std::string, CLI::Option*>> flags;
    std::map<const CLI::App*, std::string> config_paths;
    static const std::map<std::string, std::string> blurbs = {
        {"train", "train a model and write checkpoint, curves, resolved config"},
        {"eval", "score a checkpoint against a labeled corpus"},
        {"predict", "tag and classify an unlabeled corpus"},
        {"gradcheck", "compare backpropagation with finite differences"},
        {"synth", "generate a synthetic corpus"},
        {"attention", "export attention weights as JSON lines or shaded text"},
    };
    // Raw flag values; conversion happens when they override the config.
    std::map<const CLI::App*, std::map<std::string, std::string>> raw;
    std::map<const CLI::App*, bool> ansi_flags;
    for (const std::string& name : subnames) {
        CLI::App* sub = app.add_subcommand(name, blurbs.at(name));
        subs[name] = sub;
        sub->add_option("--config", config_paths[sub], "JSON config file (flat dotted keys)");
        for (const detail::KeySpec& spec : detail::key_table()) {
            if (spec.key == "ansi") continue;  // bare boolean flag below
            std::string names = "--" + spec.key;
            if (!spec.alias.empty() && spec.alias != names) names += "," + spec.alias;
            flags[sub][spec.key] =
                sub->add_option(names, raw[sub][spec.key])->take_last();
        }
        sub->add_flag("--ansi", ansi_flags[sub], "shaded terminal output");
    }

    try {
        std::vector<const char*> argv;
        argv.push_back("jslu");
        for (const std::string& a : args) argv.push_back(a.c_str());
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        RunConfig rc;
        if (!config_paths[sub].empty()) detail::apply_config_file(rc, config_paths[sub]);
        for (const detail::KeySpec& spec : detail::key_table())
            if (spec.key != "ansi" && flags[sub][spec.key]->count() > 0)
                spec.set(rc, nlohmann::json(raw[sub][spec.key]));
        if (ansi_flags[sub]) rc.ansi = true;

        const std::string& name = sub->get_name();
        if (name == "train") return detail::cmd_train(rc, out);
        if (name == "eval") return detail::cmd_eval(rc, out);
        if (name == "predict") return detail::cmd_predict(rc, out);
        if (name == "gradcheck") return detail::cmd_gradcheck(rc, out);
        if (name == "synth") return detail::cmd_synth(rc, out);
        return detail::cmd_attention(rc, out);
    } catch (const config_error& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    } catch (const numeric_error& e) {
        err << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const checkpoint_error& e) {
        err << "checkpoint error: " << e.what() << "\n";
        return 2;
    } catch (const error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

} // namespace jslu::cli

#endif
