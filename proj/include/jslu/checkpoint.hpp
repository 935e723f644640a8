#ifndef JSLU_CHECKPOINT_HPP
#define JSLU_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jslu/data.hpp"
#include "jslu/errors.hpp"
#include "jslu/model.hpp"

// Model persistence. A checkpoint is self-contained: config, vocabulary,
// and parameters all travel in one file, so evaluation needs nothing else.
//
// Layout: 4-byte magic "JSLU", 1-byte format version, 4-byte little-endian
// header length, UTF-8 JSON header (config + vocab + tensor manifest),
// then the tensors as little-endian 32-bit floats in manifest order.

namespace jslu {

inline constexpr char checkpoint_magic[4] = {'J', 'S', 'L', 'U'};
inline constexpr std::uint8_t checkpoint_version = 1;

inline nlohmann::json config_to_json(const ModelConfig& cfg) {
    nlohmann::json j;
    j["mode"] = format_mode(cfg.mode);
    j["word_embed_dim"] = cfg.word_embed_dim;
    j["tag_embed_dim"] = cfg.tag_embed_dim;
    j["hidden_dim"] = cfg.hidden_dim;
    j["window_sizes"] = cfg.window_sizes;
    j["filters_per_window"] = cfg.filters_per_window;
    j["aggregator"] = format_aggregator(cfg.aggregator);
    if (cfg.sparsity)
        j["sparsity"] = {{"rho", cfg.sparsity->rho},
                         {"beta", cfg.sparsity->beta},
                         {"epsilon", cfg.sparsity->epsilon}};
    else
        j["sparsity"] = nullptr;
    j["num_tags"] = cfg.num_tags;
    j["num_intents"] = cfg.num_intents;
    j["dropout_rate"] = cfg.dropout_rate;
    return j;
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.mode = parse_mode(j.at("mode").get<std::string>());
    cfg.word_embed_dim = j.at("word_embed_dim").get<std::size_t>();
    cfg.tag_embed_dim = j.at("tag_embed_dim").get<std::size_t>();
    cfg.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    cfg.window_sizes = j.at("window_sizes").get<std::vector<std::size_t>>();
    cfg.filters_per_window = j.at("filters_per_window").get<std::size_t>();
    cfg.aggregator = parse_aggregator(j.at("aggregator").get<std::string>());
    if (!j.at("sparsity").is_null()) {
        SparsityConfig s;
        s.rho = j["sparsity"].at("rho").get<double>();
        s.beta = j["sparsity"].at("beta").get<double>();
        s.epsilon = j["sparsity"].at("epsilon").get<double>();
        cfg.sparsity = s;
    }
    cfg.num_tags = j.at("num_tags").get<std::size_t>();
    cfg.num_intents = j.at("num_intents").get<std::size_t>();
    cfg.dropout_rate = j.at("dropout_rate").get<double>();
    return validate_config(cfg);
}

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32_le(const std::string& buf, std::size_t pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= std::uint32_t(std::uint8_t(buf[pos + i])) << (8 * i);
    return v;
}

} // namespace detail

// Parameters are stored as 32-bit floats regardless of the working scalar
// type; double-precision models round to float on save.
template <typename T>
void save_checkpoint(const ModelParams<T>& params, const ModelConfig& cfg,
                     const Vocab& vocab, const std::string& path) {
    nlohmann::json manifest = nlohmann::json::array();
    std::string data;
    params.for_each([&](const std::string& name, const Tensor<T>& t) {
        manifest.push_back({{"name", name},
                            {"shape", t.shape},
                            {"offset", data.size()}});
        for (T v : t.data) detail::put_u32_le(data, std::bit_cast<std::uint32_t>(float(v)));
    });
    nlohmann::json header;
    header["config"] = config_to_json(cfg);
    header["vocab"] = vocab.to_json();
    header["tensors"] = manifest;
    std::string head = header.dump();

    std::string blob;
    blob.append(checkpoint_magic, 4);
    blob.push_back(char(checkpoint_version));
    detail::put_u32_le(blob, std::uint32_t(head.size()));
    blob += head;
    blob += data;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot write checkpoint '" + path + "'");
    out.write(blob.data(), std::streamsize(blob.size()));
    if (!out) throw data_error("short write to checkpoint '" + path + "'");
}

template <typename T = float>
struct LoadedCheckpoint {
    ModelConfig config;
    Vocab vocab;
    ModelParams<T> params;
};

template <typename T = float>
LoadedCheckpoint<T> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw checkpoint_error(checkpoint_error::kind::corrupt,
                               "cannot open checkpoint '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string buf = ss.str();

    auto corrupt = [&](const std::string& why) {
        return checkpoint_error(checkpoint_error::kind::corrupt,
                                "checkpoint '" + path + "': " + why);
    };
    if (buf.size() < 9) throw corrupt("file shorter than the fixed prelude");
    if (buf.compare(0, 4, checkpoint_magic, 4) != 0)
        throw corrupt("bad magic bytes");
    std::uint8_t version = std::uint8_t(buf[4]);
    if (version != checkpoint_version)
        throw checkpoint_error(checkpoint_error::kind::version_mismatch,
                               "checkpoint '" + path + "': format version " +
                                   std::to_string(version) + ", expected " +
                                   std::to_string(checkpoint_version));
    std::size_t head_len = detail::get_u32_le(buf, 5);
    if (9 + head_len > buf.size()) throw corrupt("header extends past end of file");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(buf.substr(9, head_len));
    } catch (const nlohmann::json::exception& e) {
        throw corrupt(std::string("header is not valid JSON: ") + e.what());
    }

    LoadedCheckpoint<T> loaded;
    try {
        loaded.config = config_from_json(header.at("config"));
        loaded.vocab = Vocab::from_json(header.at("vocab"));
    } catch (const nlohmann::json::exception& e) {
        throw corrupt(std::string("header is missing fields: ") + e.what());
    }
    loaded.params = make_params<T>(loaded.config, loaded.vocab.num_words());

    nlohmann::json manifest;
    try {
        manifest = header.at("tensors");
    } catch (const nlohmann::json::exception&) {
        throw corrupt("header has no tensor manifest");
    }
    const std::size_t data_start = 9 + head_len;
    std::size_t entry = 0;
    loaded.params.for_each([&](const std::string& name, Tensor<T>& t) {
        if (entry >= manifest.size())
            throw checkpoint_error(checkpoint_error::kind::shape_mismatch,
                                   "checkpoint '" + path + "': manifest ends before '" +
                                       name + "'");
        const nlohmann::json& m = manifest[entry++];
        std::string stored_name = m.value("name", "");
        Shape stored_shape = m.value("shape", Shape{});
        if (stored_name != name || stored_shape != t.shape)
            throw checkpoint_error(
                checkpoint_error::kind::shape_mismatch,
                "checkpoint '" + path + "': expected tensor '" + name + "' " +
                    shape_str(t.shape) + ", found '" + stored_name + "' " +
                    shape_str(stored_shape));
        std::size_t offset = data_start + m.value("offset", std::size_t(0));
        if (offset + 4 * t.numel() > buf.size())
            throw corrupt("tensor '" + name + "' extends past end of file");
        for (std::size_t i = 0; i < t.numel(); ++i)
            t.data[i] = T(std::bit_cast<float>(detail::get_u32_le(buf, offset + 4 * i)));
    });
    if (entry != manifest.size())
        throw checkpoint_error(checkpoint_error::kind::shape_mismatch,
                               "checkpoint '" + path + "': manifest lists " +
                                   std::to_string(manifest.size()) +
                                   " tensors, model has " + std::to_string(entry));
    return loaded;
}

} // namespace jslu

#endif
