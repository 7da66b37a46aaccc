#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <string>

#include "multistep/nn/mlp.hpp"

namespace multistep {

inline constexpr int kModelFormatVersion = 1;

struct NormalizationInfo {
    double min = 0.0;
    double max = 1.0;
};

/// Descriptive metadata carried alongside a serialized network.
struct ModelMetadata {
    std::string strategy_tag;
    std::optional<NormalizationInfo> normalization;
    Index p = 0;
    Index q = 0;
    bool time_step_augmented = false;
    std::optional<Index> max_step; // recursion depth N used to scale the time-step input
    std::optional<Index> h;        // horizon step of a direct-set member
    std::optional<bool> hybrid;
};

inline nlohmann::json to_json(const ModelMetadata& m) {
    nlohmann::json j;
    j["strategy_tag"] = m.strategy_tag;
    if (m.normalization) j["normalization"] = {{"min", m.normalization->min}, {"max", m.normalization->max}};
    else j["normalization"] = nullptr;
    j["p"] = m.p;
    j["q"] = m.q;
    j["time_step_augmented"] = m.time_step_augmented;
    if (m.max_step) j["max_step"] = *m.max_step;
    if (m.h) j["h"] = *m.h;
    if (m.hybrid) j["hybrid"] = *m.hybrid;
    return j;
}

inline ModelMetadata metadata_from_json(const nlohmann::json& j) {
    ModelMetadata m;
    m.strategy_tag = j.value("strategy_tag", "");
    if (j.contains("normalization") && !j["normalization"].is_null())
        m.normalization = NormalizationInfo{j["normalization"].at("min").get<double>(),
                                            j["normalization"].at("max").get<double>()};
    m.p = j.value("p", Index{0});
    m.q = j.value("q", Index{0});
    m.time_step_augmented = j.value("time_step_augmented", false);
    if (j.contains("max_step")) m.max_step = j["max_step"].get<Index>();
    if (j.contains("h")) m.h = j["h"].get<Index>();
    if (j.contains("hybrid")) m.hybrid = j["hybrid"].get<bool>();
    return m;
}

// nlohmann/json prints doubles in shortest round-trip form, so float64 values survive exactly.
inline nlohmann::json to_json(const Mlp& net, const ModelMetadata& meta) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : net.layers) {
        nlohmann::json rows = nlohmann::json::array();
        for (Index r = 0; r < l.weights.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Index c = 0; c < l.weights.cols(); ++c) row.push_back(l.weights(r, c));
            rows.push_back(std::move(row));
        }
        nlohmann::json bias = nlohmann::json::array();
        for (Index r = 0; r < l.bias.size(); ++r) bias.push_back(l.bias(r));
        layers.push_back({{"weights", std::move(rows)}, {"bias", std::move(bias)}, {"activation", to_string(l.activation)}});
    }
    return {{"format_version", kModelFormatVersion},
            {"input_dim", net.input_dim()},
            {"output_dim", net.output_dim()},
            {"dropout_rate", net.dropout_rate},
            {"layers", std::move(layers)},
            {"metadata", to_json(meta)}};
}

struct LoadedMlp {
    Mlp net;
    ModelMetadata metadata;
};

inline LoadedMlp mlp_from_json(const nlohmann::json& j) {
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw ConfigError("unsupported model format_version " + std::to_string(version));
        LoadedMlp out;
        out.net.dropout_rate = j.at("dropout_rate").get<double>();
        for (const auto& jl : j.at("layers")) {
            DenseLayer l;
            const auto& rows = jl.at("weights");
            const auto& bias = jl.at("bias");
            const Index out_dim = static_cast<Index>(rows.size());
            const Index in_dim = out_dim ? static_cast<Index>(rows[0].size()) : 0;
            l.weights.resize(out_dim, in_dim);
            for (Index r = 0; r < out_dim; ++r) {
                if (static_cast<Index>(rows[r].size()) != in_dim) throw ShapeError("ragged weight matrix");
                for (Index c = 0; c < in_dim; ++c) l.weights(r, c) = rows[r][c].get<double>();
            }
            l.bias.resize(static_cast<Index>(bias.size()));
            for (Index r = 0; r < l.bias.size(); ++r) l.bias(r) = bias[r].get<double>();
            l.activation = activation_from_string(jl.at("activation").get<std::string>());
            out.net.layers.push_back(std::move(l));
        }
        out.net.validate();
        if (out.net.input_dim() != j.at("input_dim").get<Index>() ||
            out.net.output_dim() != j.at("output_dim").get<Index>())
            throw ShapeError("declared input/output dimensions disagree with the layers");
        out.metadata = metadata_from_json(j.value("metadata", nlohmann::json::object()));
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed model document: ") + e.what());
    }
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw Error("failed writing '" + path + "'");
}

} // namespace multistep
