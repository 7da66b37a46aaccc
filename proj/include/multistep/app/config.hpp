#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "multistep/cgan/cgan.hpp"
#include "multistep/dad/dad.hpp"
#include "multistep/data/time_series.hpp"

namespace multistep::app {

inline const std::vector<std::string>& strategy_tags() {
    static const std::vector<std::string> tags{"recursive", "dad",   "cdad",        "direct",
                                               "hybrid",    "multi", "multi-noise", "multi-cgan"};
    return tags;
}

inline bool needs_dad(const std::string& s) { return s == "dad" || s == "cdad"; }
inline bool needs_cgan(const std::string& s) { return s == "multi-cgan"; }
inline bool needs_noise(const std::string& s) { return s == "multi-noise"; }
inline bool is_recursive_family(const std::string& s) { return s == "recursive" || needs_dad(s); }
inline bool is_direct_family(const std::string& s) { return s == "direct" || s == "hybrid"; }
inline bool is_multi_family(const std::string& s) { return s.rfind("multi", 0) == 0; }

struct DataSection {
    std::string input_csv; // may be left empty and given on the command line
    int aggregate_factor = 1;
    AggregationOp aggregation = AggregationOp::sum;
    Index p = 8;
    Index q = 8;
    Index stride = 1;
    SplitSpec split;
    GapPolicy gap_policy = GapPolicy::reject;
    Index max_gap_slots = 12;
};

struct ModelSection {
    std::string strategy;
    int hidden_layers = 2;
    int hidden_units = 150;
    double dropout = 0.1;
    TrainConfig train;
};

struct DadSection {
    Index N = 8;
    int K = 30;
    int inner_epochs = 20;
    double inner_learning_rate = 1e-3;
    SelectionMetric selection_metric = SelectionMetric::mse;
    bool accumulate = false;
};

struct CganSection {
    CganConfig cgan;
    std::optional<Index> synthetic_count; // defaults to the training-set size
};

struct NoiseSection {
    double sigma = 0.1;
    bool interpret_as_stddev = false;

    double stddev() const { return interpret_as_stddev ? sigma : std::sqrt(sigma); }
};

struct RunConfig {
    DataSection data;
    ModelSection model;
    std::optional<DadSection> dad;
    std::optional<CganSection> cgan;
    std::optional<NoiseSection> noise;
    bool denormalize = false;
    std::uint64_t seed = 0;

    NetworkSpec network() const {
        NetworkSpec n;
        n.hidden.assign(static_cast<std::size_t>(model.hidden_layers), model.hidden_units);
        return n;
    }

    /// Training settings with the run seed and model dropout folded in.
    TrainConfig train_config() const {
        TrainConfig t = model.train;
        t.seed = seed;
        t.dropout_rate = model.dropout;
        return t;
    }

    DadConfig dad_config() const {
        if (!dad) throw ConfigError("dad section missing");
        DadConfig c;
        c.p = data.p;
        c.N = dad->N;
        c.K = dad->K;
        c.base_train = train_config();
        c.inner_train = c.base_train;
        c.inner_train.epochs = dad->inner_epochs;
        c.inner_train.learning_rate = dad->inner_learning_rate;
        c.inner_train.seed = derive_seed(seed, 0x7a1);
        c.network = network();
        c.conditional = model.strategy == "cdad";
        c.selection_metric = dad->selection_metric;
        c.accumulate = dad->accumulate;
        return c;
    }

    CganConfig cgan_config() const {
        if (!cgan) throw ConfigError("cgan section missing");
        CganConfig c = cgan->cgan;
        c.seed = derive_seed(seed, 0xc6a);
        return c;
    }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (const auto& [key, _] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
}

template <class T>
void read(const nlohmann::json& j, const char* key, const std::string& where, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("key '" + (where.empty() ? std::string(key) : where + "." + key) + "' has the wrong type");
    }
}

inline std::string path(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

inline TimePoint read_time(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing key '" + path(where, key) + "'");
    std::string text;
    read(j, key, where, text);
    auto t = parse_timestamp(text);
    if (!t) throw ConfigError("key '" + path(where, key) + "' is not a timestamp: '" + text + "'");
    return *t;
}

inline void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError("key '" + key + "' " + what);
}

} // namespace detail

inline DataSection parse_data(const nlohmann::json& j) {
    using namespace detail;
    const std::string w = "data";
    reject_unknown(j, w, {"input_csv", "aggregate_factor", "aggregation", "p", "q", "stride", "split", "gap_policy", "max_gap_slots"});
    DataSection d;
    read(j, "input_csv", w, d.input_csv);
    read(j, "aggregate_factor", w, d.aggregate_factor);
    std::string s = "sum";
    read(j, "aggregation", w, s);
    if (s == "sum") d.aggregation = AggregationOp::sum;
    else if (s == "mean") d.aggregation = AggregationOp::mean;
    else throw ConfigError("key 'data.aggregation' must be sum or mean");
    read(j, "p", w, d.p);
    read(j, "q", w, d.q);
    read(j, "stride", w, d.stride);
    s = "reject";
    read(j, "gap_policy", w, s);
    try {
        d.gap_policy = gap_policy_from_string(s);
    } catch (const ConfigError&) {
        throw ConfigError("key 'data.gap_policy' must be reject or linear");
    }
    read(j, "max_gap_slots", w, d.max_gap_slots);
    if (!j.contains("split")) throw ConfigError("missing key 'data.split'");
    const auto& sp = j.at("split");
    reject_unknown(sp, "data.split", {"train_end", "val_end"});
    d.split.train_end = read_time(sp, "train_end", "data.split");
    d.split.val_end = read_time(sp, "val_end", "data.split");
    require(d.aggregate_factor >= 1, "data.aggregate_factor", "must be at least 1");
    require(d.p >= 1, "data.p", "must be at least 1");
    require(d.q >= 1, "data.q", "must be at least 1");
    require(d.stride >= 1, "data.stride", "must be at least 1");
    require(d.max_gap_slots >= 1, "data.max_gap_slots", "must be at least 1");
    require(d.split.train_end < d.split.val_end, "data.split.val_end", "must come after data.split.train_end");
    return d;
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
    using namespace detail;
    reject_unknown(j, "", {"data", "model", "dad", "cgan", "noise", "eval", "seed"});
    RunConfig c;
    if (!j.contains("data")) throw ConfigError("missing key 'data'");
    c.data = parse_data(j.at("data"));
    read(j, "seed", "", c.seed);

    if (!j.contains("model")) throw ConfigError("missing key 'model'");
    const auto& m = j.at("model");
    reject_unknown(m, "model", {"strategy", "hidden_layers", "hidden_units", "dropout", "train"});
    if (!m.contains("strategy")) throw ConfigError("missing key 'model.strategy'");
    read(m, "strategy", "model", c.model.strategy);
    const auto& tags = strategy_tags();
    if (std::find(tags.begin(), tags.end(), c.model.strategy) == tags.end())
        throw ConfigError("key 'model.strategy' has unknown value '" + c.model.strategy + "'");
    read(m, "hidden_layers", "model", c.model.hidden_layers);
    read(m, "hidden_units", "model", c.model.hidden_units);
    read(m, "dropout", "model", c.model.dropout);
    require(c.model.hidden_layers >= 0, "model.hidden_layers", "must be non-negative");
    require(c.model.hidden_units >= 1, "model.hidden_units", "must be positive");
    require(c.model.dropout >= 0.0 && c.model.dropout < 1.0, "model.dropout", "must lie in [0, 1)");
    if (m.contains("train")) {
        const auto& t = m.at("train");
        reject_unknown(t, "model.train", {"epochs", "batch_size", "learning_rate"});
        read(t, "epochs", "model.train", c.model.train.epochs);
        read(t, "batch_size", "model.train", c.model.train.batch_size);
        read(t, "learning_rate", "model.train", c.model.train.learning_rate);
    }
    require(c.model.train.epochs >= 0, "model.train.epochs", "must be non-negative");
    require(c.model.train.batch_size >= 1, "model.train.batch_size", "must be positive");
    require(c.model.train.learning_rate > 0.0, "model.train.learning_rate", "must be positive");

    const std::string& s = c.model.strategy;
    auto section = [&](const char* key, bool needed) {
        if (needed && !j.contains(key))
            throw ConfigError("missing key '" + std::string(key) + "' (required by strategy " + s + ")");
        if (!needed && j.contains(key))
            throw ConfigError("key '" + std::string(key) + "' is not used by strategy " + s);
        return needed;
    };

    if (section("dad", needs_dad(s))) {
        const auto& d = j.at("dad");
        reject_unknown(d, "dad", {"N", "K", "inner_epochs", "inner_learning_rate", "selection_metric", "accumulate"});
        DadSection ds;
        ds.N = c.data.q;
        read(d, "N", "dad", ds.N);
        read(d, "K", "dad", ds.K);
        read(d, "inner_epochs", "dad", ds.inner_epochs);
        read(d, "inner_learning_rate", "dad", ds.inner_learning_rate);
        std::string metric = "mse";
        read(d, "selection_metric", "dad", metric);
        if (metric != "mse" && metric != "mae") throw ConfigError("key 'dad.selection_metric' must be mse or mae");
        ds.selection_metric = selection_metric_from_string(metric);
        read(d, "accumulate", "dad", ds.accumulate);
        require(ds.N == c.data.q, "dad.N", "must equal data.q (" + std::to_string(c.data.q) + ")");
        require(ds.K >= 1, "dad.K", "must be at least 1");
        require(ds.inner_epochs >= 0, "dad.inner_epochs", "must be non-negative");
        require(ds.inner_learning_rate > 0.0, "dad.inner_learning_rate", "must be positive");
        c.dad = ds;
    }

    if (section("cgan", needs_cgan(s))) {
        const auto& g = j.at("cgan");
        reject_unknown(g, "cgan", {"noise_dim", "lr_discriminator", "lr_generator", "epochs", "batch_size", "hidden_layers",
                                   "hidden_units", "dropout", "saturating", "adam_beta1", "synthetic_count"});
        CganSection cs;
        auto& cg = cs.cgan;
        read(g, "noise_dim", "cgan", cg.noise_dim);
        read(g, "lr_discriminator", "cgan", cg.lr_discriminator);
        read(g, "lr_generator", "cgan", cg.lr_generator);
        read(g, "epochs", "cgan", cg.epochs);
        read(g, "batch_size", "cgan", cg.batch_size);
        int layers = c.model.hidden_layers, units = c.model.hidden_units;
        read(g, "hidden_layers", "cgan", layers);
        read(g, "hidden_units", "cgan", units);
        require(layers >= 0, "cgan.hidden_layers", "must be non-negative");
        require(units >= 1, "cgan.hidden_units", "must be positive");
        cg.network.hidden.assign(static_cast<std::size_t>(layers), units);
        read(g, "dropout", "cgan", cg.dropout_rate);
        read(g, "saturating", "cgan", cg.saturating);
        read(g, "adam_beta1", "cgan", cg.adam_beta1);
        require(cg.adam_beta1 >= 0.0 && cg.adam_beta1 < 1.0, "cgan.adam_beta1", "must lie in [0, 1)");
        if (g.contains("synthetic_count") && !g["synthetic_count"].is_null()) {
            Index n = 0;
            read(g, "synthetic_count", "cgan", n);
            require(n >= 0, "cgan.synthetic_count", "must be non-negative");
            cs.synthetic_count = n;
        }
        try {
            cg.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("invalid cgan section: ") + e.what());
        }
        c.cgan = cs;
    }

    if (section("noise", needs_noise(s))) {
        const auto& n = j.at("noise");
        reject_unknown(n, "noise", {"sigma", "interpret_as_stddev"});
        NoiseSection ns;
        read(n, "sigma", "noise", ns.sigma);
        read(n, "interpret_as_stddev", "noise", ns.interpret_as_stddev);
        require(ns.sigma >= 0.0, "noise.sigma", "must be non-negative");
        c.noise = ns;
    }

    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        reject_unknown(e, "eval", {"denormalize"});
        read(e, "denormalize", "eval", c.denormalize);
    }
    if (is_multi_family(c.model.strategy) && c.data.q < 2)
        throw ConfigError("key 'data.q' must be at least 2 for multi-output strategies");
    return c;
}

/// Every setting that affects a run, defaults included.
inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["data"] = {{"input_csv", c.data.input_csv},
                 {"aggregate_factor", c.data.aggregate_factor},
                 {"aggregation", c.data.aggregation == AggregationOp::sum ? "sum" : "mean"},
                 {"p", c.data.p},
                 {"q", c.data.q},
                 {"stride", c.data.stride},
                 {"split", {{"train_end", format_timestamp(c.data.split.train_end)}, {"val_end", format_timestamp(c.data.split.val_end)}}},
                 {"gap_policy", to_string(c.data.gap_policy)},
                 {"max_gap_slots", c.data.max_gap_slots}};
    j["model"] = {{"strategy", c.model.strategy},
                  {"hidden_layers", c.model.hidden_layers},
                  {"hidden_units", c.model.hidden_units},
                  {"dropout", c.model.dropout},
                  {"train",
                   {{"epochs", c.model.train.epochs},
                    {"batch_size", c.model.train.batch_size},
                    {"learning_rate", c.model.train.learning_rate}}}};
    if (c.dad)
        j["dad"] = {{"N", c.dad->N},
                    {"K", c.dad->K},
                    {"inner_epochs", c.dad->inner_epochs},
                    {"inner_learning_rate", c.dad->inner_learning_rate},
                    {"selection_metric", to_string(c.dad->selection_metric)},
                    {"accumulate", c.dad->accumulate}};
    if (c.cgan) {
        const auto& g = c.cgan->cgan;
        j["cgan"] = {{"noise_dim", g.noise_dim},
                     {"lr_discriminator", g.lr_discriminator},
                     {"lr_generator", g.lr_generator},
                     {"epochs", g.epochs},
                     {"batch_size", g.batch_size},
                     {"hidden_layers", g.network.hidden.size()},
                     {"hidden_units", g.network.hidden.empty() ? Index{c.model.hidden_units} : g.network.hidden.front()},
                     {"dropout", g.dropout_rate},
                     {"saturating", g.saturating},
                     {"adam_beta1", g.adam_beta1}};
        j["cgan"]["synthetic_count"] = c.cgan->synthetic_count ? nlohmann::json(*c.cgan->synthetic_count) : nlohmann::json(nullptr);
    }
    if (c.noise) j["noise"] = {{"sigma", c.noise->sigma}, {"interpret_as_stddev", c.noise->interpret_as_stddev}};
    j["eval"] = {{"denormalize", c.denormalize}};
    j["seed"] = c.seed;
    return j;
}

} // namespace multistep::app
