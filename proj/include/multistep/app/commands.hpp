#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "multistep/app/config.hpp"
#include "multistep/app/model_file.hpp"
#include "multistep/cgan/cgan.hpp"
#include "multistep/dad/dad.hpp"
#include "multistep/eval/metrics.hpp"
#include "multistep/synthetic.hpp"

namespace multistep::app {

struct IngestArgs {
    std::string input;
    std::string output;
    int factor = 3;
    AggregationOp op = AggregationOp::sum;
    GapPolicy gap_policy = GapPolicy::reject;
    std::optional<int> resolution_minutes;
    Index max_gap_slots = 12;
};

struct IngestSummary {
    std::size_t rows_in = 0;
    std::size_t rows_out = 0;
};

/// Reads a raw CSV, aggregates it and writes the series plus a `<output>.json` sidecar.
inline IngestSummary cmd_ingest(const IngestArgs& a, std::ostream& log) {
    if (a.factor < 1) throw ConfigError("--factor must be at least 1");
    IngestOptions opts;
    opts.gap_policy = a.gap_policy;
    opts.max_gap_slots = a.max_gap_slots;
    if (a.resolution_minutes) {
        if (*a.resolution_minutes < 1) throw ConfigError("--resolution-minutes must be positive");
        opts.expected_resolution = std::chrono::minutes{*a.resolution_minutes};
    }
    const TimeSeries raw = ingest_csv(a.input, opts);
    const TimeSeries out = aggregate(raw, a.factor, a.op);
    write_series_csv(a.output, out);
    nlohmann::json side = {{"source", a.input},
                           {"rows_in", raw.size()},
                           {"rows_out", out.size()},
                           {"factor", a.factor},
                           {"aggregation", to_string(a.op)},
                           {"resolution_seconds", out.resolution.count()}};
    if (!out.empty()) {
        side["start"] = format_timestamp(out.timestamps.front());
        side["end"] = format_timestamp(out.timestamps.back());
    }
    write_json_file(a.output + ".json", side);
    log << "ingested " << raw.size() << " rows -> " << out.size() << " rows (" << a.output << ")\n";
    return {raw.size(), out.size()};
}

/// Normalized train/val/test splits of the configured series.
struct PreparedData {
    Normalizer normalizer;
    TimeSeries train;
    TimeSeries val;
    TimeSeries test;
};

inline PreparedData prepare_data(const DataSection& d, const std::string& path) {
    IngestOptions opts;
    opts.gap_policy = d.gap_policy;
    opts.max_gap_slots = d.max_gap_slots;
    TimeSeries series = ingest_csv(path, opts);
    if (d.aggregate_factor > 1) series = aggregate(series, d.aggregate_factor, d.aggregation);
    const SeriesSplit split = split_by_date(series, d.split);
    if (split.train.empty()) throw ConfigError("training split is empty; check data.split.train_end");
    PreparedData out;
    out.normalizer = fit_normalizer(split.train);
    out.train = out.normalizer.apply(split.train);
    out.val = out.normalizer.apply(split.val);
    out.test = out.normalizer.apply(split.test);
    return out;
}

struct TrainArgs {
    std::string config;
    std::string data; // overrides data.input_csv when set
    std::string out;
    std::optional<std::uint64_t> seed;
};

struct TrainOutcome {
    TrainedModel model;
    RunConfig config;
    nlohmann::json training_log;
    std::optional<nlohmann::json> cgan;
};

/// Trains the configured strategy on already-normalized splits.
inline TrainOutcome train_strategy(const RunConfig& cfg, const PreparedData& data) {
    TrainOutcome o;
    o.config = cfg;
    const std::string& s = cfg.model.strategy;
    const TrainConfig tc = cfg.train_config();
    const NetworkSpec net = cfg.network();
    const Index p = cfg.data.p, q = cfg.data.q;
    TrainedModel& m = o.model;
    m.strategy = s;
    m.p = p;
    m.q = q;
    m.normalizer = data.normalizer;
    nlohmann::json& log = o.training_log;
    log["strategy"] = s;

    if (s == "recursive") {
        const WindowedDataset D = make_windows(data.train, p, 1, cfg.data.stride);
        RecursiveModel r;
        r.p = p;
        FitResult f = fit(build_regressor(p, 1, net, tc), D.histories, D.futures, tc);
        r.net = std::move(f.net);
        log["train_rows"] = D.size();
        log["loss_history"] = f.loss_history;
        m.model = std::move(r);
    } else if (needs_dad(s)) {
        const DadConfig dc = cfg.dad_config();
        if (data.val.size() < static_cast<std::size_t>(p + dc.N))
            throw ConfigError("validation split too short for " + std::to_string(p + dc.N) + "-point windows");
        const MetaTrainResult r = s == "dad" ? train_dad(data.train.values, data.val.values, dc)
                                              : train_cdad(data.train.values, data.val.values, dc);
        log["dad"] = training_log_json(r);
        log["base_val_mse"] = r.base_val_error.mse;
        log["base_val_mae"] = r.base_val_error.mae;
        log["dataset_rows"] = r.dataset_rows;
        m.model = r.best_model;
    } else if (is_direct_family(s)) {
        const WindowedDataset D = make_windows(data.train, p, q, cfg.data.stride);
        log["train_rows"] = D.size();
        m.model = train_direct(D, q, tc, net, s == "hybrid");
    } else {
        WindowedDataset D = make_windows(data.train, p, q, cfg.data.stride);
        log["train_rows"] = D.size();
        if (s == "multi-noise") {
            Rng rng(derive_seed(cfg.seed, 0x401));
            log["noise_stddev"] = cfg.noise->stddev();
            D = noise_augment(D, cfg.noise->stddev(), rng);
        } else if (s == "multi-cgan") {
            const CganConfig cc = cfg.cgan_config();
            std::optional<WindowedDataset> holdout;
            if (data.val.size() >= static_cast<std::size_t>(p + q)) holdout = make_windows(data.val, p, q, 1);
            const CganPair pair = train_cgan(D, cc, holdout ? &*holdout : nullptr);
            const Index count = cfg.cgan->synthetic_count.value_or(D.size());
            Rng rng(derive_seed(cfg.seed, 0x5a7));
            const Eigen::MatrixXd futures = sample_futures(D, count, rng);
            D = D.concat(generate_pairs(pair, futures, rng));
            nlohmann::json epochs = nlohmann::json::array();
            for (const auto& e : pair.training_log)
                epochs.push_back({{"d_loss", e.d_loss}, {"g_loss", e.g_loss}, {"d_accuracy", e.d_accuracy}});
            log["cgan"] = {{"epochs", std::move(epochs)}, {"warnings", pair.warnings}, {"synthetic_rows", count}};
            o.cgan = to_json(pair, cc);
        }
        log["combined_rows"] = D.size();
        FitResult f = fit(build_regressor(p, q, net, tc), D, tc);
        MultiOutputModel mo;
        mo.net = std::move(f.net);
        mo.p = p;
        mo.q = q;
        log["loss_history"] = f.loss_history;
        m.model = std::move(mo);
    }
    return o;
}

/// Writes `<out>`, `<out>.config.json`, `<out>.log.json` and, for multi-cgan, `<out>.cgan.json`.
inline TrainOutcome cmd_train(const TrainArgs& a, std::ostream& log) {
    RunConfig cfg = parse_run_config(read_json_file(a.config));
    if (a.seed) cfg.seed = *a.seed;
    if (!a.data.empty()) cfg.data.input_csv = a.data;
    if (cfg.data.input_csv.empty()) throw ConfigError("no input series: set data.input_csv or pass --data");
    for (const auto& w : cfg.cgan ? cfg.cgan->cgan.warnings() : std::vector<std::string>{}) log << "warning: " << w << '\n';

    const PreparedData data = prepare_data(cfg.data, cfg.data.input_csv);
    log << "training " << cfg.model.strategy << " on " << data.train.size() << " points (val " << data.val.size()
        << ", test " << data.test.size() << ")\n";
    TrainOutcome o = train_strategy(cfg, data);
    const nlohmann::json echo = to_json(cfg);
    write_json_file(a.out, to_json(o.model, echo));
    write_json_file(a.out + ".config.json", echo);
    write_json_file(a.out + ".log.json", o.training_log);
    if (o.cgan) write_json_file(a.out + ".cgan.json", *o.cgan);
    log << "wrote " << a.out << '\n';
    return o;
}

struct EvaluateArgs {
    std::string model;
    std::string data; // overrides the series recorded in the model's config
    std::string report;
    std::string curves;
    bool denormalize = false;
    std::optional<Index> q; // dataset horizon; defaults to the model's
};

inline MetricsReport cmd_evaluate(const EvaluateArgs& a, std::ostream& log) {
    const nlohmann::json file = read_json_file(a.model);
    const TrainedModel model = model_from_json(file);
    if (!file.contains("config") || file["config"].is_null()) throw ConfigError("model file carries no run config");
    RunConfig cfg = parse_run_config(file["config"]);
    const std::string path = a.data.empty() ? cfg.data.input_csv : a.data;
    const PreparedData data = prepare_data(cfg.data, path);
    const Index q = a.q.value_or(model.q);
    if (q != model.q)
        throw ConfigError("model horizon H = " + std::to_string(model.q) + " does not match dataset q = " + std::to_string(q));
    const WindowedDataset test = make_windows(data.test, model.p, q, cfg.data.stride);
    std::optional<Normalizer> norm;
    if (a.denormalize || cfg.denormalize) norm = model.normalizer;
    MetricsReport r = evaluate_predictions(model.strategy, model.predict(test.histories), test.futures, norm);
    write_json_file(a.report, to_json(r));
    if (!a.curves.empty()) export_step_curves(std::span<const MetricsReport>(&r, 1), a.curves);
    log << model.strategy << ": mse " << format_double(r.overall_mse) << ", mae " << format_double(r.overall_mae) << " over "
        << r.num_samples << " windows\n";
    return r;
}

struct CompareArgs {
    std::vector<std::string> reports;
    std::string baseline;
    std::string out; // writes <out>.json and <out>.txt
    std::string curves;
};

inline ComparisonTable cmd_compare(const CompareArgs& a, std::ostream& log) {
    if (a.reports.empty()) throw ConfigError("compare needs at least one report");
    std::vector<MetricsReport> reports;
    for (const auto& p : a.reports) reports.push_back(report_from_json(read_json_file(p)));
    const ComparisonTable table = build_comparison(reports, a.baseline);
    const std::string text = render_table(table);
    write_json_file(a.out + ".json", to_json(table));
    std::ofstream txt(a.out + ".txt");
    if (!txt) throw Error("cannot write '" + a.out + ".txt'");
    txt << text;
    if (!a.curves.empty()) export_step_curves(reports, a.curves);
    log << text;
    return table;
}

struct SynthArgs {
    std::size_t points = 3700;
    std::uint64_t seed = 1;
    std::string output;
};

inline void cmd_synth_data(const SynthArgs& a, std::ostream& log) {
    if (a.points == 0) throw ConfigError("--points must be positive");
    write_series_csv(a.output, synthetic_traffic_series(a.points, a.seed));
    log << "wrote " << a.points << " points to " << a.output << '\n';
}

} // namespace multistep::app
