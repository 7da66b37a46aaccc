// multistep: ingest -> train -> evaluate -> compare.
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <iostream>

#include "multistep/app/commands.hpp"

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

} // namespace

int main(int argc, char** argv) {
    using namespace multistep;
    CLI::App app{"Multi-step time-series forecasting toolkit"};
    app.require_subcommand(1);

    app::IngestArgs ingest;
    std::string op = "sum", gap = "reject";
    auto* c_ingest = app.add_subcommand("ingest", "Aggregate a raw timestamp,flow CSV");
    c_ingest->add_option("--input", ingest.input, "raw CSV")->required();
    c_ingest->add_option("--output", ingest.output, "aggregated series CSV")->required();
    c_ingest->add_option("--factor", ingest.factor, "consecutive slots per output slot")->capture_default_str();
    c_ingest->add_option("--op", op, "sum or mean")->check(CLI::IsMember({"sum", "mean"}))->capture_default_str();
    c_ingest->add_option("--gap-policy", gap, "reject or linear")->check(CLI::IsMember({"reject", "linear"}))->capture_default_str();
    c_ingest->add_option("--resolution-minutes", ingest.resolution_minutes, "expected raw resolution");
    c_ingest->add_option("--max-gap", ingest.max_gap_slots, "longest fillable gap, in slots")->capture_default_str();

    app::TrainArgs train;
    auto* c_train = app.add_subcommand("train", "Train one strategy from a JSON config");
    c_train->add_option("--config", train.config, "run config JSON")->required();
    c_train->add_option("--data", train.data, "series CSV (overrides data.input_csv)");
    c_train->add_option("--out", train.out, "model file")->required();
    c_train->add_option("--seed", train.seed, "overrides the config seed");

    app::EvaluateArgs evaluate;
    auto* c_eval = app.add_subcommand("evaluate", "Score a model on the test split");
    c_eval->add_option("--model", evaluate.model, "model file")->required();
    c_eval->add_option("--data", evaluate.data, "series CSV (defaults to the one used in training)");
    c_eval->add_option("--report", evaluate.report, "report JSON")->required();
    c_eval->add_option("--curves", evaluate.curves, "per-step error CSV");
    c_eval->add_flag("--denormalize", evaluate.denormalize, "report errors in original units");
    c_eval->add_option("--q", evaluate.q, "dataset horizon (defaults to the model's)");

    app::CompareArgs compare;
    auto* c_cmp = app.add_subcommand("compare", "Tabulate reports against a baseline");
    c_cmp->add_option("--reports", compare.reports, "report JSON files")->required()->expected(1, -1);
    c_cmp->add_option("--baseline", compare.baseline, "baseline model tag")->required();
    c_cmp->add_option("--out", compare.out, "output prefix for .json and .txt")->required();
    c_cmp->add_option("--curves", compare.curves, "per-step error CSV");

    app::SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth-data", "");
    c_synth->group("");
    c_synth->add_option("--points", synth.points)->capture_default_str();
    c_synth->add_option("--seed", synth.seed)->capture_default_str();
    c_synth->add_option("--output", synth.output)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*c_ingest) {
            ingest.op = aggregation_from_string(op);
            ingest.gap_policy = gap_policy_from_string(gap);
            app::cmd_ingest(ingest, std::cout);
        } else if (*c_train) {
            app::cmd_train(train, std::cout);
        } else if (*c_eval) {
            app::cmd_evaluate(evaluate, std::cout);
        } else if (*c_cmp) {
            app::cmd_compare(compare, std::cout);
        } else if (*c_synth) {
            app::cmd_synth_data(synth, std::cout);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsageError;
    } catch (const IngestError& e) {
        std::cerr << "ingest error: " << e.what() << '\n';
        return kRuntimeFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return 0;
}
