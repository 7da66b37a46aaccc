#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "multistep/data/normalizer.hpp"
#include "multistep/data/windows.hpp"

namespace multistep {

/// Overall and per-step errors of one model over a test set.
struct MetricsReport {
    std::string model_tag;
    double overall_mse = 0.0;
    double overall_mae = 0.0;
    std::vector<double> per_step_mse;
    std::vector<double> per_step_mae;
    Eigen::Index num_samples = 0;
    bool denormalized = false;

    Eigen::Index horizon() const { return static_cast<Eigen::Index>(per_step_mse.size()); }
};

/// Maps a history window to H predictions.
using HorizonPredictor = std::function<Eigen::VectorXd(std::span<const double>)>;

/// Errors of `predictions` against `truth` (both [samples x H]). When `normalizer` is given,
/// both are mapped back to original units first.
inline MetricsReport evaluate_predictions(std::string tag, Eigen::MatrixXd predictions, Eigen::MatrixXd truth,
                                          const std::optional<Normalizer>& normalizer = std::nullopt) {
    if (predictions.rows() != truth.rows() || predictions.cols() != truth.cols())
        throw ShapeError("prediction matrix shape differs from the ground truth");
    if (truth.rows() == 0) throw ConfigError("cannot evaluate on an empty test set");
    if (normalizer) {
        auto inv = [&](double u) { return normalizer->invert(u); };
        predictions = predictions.unaryExpr(inv);
        truth = truth.unaryExpr(inv);
    }
    MetricsReport r;
    r.model_tag = std::move(tag);
    r.num_samples = truth.rows();
    r.denormalized = normalizer.has_value();
    const Eigen::ArrayXXd diff = (predictions - truth).array();
    if (!diff.allFinite()) throw NumericError("non-finite prediction error");
    const Eigen::ArrayXd sq = diff.square().colwise().mean().transpose();
    const Eigen::ArrayXd ab = diff.abs().colwise().mean().transpose();
    r.per_step_mse.assign(sq.data(), sq.data() + sq.size());
    r.per_step_mae.assign(ab.data(), ab.data() + ab.size());
    r.overall_mse = diff.square().mean();
    r.overall_mae = diff.abs().mean();
    return r;
}

/// Runs `predict` on every test window and scores it. `horizon` is the predictor's H and must equal test.q.
inline MetricsReport evaluate(std::string tag, const HorizonPredictor& predict, Eigen::Index horizon,
                              const WindowedDataset& test, const std::optional<Normalizer>& normalizer = std::nullopt) {
    if (horizon != test.q)
        throw ConfigError("model horizon H = " + std::to_string(horizon) + " does not match dataset q = " +
                          std::to_string(test.q));
    if (test.empty()) throw ConfigError("cannot evaluate on an empty test set");
    Eigen::MatrixXd pred(test.size(), horizon);
    std::vector<double> history(static_cast<std::size_t>(test.p));
    for (Eigen::Index i = 0; i < test.size(); ++i) {
        for (Eigen::Index k = 0; k < test.p; ++k) history[static_cast<std::size_t>(k)] = test.histories(i, k);
        const Eigen::VectorXd y = predict(history);
        if (y.size() != horizon)
            throw ShapeError("predictor returned " + std::to_string(y.size()) + " values, expected " + std::to_string(horizon));
        pred.row(i) = y.transpose();
    }
    return evaluate_predictions(std::move(tag), std::move(pred), test.futures, normalizer);
}

/// 100 * (baseline - candidate) / baseline.
inline double percent_improvement(double baseline, double candidate) {
    if (!(baseline > 0.0)) throw DomainError("percent improvement needs a positive baseline");
    return 100.0 * (baseline - candidate) / baseline;
}

struct ComparisonRow {
    std::string model_tag;
    double mse = 0.0;
    std::optional<double> mse_improvement_pct; // empty for the baseline row
    double mae = 0.0;
    std::optional<double> mae_improvement_pct;
};

struct ComparisonTable {
    std::string baseline_tag;
    std::vector<ComparisonRow> rows;
};

inline ComparisonTable build_comparison(std::span<const MetricsReport> reports, const std::string& baseline_tag) {
    const MetricsReport* base = nullptr;
    for (const auto& r : reports)
        if (r.model_tag == baseline_tag) {
            base = &r;
            break;
        }
    if (!base) throw ConfigError("baseline tag '" + baseline_tag + "' not found among the reports");
    ComparisonTable table;
    table.baseline_tag = baseline_tag;
    for (const auto& r : reports) {
        ComparisonRow row{r.model_tag, r.overall_mse, std::nullopt, r.overall_mae, std::nullopt};
        if (r.model_tag != baseline_tag) {
            row.mse_improvement_pct = percent_improvement(base->overall_mse, r.overall_mse);
            row.mae_improvement_pct = percent_improvement(base->overall_mae, r.overall_mae);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline std::string render_table(const ComparisonTable& table) {
    std::size_t width = 6;
    for (const auto& r : table.rows) width = std::max(width, r.model_tag.size());
    std::ostringstream out;
    auto pct = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        std::ostringstream s;
        s << std::fixed << std::setprecision(2) << *v;
        return s.str();
    };
    out << std::left << std::setw(static_cast<int>(width)) << "Models" << " | " << std::setw(10) << "MSE" << " | "
        << std::setw(9) << "% Improv." << " | " << std::setw(10) << "MAE" << " | " << "% Improv." << '\n';
    out << std::string(width + 52, '-') << '\n';
    for (const auto& r : table.rows) {
        std::ostringstream mse, mae;
        mse << std::fixed << std::setprecision(4) << r.mse;
        mae << std::fixed << std::setprecision(4) << r.mae;
        out << std::left << std::setw(static_cast<int>(width)) << r.model_tag << " | " << std::setw(10) << mse.str()
            << " | " << std::setw(9) << pct(r.mse_improvement_pct) << " | " << std::setw(10) << mae.str() << " | "
            << pct(r.mae_improvement_pct) << '\n';
    }
    return out.str();
}

inline nlohmann::json to_json(const MetricsReport& r) {
    return {{"model_tag", r.model_tag},   {"overall_mse", r.overall_mse},   {"overall_mae", r.overall_mae},
            {"per_step_mse", r.per_step_mse}, {"per_step_mae", r.per_step_mae}, {"num_samples", r.num_samples},
            {"denormalized", r.denormalized}};
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
    try {
        MetricsReport r;
        r.model_tag = j.at("model_tag").get<std::string>();
        r.overall_mse = j.at("overall_mse").get<double>();
        r.overall_mae = j.at("overall_mae").get<double>();
        r.per_step_mse = j.at("per_step_mse").get<std::vector<double>>();
        r.per_step_mae = j.at("per_step_mae").get<std::vector<double>>();
        r.num_samples = j.at("num_samples").get<Eigen::Index>();
        r.denormalized = j.value("denormalized", false);
        if (r.per_step_mse.size() != r.per_step_mae.size()) throw ShapeError("per-step vectors differ in length");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed metrics report: ") + e.what());
    }
}

inline nlohmann::json to_json(const ComparisonTable& t) {
    nlohmann::json rows = nlohmann::json::array();
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    for (const auto& r : t.rows)
        rows.push_back({{"model_tag", r.model_tag},
                        {"mse", r.mse},
                        {"mse_improvement_pct", opt(r.mse_improvement_pct)},
                        {"mae", r.mae},
                        {"mae_improvement_pct", opt(r.mae_improvement_pct)}});
    return {{"baseline_tag", t.baseline_tag}, {"rows", std::move(rows)}};
}

/// CSV `model_tag,step,mse,mae`, one row per (model, step).
inline void export_step_curves(std::span<const MetricsReport> reports, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "model_tag,step,mse,mae\n";
    for (const auto& r : reports)
        for (std::size_t h = 0; h < r.per_step_mse.size(); ++h)
            out << r.model_tag << ',' << h + 1 << ',' << format_double(r.per_step_mse[h]) << ','
                << format_double(r.per_step_mae[h]) << '\n';
    if (!out) throw Error("failed writing '" + path + "'");
}

struct StepCurve {
    std::string model_tag;
    std::vector<double> mse;
    std::vector<double> mae;
};

inline std::vector<StepCurve> read_step_curves(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);
    std::vector<StepCurve> curves;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tag, step, mse, mae;
        if (!std::getline(ss, tag, ',') || !std::getline(ss, step, ',') || !std::getline(ss, mse, ',') ||
            !std::getline(ss, mae, ','))
            throw IngestError("expected model_tag,step,mse,mae", row);
        if (curves.empty() || curves.back().model_tag != tag) curves.push_back({tag, {}, {}});
        curves.back().mse.push_back(std::stod(mse));
        curves.back().mae.push_back(std::stod(mae));
    }
    return curves;
}

} // namespace multistep
