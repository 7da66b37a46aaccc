#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "multistep/eval/metrics.hpp"
#include "multistep/nn/mlp.hpp"

using namespace multistep;

TEST(Metrics, WorkedExample) {
    Eigen::MatrixXd pred(1, 2), truth = Eigen::MatrixXd::Zero(1, 2);
    pred << 1, 2;
    const MetricsReport r = evaluate_predictions("m", pred, truth);
    EXPECT_EQ(r.per_step_mse, (std::vector<double>{1, 4}));
    EXPECT_EQ(r.per_step_mae, (std::vector<double>{1, 2}));
    EXPECT_EQ(r.overall_mse, 2.5);
    EXPECT_EQ(r.overall_mae, 1.5);
    EXPECT_EQ(r.num_samples, 1);
    EXPECT_EQ(r.horizon(), 2);
}

TEST(Metrics, MatchesHandLoopsOnDyadicCases) {
    Rng rng(21);
    std::uniform_int_distribution<int> v(-32, 32), dim(1, 6);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = dim(rng), h = dim(rng);
        Eigen::MatrixXd pred(n, h), truth(n, h);
        for (Index i = 0; i < pred.size(); ++i) {
            pred.data()[i] = v(rng) / 8.0;
            truth.data()[i] = v(rng) / 8.0;
        }
        const MetricsReport r = evaluate_predictions("m", pred, truth);
        double all_sq = 0, all_abs = 0;
        for (Index k = 0; k < h; ++k) {
            double sq = 0, ab = 0;
            for (Index i = 0; i < n; ++i) {
                const double d = pred(i, k) - truth(i, k);
                sq += d * d;
                ab += std::abs(d);
            }
            all_sq += sq;
            all_abs += ab;
            EXPECT_EQ(r.per_step_mse[static_cast<std::size_t>(k)], sq / static_cast<double>(n));
            EXPECT_EQ(r.per_step_mae[static_cast<std::size_t>(k)], ab / static_cast<double>(n));
        }
        EXPECT_EQ(r.overall_mse, all_sq / static_cast<double>(n * h));
        EXPECT_EQ(r.overall_mae, all_abs / static_cast<double>(n * h));
    }
}

TEST(Metrics, Invariants) {
    Rng rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd pred(7, 8), truth(7, 8);
        for (Index i = 0; i < pred.size(); ++i) {
            pred.data()[i] = g(rng);
            truth.data()[i] = g(rng);
        }
        const MetricsReport r = evaluate_predictions("m", pred, truth);
        double mean_mse = 0, mean_mae = 0;
        for (std::size_t k = 0; k < 8; ++k) {
            EXPECT_LE(r.per_step_mae[k] * r.per_step_mae[k], r.per_step_mse[k] * (1 + 1e-12));
            mean_mse += r.per_step_mse[k] / 8;
            mean_mae += r.per_step_mae[k] / 8;
        }
        EXPECT_NEAR(r.overall_mse, mean_mse, 1e-12 * r.overall_mse);
        EXPECT_NEAR(r.overall_mae, mean_mae, 1e-12 * r.overall_mae);
    }
}

TEST(Metrics, Denormalization) {
    Eigen::MatrixXd pred(2, 1), truth(2, 1);
    pred << 0.5, 0.25;
    truth << 0.25, 0.25;
    const Normalizer n{100, 500};
    const MetricsReport a = evaluate_predictions("m", pred, truth);
    const MetricsReport b = evaluate_predictions("m", pred, truth, n);
    EXPECT_TRUE(b.denormalized);
    EXPECT_DOUBLE_EQ(b.overall_mse, a.overall_mse * 400 * 400);
    EXPECT_DOUBLE_EQ(b.overall_mae, a.overall_mae * 400);
}

TEST(Metrics, PerfectPredictorScoresZero) {
    WindowedDataset test = make_windows(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9}, 2, 3);
    // oracle stub: looks the future up from the history's position in the series
    const HorizonPredictor oracle = [](std::span<const double> h) {
        Eigen::VectorXd y(3);
        for (Index k = 0; k < 3; ++k) y(k) = h[1] + static_cast<double>(k + 1);
        return y;
    };
    const MetricsReport r = evaluate("oracle", oracle, 3, test);
    EXPECT_EQ(r.overall_mse, 0.0);
    EXPECT_EQ(r.overall_mae, 0.0);
    for (double v : r.per_step_mse) EXPECT_EQ(v, 0.0);
}

TEST(Metrics, HorizonMismatchNamesBothValues) {
    WindowedDataset test = make_windows(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9}, 2, 3);
    const HorizonPredictor p = [](std::span<const double>) { return Eigen::VectorXd::Zero(8).eval(); };
    try {
        evaluate("m", p, 8, test);
        FAIL();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("H = 8"), std::string::npos);
        EXPECT_NE(msg.find("q = 3"), std::string::npos);
    }
    EXPECT_THROW(evaluate_predictions("m", Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 3)), ShapeError);
}

TEST(Improvement, Arithmetic) {
    EXPECT_NEAR(percent_improvement(0.0781, 0.0563), 27.91, 0.005);
    EXPECT_DOUBLE_EQ(percent_improvement(2.0, 3.0), -50.0);
    EXPECT_EQ(percent_improvement(4.0, 4.0), 0.0);
    EXPECT_THROW(percent_improvement(0.0, 1.0), DomainError);
    EXPECT_THROW(percent_improvement(-1.0, 1.0), DomainError);
}

namespace {

MetricsReport flat_report(const std::string& tag, double mse, double mae, Index h = 8) {
    MetricsReport r;
    r.model_tag = tag;
    r.overall_mse = mse;
    r.overall_mae = mae;
    r.per_step_mse.assign(static_cast<std::size_t>(h), mse);
    r.per_step_mae.assign(static_cast<std::size_t>(h), mae);
    r.num_samples = 10;
    return r;
}

} // namespace

TEST(Comparison, TableLayout) {
    const std::vector<MetricsReport> reports{flat_report("recursive", 0.0101, 0.0781), flat_report("dad", 0.0092, 0.0627),
                                             flat_report("cdad", 0.0078, 0.0563)};
    const ComparisonTable t = build_comparison(reports, "recursive");
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_FALSE(t.rows[0].mse_improvement_pct.has_value());
    EXPECT_NEAR(*t.rows[2].mae_improvement_pct, 27.91, 0.01);
    const std::string text = render_table(t);
    EXPECT_NE(text.find("recursive"), std::string::npos);
    EXPECT_NE(text.find("27.91"), std::string::npos);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
    const auto j = to_json(t);
    EXPECT_TRUE(j["rows"][0]["mse_improvement_pct"].is_null());
    EXPECT_THROW(build_comparison(reports, "hybrid"), ConfigError);
}

TEST(Comparison, SingleRow) {
    const std::vector<MetricsReport> one{flat_report("multi", 0.0089, 0.0718)};
    const ComparisonTable t = build_comparison(one, "multi");
    EXPECT_EQ(t.rows.size(), 1u);
}

TEST(StepCurves, CsvRoundTrip) {
    const std::vector<MetricsReport> reports{flat_report("a", 0.1, 0.2), flat_report("b", 1.0 / 3.0, 0.5),
                                             flat_report("c", 0.7, 0.8)};
    const std::string path = ::testing::TempDir() + "multistep_curves.csv";
    export_step_curves(reports, path);
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 1 + 24);
    const auto curves = read_step_curves(path);
    ASSERT_EQ(curves.size(), 3u);
    EXPECT_EQ(curves[1].model_tag, "b");
    EXPECT_EQ(curves[1].mse, reports[1].per_step_mse);
    EXPECT_EQ(curves[2].mae, reports[2].per_step_mae);
}

TEST(Report, JsonRoundTrip) {
    const MetricsReport r = flat_report("hybrid", 0.1 + 0.2, 1.0 / 7.0, 3);
    const MetricsReport back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
    EXPECT_EQ(back.model_tag, "hybrid");
    EXPECT_EQ(back.overall_mse, r.overall_mse);
    EXPECT_EQ(back.per_step_mae, r.per_step_mae);
    EXPECT_THROW(report_from_json(nlohmann::json{{"model_tag", "x"}}), ConfigError);
}
