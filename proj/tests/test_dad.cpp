#include <gtest/gtest.h>

#include "multistep/dad/dad.hpp"

using namespace multistep;

namespace {

std::vector<double> wave(std::size_t n, double phase = 0.0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 0.5 + 0.35 * std::sin(0.4 * static_cast<double>(i) + phase);
    return v;
}

DadConfig tiny(bool conditional) {
    DadConfig c;
    c.p = 3;
    c.N = 4;
    c.K = 3;
    c.network.hidden = {6};
    c.base_train.epochs = 10;
    c.base_train.batch_size = 16;
    c.base_train.seed = 5;
    c.inner_train = c.base_train;
    c.inner_train.epochs = 3;
    c.conditional = conditional;
    return c;
}

} // namespace

TEST(AugmentedDataset, SmallExample) {
    const WindowedDataset d = make_windows(std::vector<double>{1, 2, 3}, 1, 1);
    PredictionTrajectory t;
    t.start_index = 0;
    t.values = {0.9};
    t.step_indices = {1};
    const AugmentedDataset a = build_augmented_dataset(d, std::span<const PredictionTrajectory>(&t, 1), true, 2);
    ASSERT_EQ(a.size(), 3);
    EXPECT_EQ(a.inputs(0, 0), 1.0);
    EXPECT_EQ(a.targets(0), 2.0);
    EXPECT_EQ(a.inputs(1, 0), 2.0);
    EXPECT_EQ(a.targets(1), 3.0);
    EXPECT_EQ(a.inputs(2, 0), 0.9);
    EXPECT_EQ(a.targets(2), 3.0);
    EXPECT_EQ(a.tags, (std::vector<Index>{0, 0, 1}));
    EXPECT_EQ(a.inputs(0, 1), 0.0);
    EXPECT_EQ(a.inputs(2, 1), encode_time_step(1, 2));
    const AugmentedDataset plain = build_augmented_dataset(d, std::span<const PredictionTrajectory>(&t, 1), false, 2);
    EXPECT_EQ(plain.inputs.cols(), 1);
}

TEST(AugmentedDataset, CountsUsableSteps) {
    std::vector<double> v(10);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    const Index p = 2, N = 4;
    const WindowedDataset d = make_windows(v, p, 1);
    std::vector<PredictionTrajectory> ts;
    for (Index s = 0; s < d.size(); ++s) {
        PredictionTrajectory t;
        t.start_index = s;
        for (Index n = 1; n <= N; ++n) t.values.push_back(100.0 * static_cast<double>(s) + static_cast<double>(n));
        ts.push_back(t);
    }
    const AugmentedDataset a = build_augmented_dataset(d, ts, false, N);
    Index expected = d.size();
    for (Index s = 0; s < d.size(); ++s)
        for (Index n = 1; n < N; ++n)
            if (s + n < d.size()) ++expected;
    EXPECT_EQ(a.size(), expected);
    EXPECT_EQ(a.size(), 8 + 18);
    // every synthetic row pairs window [.., pred_n] with the true value n steps after its start
    for (Index r = d.size(); r < a.size(); ++r) {
        const double last = a.inputs(r, p - 1);
        const Index s = static_cast<Index>(last) / 100;
        const Index n = static_cast<Index>(last) % 100;
        EXPECT_EQ(a.tags[static_cast<std::size_t>(r)], n);
        EXPECT_EQ(a.targets(r), v[static_cast<std::size_t>(s + p + n)]);
    }
}

TEST(AugmentedDataset, WindowMixesHistoryAndPredictions) {
    std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
    const WindowedDataset d = make_windows(v, 3, 1);
    PredictionTrajectory t;
    t.start_index = 0;
    t.values = {10, 20, 30};
    const AugmentedDataset a = build_augmented_dataset(d, std::span<const PredictionTrajectory>(&t, 1), false, 4);
    ASSERT_EQ(a.size(), d.size() + 3);
    const Index r = d.size();
    EXPECT_EQ(a.inputs.row(r), Eigen::RowVector3d(2, 3, 10));
    EXPECT_EQ(a.inputs.row(r + 1), Eigen::RowVector3d(3, 10, 20));
    EXPECT_EQ(a.inputs.row(r + 2), Eigen::RowVector3d(10, 20, 30));
    EXPECT_EQ(a.targets(r), 5.0);
    EXPECT_EQ(a.targets(r + 2), 7.0);
}

TEST(AugmentedDataset, AlignmentChecks) {
    const std::vector<double> v{1, 2, 3, 4, 5, 6};
    PredictionTrajectory t;
    t.start_index = 9;
    t.values = {1.0};
    EXPECT_THROW(build_augmented_dataset(make_windows(v, 1, 1), std::span<const PredictionTrajectory>(&t, 1), false, 3),
                 AlignmentError);
    t.start_index = 0;
    EXPECT_THROW(build_augmented_dataset(make_windows(v, 1, 1, 2), std::span<const PredictionTrajectory>(&t, 1), false, 3),
                 AlignmentError);
}

TEST(SelectBest, TiesGoToEarliest) {
    const std::vector<ValidationError> e{{0.3, 0.1}, {0.2, 0.5}, {0.2, 0.05}, {0.4, 0.05}};
    EXPECT_EQ(select_best(e, SelectionMetric::mse), 1u);
    EXPECT_EQ(select_best(e, SelectionMetric::mae), 2u);
    EXPECT_THROW(select_best(std::span<const ValidationError>{}, SelectionMetric::mse), ContractError);
}

TEST(MetaTrain, DadLoopShape) {
    const auto train = wave(80), val = wave(40, 1.0);
    const DadConfig cfg = tiny(false);
    const MetaTrainResult r = train_dad(train, val, cfg);
    ASSERT_EQ(r.per_iteration_val_errors.size(), 4u);
    EXPECT_EQ(r.per_iteration_val_errors[0].mse, r.base_val_error.mse);
    EXPECT_FALSE(r.best_model.time_step_augmented);
    EXPECT_EQ(r.best_model.net.input_dim(), 3);
    const auto best = static_cast<std::size_t>(r.best_iteration);
    for (const auto& e : r.per_iteration_val_errors) EXPECT_LE(r.per_iteration_val_errors[best].mse, e.mse);
    const WindowedDataset V = make_windows(val, 3, 4);
    EXPECT_EQ(rollout_error(r.best_model, V).mse, r.per_iteration_val_errors[best].mse);
    ASSERT_EQ(r.dataset_rows.size(), 3u);
    const Index ground = static_cast<Index>(train.size()) - 3;
    Index synth = 0;
    for (Index s = 0; s < ground; ++s)
        for (Index n = 1; n < cfg.N; ++n)
            if (s + n < ground) ++synth;
    for (Index rows : r.dataset_rows) EXPECT_EQ(rows, ground + synth);
}

TEST(MetaTrain, ConditionalVariantAugmentsInput) {
    const auto train = wave(80), val = wave(40, 1.0);
    const MetaTrainResult r = train_cdad(train, val, tiny(true));
    EXPECT_TRUE(r.best_model.time_step_augmented);
    EXPECT_EQ(r.best_model.net.input_dim(), 4);
    EXPECT_EQ(r.best_model.max_step, 4);
    EXPECT_FALSE(r.base_model.time_step_augmented);
    EXPECT_EQ(r.per_iteration_val_errors.size(), 4u);
    EXPECT_EQ(r.dataset_rows.size(), 4u);
    const auto log = training_log_json(r);
    EXPECT_EQ(log["iterations"].size(), 4u);
    EXPECT_EQ(log["best_iteration"], r.best_iteration);
}

TEST(MetaTrain, Deterministic) {
    const auto train = wave(80), val = wave(40, 1.0);
    const MetaTrainResult a = train_cdad(train, val, tiny(true));
    const MetaTrainResult b = train_cdad(train, val, tiny(true));
    EXPECT_EQ(a.best_model.net, b.best_model.net);
    EXPECT_EQ(a.best_iteration, b.best_iteration);
}

TEST(MetaTrain, AccumulateKeepsEarlierRows) {
    const auto train = wave(80), val = wave(40, 1.0);
    DadConfig cfg = tiny(false);
    cfg.accumulate = true;
    const MetaTrainResult r = train_dad(train, val, cfg);
    ASSERT_EQ(r.dataset_rows.size(), 3u);
    EXPECT_LT(r.dataset_rows[0], r.dataset_rows[1]);
    EXPECT_LT(r.dataset_rows[1], r.dataset_rows[2]);
    EXPECT_EQ(r.dataset_rows[2] - r.dataset_rows[1], r.dataset_rows[1] - r.dataset_rows[0]);
}

TEST(MetaTrain, ContractsAndValidation) {
    const auto train = wave(80), val = wave(40);
    EXPECT_THROW(train_dad(train, val, tiny(true)), ContractError);
    EXPECT_THROW(train_cdad(train, val, tiny(false)), ContractError);
    DadConfig bad = tiny(false);
    bad.K = 0;
    EXPECT_THROW(train_dad(train, val, bad), ConfigError);
}
