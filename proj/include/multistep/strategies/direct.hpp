#pragma once

#include <span>
#include <vector>

#include "multistep/strategies/common.hpp"

namespace multistep {

/// One network per horizon step. In hybrid mode model h additionally receives the
/// predictions of models 1..h-1, appended after the history.
struct DirectModelSet {
    std::vector<Mlp> models;
    Index p = 0;
    bool hybrid = false;

    Index horizon() const { return static_cast<Index>(models.size()); }

    void validate() const {
        if (models.empty()) throw ShapeError("direct model set is empty");
        for (std::size_t i = 0; i < models.size(); ++i) {
            models[i].validate();
            const Index expected = hybrid ? p + static_cast<Index>(i) : p;
            if (models[i].input_dim() != expected || models[i].output_dim() != 1)
                throw ShapeError("direct model " + std::to_string(i + 1) + " has shape " +
                                 std::to_string(models[i].input_dim()) + " -> " + std::to_string(models[i].output_dim()) +
                                 ", expected " + std::to_string(expected) + " -> 1");
        }
    }
};

/// Trains H = data.q models. Model h uses seed derive_seed(cfg.seed, h - 1), so in
/// non-hybrid mode each model depends only on its own target column.
inline DirectModelSet train_direct(const WindowedDataset& data, Index horizon, const TrainConfig& cfg,
                                   const NetworkSpec& spec, bool hybrid) {
    if (horizon < 1) throw ConfigError("direct horizon must be at least 1");
    if (data.q != horizon)
        throw ConfigError("direct training needs q == H (got q = " + std::to_string(data.q) +
                          ", H = " + std::to_string(horizon) + ")");
    DirectModelSet set;
    set.p = data.p;
    set.hybrid = hybrid;
    Eigen::MatrixXd inputs = data.histories;
    for (Index h = 1; h <= horizon; ++h) {
        TrainConfig step_cfg = cfg;
        step_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(h - 1));
        Mlp net = fit(build_regressor(inputs.cols(), 1, spec, step_cfg), inputs, data.futures.col(h - 1), step_cfg).net;
        if (hybrid && h < horizon) {
            // Later models see in-sample predictions, matching what they receive at forecast time.
            const Eigen::MatrixXd pred = predict_batch(net, inputs.transpose());
            Eigen::MatrixXd grown(inputs.rows(), inputs.cols() + 1);
            grown << inputs, pred.row(0).transpose();
            inputs = std::move(grown);
        }
        set.models.push_back(std::move(net));
    }
    return set;
}

/// Predictions for every row of `histories` ([samples x p]) -> [samples x H].
inline Eigen::MatrixXd predict_direct_batch(const DirectModelSet& set, const Eigen::MatrixXd& histories) {
    if (histories.cols() != set.p)
        throw ShapeError("history length " + std::to_string(histories.cols()) + " != p " + std::to_string(set.p));
    const Index n = histories.rows();
    const Index horizon = set.horizon();
    Eigen::MatrixXd out(n, horizon);
    Eigen::MatrixXd inputs(set.hybrid ? set.p + horizon - 1 : set.p, n);
    inputs.topRows(set.p) = histories.transpose();
    for (Index h = 0; h < horizon; ++h) {
        const Index in_dim = set.hybrid ? set.p + h : set.p;
        const Eigen::MatrixXd y = predict_batch(set.models[static_cast<std::size_t>(h)], inputs.topRows(in_dim));
        out.col(h) = y.row(0).transpose();
        if (set.hybrid && h + 1 < horizon) inputs.row(set.p + h) = y.row(0);
    }
    return out;
}

inline Eigen::VectorXd predict_direct(const DirectModelSet& set, std::span<const double> history) {
    Eigen::MatrixXd h(1, static_cast<Index>(history.size()));
    for (Index k = 0; k < h.cols(); ++k) h(0, k) = history[static_cast<std::size_t>(k)];
    return predict_direct_batch(set, h).row(0).transpose();
}

} // namespace multistep
