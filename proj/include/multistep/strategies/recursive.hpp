#pragma once

#include <span>
#include <vector>

#include "multistep/strategies/common.hpp"

namespace multistep {

/// One-step model rolled forward on its own predictions. When time_step_augmented,
/// the network takes one extra trailing input: the number of predictions already
/// recycled into the window, divided by max_step.
struct RecursiveModel {
    Mlp net;
    Index p = 0;
    bool time_step_augmented = false;
    Index max_step = 0;

    void validate() const {
        net.validate();
        if (p < 1) throw ShapeError("recursive model needs p >= 1");
        if (net.output_dim() != 1) throw ShapeError("recursive model must have a single output");
        const Index expected = time_step_augmented ? p + 1 : p;
        if (net.input_dim() != expected)
            throw ShapeError("recursive model input dimension " + std::to_string(net.input_dim()) + " != " +
                             std::to_string(expected));
        if (time_step_augmented && max_step < 1) throw ConfigError("augmented model needs max_step >= 1");
    }
};

/// Scaled time-step feature for a window into which `recycled` predictions have been fed.
inline double encode_time_step(Index recycled, Index max_step) {
    return static_cast<double>(recycled) / static_cast<double>(max_step);
}

struct PredictionTrajectory {
    Index start_index = 0;
    std::vector<double> values;     // predictions 1..N
    std::vector<Index> step_indices; // 1..N
};

/// Rolls the model out `steps` times from every row of `histories` ([samples x p]).
/// Column n of the result is the (n+1)-th prediction. Augmented models receive the
/// encoded count of recycled predictions; `zero_time_step` feeds 0 instead.
inline Eigen::MatrixXd rollout_batch(const RecursiveModel& model, const Eigen::MatrixXd& histories, Index steps,
                                     bool zero_time_step = false) {
    if (histories.cols() != model.p)
        throw ShapeError("history length " + std::to_string(histories.cols()) + " != model p " + std::to_string(model.p));
    if (steps < 1) throw ConfigError("rollout length must be at least 1");
    const Index p = model.p;
    const Index in_dim = model.time_step_augmented ? p + 1 : p;
    Eigen::MatrixXd window(in_dim, histories.rows());
    window.topRows(p) = histories.transpose();
    Eigen::MatrixXd out(histories.rows(), steps);
    for (Index n = 0; n < steps; ++n) {
        if (model.time_step_augmented)
            window.row(p).setConstant(zero_time_step ? 0.0 : encode_time_step(n, model.max_step));
        const Eigen::MatrixXd y = predict_batch(model.net, window);
        out.col(n) = y.row(0).transpose();
        if (p > 1) window.topRows(p - 1) = window.middleRows(1, p - 1).eval();
        window.row(p - 1) = y.row(0);
    }
    return out;
}

namespace detail {

inline PredictionTrajectory single_rollout(const RecursiveModel& model, std::span<const double> history, Index steps) {
    if (static_cast<Index>(history.size()) != model.p)
        throw ShapeError("history length " + std::to_string(history.size()) + " != model p " + std::to_string(model.p));
    Eigen::MatrixXd h(1, model.p);
    for (Index k = 0; k < model.p; ++k) h(0, k) = history[static_cast<std::size_t>(k)];
    const Eigen::MatrixXd out = rollout_batch(model, h, steps);
    PredictionTrajectory t;
    t.values.assign(out.data(), out.data() + out.size());
    for (Index n = 1; n <= steps; ++n) t.step_indices.push_back(n);
    return t;
}

} // namespace detail

/// Vanilla recursive rollout: step 1 consumes the true history, later steps recycle predictions.
inline PredictionTrajectory predict_recursively(const RecursiveModel& model, std::span<const double> history, Index steps) {
    if (model.time_step_augmented)
        throw ContractError("predict_recursively called with a time-step-augmented model; use predict_recursively_aug");
    return detail::single_rollout(model, history, steps);
}

/// Rollout of a time-step-augmented model; the n-th prediction sees tag n-1.
inline PredictionTrajectory predict_recursively_aug(const RecursiveModel& model, std::span<const double> history,
                                                    Index steps) {
    if (!model.time_step_augmented)
        throw ContractError("predict_recursively_aug called with a model that has no time-step input");
    return detail::single_rollout(model, history, steps);
}

/// Either rollout, chosen by the model's kind.
inline Eigen::VectorXd predict_horizon(const RecursiveModel& model, std::span<const double> history, Index steps) {
    const auto t = detail::single_rollout(model, history, steps);
    return Eigen::Map<const Eigen::VectorXd>(t.values.data(), static_cast<Index>(t.values.size()));
}

/// Trains a vanilla one-step model on the first future column of `data`.
inline RecursiveModel train_recursive(const WindowedDataset& data, const TrainConfig& cfg, const NetworkSpec& spec) {
    RecursiveModel model;
    model.p = data.p;
    model.net = fit(build_regressor(data.p, 1, spec, cfg), data.histories, data.futures.leftCols(1), cfg).net;
    return model;
}

/// CSV `start_index,step,value`.
inline void write_trajectories_csv(const std::string& path, std::span<const PredictionTrajectory> trajectories) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "start_index,step,value\n";
    for (const auto& t : trajectories)
        for (std::size_t n = 0; n < t.values.size(); ++n)
            out << t.start_index << ',' << t.step_indices[n] << ',' << format_double(t.values[n]) << '\n';
}

} // namespace multistep
