#pragma once

#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include "multistep/strategies/recursive.hpp"

namespace multistep {

enum class SelectionMetric { mse, mae };

inline SelectionMetric selection_metric_from_string(std::string_view s) {
    if (s == "mse") return SelectionMetric::mse;
    if (s == "mae") return SelectionMetric::mae;
    throw ConfigError("unknown selection metric '" + std::string(s) + "' (expected mse or mae)");
}

inline std::string to_string(SelectionMetric m) { return m == SelectionMetric::mse ? "mse" : "mae"; }

/// Settings of the corrective meta-training loop.
struct DadConfig {
    Index p = 8;
    Index N = 8;  // rollout depth
    int K = 30;   // meta-iterations
    TrainConfig base_train;  // base model (and the fresh augmented M_0)
    TrainConfig inner_train; // fine-tuning of each iterate
    NetworkSpec network;
    bool conditional = false;
    SelectionMetric selection_metric = SelectionMetric::mse;
    /// Keep synthetic rows from earlier iterations instead of rebuilding from the current model only.
    bool accumulate = false;
    /// Feed 0 in place of the time-step feature everywhere (reduction checks).
    bool zero_time_step = false;

    void validate() const {
        if (p < 1) throw ConfigError("dad: p must be at least 1");
        if (N < 1) throw ConfigError("dad: N must be at least 1");
        if (K < 1) throw ConfigError("dad: K must be at least 1");
        base_train.validate();
        inner_train.validate();
    }
};

/// Training rows for a one-step model; `tags[i]` counts the predictions recycled into row i's input.
struct AugmentedDataset {
    Eigen::MatrixXd inputs; // [rows x (p or p+1)]
    Eigen::VectorXd targets;
    std::vector<Index> tags;
    Index p = 0;
    bool conditional = false;

    Index size() const { return inputs.rows(); }
};

/// Ground-truth pairs of `windows` (tag 0) followed by, for every trajectory and every
/// step n in [1, N-1] whose true next value exists, the window ending in prediction n
/// paired with the true next observation. `windows` must be stride-1 one-step windows and
/// trajectory start_index refers to its rows.
inline AugmentedDataset build_augmented_dataset(const WindowedDataset& windows,
                                                std::span<const PredictionTrajectory> trajectories, bool conditional,
                                                Index N, bool zero_time_step = false) {
    if (N < 1) throw ConfigError("N must be at least 1");
    if (windows.stride != 1) throw AlignmentError("augmented datasets need stride-1 source windows");
    const Index p = windows.p;
    const Index rows = windows.size();
    auto tag_value = [&](Index n) { return zero_time_step ? 0.0 : encode_time_step(n, N); };

    Index synthetic = 0;
    for (const auto& t : trajectories) {
        if (t.start_index < 0 || t.start_index >= rows)
            throw AlignmentError("trajectory start " + std::to_string(t.start_index) + " outside the " +
                                 std::to_string(rows) + " source windows");
        const Index usable = std::min<Index>({N - 1, static_cast<Index>(t.values.size()), rows - 1 - t.start_index});
        synthetic += std::max<Index>(usable, 0);
    }

    AugmentedDataset out;
    out.p = p;
    out.conditional = conditional;
    const Index in_dim = conditional ? p + 1 : p;
    out.inputs.resize(rows + synthetic, in_dim);
    out.targets.resize(rows + synthetic);
    out.tags.reserve(static_cast<std::size_t>(rows + synthetic));

    for (Index i = 0; i < rows; ++i) {
        out.inputs.row(i).head(p) = windows.histories.row(i);
        if (conditional) out.inputs(i, p) = tag_value(0);
        out.targets(i) = windows.futures(i, 0);
        out.tags.push_back(0);
    }
    Index r = rows;
    for (const auto& t : trajectories) {
        const Index s = t.start_index;
        const Index usable = std::min<Index>({N - 1, static_cast<Index>(t.values.size()), rows - 1 - s});
        for (Index n = 1; n <= usable; ++n) {
            // last p entries of [history_s, pred_1 .. pred_n]
            for (Index k = 0; k < p; ++k) {
                const Index pos = n + k; // index into the concatenation
                out.inputs(r, k) = pos < p ? windows.histories(s, pos)
                                           : t.values[static_cast<std::size_t>(pos - p)];
            }
            if (conditional) out.inputs(r, p) = tag_value(n);
            out.targets(r) = windows.futures(s + n, 0);
            out.tags.push_back(n);
            ++r;
        }
    }
    return out;
}

struct ValidationError {
    double mse = 0.0;
    double mae = 0.0;
};

/// Index of the smallest error under `metric`; ties go to the earliest.
inline std::size_t select_best(std::span<const ValidationError> errors, SelectionMetric metric) {
    if (errors.empty()) throw ContractError("select_best needs at least one candidate");
    auto key = [metric](const ValidationError& e) { return metric == SelectionMetric::mse ? e.mse : e.mae; };
    std::size_t best = 0;
    for (std::size_t i = 1; i < errors.size(); ++i)
        if (key(errors[i]) < key(errors[best])) best = i;
    return best;
}

struct MetaTrainResult {
    RecursiveModel best_model;
    Index best_iteration = 0;
    std::vector<ValidationError> per_iteration_val_errors; // K + 1 entries
    RecursiveModel base_model;
    ValidationError base_val_error;
    std::vector<Index> dataset_rows; // D_aug size used for each trained iterate
};

/// N-step rollout errors of `model` over every window of `val`.
inline ValidationError rollout_error(const RecursiveModel& model, const WindowedDataset& val, bool zero_time_step = false) {
    const Eigen::MatrixXd pred = rollout_batch(model, val.histories, val.q, zero_time_step);
    const Eigen::ArrayXXd diff = (pred - val.futures).array();
    return {diff.square().mean(), diff.abs().mean()};
}

namespace detail {

inline std::vector<PredictionTrajectory> rollouts_from_all_starts(const RecursiveModel& model,
                                                                  const WindowedDataset& windows, Index N,
                                                                  bool zero_time_step) {
    const Index steps = std::max<Index>(N - 1, 1); // prediction N never pairs with a target
    const Eigen::MatrixXd pred = rollout_batch(model, windows.histories, steps, zero_time_step);
    std::vector<PredictionTrajectory> out(static_cast<std::size_t>(windows.size()));
    for (Index s = 0; s < windows.size(); ++s) {
        auto& t = out[static_cast<std::size_t>(s)];
        t.start_index = s;
        t.values.resize(static_cast<std::size_t>(steps));
        for (Index n = 0; n < steps; ++n) {
            t.values[static_cast<std::size_t>(n)] = pred(s, n);
            t.step_indices.push_back(n + 1);
        }
    }
    return out;
}

inline AugmentedDataset merge_synthetic(const AugmentedDataset& previous, const AugmentedDataset& fresh, Index ground_rows) {
    AugmentedDataset out = fresh;
    const Index extra = previous.size() - ground_rows;
    if (extra <= 0) return out;
    out.inputs.conservativeResize(fresh.size() + extra, Eigen::NoChange);
    out.targets.conservativeResize(fresh.size() + extra);
    out.inputs.bottomRows(extra) = previous.inputs.bottomRows(extra);
    out.targets.tail(extra) = previous.targets.tail(extra);
    out.tags.insert(out.tags.end(), previous.tags.begin() + ground_rows, previous.tags.end());
    return out;
}

inline MetaTrainResult meta_train(std::span<const double> train, std::span<const double> val, const DadConfig& cfg) {
    cfg.validate();
    const WindowedDataset D = make_windows(train, cfg.p, 1, 1);
    const WindowedDataset V = make_windows(val, cfg.p, cfg.N, 1);
    const bool cond = cfg.conditional;

    MetaTrainResult result;
    result.base_model = train_recursive(D, cfg.base_train, cfg.network);
    result.base_val_error = rollout_error(result.base_model, V);

    std::vector<RecursiveModel> candidates;
    RecursiveModel current = result.base_model;
    AugmentedDataset d_aug;

    auto retrain = [&](const RecursiveModel& roll_model, Mlp start, const TrainConfig& tc) {
        const auto trajectories = rollouts_from_all_starts(roll_model, D, cfg.N, cfg.zero_time_step);
        AugmentedDataset fresh = build_augmented_dataset(D, trajectories, cond, cfg.N, cfg.zero_time_step);
        d_aug = cfg.accumulate && d_aug.size() > 0 ? merge_synthetic(d_aug, fresh, D.size()) : std::move(fresh);
        result.dataset_rows.push_back(d_aug.size());
        return fit(std::move(start), d_aug.inputs, d_aug.targets, tc).net;
    };

    if (cond) {
        // M_0: fresh augmented model trained on data harvested from the base model's rollouts.
        RecursiveModel m0;
        m0.p = cfg.p;
        m0.time_step_augmented = true;
        m0.max_step = cfg.N;
        const Mlp init = build_regressor(cfg.p + 1, 1, cfg.network, cfg.base_train);
        m0.net = retrain(result.base_model, init, cfg.base_train);
        current = std::move(m0);
    }
    candidates.push_back(current);
    result.per_iteration_val_errors.push_back(cond ? rollout_error(current, V, cfg.zero_time_step) : result.base_val_error);

    for (int k = 1; k <= cfg.K; ++k) {
        TrainConfig tc = cfg.inner_train;
        tc.seed = derive_seed(cfg.inner_train.seed, static_cast<std::uint64_t>(k));
        RecursiveModel next = current;
        next.net = retrain(current, current.net, tc); // warm start from the previous iterate
        current = std::move(next);
        result.per_iteration_val_errors.push_back(rollout_error(current, V, cfg.zero_time_step));
        candidates.push_back(current);
    }

    const std::size_t best = select_best(result.per_iteration_val_errors, cfg.selection_metric);
    result.best_iteration = static_cast<Index>(best);
    result.best_model = std::move(candidates[best]);
    return result;
}

} // namespace detail

/// Corrective retraining of a vanilla one-step model on its own rollouts. Iterate 0 is the base model.
inline MetaTrainResult train_dad(std::span<const double> train, std::span<const double> val, DadConfig cfg) {
    if (cfg.conditional) throw ContractError("train_dad expects conditional = false; use train_cdad");
    return detail::meta_train(train, val, cfg);
}

/// Time-step-conditioned variant. Iterate 0 is the fresh augmented model M_0; the
/// unaugmented base model is reported separately in `base_model`.
inline MetaTrainResult train_cdad(std::span<const double> train, std::span<const double> val, DadConfig cfg) {
    if (!cfg.conditional) throw ContractError("train_cdad expects conditional = true; use train_dad");
    return detail::meta_train(train, val, cfg);
}

inline nlohmann::json training_log_json(const MetaTrainResult& r) {
    nlohmann::json it = nlohmann::json::array();
    for (std::size_t k = 0; k < r.per_iteration_val_errors.size(); ++k)
        it.push_back({{"k", k}, {"val_mse", r.per_iteration_val_errors[k].mse}, {"val_mae", r.per_iteration_val_errors[k].mae}});
    return {{"iterations", std::move(it)}, {"best_iteration", r.best_iteration}};
}

} // namespace multistep
