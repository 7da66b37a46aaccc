#pragma once

#include <span>

#include "multistep/strategies/common.hpp"

namespace multistep {

/// Single network emitting all q future values at once.
struct MultiOutputModel {
    Mlp net;
    Index p = 0;
    Index q = 0;

    void validate() const {
        net.validate();
        if (q < 2) throw ShapeError("multi-output model needs q >= 2");
        if (net.input_dim() != p || net.output_dim() != q) throw ShapeError("multi-output network shape != (p, q)");
    }
};

inline MultiOutputModel train_multi_output(const WindowedDataset& data, const TrainConfig& cfg, const NetworkSpec& spec) {
    if (data.q < 2)
        throw ConfigError("multi-output training needs q >= 2; for a single step use the recursive or direct strategy");
    MultiOutputModel model;
    model.p = data.p;
    model.q = data.q;
    model.net = fit(build_regressor(data.p, data.q, spec, cfg), data, cfg).net;
    return model;
}

inline Eigen::VectorXd predict_multi_output(const MultiOutputModel& model, std::span<const double> history) {
    if (static_cast<Index>(history.size()) != model.p)
        throw ShapeError("history length " + std::to_string(history.size()) + " != p " + std::to_string(model.p));
    const Eigen::Map<const Eigen::VectorXd> x(history.data(), model.p);
    return predict(model.net, x);
}

} // namespace multistep
