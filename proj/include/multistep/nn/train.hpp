#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "multistep/nn/adam.hpp"
#include "multistep/nn/loss.hpp"
#include "multistep/nn/mlp.hpp"

namespace multistep {

struct TrainConfig {
    int epochs = 200;
    int batch_size = 64;
    std::uint64_t seed = 0;
    double dropout_rate = 0.1;
    double learning_rate = 1e-3;

    void validate() const {
        if (epochs < 0) throw ConfigError("epochs must be non-negative");
        if (batch_size < 1) throw ConfigError("batch_size must be positive");
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
    }
};

struct FitResult {
    Mlp net;
    std::vector<double> loss_history; // mean train-mode minibatch loss per epoch
};

/// Minibatch Adam on MSE. `inputs` is [samples x input_dim], `targets` is [samples x output_dim].
/// The net's dropout rate is set from `cfg`; shuffling and dropout masks are driven by `cfg.seed`.
inline FitResult fit(Mlp net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets, const TrainConfig& cfg) {
    cfg.validate();
    if (inputs.rows() == 0) throw ConfigError("cannot fit on an empty dataset");
    if (inputs.rows() != targets.rows()) throw ShapeError("fit: input and target row counts differ");
    if (inputs.cols() != net.input_dim() || targets.cols() != net.output_dim())
        throw ShapeError("fit: dataset dimensions (" + std::to_string(inputs.cols()) + " -> " +
                         std::to_string(targets.cols()) + ") do not match the network (" +
                         std::to_string(net.input_dim()) + " -> " + std::to_string(net.output_dim()) + ")");
    net.dropout_rate = cfg.dropout_rate;
    FitResult result;
    result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
    if (cfg.epochs == 0) {
        result.net = std::move(net);
        return result;
    }

    const Eigen::MatrixXd xt = inputs.transpose();
    const Eigen::MatrixXd yt = targets.transpose();
    const Index n = xt.cols();
    const Index batch = std::min<Index>(cfg.batch_size, n);

    Rng rng(cfg.seed);
    AdamState adam = AdamState::for_network(net, cfg.learning_rate);
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Eigen::MatrixXd xb, yb;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        Index batches = 0;
        for (Index start = 0; start < n; start += batch) {
            const Index m = std::min(batch, n - start);
            xb.resize(xt.rows(), m);
            yb.resize(yt.rows(), m);
            for (Index k = 0; k < m; ++k) {
                xb.col(k) = xt.col(order[static_cast<std::size_t>(start + k)]);
                yb.col(k) = yt.col(order[static_cast<std::size_t>(start + k)]);
            }
            ForwardCache cache = forward_batch(net, xb, Mode::train, &rng);
            BatchLoss loss = mse_loss_batch(cache.output, yb);
            Gradients g = backward(net, cache, loss.grad);
            adam_step(net, g.params, adam);
            total += loss.loss;
            ++batches;
        }
        result.loss_history.push_back(total / static_cast<double>(batches));
    }
    if (!std::all_of(net.layers.begin(), net.layers.end(),
                     [](const DenseLayer& l) { return l.weights.allFinite() && l.bias.allFinite(); }))
        throw NumericError("training diverged to non-finite parameters");
    result.net = std::move(net);
    return result;
}

} // namespace multistep
