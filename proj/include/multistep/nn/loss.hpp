#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "multistep/errors.hpp"

namespace multistep {

struct LossResult {
    double loss = 0.0;
    Eigen::VectorXd grad;
};

/// Mean squared error and its gradient with respect to `pred`.
inline LossResult mse_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
    if (pred.size() != target.size())
        throw ShapeError("mse_loss: prediction length " + std::to_string(pred.size()) + " vs target length " +
                         std::to_string(target.size()));
    if (pred.size() == 0) throw ShapeError("mse_loss: empty vectors");
    const double n = static_cast<double>(pred.size());
    const Eigen::VectorXd diff = pred - target;
    return {diff.squaredNorm() / n, 2.0 * diff / n};
}

struct BatchLoss {
    double loss = 0.0;
    Eigen::MatrixXd grad;
};

/// Batch MSE: mean over samples (columns) of the per-sample MSE.
inline BatchLoss mse_loss_batch(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw ShapeError("mse_loss_batch: prediction and target shapes differ");
    const double n = static_cast<double>(pred.size());
    const Eigen::MatrixXd diff = pred - target;
    return {diff.squaredNorm() / n, 2.0 * diff / n};
}

inline constexpr double kProbabilityClamp = 1e-7;

/// Binary cross-entropy on probabilities, clamped to [eps, 1-eps] so the loss stays finite.
/// Gradient is with respect to the probabilities and averaged over columns.
inline BatchLoss bce_loss_batch(const Eigen::MatrixXd& prob, const Eigen::MatrixXd& label) {
    if (prob.rows() != label.rows() || prob.cols() != label.cols())
        throw ShapeError("bce_loss_batch: probability and label shapes differ");
    const double n = static_cast<double>(prob.size());
    BatchLoss out;
    out.grad.resize(prob.rows(), prob.cols());
    double total = 0.0;
    for (Eigen::Index c = 0; c < prob.cols(); ++c) {
        for (Eigen::Index r = 0; r < prob.rows(); ++r) {
            const double p = std::clamp(prob(r, c), kProbabilityClamp, 1.0 - kProbabilityClamp);
            const double y = label(r, c);
            total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
            out.grad(r, c) = (-y / p + (1.0 - y) / (1.0 - p)) / n;
        }
    }
    out.loss = total / n;
    return out;
}

} // namespace multistep
