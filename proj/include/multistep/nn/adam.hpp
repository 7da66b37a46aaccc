#pragma once

#include <cmath>
#include <cstdint>

#include "multistep/nn/mlp.hpp"

namespace multistep {

/// Bias-corrected Adam moments for one network.
struct AdamState {
    ParameterSet first_moment;
    ParameterSet second_moment;
    std::int64_t step_count = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_network(const Mlp& net, double learning_rate = 1e-3) {
        AdamState s;
        s.first_moment = zeros_like(net);
        s.second_moment = zeros_like(net);
        s.learning_rate = learning_rate;
        return s;
    }
};

namespace detail {

inline bool same_shape(const Mlp& net, const ParameterSet& p) {
    if (p.size() != net.layers.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i].weights.rows() != net.layers[i].weights.rows() || p[i].weights.cols() != net.layers[i].weights.cols() ||
            p[i].bias.size() != net.layers[i].bias.size())
            return false;
    }
    return true;
}

template <typename Param, typename Grad, typename Moment>
void adam_update(Param& param, const Grad& grad, Moment& m, Moment& v, const AdamState& s, double c1, double c2) {
    m = s.beta1 * m + (1.0 - s.beta1) * grad;
    v = s.beta2 * v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
    param.array() -= s.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + s.epsilon);
}

} // namespace detail

/// One Adam update of `net` in place; increments `state.step_count`.
inline void adam_step(Mlp& net, const ParameterSet& grads, AdamState& state) {
    if (!detail::same_shape(net, grads)) throw ShapeError("adam_step: gradient shapes do not match the network");
    if (!detail::same_shape(net, state.first_moment) || !detail::same_shape(net, state.second_moment))
        throw ShapeError("adam_step: optimizer state shapes do not match the network");
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        detail::adam_update(net.layers[i].weights, grads[i].weights, state.first_moment[i].weights,
                            state.second_moment[i].weights, state, c1, c2);
        detail::adam_update(net.layers[i].bias, grads[i].bias, state.first_moment[i].bias,
                            state.second_moment[i].bias, state, c1, c2);
    }
}

} // namespace multistep
