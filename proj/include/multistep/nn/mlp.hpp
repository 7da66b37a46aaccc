#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "multistep/errors.hpp"

namespace multistep {

using Index = Eigen::Index;
using Rng = std::mt19937_64;

enum class Activation { relu, linear, sigmoid, tanh };

inline std::string to_string(Activation a) {
    switch (a) {
    case Activation::relu: return "relu";
    case Activation::linear: return "linear";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    }
    return "linear";
}

inline Activation activation_from_string(std::string_view name) {
    if (name == "relu") return Activation::relu;
    if (name == "linear") return Activation::linear;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "tanh") return Activation::tanh;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

/// Fully connected layer computing activation(weights * x + bias).
struct DenseLayer {
    Eigen::MatrixXd weights; // [out_dim x in_dim]
    Eigen::VectorXd bias;    // [out_dim]
    Activation activation = Activation::linear;

    Index in_dim() const { return weights.cols(); }
    Index out_dim() const { return weights.rows(); }
};

/// Dense feed-forward network. Dropout, when enabled, acts on hidden layer outputs only.
struct Mlp {
    std::vector<DenseLayer> layers;
    double dropout_rate = 0.0;

    Index input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
    Index output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
        return n;
    }

    /// Throws ShapeError / NumericError / ConfigError when an invariant is broken.
    void validate() const {
        if (layers.empty()) throw ShapeError("network has no layers");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
            throw ConfigError("dropout rate must lie in [0, 1)");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const auto& l = layers[i];
            if (l.in_dim() < 1 || l.out_dim() < 1)
                throw ShapeError("layer " + std::to_string(i) + " has an empty dimension");
            if (l.bias.size() != l.out_dim())
                throw ShapeError("layer " + std::to_string(i) + " bias length does not match its output dimension");
            if (i + 1 < layers.size() && l.out_dim() != layers[i + 1].in_dim())
                throw ShapeError("layer " + std::to_string(i) + " output does not chain into layer " +
                                 std::to_string(i + 1));
            if (!l.weights.allFinite() || !l.bias.allFinite())
                throw NumericError("layer " + std::to_string(i) + " holds non-finite parameters");
        }
    }

    friend bool operator==(const Mlp& a, const Mlp& b) {
        if (a.dropout_rate != b.dropout_rate || a.layers.size() != b.layers.size()) return false;
        for (std::size_t i = 0; i < a.layers.size(); ++i) {
            const auto& x = a.layers[i];
            const auto& y = b.layers[i];
            if (x.activation != y.activation || x.weights.rows() != y.weights.rows() ||
                x.weights.cols() != y.weights.cols() || x.weights != y.weights || x.bias != y.bias)
                return false;
        }
        return true;
    }
};

/// Layer widths and activations used to build a fresh network.
struct MlpShape {
    Index input_dim = 1;
    std::vector<Index> hidden;
    Index output_dim = 1;
    Activation hidden_activation = Activation::relu;
    Activation output_activation = Activation::linear;
    double dropout_rate = 0.0;
};

/// He-style uniform initialization: weights ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero bias.
inline Mlp make_mlp(const MlpShape& shape, std::uint64_t seed) {
    if (shape.input_dim < 1 || shape.output_dim < 1) throw ConfigError("network dimensions must be positive");
    Rng rng(seed);
    Mlp net;
    net.dropout_rate = shape.dropout_rate;
    Index fan_in = shape.input_dim;
    auto add = [&](Index out, Activation act) {
        if (out < 1) throw ConfigError("hidden layer width must be positive");
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-limit, limit);
        DenseLayer layer;
        layer.weights.resize(out, fan_in);
        for (Index c = 0; c < fan_in; ++c)
            for (Index r = 0; r < out; ++r) layer.weights(r, c) = dist(rng);
        layer.bias = Eigen::VectorXd::Zero(out);
        layer.activation = act;
        net.layers.push_back(std::move(layer));
        fan_in = out;
    };
    for (Index width : shape.hidden) add(width, shape.hidden_activation);
    add(shape.output_dim, shape.output_activation);
    net.validate();
    return net;
}

enum class Mode { train, eval };

namespace detail {

// weights * x + bias, accumulated column by column so that each output element
// sums its terms in input order regardless of how many samples are in x.
inline Eigen::MatrixXd affine(const DenseLayer& layer, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd z = layer.bias.replicate(1, x.cols());
    for (Index j = 0; j < layer.weights.cols(); ++j) z.noalias() += layer.weights.col(j) * x.row(j);
    return z;
}

inline void activate(Activation a, Eigen::MatrixXd& z) {
    switch (a) {
    case Activation::relu: z = z.cwiseMax(0.0); break;
    case Activation::linear: break;
    case Activation::sigmoid: z = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); }); break;
    case Activation::tanh: z = z.array().tanh().matrix(); break;
    }
}

// d(activation)/d(pre-activation), expressed through pre- and post-activation values.
inline Eigen::MatrixXd activation_derivative(Activation a, const Eigen::MatrixXd& pre, const Eigen::MatrixXd& post) {
    switch (a) {
    case Activation::relu: return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::linear: return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
    case Activation::sigmoid: return (post.array() * (1.0 - post.array())).matrix();
    case Activation::tanh: return (1.0 - post.array().square()).matrix();
    }
    return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
}

} // namespace detail

/// Per-layer record of a forward pass; samples are columns.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> inputs; // input seen by each layer (after dropout of the previous one)
    std::vector<Eigen::MatrixXd> pre;    // pre-activations
    std::vector<Eigen::MatrixXd> post;   // activations before dropout
    std::vector<Eigen::MatrixXd> masks;  // scaled dropout masks, empty where no dropout was applied
    Eigen::MatrixXd output;
};

/// Batched forward pass over the columns of `x`. Train mode draws dropout masks from `rng`.
inline ForwardCache forward_batch(const Mlp& net, const Eigen::MatrixXd& x, Mode mode, Rng* rng = nullptr) {
    if (net.layers.empty()) throw ShapeError("network has no layers");
    if (x.rows() != net.input_dim())
        throw ShapeError("input length " + std::to_string(x.rows()) + " does not match network input dimension " +
                         std::to_string(net.input_dim()));
    if (!x.allFinite()) throw NumericError("non-finite network input");
    const bool dropout = mode == Mode::train && net.dropout_rate > 0.0;
    if (dropout && rng == nullptr) throw ConfigError("train-mode forward with dropout needs a random stream");

    ForwardCache cache;
    const std::size_t n = net.layers.size();
    cache.inputs.reserve(n);
    cache.pre.reserve(n);
    cache.post.reserve(n);
    cache.masks.resize(n);

    Eigen::MatrixXd a = x;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& layer = net.layers[i];
        cache.inputs.push_back(a);
        // Eval mode uses the fixed-order kernel so an output never depends on which other
        // samples share the batch; training takes the faster blocked product.
        Eigen::MatrixXd z;
        if (mode == Mode::eval) {
            z = detail::affine(layer, a);
        } else {
            z.noalias() = layer.weights * a;
            z.colwise() += layer.bias;
        }
        Eigen::MatrixXd h = z;
        detail::activate(layer.activation, h);
        cache.pre.push_back(std::move(z));
        a = h;
        if (dropout && i + 1 < n) {
            const double keep = 1.0 - net.dropout_rate;
            std::bernoulli_distribution survive(keep);
            Eigen::MatrixXd mask(h.rows(), h.cols());
            for (Index c = 0; c < mask.cols(); ++c)
                for (Index r = 0; r < mask.rows(); ++r) mask(r, c) = survive(*rng) ? 1.0 / keep : 0.0;
            a = a.cwiseProduct(mask);
            cache.masks[i] = std::move(mask);
        }
        cache.post.push_back(std::move(h));
    }
    cache.output = a;
    return cache;
}

struct ForwardResult {
    Eigen::VectorXd output;
    ForwardCache cache;
};

/// Single-sample forward pass.
inline ForwardResult forward(const Mlp& net, const Eigen::VectorXd& input, Mode mode, Rng* rng = nullptr) {
    ForwardCache cache = forward_batch(net, input, mode, rng);
    Eigen::VectorXd out = cache.output.col(0);
    return {std::move(out), std::move(cache)};
}

/// Eval-mode output only. Pure: no dropout, no state.
inline Eigen::VectorXd predict(const Mlp& net, const Eigen::VectorXd& input) {
    return forward_batch(net, input, Mode::eval).output.col(0);
}

inline Eigen::MatrixXd predict_batch(const Mlp& net, const Eigen::MatrixXd& inputs) {
    return forward_batch(net, inputs, Mode::eval).output;
}

struct LayerParams {
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;
};

using ParameterSet = std::vector<LayerParams>;

inline ParameterSet zeros_like(const Mlp& net) {
    ParameterSet p;
    p.reserve(net.layers.size());
    for (const auto& l : net.layers)
        p.push_back({Eigen::MatrixXd::Zero(l.out_dim(), l.in_dim()), Eigen::VectorXd::Zero(l.out_dim())});
    return p;
}

struct Gradients {
    ParameterSet params;
    Eigen::MatrixXd input; // d loss / d input, one column per sample
};

/// Backpropagates `loss_grad` (d loss / d output, [output_dim x batch]) through the recorded pass.
/// Parameter gradients are summed over the batch columns.
inline Gradients backward(const Mlp& net, const ForwardCache& cache, const Eigen::MatrixXd& loss_grad) {
    const std::size_t n = net.layers.size();
    if (cache.inputs.size() != n || cache.pre.size() != n || cache.post.size() != n || cache.masks.size() != n)
        throw ShapeError("forward cache does not belong to this network");
    for (std::size_t i = 0; i < n; ++i) {
        if (cache.inputs[i].rows() != net.layers[i].in_dim() || cache.pre[i].rows() != net.layers[i].out_dim())
            throw ShapeError("forward cache does not match layer " + std::to_string(i));
    }
    if (loss_grad.rows() != net.output_dim() || loss_grad.cols() != cache.output.cols())
        throw ShapeError("loss gradient shape does not match the network output");

    Gradients g;
    g.params.resize(n);
    Eigen::MatrixXd delta = loss_grad; // d loss / d (layer output after dropout)
    for (std::size_t k = n; k-- > 0;) {
        const auto& layer = net.layers[k];
        if (cache.masks[k].size() != 0) delta = delta.cwiseProduct(cache.masks[k]);
        Eigen::MatrixXd dz =
            delta.cwiseProduct(detail::activation_derivative(layer.activation, cache.pre[k], cache.post[k]));
        g.params[k].weights.noalias() = dz * cache.inputs[k].transpose();
        g.params[k].bias = dz.rowwise().sum();
        delta.noalias() = layer.weights.transpose() * dz;
    }
    g.input = std::move(delta);
    return g;
}

} // namespace multistep
