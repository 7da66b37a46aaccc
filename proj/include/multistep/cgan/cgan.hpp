#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "multistep/data/windows.hpp"
#include "multistep/nn/adam.hpp"
#include "multistep/nn/loss.hpp"
#include "multistep/nn/serialize.hpp"
#include "multistep/strategies/common.hpp"

namespace multistep {

struct CganConfig {
    Index noise_dim = 16;
    double lr_discriminator = 2e-4;
    double lr_generator = 1e-4;
    int epochs = 200;
    int batch_size = 64;
    std::uint64_t seed = 0;
    NetworkSpec network;
    double dropout_rate = 0.0;
    /// Generator minimizes log(1 - D(G(z, y), y)) instead of -log D(G(z, y), y).
    bool saturating = false;
    double adam_beta1 = 0.9;

    void validate() const {
        if (noise_dim < 1) throw ConfigError("cgan: noise_dim must be positive");
        if (!(lr_discriminator > 0.0) || !(lr_generator > 0.0)) throw ConfigError("cgan: learning rates must be positive");
        if (epochs < 1) throw ConfigError("cgan: epochs must be positive");
        if (batch_size < 1) throw ConfigError("cgan: batch_size must be positive");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("cgan: dropout_rate must lie in [0, 1)");
    }

    /// Warnings for settings that are allowed but unusual.
    std::vector<std::string> warnings() const {
        std::vector<std::string> w;
        if (lr_discriminator < lr_generator)
            w.push_back("cgan: discriminator learning rate is below the generator's; the discriminator usually needs to learn faster");
        return w;
    }
};

struct CganEpochLog {
    double d_loss = 0.0;
    double g_loss = 0.0;
    double d_accuracy = 0.0;
};

/// Generator [z, future] -> history and discriminator [history, future] -> P(real).
struct CganPair {
    Mlp generator;
    Mlp discriminator;
    Index p = 0;
    Index q = 0;
    Index noise_dim = 0;
    std::vector<CganEpochLog> training_log;
    std::vector<std::string> warnings;

    void validate() const {
        generator.validate();
        discriminator.validate();
        if (generator.input_dim() != noise_dim + q || generator.output_dim() != p)
            throw ShapeError("generator shape must be (noise_dim + q) -> p");
        if (discriminator.input_dim() != p + q || discriminator.output_dim() != 1 ||
            discriminator.layers.back().activation != Activation::sigmoid)
            throw ShapeError("discriminator shape must be (p + q) -> 1 with a sigmoid head");
    }
};

namespace detail {

inline Eigen::MatrixXd standard_normal(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd z(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r) z(r, c) = dist(rng);
    return z;
}

inline Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
    Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
    out << top, bottom;
    return out;
}

// Fake histories for the label columns of `futures_t` ([q x m]), raw generator output.
inline Eigen::MatrixXd generate_raw(const CganPair& pair, const Eigen::MatrixXd& futures_t, Rng& rng) {
    return predict_batch(pair.generator, stack(standard_normal(pair.noise_dim, futures_t.cols(), rng), futures_t));
}

} // namespace detail

/// Fraction of correct real/fake calls at threshold 0.5 over every real row of `data`
/// and `num_fakes` generated rows conditioned on futures drawn from `data`.
inline double discriminator_accuracy(const CganPair& pair, const WindowedDataset& data, Index num_fakes, Rng& rng) {
    if (num_fakes < 1) throw ConfigError("discriminator_accuracy needs at least one fake sample");
    if (data.p != pair.p || data.q != pair.q) throw ShapeError("dataset (p, q) differs from the C-GAN's");
    if (data.empty()) throw ConfigError("discriminator_accuracy needs real rows");
    const Eigen::MatrixXd real = predict_batch(pair.discriminator, detail::stack(data.histories.transpose(), data.futures.transpose()));
    std::uniform_int_distribution<Index> pick(0, data.size() - 1);
    Eigen::MatrixXd labels(data.q, num_fakes);
    for (Index k = 0; k < num_fakes; ++k) labels.col(k) = data.futures.row(pick(rng)).transpose();
    const Eigen::MatrixXd fake_hist = detail::generate_raw(pair, labels, rng);
    const Eigen::MatrixXd fake = predict_batch(pair.discriminator, detail::stack(fake_hist, labels));
    const Index correct = (real.array() > 0.5).count() + (fake.array() <= 0.5).count();
    return static_cast<double>(correct) / static_cast<double>(data.size() + num_fakes);
}

/// Alternating minibatch training. The discriminator ascends log D(x, y) + log(1 - D(G(z, y), y));
/// the generator descends -log D(G(z, y), y) (or the saturating form). z ~ N(0, I), fresh per sample.
/// The per-epoch accuracy is measured on `holdout` when given, otherwise on `data`.
inline CganPair train_cgan(const WindowedDataset& data, const CganConfig& cfg, const WindowedDataset* holdout = nullptr) {
    cfg.validate();
    if (data.empty()) throw ConfigError("cannot train a C-GAN on an empty dataset");
    if (data.histories.cols() != data.p || data.futures.cols() != data.q) throw ConfigError("dataset (p, q) mismatch");
    if (holdout && (holdout->p != data.p || holdout->q != data.q || holdout->empty()))
        throw ConfigError("holdout dataset must be non-empty and share (p, q)");

    CganPair pair;
    pair.p = data.p;
    pair.q = data.q;
    pair.noise_dim = cfg.noise_dim;
    pair.warnings = cfg.warnings();
    MlpShape gs{cfg.noise_dim + data.q, cfg.network.hidden, data.p, cfg.network.hidden_activation, Activation::linear,
                cfg.dropout_rate};
    MlpShape ds{data.p + data.q, cfg.network.hidden, 1, cfg.network.hidden_activation, Activation::sigmoid, cfg.dropout_rate};
    pair.generator = make_mlp(gs, derive_seed(cfg.seed, 1));
    pair.discriminator = make_mlp(ds, derive_seed(cfg.seed, 2));

    Rng rng(derive_seed(cfg.seed, 3));
    Rng eval_rng(derive_seed(cfg.seed, 4));
    AdamState adam_g = AdamState::for_network(pair.generator, cfg.lr_generator);
    AdamState adam_d = AdamState::for_network(pair.discriminator, cfg.lr_discriminator);
    adam_g.beta1 = adam_d.beta1 = cfg.adam_beta1;

    const Eigen::MatrixXd hist_t = data.histories.transpose();
    const Eigen::MatrixXd fut_t = data.futures.transpose();
    const Index n = data.size();
    const Index batch = std::min<Index>(cfg.batch_size, n);
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    const WindowedDataset& acc_data = holdout ? *holdout : data;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double d_total = 0.0, g_total = 0.0;
        Index batches = 0;
        for (Index start = 0; start < n; start += batch) {
            const Index m = std::min(batch, n - start);
            Eigen::MatrixXd real_h(data.p, m), y(data.q, m);
            for (Index k = 0; k < m; ++k) {
                const Index i = order[static_cast<std::size_t>(start + k)];
                real_h.col(k) = hist_t.col(i);
                y.col(k) = fut_t.col(i);
            }

            // Discriminator step on m real and m fake pairs.
            {
                const Eigen::MatrixXd fake_h =
                    forward_batch(pair.generator, detail::stack(detail::standard_normal(cfg.noise_dim, m, rng), y),
                                  Mode::train, &rng)
                        .output;
                Eigen::MatrixXd d_in(data.p + data.q, 2 * m);
                d_in << detail::stack(real_h, y), detail::stack(fake_h, y);
                Eigen::MatrixXd labels(1, 2 * m);
                labels.leftCols(m).setOnes();
                labels.rightCols(m).setZero();
                const ForwardCache cache = forward_batch(pair.discriminator, d_in, Mode::train, &rng);
                const BatchLoss loss = bce_loss_batch(cache.output, labels);
                adam_step(pair.discriminator, backward(pair.discriminator, cache, loss.grad).params, adam_d);
                d_total += loss.loss;
            }

            // Generator step through the (fixed) discriminator.
            {
                const Eigen::MatrixXd g_in = detail::stack(detail::standard_normal(cfg.noise_dim, m, rng), y);
                const ForwardCache g_cache = forward_batch(pair.generator, g_in, Mode::train, &rng);
                const ForwardCache d_cache =
                    forward_batch(pair.discriminator, detail::stack(g_cache.output, y), Mode::train, &rng);
                BatchLoss loss;
                if (cfg.saturating) {
                    // minimize log(1 - D) == maximize BCE against label 0
                    loss = bce_loss_batch(d_cache.output, Eigen::MatrixXd::Zero(1, m));
                    loss.loss = -loss.loss;
                    loss.grad = -loss.grad;
                } else {
                    loss = bce_loss_batch(d_cache.output, Eigen::MatrixXd::Ones(1, m));
                }
                const Gradients through_d = backward(pair.discriminator, d_cache, loss.grad);
                const Gradients g_grads = backward(pair.generator, g_cache, through_d.input.topRows(data.p));
                adam_step(pair.generator, g_grads.params, adam_g);
                g_total += loss.loss;
            }
            ++batches;
        }
        CganEpochLog log;
        log.d_loss = d_total / static_cast<double>(batches);
        log.g_loss = g_total / static_cast<double>(batches);
        log.d_accuracy = discriminator_accuracy(pair, acc_data, acc_data.size(), eval_rng);
        if (!std::isfinite(log.d_loss) || !std::isfinite(log.g_loss)) throw NumericError("C-GAN loss became non-finite");
        pair.training_log.push_back(log);
    }
    return pair;
}

/// Eval-mode generator output for one (noise, future) pair, clamped to [0, 1].
inline Eigen::VectorXd generate_history(const CganPair& pair, const Eigen::VectorXd& noise, const Eigen::VectorXd& future) {
    if (noise.size() != pair.noise_dim || future.size() != pair.q) throw ShapeError("generate_history: bad noise/future length");
    Eigen::VectorXd in(pair.noise_dim + pair.q);
    in << noise, future;
    return predict(pair.generator, in).cwiseMax(0.0).cwiseMin(1.0);
}

/// One generated history per row of `futures` ([m x q]), emitted in [0, 1].
inline WindowedDataset generate_pairs(const CganPair& pair, const Eigen::MatrixXd& futures, Rng& rng) {
    if (futures.cols() != pair.q) throw ShapeError("generate_pairs: futures must have q columns");
    WindowedDataset out = WindowedDataset::empty_like(pair.p, pair.q);
    if (futures.rows() == 0) return out;
    const Eigen::MatrixXd hist = detail::generate_raw(pair, futures.transpose(), rng).cwiseMax(0.0).cwiseMin(1.0);
    out.histories = hist.transpose();
    out.futures = futures;
    return out;
}

/// `count` futures drawn uniformly with replacement from the rows of `data`.
inline Eigen::MatrixXd sample_futures(const WindowedDataset& data, Index count, Rng& rng) {
    if (data.empty() && count > 0) throw ConfigError("cannot resample futures from an empty dataset");
    Eigen::MatrixXd out(count, data.q);
    std::uniform_int_distribution<Index> pick(0, std::max<Index>(data.size() - 1, 0));
    for (Index k = 0; k < count; ++k) out.row(k) = data.futures.row(pick(rng));
    return out;
}

/// Original rows followed by copies whose histories carry i.i.d. N(0, stddev^2) noise.
inline WindowedDataset noise_augment(const WindowedDataset& data, double stddev, Rng& rng) {
    if (!(stddev >= 0.0)) throw ConfigError("noise standard deviation must be non-negative");
    WindowedDataset noisy = data;
    if (stddev > 0.0) {
        std::normal_distribution<double> dist(0.0, stddev);
        for (Index c = 0; c < noisy.histories.cols(); ++c)
            for (Index r = 0; r < noisy.histories.rows(); ++r) noisy.histories(r, c) += dist(rng);
    }
    return data.concat(noisy);
}

inline nlohmann::json to_json(const CganConfig& c) {
    return {{"noise_dim", c.noise_dim},       {"lr_discriminator", c.lr_discriminator},
            {"lr_generator", c.lr_generator}, {"epochs", c.epochs},
            {"batch_size", c.batch_size},     {"seed", c.seed},
            {"hidden", c.network.hidden},     {"dropout_rate", c.dropout_rate},
            {"saturating", c.saturating},     {"adam_beta1", c.adam_beta1}};
}

inline nlohmann::json to_json(const CganPair& pair, const CganConfig& cfg) {
    nlohmann::json log = nlohmann::json::array();
    for (const auto& e : pair.training_log)
        log.push_back({{"d_loss", e.d_loss}, {"g_loss", e.g_loss}, {"d_accuracy", e.d_accuracy}});
    ModelMetadata gm, dm;
    gm.strategy_tag = "cgan-generator";
    dm.strategy_tag = "cgan-discriminator";
    gm.p = dm.p = pair.p;
    gm.q = dm.q = pair.q;
    return {{"generator", to_json(pair.generator, gm)},
            {"discriminator", to_json(pair.discriminator, dm)},
            {"noise_dim", pair.noise_dim},
            {"config", to_json(cfg)},
            {"training_log", std::move(log)}};
}

inline CganPair cgan_from_json(const nlohmann::json& j) {
    CganPair pair;
    auto g = mlp_from_json(j.at("generator"));
    auto d = mlp_from_json(j.at("discriminator"));
    pair.generator = std::move(g.net);
    pair.discriminator = std::move(d.net);
    pair.p = g.metadata.p;
    pair.q = g.metadata.q;
    pair.noise_dim = j.at("noise_dim").get<Index>();
    for (const auto& e : j.value("training_log", nlohmann::json::array()))
        pair.training_log.push_back({e.at("d_loss").get<double>(), e.at("g_loss").get<double>(), e.at("d_accuracy").get<double>()});
    pair.validate();
    return pair;
}

} // namespace multistep
