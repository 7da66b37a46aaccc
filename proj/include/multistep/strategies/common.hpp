#pragma once

#include <cstdint>
#include <vector>

#include "multistep/data/windows.hpp"
#include "multistep/nn/mlp.hpp"
#include "multistep/nn/train.hpp"

namespace multistep {

/// Hidden-layer layout shared by every model a strategy trains.
struct NetworkSpec {
    std::vector<Index> hidden{150, 150};
    Activation hidden_activation = Activation::relu;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent seed for sub-stream `stream`; stream 0 is the seed itself.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return stream == 0 ? seed : splitmix64(seed ^ splitmix64(stream));
}

inline constexpr std::uint64_t kInitStream = 0x1417;

inline Mlp build_regressor(Index input_dim, Index output_dim, const NetworkSpec& spec, const TrainConfig& cfg) {
    MlpShape shape;
    shape.input_dim = input_dim;
    shape.hidden = spec.hidden;
    shape.output_dim = output_dim;
    shape.hidden_activation = spec.hidden_activation;
    shape.output_activation = Activation::linear;
    shape.dropout_rate = cfg.dropout_rate;
    return make_mlp(shape, derive_seed(cfg.seed, kInitStream));
}

/// Trains on (histories, futures) pairs of a windowed dataset.
inline FitResult fit(Mlp net, const WindowedDataset& data, const TrainConfig& cfg) {
    return fit(std::move(net), data.histories, data.futures, cfg);
}

} // namespace multistep
