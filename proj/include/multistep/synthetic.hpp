#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "multistep/data/time_series.hpp"
#include "multistep/data/windows.hpp"

namespace multistep {

/// 2011-01-01T00:00:00Z
inline TimePoint default_series_start() {
    return std::chrono::sys_days{std::chrono::year{2011} / std::chrono::January / 1};
}

/// Seeded traffic-like flow at 15-minute resolution: a two-peak daily profile,
/// weekly modulation, slow trend, and AR(1) noise whose scale follows the level.
inline TimeSeries synthetic_traffic_series(std::size_t points, std::uint64_t seed,
                                           TimePoint start = default_series_start()) {
    constexpr double kDay = 96.0;   // 15-min slots per day
    constexpr double kWeek = 672.0;
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> shock(0.0, 1.0);

    TimeSeries s;
    s.resolution = std::chrono::minutes{15};
    s.timestamps.reserve(points);
    s.values.reserve(points);
    double ar = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        const double t = static_cast<double>(i);
        const double phase = kTwoPi * t / kDay;
        const double daily = 250.0 - 150.0 * std::cos(phase) + 80.0 * std::sin(2.0 * phase + 0.5) + 40.0 * std::sin(3.0 * phase);
        const double weekly = 1.0 - 0.15 * (1.0 + std::cos(kTwoPi * t / kWeek));
        const double level = daily * weekly + 0.02 * t;
        ar = 0.6 * ar + shock(rng);
        const double value = std::max(0.0, level + 0.04 * level * ar);
        s.timestamps.push_back(start + s.resolution * static_cast<long>(i));
        s.values.push_back(value);
    }
    return s;
}

/// Pairs whose history is the future reversed (p == q). Futures are smooth random
/// curves in [0, 1]: a random offset plus a random-phase sinusoid.
inline WindowedDataset deterministic_map_dataset(Eigen::Index rows, Eigen::Index q, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    WindowedDataset d;
    d.p = d.q = q;
    d.histories.resize(rows, q);
    d.futures.resize(rows, q);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double offset = 0.25 + 0.5 * unit(rng);
        const double amp = 0.2 * unit(rng);
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        const double freq = 0.2 + 0.4 * unit(rng);
        for (Eigen::Index k = 0; k < q; ++k) d.futures(i, k) = offset + amp * std::sin(freq * static_cast<double>(k) + phase);
        for (Eigen::Index k = 0; k < q; ++k) d.histories(i, k) = d.futures(i, q - 1 - k);
    }
    return d;
}

} // namespace multistep
