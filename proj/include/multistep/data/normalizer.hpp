#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "multistep/data/time_series.hpp"

namespace multistep {

/// Min-max scaling to [0, 1]. Values outside the fitted range extend the affine map unclamped.
struct Normalizer {
    double min = 0.0;
    double max = 1.0;

    double apply(double v) const { return (v - min) / (max - min); }
    double invert(double u) const { return min + u * (max - min); }

    std::vector<double> apply(std::span<const double> values) const {
        std::vector<double> out(values.size());
        std::transform(values.begin(), values.end(), out.begin(), [this](double v) { return apply(v); });
        return out;
    }

    std::vector<double> invert(std::span<const double> values) const {
        std::vector<double> out(values.size());
        std::transform(values.begin(), values.end(), out.begin(), [this](double u) { return invert(u); });
        return out;
    }

    TimeSeries apply(const TimeSeries& series) const {
        TimeSeries out = series;
        out.values = apply(std::span<const double>(series.values));
        return out;
    }
};

inline Normalizer fit_normalizer(std::span<const double> values) {
    if (values.empty()) throw ConfigError("cannot fit a normalizer on no values");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(*hi > *lo)) throw ConfigError("cannot fit a normalizer on a constant series");
    return {*lo, *hi};
}

inline Normalizer fit_normalizer(const TimeSeries& series) { return fit_normalizer(std::span<const double>(series.values)); }

} // namespace multistep
