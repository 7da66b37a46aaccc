#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <span>
#include <string>

#include "multistep/data/normalizer.hpp"
#include "multistep/data/time_series.hpp"

namespace multistep {

/// Supervised (history, future) pairs cut from a series. Row i of `histories`
/// holds p consecutive values in chronological order; row i of `futures` the q values after them.
struct WindowedDataset {
    Eigen::MatrixXd histories; // [samples x p]
    Eigen::MatrixXd futures;   // [samples x q]
    Eigen::Index p = 0;
    Eigen::Index q = 0;
    Eigen::Index stride = 1;

    Eigen::Index size() const { return histories.rows(); }
    bool empty() const { return histories.rows() == 0; }

    static WindowedDataset empty_like(Eigen::Index p, Eigen::Index q) {
        WindowedDataset d;
        d.histories.resize(0, p);
        d.futures.resize(0, q);
        d.p = p;
        d.q = q;
        return d;
    }

    /// Rows of `other` appended after this dataset's rows.
    WindowedDataset concat(const WindowedDataset& other) const {
        if (other.p != p || other.q != q) throw ShapeError("cannot concatenate datasets with different (p, q)");
        WindowedDataset out = *this;
        out.histories.resize(size() + other.size(), p);
        out.futures.resize(size() + other.size(), q);
        out.histories << histories, other.histories;
        out.futures << futures, other.futures;
        return out;
    }
};

inline WindowedDataset make_windows(std::span<const double> values, Eigen::Index p, Eigen::Index q,
                                    Eigen::Index stride = 1) {
    if (p < 1 || q < 1) throw ConfigError("window lengths p and q must be at least 1");
    if (stride < 1) throw ConfigError("window stride must be at least 1");
    const auto len = static_cast<Eigen::Index>(values.size());
    if (len < p + q)
        throw ConfigError("series of length " + std::to_string(len) + " is too short for p + q = " +
                          std::to_string(p + q) + " (empty dataset)");
    const Eigen::Index n = (len - p - q) / stride + 1;
    WindowedDataset d;
    d.p = p;
    d.q = q;
    d.stride = stride;
    d.histories.resize(n, p);
    d.futures.resize(n, q);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index s = i * stride;
        for (Eigen::Index k = 0; k < p; ++k) d.histories(i, k) = values[static_cast<std::size_t>(s + k)];
        for (Eigen::Index k = 0; k < q; ++k) d.futures(i, k) = values[static_cast<std::size_t>(s + p + k)];
    }
    return d;
}

inline WindowedDataset make_windows(const TimeSeries& series, Eigen::Index p, Eigen::Index q, Eigen::Index stride = 1) {
    return make_windows(std::span<const double>(series.values), p, q, stride);
}

/// CSV with columns h1..hp,f1..fq.
inline void write_windows_csv(const std::string& path, const WindowedDataset& d) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    for (Eigen::Index k = 0; k < d.p; ++k) out << (k ? "," : "") << 'h' << k + 1;
    for (Eigen::Index k = 0; k < d.q; ++k) out << ",f" << k + 1;
    out << '\n';
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        for (Eigen::Index k = 0; k < d.p; ++k) out << (k ? "," : "") << format_double(d.histories(i, k));
        for (Eigen::Index k = 0; k < d.q; ++k) out << ',' << format_double(d.futures(i, k));
        out << '\n';
    }
    if (!out) throw Error("failed writing '" + path + "'");
}

inline nlohmann::json windows_sidecar(const WindowedDataset& d, const std::optional<Normalizer>& norm) {
    nlohmann::json j{{"p", d.p}, {"q", d.q}, {"stride", d.stride}};
    j["normalization"] = norm ? nlohmann::json{{"min", norm->min}, {"max", norm->max}} : nlohmann::json(nullptr);
    return j;
}

} // namespace multistep
