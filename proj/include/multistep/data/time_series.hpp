#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "multistep/errors.hpp"

namespace multistep {

using TimePoint = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

/// Parses "YYYY-MM-DD[THH:MM[:SS]][Z]" (a space may replace the 'T'). Times are UTC.
inline std::optional<TimePoint> parse_timestamp(std::string_view text) {
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
    if (text.size() >= 6 && text.substr(text.size() - 6) == "+00:00") text.remove_suffix(6);

    auto number = [&](std::size_t pos, std::size_t len, int& out) {
        if (pos + len > text.size()) return false;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
        return ec == std::errc{} && ptr == text.data() + pos + len;
    };
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    if (!number(0, 4, y) || !number(5, 2, mo) || !number(8, 2, d)) return std::nullopt;
    if (text.size() > 10) {
        if ((text[10] != 'T' && text[10] != ' ') || text.size() < 16 || text[13] != ':') return std::nullopt;
        if (!number(11, 2, h) || !number(14, 2, mi)) return std::nullopt;
        if (text.size() > 16) {
            if (text.size() != 19 || text[16] != ':' || !number(17, 2, s)) return std::nullopt;
        }
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
    return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} + std::chrono::seconds{s};
}

inline std::string format_timestamp(TimePoint t) {
    const auto days = std::chrono::floor<std::chrono::days>(t);
    const std::chrono::year_month_day ymd{days};
    const std::chrono::hh_mm_ss hms{t - days};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
    return buf;
}

/// Shortest text that parses back to exactly `v`.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// Regularly sampled, non-negative flow observations.
struct TimeSeries {
    std::vector<TimePoint> timestamps;
    std::vector<double> values;
    Duration resolution{0};

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }

    void validate() const {
        if (timestamps.size() != values.size()) throw ShapeError("timestamp and value counts differ");
        if (resolution.count() <= 0 && size() > 1) throw ConfigError("series resolution must be positive");
        for (std::size_t i = 0; i < size(); ++i) {
            if (!std::isfinite(values[i]) || values[i] < 0.0)
                throw NumericError("series value at index " + std::to_string(i) + " is negative or non-finite");
            if (i > 0 && timestamps[i] - timestamps[i - 1] != resolution)
                throw ConfigError("series is not regularly spaced at index " + std::to_string(i));
        }
    }

    /// Contiguous sub-series [begin, end).
    TimeSeries slice(std::size_t begin, std::size_t end) const {
        TimeSeries out;
        out.resolution = resolution;
        out.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
                              timestamps.begin() + static_cast<std::ptrdiff_t>(end));
        out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(begin),
                          values.begin() + static_cast<std::ptrdiff_t>(end));
        return out;
    }
};

enum class GapPolicy { reject, linear };

inline GapPolicy gap_policy_from_string(std::string_view s) {
    if (s == "reject") return GapPolicy::reject;
    if (s == "linear") return GapPolicy::linear;
    throw ConfigError("unknown gap policy '" + std::string(s) + "' (expected reject or linear)");
}

inline std::string to_string(GapPolicy g) { return g == GapPolicy::reject ? "reject" : "linear"; }

struct IngestOptions {
    /// When unset, the spacing of the first two (sorted) rows is taken as the resolution.
    std::optional<Duration> expected_resolution;
    GapPolicy gap_policy = GapPolicy::reject;
    /// Largest number of consecutive missing slots the linear policy will fill.
    std::size_t max_gap_slots = 12;
};

/// Reads a `timestamp,flow` CSV (header optional) into a validated, regular series.
inline TimeSeries ingest_csv(const std::string& path, const IngestOptions& options = {}) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path + "'");

    struct Row {
        TimePoint t;
        double v;
        std::size_t line;
    };
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw IngestError("expected 'timestamp,flow'", line_no, path);
        const std::string_view ts_text(line.data(), comma);
        std::string_view val_text(line.data() + comma + 1, line.size() - comma - 1);
        const auto t = parse_timestamp(ts_text);
        if (!t) {
            if (rows.empty() && line_no == 1) continue; // header
            throw IngestError("unparseable timestamp '" + std::string(ts_text) + "'", line_no, path);
        }
        while (!val_text.empty() && val_text.front() == ' ') val_text.remove_prefix(1);
        while (!val_text.empty() && val_text.back() == ' ') val_text.remove_suffix(1);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(val_text.data(), val_text.data() + val_text.size(), v);
        if (ec != std::errc{} || ptr != val_text.data() + val_text.size() || val_text.empty())
            throw IngestError("unparseable value '" + std::string(val_text) + "'", line_no, path);
        if (!std::isfinite(v)) throw IngestError("non-finite value", line_no, path);
        if (v < 0.0) throw IngestError("negative flow value", line_no, path);
        rows.push_back({*t, v, line_no});
    }
    if (rows.empty()) throw IngestError("no data rows in '" + path + "'");

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].t == rows[i - 1].t) throw IngestError("duplicate timestamp " + format_timestamp(rows[i].t), rows[i].line, path);

    TimeSeries series;
    if (options.expected_resolution) series.resolution = *options.expected_resolution;
    else if (rows.size() > 1) series.resolution = rows[1].t - rows[0].t;
    if (series.resolution.count() <= 0 && rows.size() > 1) throw IngestError("cannot infer a positive resolution");

    series.timestamps.push_back(rows[0].t);
    series.values.push_back(rows[0].v);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto delta = rows[i].t - rows[i - 1].t;
        if (delta % series.resolution != Duration{0})
            throw IngestError("timestamp off the " + std::to_string(series.resolution.count()) + " s grid", rows[i].line, path);
        const auto steps = static_cast<std::size_t>(delta / series.resolution);
        if (steps > 1) {
            const std::size_t missing = steps - 1;
            if (options.gap_policy == GapPolicy::reject)
                throw IngestError("gap of " + std::to_string(missing) + " missing interval(s) before " +
                                  format_timestamp(rows[i].t), rows[i].line, path);
            if (missing > options.max_gap_slots)
                throw IngestError("gap of " + std::to_string(missing) + " interval(s) exceeds the fill limit of " +
                                  std::to_string(options.max_gap_slots), rows[i].line, path);
            const double a = rows[i - 1].v;
            const double b = rows[i].v;
            for (std::size_t k = 1; k < steps; ++k) {
                const double w = static_cast<double>(k) / static_cast<double>(steps);
                series.timestamps.push_back(rows[i - 1].t + series.resolution * static_cast<long>(k));
                series.values.push_back(a + (b - a) * w);
            }
        }
        series.timestamps.push_back(rows[i].t);
        series.values.push_back(rows[i].v);
    }
    series.validate();
    return series;
}

enum class AggregationOp { sum, mean };

inline AggregationOp aggregation_from_string(std::string_view s) {
    if (s == "sum") return AggregationOp::sum;
    if (s == "mean") return AggregationOp::mean;
    throw ConfigError("unknown aggregation '" + std::string(s) + "' (expected sum or mean)");
}

inline std::string to_string(AggregationOp a) { return a == AggregationOp::sum ? "sum" : "mean"; }

/// Combines each run of `factor` consecutive values; a trailing partial run is dropped.
/// Each output point carries the timestamp of the first point in its run.
inline TimeSeries aggregate(const TimeSeries& series, int factor, AggregationOp op = AggregationOp::sum) {
    if (factor < 1) throw ConfigError("aggregation factor must be at least 1");
    const auto f = static_cast<std::size_t>(factor);
    if (series.size() < f)
        throw ConfigError("series of length " + std::to_string(series.size()) + " is shorter than the aggregation factor " +
                          std::to_string(factor));
    TimeSeries out;
    out.resolution = series.resolution * factor;
    const std::size_t n = series.size() / f;
    out.timestamps.reserve(n);
    out.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < f; ++k) acc += series.values[i * f + k];
        out.timestamps.push_back(series.timestamps[i * f]);
        out.values.push_back(op == AggregationOp::sum ? acc : acc / static_cast<double>(factor));
    }
    return out;
}

/// train = (-inf, train_end], val = (train_end, val_end], test = (val_end, +inf).
struct SplitSpec {
    TimePoint train_end;
    TimePoint val_end;
};

struct SeriesSplit {
    TimeSeries train;
    TimeSeries val;
    TimeSeries test;
};

inline SeriesSplit split_by_date(const TimeSeries& series, const SplitSpec& spec) {
    if (series.empty()) throw ConfigError("cannot split an empty series");
    if (!(spec.train_end < spec.val_end))
        throw ConfigError("split requires train_end < val_end (validation split would be empty)");
    if (!(spec.val_end < series.timestamps.back()))
        throw ConfigError("val_end " + format_timestamp(spec.val_end) + " is not before the last timestamp " +
                          format_timestamp(series.timestamps.back()));
    if (spec.train_end < series.timestamps.front())
        throw ConfigError("train_end " + format_timestamp(spec.train_end) + " precedes the first timestamp");
    const auto first_after = [&](TimePoint t) {
        return static_cast<std::size_t>(std::upper_bound(series.timestamps.begin(), series.timestamps.end(), t) -
                                        series.timestamps.begin());
    };
    const std::size_t a = first_after(spec.train_end);
    const std::size_t b = first_after(spec.val_end);
    if (a == b) throw ConfigError("no observations fall in the validation window");
    return {series.slice(0, a), series.slice(a, b), series.slice(b, series.size())};
}

inline void write_series_csv(const std::string& path, const TimeSeries& series) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "timestamp,flow\n";
    for (std::size_t i = 0; i < series.size(); ++i)
        out << format_timestamp(series.timestamps[i]) << ',' << format_double(series.values[i]) << '\n';
    if (!out) throw Error("failed writing '" + path + "'");
}

} // namespace multistep
