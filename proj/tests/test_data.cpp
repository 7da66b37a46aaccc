#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "multistep/data/normalizer.hpp"
#include "multistep/data/time_series.hpp"
#include "multistep/data/windows.hpp"
#include "multistep/synthetic.hpp"

using namespace multistep;
using Eigen::Index;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("multistep_data_" + name);
    std::ofstream(p) << text;
    return p.string();
}

TimeSeries regular(std::vector<double> values, std::chrono::minutes step = std::chrono::minutes{15}) {
    TimeSeries s;
    s.resolution = step;
    for (std::size_t i = 0; i < values.size(); ++i) s.timestamps.push_back(default_series_start() + step * static_cast<long>(i));
    s.values = std::move(values);
    return s;
}

} // namespace

TEST(Timestamp, ParsesCommonForms) {
    const auto a = parse_timestamp("2011-01-01T00:05:00");
    const auto b = parse_timestamp("2011-01-01 00:05");
    const auto c = parse_timestamp("2011-01-01T00:05:00Z");
    ASSERT_TRUE(a && b && c);
    EXPECT_EQ(*a, *b);
    EXPECT_EQ(*a, *c);
    EXPECT_EQ(format_timestamp(*a), "2011-01-01T00:05:00");
    EXPECT_FALSE(parse_timestamp("2011-13-01"));
    EXPECT_FALSE(parse_timestamp("yesterday"));
    EXPECT_FALSE(parse_timestamp("2011-02-30T00:00"));
}

TEST(Ingest, ReadsSortsAndInfersResolution) {
    const auto path = write_temp("sorted.csv",
                                 "timestamp,flow\n2011-01-01T00:10:00,3\n2011-01-01T00:00:00,1\n2011-01-01T00:05:00,2\n");
    const TimeSeries s = ingest_csv(path);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.values, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(s.resolution, std::chrono::minutes{5});
}

TEST(Ingest, HeaderIsOptional) {
    const auto path = write_temp("nohdr.csv", "2011-01-01T00:00:00,1.5\n2011-01-01T00:05:00,2.5\n");
    EXPECT_EQ(ingest_csv(path).values, (std::vector<double>{1.5, 2.5}));
}

TEST(Ingest, NegativeValueReportsRow) {
    const auto path = write_temp("neg.csv", "timestamp,flow\n2011-01-01T00:00:00,1\n2011-01-01T00:05:00,-4\n");
    try {
        ingest_csv(path);
        FAIL() << "expected IngestError";
    } catch (const IngestError& e) {
        EXPECT_EQ(e.row(), 3u);
        EXPECT_NE(std::string(e.what()).find(path + ":3:"), std::string::npos);
    }
}

TEST(Ingest, RejectsMalformedRows) {
    EXPECT_THROW(ingest_csv(write_temp("bad1.csv", "timestamp,flow\n2011-01-01T00:00:00,abc\n")), IngestError);
    EXPECT_THROW(ingest_csv(write_temp("bad2.csv", "timestamp,flow\nnot-a-date,1\n")), IngestError);
    EXPECT_THROW(ingest_csv(write_temp("bad3.csv", "timestamp,flow\n2011-01-01T00:00:00,nan\n")), IngestError);
    EXPECT_THROW(ingest_csv(write_temp("bad4.csv", "timestamp,flow\n")), IngestError);
    EXPECT_THROW(ingest_csv(write_temp("dup.csv", "2011-01-01T00:00:00,1\n2011-01-01T00:00:00,2\n")), IngestError);
    EXPECT_THROW(ingest_csv("/nonexistent/multistep.csv"), IngestError);
}

TEST(Ingest, GapPolicies) {
    const auto path = write_temp("gap.csv", "2011-01-01T00:00:00,0\n2011-01-01T00:05:00,1\n2011-01-01T00:20:00,4\n");
    EXPECT_THROW(ingest_csv(path), IngestError);
    IngestOptions opts;
    opts.gap_policy = GapPolicy::linear;
    const TimeSeries s = ingest_csv(path, opts);
    EXPECT_EQ(s.values, (std::vector<double>{0, 1, 2, 3, 4}));
    opts.max_gap_slots = 1;
    EXPECT_THROW(ingest_csv(path, opts), IngestError);
}

TEST(Ingest, OffGridTimestampRejected) {
    IngestOptions opts;
    opts.expected_resolution = std::chrono::minutes{5};
    const auto path = write_temp("offgrid.csv", "2011-01-01T00:00:00,0\n2011-01-01T00:07:00,1\n");
    EXPECT_THROW(ingest_csv(path, opts), IngestError);
}

TEST(Aggregate, SumsRunsOfFactor) {
    const TimeSeries s = regular({1, 2, 3, 4, 5, 6}, std::chrono::minutes{5});
    const TimeSeries a = aggregate(s, 3);
    EXPECT_EQ(a.values, (std::vector<double>{6, 15}));
    EXPECT_EQ(a.timestamps[1], s.timestamps[3]);
    EXPECT_EQ(a.resolution, std::chrono::minutes{15});
    EXPECT_EQ(aggregate(s, 3, AggregationOp::mean).values, (std::vector<double>{2, 5}));
}

TEST(Aggregate, FactorOneIsIdentityAndRemainderDropped) {
    const TimeSeries s = regular({1, 2, 3, 4, 5, 6, 7});
    const TimeSeries same = aggregate(s, 1);
    EXPECT_EQ(same.values, s.values);
    EXPECT_EQ(same.timestamps, s.timestamps);
    EXPECT_EQ(aggregate(s, 3).values, (std::vector<double>{6, 15}));
    EXPECT_THROW(aggregate(s, 0), ConfigError);
    EXPECT_THROW(aggregate(s, 8), ConfigError);
}

TEST(Aggregate, SumIsConserved) {
    const TimeSeries s = synthetic_traffic_series(300, 3);
    const TimeSeries a = aggregate(s, 3);
    double lhs = 0, rhs = 0;
    for (double v : s.values) lhs += v;
    for (double v : a.values) rhs += v;
    EXPECT_NEAR(lhs, rhs, 1e-9 * lhs);
}

TEST(Normalizer, MapsTrainingRangeToUnitInterval) {
    const std::vector<double> v{10, 20, 30};
    const Normalizer n = fit_normalizer(v);
    EXPECT_EQ(n.apply(std::span<const double>(v)), (std::vector<double>{0, 0.5, 1}));
    EXPECT_DOUBLE_EQ(n.invert(0.5), 20.0);
    EXPECT_THROW(fit_normalizer(std::vector<double>{4, 4, 4}), ConfigError);
}

TEST(Normalizer, RoundTripsWithinTolerance) {
    const TimeSeries s = synthetic_traffic_series(500, 2);
    const Normalizer n = fit_normalizer(s);
    for (double v : s.values) EXPECT_NEAR(n.invert(n.apply(v)), v, 1e-9 * std::max(1.0, v));
}

TEST(Windows, Example) {
    const std::vector<double> v{1, 2, 3, 4, 5};
    const WindowedDataset d = make_windows(v, 2, 2);
    ASSERT_EQ(d.size(), 2);
    EXPECT_EQ(d.histories.row(0), Eigen::RowVector2d(1, 2));
    EXPECT_EQ(d.futures.row(0), Eigen::RowVector2d(3, 4));
    EXPECT_EQ(d.histories.row(1), Eigen::RowVector2d(2, 3));
    EXPECT_EQ(d.futures.row(1), Eigen::RowVector2d(4, 5));
}

TEST(Windows, CountsAndStride) {
    std::vector<double> v(50);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    for (Index p : {1, 3, 8})
        for (Index q : {1, 4, 8})
            for (Index stride : {1, 2, 5}) {
                const WindowedDataset d = make_windows(v, p, q, stride);
                EXPECT_EQ(d.size(), (50 - p - q) / stride + 1);
                for (Index i = 0; i < d.size(); ++i) {
                    EXPECT_EQ(d.histories(i, 0), static_cast<double>(i * stride));
                    EXPECT_EQ(d.futures(i, q - 1), static_cast<double>(i * stride + p + q - 1));
                }
            }
    EXPECT_THROW(make_windows(std::vector<double>{1, 2, 3}, 2, 2), ConfigError);
}

TEST(Windows, CsvAndSidecar) {
    const WindowedDataset d = make_windows(std::vector<double>{1, 2, 3, 4, 5}, 2, 2);
    const auto path = (fs::temp_directory_path() / "multistep_windows.csv").string();
    write_windows_csv(path, d);
    std::ifstream in(path);
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    EXPECT_EQ(header, "h1,h2,f1,f2");
    EXPECT_EQ(first, "1,2,3,4");
    const auto j = windows_sidecar(d, Normalizer{1, 5});
    EXPECT_EQ(j["p"], 2);
    EXPECT_EQ(j["normalization"]["max"], 5.0);
}

TEST(Split, SixTwoTwo) {
    const TimeSeries s = regular({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    const SeriesSplit sp = split_by_date(s, {s.timestamps[5], s.timestamps[7]});
    EXPECT_EQ(sp.train.size(), 6u);
    EXPECT_EQ(sp.val.size(), 2u);
    EXPECT_EQ(sp.test.size(), 2u);
    EXPECT_EQ(sp.val.values.front(), 6.0);
    EXPECT_EQ(sp.test.values.front(), 8.0);
}

TEST(Split, RejectsEmptyValidation) {
    const TimeSeries s = regular({0, 1, 2, 3, 4, 5});
    EXPECT_THROW(split_by_date(s, {s.timestamps[3], s.timestamps[3]}), ConfigError);
    EXPECT_THROW(split_by_date(s, {s.timestamps[3], s.timestamps[3] + std::chrono::minutes{5}}), ConfigError);
    EXPECT_THROW(split_by_date(s, {s.timestamps[3], s.timestamps[5]}), ConfigError);
}

TEST(Series, CsvRoundTrip) {
    const TimeSeries s = synthetic_traffic_series(40, 9);
    const auto path = (fs::temp_directory_path() / "multistep_series.csv").string();
    write_series_csv(path, s);
    const TimeSeries back = ingest_csv(path);
    EXPECT_EQ(back.values, s.values);
    EXPECT_EQ(back.timestamps, s.timestamps);
    EXPECT_EQ(back.resolution, s.resolution);
}

TEST(Synthetic, SeededAndNonNegative) {
    const TimeSeries a = synthetic_traffic_series(1000, 5), b = synthetic_traffic_series(1000, 5);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, synthetic_traffic_series(1000, 6).values);
    for (double v : a.values) EXPECT_GE(v, 0.0);
    a.validate();
}
