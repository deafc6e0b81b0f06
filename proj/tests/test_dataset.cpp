#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "damf/dataset.hpp"
#include "damf/error.hpp"
#include "damf/synthetic.hpp"

using namespace damf;

namespace {

template <class F>
ErrorCode error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no damf::Error thrown";
    return ErrorCode::InvalidArgument;
}

TimeSeriesFrame price_frame(std::vector<double> prices, HourStamp start = make_hour(2023, 1, 1)) {
    TimeSeriesFrame f;
    f.start = start;
    f.add_column(std::string(kPriceColumn), std::move(prices));
    return f;
}

const char* kHeader = "timestamp,price_eur_mwh,load_fc_mw,res_fc_mw,gen_fc_mw,netflow_fc_mw\n";

}  // namespace

TEST(Ingest, ConsecutiveRowsHaveNoGaps) {
    std::string csv = kHeader;
    csv += "2023-01-01T00:00:00Z,50,1,2,3,4\n";
    csv += "2023-01-01T01:00:00Z,51,1,2,3,4\n";
    csv += "2023-01-01T02:00:00Z,52,1,2,3,4\n";
    TimeSeriesFrame f = parse_csv(csv);
    EXPECT_EQ(f.length(), 3u);
    EXPECT_EQ(f.width(), 5u);
    EXPECT_EQ(f.missing_count(), 0u);
    EXPECT_EQ(f.columns[0][2], 52.0);
}

TEST(Ingest, AbsentHourBecomesMissingRow) {
    std::string csv = kHeader;
    csv += "2023-01-01T00:00:00Z,50,1,2,3,4\n";
    csv += "2023-01-01T02:00:00Z,52,1,2,3,4\n";
    TimeSeriesFrame f = parse_csv(csv);
    ASSERT_EQ(f.length(), 3u);
    for (std::size_t c = 0; c < f.width(); ++c) {
        EXPECT_EQ(f.missing[c][1], 1) << c;
        EXPECT_EQ(f.missing[c][0], 0) << c;
    }
    EXPECT_EQ(f.missing_count(), 5u);
}

TEST(Ingest, Errors) {
    std::string bad = std::string(kHeader) + "2023-13-01T00:00:00Z,50,1,2,3,4\n";
    EXPECT_EQ(error_of([&] { parse_csv(bad); }), ErrorCode::BadTimestamp);
    std::string dup = std::string(kHeader) + "2023-01-01T00:00:00Z,50,1,2,3,4\n2023-01-01T00:00:00Z,51,1,2,3,4\n";
    EXPECT_EQ(error_of([&] { parse_csv(dup); }), ErrorCode::DuplicateTimestamp);
    std::string cols = "timestamp,price_eur_mwh\n2023-01-01T00:00:00Z,50\n";
    EXPECT_EQ(error_of([&] { parse_csv(cols); }), ErrorCode::UnknownColumn);
    EXPECT_EQ(error_of([] { ingest_csv("/nonexistent/damf.csv"); }), ErrorCode::FileUnreadable);
}

TEST(Ingest, BadTimestampNamesTheLine) {
    std::string bad = std::string(kHeader) + "2023-01-01T00:00:00Z,50,1,2,3,4\nyesterday,50,1,2,3,4\n";
    try {
        parse_csv(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BadTimestamp);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Ingest, CsvTextRoundTripsExactly) {
    TimeSeriesFrame f = gen_synthetic(3, SyntheticSpec{}, 7);
    f.missing[2][5] = 1;
    TimeSeriesFrame g = parse_csv(to_csv(f));
    ASSERT_EQ(g.length(), f.length());
    EXPECT_EQ(g.missing, f.missing);
    for (std::size_t c = 0; c < f.width(); ++c) {
        for (std::size_t i = 0; i < f.length(); ++i) {
            if (!f.missing[c][i]) {
                EXPECT_EQ(g.columns[c][i], f.columns[c][i]);
            }
        }
    }
}

TEST(Interpolate, Examples) {
    auto mk = [](std::vector<double> v, std::vector<std::uint8_t> m) {
        TimeSeriesFrame f = price_frame(std::move(v));
        f.missing[0] = std::move(m);
        return f;
    };
    TimeSeriesFrame a = interpolate_missing(mk({1, 0, 3}, {0, 1, 0}));
    EXPECT_EQ(a.columns[0], (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(a.missing_count(), 0u);

    TimeSeriesFrame b = interpolate_missing(mk({0, 5, 7}, {1, 0, 0}));
    EXPECT_EQ(b.columns[0], (std::vector<double>{5, 5, 7}));

    EXPECT_EQ(error_of([&] { interpolate_missing(mk({0, 0}, {1, 1})); }), ErrorCode::ColumnAllMissing);
    EXPECT_EQ(error_of([&] { interpolate_missing(mk({0, 4, 0}, {1, 0, 1})); }), ErrorCode::ColumnTooSparse);
}

TEST(Interpolate, FilledValuesLieBetweenNeighbours) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(40);
        std::vector<std::uint8_t> m(40);
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = u(rng);
            m[i] = (i % 7 == 3 || i % 5 == 1) && i != 0 && i != 39;
        }
        TimeSeriesFrame f = price_frame(v);
        f.missing[0] = m;
        TimeSeriesFrame g = interpolate_missing(f);
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (!m[i]) {
                EXPECT_EQ(g.columns[0][i], v[i]);
                continue;
            }
            std::size_t a = i, b = i;
            while (m[a]) --a;
            while (m[b]) ++b;
            EXPECT_GE(g.columns[0][i], std::min(v[a], v[b]) - 1e-12);
            EXPECT_LE(g.columns[0][i], std::max(v[a], v[b]) + 1e-12);
        }
    }
}

TEST(Scaler, Examples) {
    std::vector<double> x = {0, 5, 10};
    EXPECT_EQ(apply_scaler(fit_scaler(x), x), (std::vector<double>{0, 0.5, 1}));
    ScaleBounds sym{-1.0, 1.0};
    EXPECT_EQ(apply_scaler(fit_scaler(x, sym), x), (std::vector<double>{-1, 0, 1}));
    std::vector<double> flat = {4, 4, 4};
    EXPECT_EQ(apply_scaler(fit_scaler(flat), flat), (std::vector<double>{0, 0, 0}));

    ScalerParams p = fit_scaler(x);
    EXPECT_EQ(invert_scaler(p, std::vector<double>{0, 0.5, 1}), x);
    ScalerParams q = fit_scaler(flat);
    EXPECT_EQ(error_of([&] { invert_scaler(q, std::vector<double>{0.0}); }), ErrorCode::DegenerateColumn);
    EXPECT_EQ(error_of([&] { fit_scaler(x, ScaleBounds{1.0, 1.0}); }), ErrorCode::InvalidBounds);
    EXPECT_EQ(error_of([] { fit_scaler(std::vector<double>{}); }), ErrorCode::EmptyColumn);
}

TEST(Scaler, RoundTripAndBounds) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> scale(0.01, 1000.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double s = scale(rng);
        const double shift = normal(rng) * 100.0;
        std::vector<double> col(16);
        for (double& v : col) {
            v = shift + s * normal(rng);
        }
        ScaleBounds b{-1.0 + trial % 3, 1.0 + trial % 3};
        ScalerParams p = fit_scaler(col, b);
        std::vector<double> scaled = apply_scaler(p, col);
        std::vector<double> back = invert_scaler(p, scaled);
        for (std::size_t i = 0; i < col.size(); ++i) {
            EXPECT_GE(scaled[i], b.low);
            EXPECT_LE(scaled[i], b.high);
            EXPECT_NEAR(back[i], col[i], 1e-12 * std::max(1.0, std::abs(col[i])));
        }
    }
}

TEST(Scaler, PassthroughColumnsAreUntouched) {
    Matrix X(3, 2);
    X(0, 0) = 1; X(1, 0) = 2; X(2, 0) = 3;
    X(0, 1) = 5; X(1, 1) = 0; X(2, 1) = 23;
    std::vector<std::size_t> cats = {1};
    ScalerParams p = fit_scaler(X, {}, cats);
    Matrix S = apply_scaler(p, X);
    EXPECT_EQ(S(2, 0), 1.0);
    EXPECT_EQ(S.column(1), X.column(1));
}

TEST(Scaler, TestValuesDoNotReachParams) {
    TimeSeriesFrame f = gen_synthetic(60, SyntheticSpec{}, 5);
    SupervisedDataset ds = shift_timesteps(f);
    WindowSplit a = split_monthly(ds, 14, YearMonth{2023, 2});
    WindowSplit b = a;
    for (double& v : b.test.y) {
        v += 1000.0;
    }
    for (std::size_t r = 0; r < b.test.X.rows(); ++r) {
        b.test.X(r, 0) *= 3.0;
    }
    ScalerParams pa = fit_scaler(a.train.X);
    ScalerParams pb = fit_scaler(b.train.X);
    EXPECT_EQ(pa.min, pb.min);
    EXPECT_EQ(pa.max, pb.max);
}

TEST(Shift, SmallExample) {
    SupervisedDataset ds = shift_timesteps(price_frame({1, 2, 3, 4}), 2, ShiftOptions{false, false});
    ASSERT_EQ(ds.size(), 2u);
    ASSERT_EQ(ds.X.cols(), 2u);
    EXPECT_EQ(ds.X(0, 0), 1.0);
    EXPECT_EQ(ds.X(0, 1), 2.0);
    EXPECT_EQ(ds.y[0], 3.0);
    EXPECT_EQ(ds.X(1, 0), 2.0);
    EXPECT_EQ(ds.X(1, 1), 3.0);
    EXPECT_EQ(ds.y[1], 4.0);
}

TEST(Shift, RowCountAndErrors) {
    std::vector<double> v(100);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    EXPECT_EQ(shift_timesteps(price_frame(v)).size(), 76u);
    v.resize(24);
    EXPECT_EQ(error_of([&] { shift_timesteps(price_frame(v)); }), ErrorCode::FrameTooShort);
}

TEST(Shift, EveryCellNamesItsSource) {
    TimeSeriesFrame f = gen_synthetic(4, SyntheticSpec{}, 9);
    SupervisedDataset ds = shift_timesteps(f);
    ASSERT_EQ(ds.size(), f.length() - 24);
    ASSERT_EQ(ds.feature_names.size(), ds.X.cols());
    ASSERT_EQ(ds.X.cols(), 24u + 4u + 2u);
    ASSERT_EQ(ds.categorical_slots, (std::vector<std::size_t>{28, 29}));
    for (std::size_t r = 0; r < ds.size(); ++r) {
        const std::size_t t = r + 24;
        for (std::size_t k = 0; k < 24; ++k) {
            ASSERT_EQ(ds.X(r, k), f.columns[0][t - 24 + k]);
        }
        for (std::size_t c = 1; c < 5; ++c) {
            ASSERT_EQ(ds.X(r, 24 + c - 1), f.columns[c][t]);
        }
        ASSERT_EQ(ds.X(r, 28), hour_of_day(f.time_at(t)));
        ASSERT_EQ(ds.X(r, 29), day_of_week(f.time_at(t)));
        ASSERT_EQ(ds.y[r], f.columns[0][t]);
        ASSERT_EQ(ds.row_times[r], f.time_at(t));
    }
}

TEST(Split, JuneWindow7) {
    SupervisedDataset ds = shift_timesteps(gen_synthetic(365, SyntheticSpec{}, 1));
    WindowSplit s = split_monthly(ds, 7, YearMonth{2023, 6});
    EXPECT_EQ(s.test.size(), 144u);
    EXPECT_EQ(s.train.size(), 168u);
    EXPECT_EQ(s.test.row_times.front(), make_hour(2023, 6, 25));
    EXPECT_EQ(s.test.row_times.back(), make_hour(2023, 6, 30, 23));
    EXPECT_EQ(s.train.row_times.front(), make_hour(2023, 6, 18));
    EXPECT_EQ(s.train.row_times.back() + 1, s.test.row_times.front());
}

TEST(Split, MarchWindow45) {
    SupervisedDataset ds = shift_timesteps(gen_synthetic(365, SyntheticSpec{}, 1));
    WindowSplit s = split_monthly(ds, 45, YearMonth{2023, 3});
    EXPECT_EQ(s.test.row_times.front(), make_hour(2023, 3, 25));
    EXPECT_EQ(s.test.row_times.back(), make_hour(2023, 3, 31, 23));
    EXPECT_EQ(s.test.size(), 7u * 24u);
    EXPECT_EQ(s.train.row_times.front(), make_hour(2023, 2, 8, 0));
    EXPECT_EQ(s.train.row_times.back(), make_hour(2023, 3, 24, 23));
    EXPECT_EQ(s.train.size(), 45u * 24u);
}

TEST(Split, ShortHistoryAndCoverage) {
    SupervisedDataset ds = shift_timesteps(gen_synthetic(365, SyntheticSpec{}, 1));
    EXPECT_EQ(error_of([&] { split_monthly(ds, 90, YearMonth{2023, 2}); }), ErrorCode::InsufficientHistory);
    EXPECT_EQ(error_of([&] { split_monthly(ds, 7, YearMonth{2024, 3}); }), ErrorCode::MonthNotCovered);
    EXPECT_EQ(error_of([&] { split_monthly(ds, 8, YearMonth{2023, 6}); }), ErrorCode::InvalidArgument);
}

TEST(Split, DisjointAndAdjacentForEveryFeasibleCell) {
    SupervisedDataset ds = shift_timesteps(gen_synthetic(365, SyntheticSpec{}, 2));
    int feasible = 0;
    for (int w : kValidWindows) {
        for (int m = 1; m <= 12; ++m) {
            WindowSplit s;
            try {
                s = split_monthly(ds, w, YearMonth{2023, m});
            } catch (const Error& e) {
                EXPECT_EQ(e.code(), ErrorCode::InsufficientHistory);
                continue;
            }
            ++feasible;
            EXPECT_EQ(s.train.size(), static_cast<std::size_t>(w) * 24);
            EXPECT_EQ(s.test.size(), static_cast<std::size_t>(test_days_for(YearMonth{2023, m})) * 24);
            EXPECT_EQ(s.train.row_times.back() + 1, s.test.row_times.front());
            EXPECT_EQ(year_month_of(s.test.row_times.back()), (YearMonth{2023, m}));
            EXPECT_EQ(hour_of_day(s.test.row_times.front()), 0);
        }
    }
    EXPECT_GT(feasible, 40);
}

TEST(Synthetic, Deterministic) {
    SyntheticSpec spec;
    EXPECT_EQ(to_csv(gen_synthetic(20, spec, 42)), to_csv(gen_synthetic(20, spec, 42)));
    EXPECT_NE(to_csv(gen_synthetic(20, spec, 42)), to_csv(gen_synthetic(20, spec, 43)));
}

TEST(Synthetic, NoiseFreePriceIsClosedForm) {
    SyntheticSpec spec;
    spec.noise_sd = 0;
    spec.spike_rate = 0;
    spec.wind_sd = 0;
    spec.load_dev_sd = 0;
    TimeSeriesFrame f = gen_synthetic(30, spec, 4);
    for (std::size_t i = 0; i < f.length(); ++i) {
        ASSERT_EQ(f.columns[0][i], seasonal_price(spec, f.time_at(i)));
    }
}

TEST(Synthetic, DailyAmplitudeSetsDailyRange) {
    SyntheticSpec spec;
    spec.daily_amplitude = 10;
    spec.weekly_amplitude = 0;
    spec.annual_amplitude = 0;
    for (int day = 0; day < 10; ++day) {
        double lo = 1e300, hi = -1e300;
        for (int h = 0; h < 24; ++h) {
            double p = seasonal_price(spec, spec.start + day * 24 + h);
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        EXPECT_GE(hi - lo, 20.0 - 1e-9);
    }
}

TEST(Synthetic, ExogenousColumnsTrackPrice) {
    TimeSeriesFrame f = gen_synthetic(120, SyntheticSpec{}, 42);
    SyntheticSpec spec;
    // residual price after the seasonal part correlates negatively with RES
    std::vector<double> resid(f.length()), res = f.columns[2];
    for (std::size_t i = 0; i < f.length(); ++i) {
        resid[i] = f.columns[0][i] - seasonal_price(spec, f.time_at(i));
    }
    double mr = 0, ms = 0;
    for (std::size_t i = 0; i < resid.size(); ++i) {
        mr += resid[i];
        ms += res[i];
    }
    mr /= resid.size();
    ms /= res.size();
    double cov = 0;
    for (std::size_t i = 0; i < resid.size(); ++i) {
        cov += (resid[i] - mr) * (res[i] - ms);
    }
    EXPECT_LT(cov, 0.0);
}
