#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "damf/error.hpp"
#include "damf/metrics.hpp"

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

struct FsiRow {
    const char* label;
    double naive_rmse;
    double model_rmse;
    double printed;
};

// Greece and Belgium, 7- and 14-day windows: LSTM, XGB, LGBM, CatBoost.
const FsiRow kTable[] = {
    {"GR7 LSTM", 39.722, 52.229, -0.315}, {"GR7 XGB", 39.722, 27.628, 0.304},
    {"GR7 LGBM", 39.722, 27.787, 0.300},  {"GR7 Cat", 39.722, 33.918, 0.146},
    {"GR14 LSTM", 34.133, 31.532, 0.076}, {"GR14 XGB", 34.133, 22.980, 0.327},
    {"GR14 LGBM", 34.133, 22.229, 0.349}, {"GR14 Cat", 34.133, 28.050, 0.178},
    {"BE7 LSTM", 34.667, 34.538, 0.004},  {"BE7 XGB", 34.667, 20.792, 0.400},
    {"BE7 LGBM", 34.667, 21.424, 0.382},  {"BE7 Cat", 34.667, 31.008, 0.106},
    {"BE14 LSTM", 33.714, 26.550, 0.212}, {"BE14 XGB", 33.714, 18.677, 0.446},
    {"BE14 LGBM", 33.714, 17.480, 0.482}, {"BE14 Cat", 33.714, 26.256, 0.221},
};

}  // namespace

TEST(Fsi, PublishedTriples) {
    for (const FsiRow& r : kTable) {
        EXPECT_NEAR(fsi(r.model_rmse, r.naive_rmse), r.printed, 1e-3) << r.label;
    }
}

TEST(Fsi, Examples) {
    EXPECT_EQ(fsi(12.5, 12.5), 0.0);
    EXPECT_EQ(fsi(0.0, 3.0), 1.0);
    EXPECT_LT(fsi(4.0, 3.0), 0.0);
    EXPECT_EQ(error_of([] { fsi(1.0, 0.0); }), ErrorCode::ZeroPersistenceRmse);
}

TEST(Metrics, PerfectAndOffsetForecasts) {
    std::vector<double> a = {10, 20, 0, 40};
    MetricsReport p = compute_metrics(a, a);
    EXPECT_EQ(p.mae, 0.0);
    EXPECT_EQ(p.rmse, 0.0);
    EXPECT_EQ(p.r2, 1.0);
    EXPECT_EQ(p.n_hours, 4u);
    EXPECT_EQ(p.n_mape_excluded, 1u);
    EXPECT_FALSE(p.fsi);

    std::vector<double> shifted = {12, 22, 2, 42};
    MetricsReport o = compute_metrics(shifted, a, 4.0);
    EXPECT_EQ(o.mae, 2.0);
    EXPECT_EQ(o.rmse, 2.0);
    EXPECT_NEAR(o.mape, 100.0 * (2.0 / 10 + 2.0 / 20 + 2.0 / 40) / 3.0, 1e-12);
    ASSERT_TRUE(o.fsi);
    EXPECT_EQ(*o.fsi, 0.5);
}

TEST(Metrics, Errors) {
    std::vector<double> a = {1, 2}, b = {1};
    EXPECT_EQ(error_of([&] { compute_metrics(a, b); }), ErrorCode::LengthMismatch);
    EXPECT_EQ(error_of([&] { compute_metrics(std::vector<double>{}, std::vector<double>{}); }), ErrorCode::EmptyInput);
    std::vector<double> flat = {3, 3, 3};
    std::vector<double> some = {1, 2, 3};
    EXPECT_EQ(error_of([&] { compute_metrics(some, flat); }), ErrorCode::ConstantActualsForR2);
    EXPECT_EQ(error_of([&] { compute_metrics(a, a, 0.0); }), ErrorCode::ZeroPersistenceRmse);
}

TEST(Metrics, PropertySweep) {
    std::mt19937_64 rng(1000);
    std::normal_distribution<double> normal(0, 1);
    std::uniform_int_distribution<int> len(2, 80);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = static_cast<std::size_t>(len(rng));
        const double scale = std::exp(normal(rng) * 2);
        std::vector<double> actual(n), pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            actual[i] = 50 + scale * normal(rng);
            pred[i] = actual[i] + scale * normal(rng) * (trial % 4);
        }
        actual[0] += 1.0;
        MetricsReport m = compute_metrics(pred, actual);
        EXPECT_LE(m.mae, m.rmse * (1 + 1e-12));
        EXPECT_LE(m.r2, 1.0);

        double mean = 0;
        for (double a : actual) mean += a;
        mean /= static_cast<double>(n);
        EXPECT_EQ(compute_metrics(std::vector<double>(n, mean), actual).r2, 0.0);

        const double model_rmse = m.rmse;
        EXPECT_EQ(fsi(model_rmse, model_rmse), 0.0);
        if (model_rmse > 0) {
            ASSERT_TRUE(compute_metrics(pred, actual, model_rmse).fsi);
            EXPECT_EQ(*compute_metrics(pred, actual, model_rmse).fsi, 0.0);
            EXPECT_LE(*compute_metrics(pred, actual, 1.0).fsi, 1.0);
        }

        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> pa(n), pp(n);
        for (std::size_t i = 0; i < n; ++i) {
            pa[i] = actual[perm[i]];
            pp[i] = pred[perm[i]];
        }
        MetricsReport q = compute_metrics(pp, pa);
        EXPECT_NEAR(q.mae, m.mae, 1e-12 * std::max(1.0, m.mae));
        EXPECT_NEAR(q.rmse, m.rmse, 1e-12 * std::max(1.0, m.rmse));
        EXPECT_NEAR(q.mape, m.mape, 1e-10 * std::max(1.0, m.mape));
        EXPECT_NEAR(q.r2, m.r2, 1e-10);
    }
}

TEST(Persistence, SameHourPreviousDay) {
    TimeSeriesFrame f;
    f.start = make_hour(2023, 3, 1);
    std::vector<double> p(72);
    for (std::size_t t = 0; t < 72; ++t) p[t] = 5.0 * static_cast<double>(t / 24) + static_cast<double>(t % 24);
    f.add_column(std::string(kPriceColumn), p);
    std::vector<HourStamp> times;
    std::vector<double> actual;
    for (std::size_t t = 24; t < 72; ++t) {
        times.push_back(f.time_at(t));
        actual.push_back(p[t]);
    }
    std::vector<double> naive = naive_persistence(f, times);
    EXPECT_EQ(naive.front(), p[0]);
    EXPECT_EQ(mae(naive, actual), 5.0);

    std::vector<HourStamp> early = {f.time_at(10)};
    EXPECT_EQ(error_of([&] { naive_persistence(f, early); }), ErrorCode::InsufficientHistory);

    TimeSeriesFrame flat;
    flat.start = f.start;
    flat.add_column(std::string(kPriceColumn), std::vector<double>(72, 42.0));
    std::vector<double> flat_naive = naive_persistence(flat, times);
    EXPECT_EQ(rmse(flat_naive, std::vector<double>(times.size(), 42.0)), 0.0);
}
