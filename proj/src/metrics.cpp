#include "damf/metrics.hpp"

#include <cmath>
#include <string>

#include "damf/error.hpp"

namespace damf {

namespace {

void check_pair(std::span<const double> pred, std::span<const double> actual) {
    if (pred.size() != actual.size()) {
        throw Error(ErrorCode::LengthMismatch, "predictions " + std::to_string(pred.size()) + " vs actuals " +
                                                   std::to_string(actual.size()));
    }
    if (pred.empty()) {
        throw Error(ErrorCode::EmptyInput, "no hours to score");
    }
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> actual) {
    check_pair(pred, actual);
    double s = 0.0;
    for (std::size_t t = 0; t < pred.size(); ++t) {
        s += std::abs(pred[t] - actual[t]);
    }
    return s / static_cast<double>(pred.size());
}

double rmse(std::span<const double> pred, std::span<const double> actual) {
    check_pair(pred, actual);
    double s = 0.0;
    for (std::size_t t = 0; t < pred.size(); ++t) {
        const double d = pred[t] - actual[t];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(pred.size()));
}

double fsi(double model_rmse, double persistence_rmse) {
    if (!(persistence_rmse > 0.0)) {
        throw Error(ErrorCode::ZeroPersistenceRmse, "persistence RMSE must be positive");
    }
    return 1.0 - model_rmse / persistence_rmse;
}

MetricsReport compute_metrics(std::span<const double> pred, std::span<const double> actual,
                              std::optional<double> persistence_rmse) {
    check_pair(pred, actual);
    const std::size_t n = pred.size();
    MetricsReport m;
    m.n_hours = n;
    m.mae = mae(pred, actual);
    m.rmse = rmse(pred, actual);

    double ape = 0.0;
    std::size_t counted = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (actual[t] == 0.0) {
            ++m.n_mape_excluded;
            continue;
        }
        ape += std::abs((actual[t] - pred[t]) / actual[t]);
        ++counted;
    }
    m.mape = counted > 0 ? 100.0 * ape / static_cast<double>(counted) : 0.0;

    double mean = 0.0;
    for (double a : actual) {
        mean += a;
    }
    mean /= static_cast<double>(n);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        ss_res += (actual[t] - pred[t]) * (actual[t] - pred[t]);
        ss_tot += (mean - actual[t]) * (mean - actual[t]);
    }
    if (ss_tot == 0.0) {
        throw Error(ErrorCode::ConstantActualsForR2, "actuals are constant");
    }
    m.r2 = 1.0 - ss_res / ss_tot;
    if (persistence_rmse) {
        m.fsi = fsi(m.rmse, *persistence_rmse);
    }
    return m;
}

std::vector<double> naive_persistence(const TimeSeriesFrame& frame, std::span<const HourStamp> test_times) {
    const std::size_t price = frame.column_index(kPriceColumn);
    std::vector<double> out;
    out.reserve(test_times.size());
    for (HourStamp t : test_times) {
        const HourStamp src = t - 24;
        if (src < frame.start || src.hours - frame.start.hours >= static_cast<std::int64_t>(frame.length())) {
            throw Error(ErrorCode::InsufficientHistory, "no actual price 24 hours before " + format_iso_hour(t));
        }
        const auto k = static_cast<std::size_t>(src.hours - frame.start.hours);
        if (frame.missing[price][k]) {
            throw Error(ErrorCode::InsufficientHistory, "price missing at " + format_iso_hour(src));
        }
        out.push_back(frame.columns[price][k]);
    }
    return out;
}

}  // namespace damf
