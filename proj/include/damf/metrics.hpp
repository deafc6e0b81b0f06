#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "damf/calendar.hpp"
#include "damf/dataset.hpp"

namespace damf {

struct MetricsReport {
    double mae = 0.0;
    double mape = 0.0;  // percent, over hours with a nonzero actual
    double rmse = 0.0;
    double r2 = 0.0;
    std::optional<double> fsi;
    std::size_t n_hours = 0;
    std::size_t n_mape_excluded = 0;
};

// Throws LengthMismatch, EmptyInput, ConstantActualsForR2 and, for a
// non-positive persistence RMSE, ZeroPersistenceRmse.
MetricsReport compute_metrics(std::span<const double> pred, std::span<const double> actual,
                              std::optional<double> persistence_rmse = std::nullopt);

double mae(std::span<const double> pred, std::span<const double> actual);
double rmse(std::span<const double> pred, std::span<const double> actual);

// 1 - model_rmse / persistence_rmse; ZeroPersistenceRmse when the latter is not positive.
double fsi(double model_rmse, double persistence_rmse);

// Same hour of the previous day, read from `frame`'s price column.
std::vector<double> naive_persistence(const TimeSeriesFrame& frame, std::span<const HourStamp> test_times);

}  // namespace damf
