#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "damf/calendar.hpp"
#include "damf/matrix.hpp"

namespace damf {

inline constexpr std::string_view kPriceColumn = "price_eur_mwh";
inline constexpr std::size_t kDefaultLagDepth = 24;
inline constexpr int kValidWindows[] = {7, 14, 30, 45, 60, 90};

// Hourly multivariate series on a contiguous UTC grid. Hours with no data are
// present as missing cells.
struct TimeSeriesFrame {
    HourStamp start;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<std::vector<std::uint8_t>> missing;

    std::size_t length() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t width() const noexcept { return columns.size(); }
    HourStamp time_at(std::size_t i) const noexcept { return start + static_cast<std::int64_t>(i); }
    std::size_t column_index(std::string_view name) const;  // throws UnknownColumn
    std::size_t missing_count() const noexcept;

    void add_column(std::string name, std::vector<double> values);
};

// Maps CSV header names onto frame column names.
struct CsvSchema {
    std::string timestamp_column = "timestamp";
    std::vector<std::pair<std::string, std::string>> columns;  // csv name -> frame name

    static CsvSchema standard();
};

TimeSeriesFrame ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = CsvSchema::standard());
TimeSeriesFrame parse_csv(std::string_view text, const CsvSchema& schema = CsvSchema::standard());

// Writes the frame in the ingestion schema; missing cells become empty fields.
void write_csv(const TimeSeriesFrame& frame, const std::filesystem::path& path);
std::string to_csv(const TimeSeriesFrame& frame);

// Interior gaps are filled linearly; leading/trailing gaps take the nearest observation.
TimeSeriesFrame interpolate_missing(const TimeSeriesFrame& frame);

struct ScaleBounds {
    double low = 0.0;
    double high = 1.0;
};

struct ScalerParams {
    std::vector<double> min;
    std::vector<double> max;
    ScaleBounds bounds;
    // Columns flagged here pass through unchanged (categorical codes).
    std::vector<std::uint8_t> passthrough;

    std::size_t width() const noexcept { return min.size(); }
    bool is_constant(std::size_t col) const { return !(max[col] > min[col]); }

    double apply(std::size_t col, double x) const;
    double invert(std::size_t col, double scaled) const;  // throws DegenerateColumn
};

ScalerParams fit_scaler(const Matrix& train, ScaleBounds bounds = {}, std::span<const std::size_t> passthrough = {});
ScalerParams fit_scaler(std::span<const double> column, ScaleBounds bounds = {});
Matrix apply_scaler(const ScalerParams& params, const Matrix& columns);
std::vector<double> apply_scaler(const ScalerParams& params, std::span<const double> column);
Matrix invert_scaler(const ScalerParams& params, const Matrix& scaled);
std::vector<double> invert_scaler(const ScalerParams& params, std::span<const double> scaled);

struct SupervisedDataset {
    Matrix X;
    std::vector<double> y;
    std::vector<HourStamp> row_times;
    std::vector<std::string> feature_names;
    std::vector<std::size_t> categorical_slots;
    std::size_t lag_depth = 0;  // columns [0, lag_depth) are price lags t-n .. t-1

    std::size_t size() const noexcept { return y.size(); }
    std::size_t exogenous_count() const noexcept { return X.cols() - lag_depth - categorical_slots.size(); }
    SupervisedDataset slice(std::size_t first, std::size_t count) const;
};

struct ShiftOptions {
    bool exogenous = true;  // contemporaneous non-price columns at the target hour
    bool calendar = true;   // hour-of-day and day-of-week categorical slots
};

SupervisedDataset shift_timesteps(const TimeSeriesFrame& frame, std::size_t lag_depth = kDefaultLagDepth,
                                  ShiftOptions options = {});

struct WindowSplit {
    int window_days = 0;
    YearMonth month;
    SupervisedDataset train;
    SupervisedDataset test;
};

int test_days_for(YearMonth month);
bool is_valid_window(int window_days);

// Chronological monthly split: test is the last ceil(0.2 * days) days of the
// month, train the `window_days` days right before it.
WindowSplit split_monthly(const SupervisedDataset& ds, int window_days, YearMonth month);

}  // namespace damf
