#include "damf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "damf/error.hpp"
#include "damf/numfmt.hpp"

namespace damf {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    for (auto& f : out) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) {
            f.remove_prefix(1);
        }
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) {
            f.remove_suffix(1);
        }
    }
    return out;
}

}  // namespace

std::size_t TimeSeriesFrame::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return i;
        }
    }
    throw Error(ErrorCode::UnknownColumn, std::string(name));
}

std::size_t TimeSeriesFrame::missing_count() const noexcept {
    std::size_t n = 0;
    for (const auto& m : missing) {
        n += static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
    }
    return n;
}

void TimeSeriesFrame::add_column(std::string name, std::vector<double> values) {
    missing.emplace_back(values.size(), std::uint8_t{0});
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
}

CsvSchema CsvSchema::standard() {
    CsvSchema s;
    for (const char* name : {"price_eur_mwh", "load_fc_mw", "res_fc_mw", "gen_fc_mw", "netflow_fc_mw"}) {
        s.columns.emplace_back(name, name);
    }
    return s;
}

TimeSeriesFrame parse_csv(std::string_view text, const CsvSchema& schema) {
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    if (lines.empty()) {
        throw Error(ErrorCode::FileUnreadable, "missing CSV header");
    }

    const auto header = split_fields(lines.front());
    auto find_header = [&](std::string_view name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return i;
            }
        }
        throw Error(ErrorCode::UnknownColumn, std::string(name));
    };
    const std::size_t ts_col = find_header(schema.timestamp_column);
    std::vector<std::size_t> value_cols;
    for (const auto& [csv_name, frame_name] : schema.columns) {
        value_cols.push_back(find_header(csv_name));
    }

    struct RawRow {
        std::vector<double> values;
        std::vector<std::uint8_t> missing;
    };
    std::map<HourStamp, RawRow> rows;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) {
            continue;
        }
        const auto fields = split_fields(lines[li]);
        const std::size_t row_no = li + 1;  // 1-based file line
        HourStamp t;
        if (ts_col >= fields.size() || !parse_iso_hour(fields[ts_col], t)) {
            throw Error(ErrorCode::BadTimestamp, "line " + std::to_string(row_no) + ": '" +
                                                     std::string(ts_col < fields.size() ? fields[ts_col] : "") + "'");
        }
        RawRow raw;
        for (std::size_t c = 0; c < value_cols.size(); ++c) {
            const std::size_t idx = value_cols[c];
            const std::string_view field = idx < fields.size() ? fields[idx] : std::string_view{};
            if (field.empty()) {
                raw.values.push_back(0.0);
                raw.missing.push_back(1);
                continue;
            }
            const auto v = parse_double(field);
            if (!v || !std::isfinite(*v)) {
                throw Error(ErrorCode::BadValue, "line " + std::to_string(row_no) + ", column " +
                                                     schema.columns[c].first + ": '" + std::string(field) + "'");
            }
            raw.values.push_back(*v);
            raw.missing.push_back(0);
        }
        if (!rows.emplace(t, std::move(raw)).second) {
            throw Error(ErrorCode::DuplicateTimestamp, format_iso_hour(t));
        }
    }

    TimeSeriesFrame frame;
    for (const auto& [csv_name, frame_name] : schema.columns) {
        frame.names.push_back(frame_name);
    }
    frame.columns.resize(schema.columns.size());
    frame.missing.resize(schema.columns.size());
    if (rows.empty()) {
        return frame;
    }
    frame.start = rows.begin()->first;
    const auto length = static_cast<std::size_t>(rows.rbegin()->first - frame.start + 1);
    for (std::size_t c = 0; c < frame.width(); ++c) {
        frame.columns[c].assign(length, 0.0);
        frame.missing[c].assign(length, 1);
    }
    for (const auto& [t, raw] : rows) {
        const auto i = static_cast<std::size_t>(t - frame.start);
        for (std::size_t c = 0; c < frame.width(); ++c) {
            frame.columns[c][i] = raw.values[c];
            frame.missing[c][i] = raw.missing[c];
        }
    }
    return frame;
}

TimeSeriesFrame ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::FileUnreadable, path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), schema);
}

std::string to_csv(const TimeSeriesFrame& frame) {
    std::string out = "timestamp";
    for (const auto& name : frame.names) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (std::size_t i = 0; i < frame.length(); ++i) {
        out += format_iso_hour(frame.time_at(i));
        for (std::size_t c = 0; c < frame.width(); ++c) {
            out += ',';
            if (!frame.missing[c][i]) {
                out += format_exact(frame.columns[c][i]);
            }
        }
        out += '\n';
    }
    return out;
}

void write_csv(const TimeSeriesFrame& frame, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::OutputUnwritable, path.string());
    }
    out << to_csv(frame);
    if (!out) {
        throw Error(ErrorCode::OutputUnwritable, path.string());
    }
}

TimeSeriesFrame interpolate_missing(const TimeSeriesFrame& frame) {
    TimeSeriesFrame out = frame;
    const std::size_t n = frame.length();
    for (std::size_t c = 0; c < frame.width(); ++c) {
        const auto& miss = frame.missing[c];
        std::vector<std::size_t> observed;
        for (std::size_t i = 0; i < n; ++i) {
            if (!miss[i]) {
                observed.push_back(i);
            }
        }
        if (observed.empty()) {
            throw Error(ErrorCode::ColumnAllMissing, frame.names[c]);
        }
        if (observed.size() < 2 && observed.size() < n) {
            throw Error(ErrorCode::ColumnTooSparse, frame.names[c]);
        }
        auto& col = out.columns[c];
        for (std::size_t i = 0; i < observed.front(); ++i) {
            col[i] = col[observed.front()];
        }
        for (std::size_t i = observed.back() + 1; i < n; ++i) {
            col[i] = col[observed.back()];
        }
        for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
            const std::size_t a = observed[k];
            const std::size_t b = observed[k + 1];
            const double va = col[a];
            const double vb = col[b];
            for (std::size_t i = a + 1; i < b; ++i) {
                const double frac = static_cast<double>(i - a) / static_cast<double>(b - a);
                col[i] = va + (vb - va) * frac;
            }
        }
        out.missing[c].assign(n, 0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// MinMax scaling

double ScalerParams::apply(std::size_t col, double x) const {
    if (!passthrough.empty() && passthrough[col]) {
        return x;
    }
    if (is_constant(col)) {
        return bounds.low;
    }
    const double norm = (x - min[col]) / (max[col] - min[col]);
    return norm * (bounds.high - bounds.low) + bounds.low;
}

double ScalerParams::invert(std::size_t col, double scaled) const {
    if (!passthrough.empty() && passthrough[col]) {
        return scaled;
    }
    if (is_constant(col)) {
        throw Error(ErrorCode::DegenerateColumn, "column " + std::to_string(col) + " was constant when fitted");
    }
    const double norm = (scaled - bounds.low) / (bounds.high - bounds.low);
    return norm * (max[col] - min[col]) + min[col];
}

ScalerParams fit_scaler(const Matrix& train, ScaleBounds bounds, std::span<const std::size_t> passthrough) {
    if (!(bounds.low < bounds.high)) {
        throw Error(ErrorCode::InvalidBounds, "lower bound must be below upper bound");
    }
    if (train.rows() == 0 || train.cols() == 0) {
        throw Error(ErrorCode::EmptyColumn, "no training values to fit");
    }
    ScalerParams p;
    p.bounds = bounds;
    p.min.assign(train.cols(), 0.0);
    p.max.assign(train.cols(), 0.0);
    p.passthrough.assign(train.cols(), 0);
    for (std::size_t c : passthrough) {
        p.passthrough.at(c) = 1;
    }
    for (std::size_t c = 0; c < train.cols(); ++c) {
        double lo = train(0, c);
        double hi = train(0, c);
        for (std::size_t r = 1; r < train.rows(); ++r) {
            lo = std::min(lo, train(r, c));
            hi = std::max(hi, train(r, c));
        }
        p.min[c] = lo;
        p.max[c] = hi;
    }
    return p;
}

ScalerParams fit_scaler(std::span<const double> column, ScaleBounds bounds) {
    Matrix m(column.size(), 1);
    for (std::size_t i = 0; i < column.size(); ++i) {
        m(i, 0) = column[i];
    }
    return fit_scaler(m, bounds);
}

Matrix apply_scaler(const ScalerParams& params, const Matrix& columns) {
    if (columns.cols() != params.width()) {
        throw Error(ErrorCode::DimensionMismatch, "scaler width differs from matrix width");
    }
    Matrix out(columns.rows(), columns.cols());
    for (std::size_t r = 0; r < columns.rows(); ++r) {
        for (std::size_t c = 0; c < columns.cols(); ++c) {
            out(r, c) = params.apply(c, columns(r, c));
        }
    }
    return out;
}

std::vector<double> apply_scaler(const ScalerParams& params, std::span<const double> column) {
    if (params.width() != 1) {
        throw Error(ErrorCode::DimensionMismatch, "single-column scaling needs single-column params");
    }
    std::vector<double> out(column.size());
    for (std::size_t i = 0; i < column.size(); ++i) {
        out[i] = params.apply(0, column[i]);
    }
    return out;
}

Matrix invert_scaler(const ScalerParams& params, const Matrix& scaled) {
    if (scaled.cols() != params.width()) {
        throw Error(ErrorCode::DimensionMismatch, "scaler width differs from matrix width");
    }
    Matrix out(scaled.rows(), scaled.cols());
    for (std::size_t r = 0; r < scaled.rows(); ++r) {
        for (std::size_t c = 0; c < scaled.cols(); ++c) {
            out(r, c) = params.invert(c, scaled(r, c));
        }
    }
    return out;
}

std::vector<double> invert_scaler(const ScalerParams& params, std::span<const double> scaled) {
    if (params.width() != 1) {
        throw Error(ErrorCode::DimensionMismatch, "single-column inversion needs single-column params");
    }
    if (params.is_constant(0)) {
        throw Error(ErrorCode::DegenerateColumn, "column was constant when fitted");
    }
    std::vector<double> out(scaled.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        out[i] = params.invert(0, scaled[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Time-step shifting and monthly splits

SupervisedDataset SupervisedDataset::slice(std::size_t first, std::size_t count) const {
    SupervisedDataset out;
    out.X = Matrix(count, X.cols());
    for (std::size_t i = 0; i < count; ++i) {
        auto src = X.row(first + i);
        std::copy(src.begin(), src.end(), out.X.row(i).begin());
    }
    out.y.assign(y.begin() + static_cast<std::ptrdiff_t>(first), y.begin() + static_cast<std::ptrdiff_t>(first + count));
    out.row_times.assign(row_times.begin() + static_cast<std::ptrdiff_t>(first),
                         row_times.begin() + static_cast<std::ptrdiff_t>(first + count));
    out.feature_names = feature_names;
    out.categorical_slots = categorical_slots;
    out.lag_depth = lag_depth;
    return out;
}

SupervisedDataset shift_timesteps(const TimeSeriesFrame& frame, std::size_t lag_depth, ShiftOptions options) {
    const std::size_t T = frame.length();
    if (lag_depth == 0) {
        throw Error(ErrorCode::InvalidArgument, "lag depth must be positive");
    }
    if (T <= lag_depth) {
        throw Error(ErrorCode::FrameTooShort,
                    "frame has " + std::to_string(T) + " hours, need more than " + std::to_string(lag_depth));
    }
    if (frame.missing_count() != 0) {
        throw Error(ErrorCode::InvalidArgument, "frame must be interpolated before shifting");
    }
    const std::size_t price = frame.column_index(kPriceColumn);
    std::vector<std::size_t> exo;
    if (options.exogenous) {
        for (std::size_t c = 0; c < frame.width(); ++c) {
            if (c != price) {
                exo.push_back(c);
            }
        }
    }

    SupervisedDataset ds;
    ds.lag_depth = lag_depth;
    for (std::size_t k = lag_depth; k >= 1; --k) {
        ds.feature_names.push_back("price_lag_" + std::to_string(k));
    }
    for (std::size_t c : exo) {
        ds.feature_names.push_back(frame.names[c]);
    }
    if (options.calendar) {
        ds.categorical_slots = {ds.feature_names.size(), ds.feature_names.size() + 1};
        ds.feature_names.emplace_back("hour_of_day");
        ds.feature_names.emplace_back("day_of_week");
    }

    const std::size_t rows = T - lag_depth;
    ds.X = Matrix(rows, ds.feature_names.size());
    ds.y.resize(rows);
    ds.row_times.resize(rows);
    const auto& prices = frame.columns[price];
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + lag_depth;
        auto x = ds.X.row(r);
        std::size_t col = 0;
        for (std::size_t k = lag_depth; k >= 1; --k) {
            x[col++] = prices[t - k];
        }
        for (std::size_t c : exo) {
            x[col++] = frame.columns[c][t];
        }
        const HourStamp when = frame.time_at(t);
        if (options.calendar) {
            x[col++] = hour_of_day(when);
            x[col++] = day_of_week(when);
        }
        ds.y[r] = prices[t];
        ds.row_times[r] = when;
    }
    return ds;
}

int test_days_for(YearMonth month) {
    return (days_in_month(month) + 4) / 5;  // ceil(0.2 * days)
}

bool is_valid_window(int window_days) {
    return std::find(std::begin(kValidWindows), std::end(kValidWindows), window_days) != std::end(kValidWindows);
}

WindowSplit split_monthly(const SupervisedDataset& ds, int window_days, YearMonth month) {
    if (!is_valid_window(window_days)) {
        throw Error(ErrorCode::InvalidArgument, "window must be one of 7, 14, 30, 45, 60, 90 days; got " +
                                                    std::to_string(window_days));
    }
    const int test_days = test_days_for(month);
    const HourStamp month_end = month_start(next_month(month));  // exclusive
    const HourStamp test_begin = month_end - static_cast<std::int64_t>(test_days) * 24;
    const HourStamp train_begin = test_begin - static_cast<std::int64_t>(window_days) * 24;

    if (ds.size() == 0) {
        throw Error(ErrorCode::MonthNotCovered, format_year_month(month) + ": dataset is empty");
    }
    const HourStamp first = ds.row_times.front();
    const HourStamp last = ds.row_times.back();
    if (first > test_begin || last < month_end - 1) {
        throw Error(ErrorCode::MonthNotCovered, format_year_month(month) + ": test period " +
                                                    format_iso_hour(test_begin) + " .. " +
                                                    format_iso_hour(month_end - 1) + " not in data");
    }
    if (first > train_begin) {
        const std::int64_t available = (test_begin - first) / 24;
        throw Error(ErrorCode::InsufficientHistory,
                    "needed " + std::to_string(window_days) + " days before " + format_iso_hour(test_begin) +
                        ", available " + std::to_string(available) + " days");
    }
    // Rows are one per hour on a contiguous grid, so positions follow from times.
    const auto train_first = static_cast<std::size_t>(train_begin - first);
    const auto test_first = static_cast<std::size_t>(test_begin - first);
    if (ds.row_times[test_first] != test_begin || ds.row_times[train_first] != train_begin) {
        throw Error(ErrorCode::InvalidArgument, "dataset rows are not on a contiguous hourly grid");
    }

    WindowSplit split;
    split.window_days = window_days;
    split.month = month;
    split.train = ds.slice(train_first, static_cast<std::size_t>(window_days) * 24);
    split.test = ds.slice(test_first, static_cast<std::size_t>(test_days) * 24);
    return split;
}

}  // namespace damf
