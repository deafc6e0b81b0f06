#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "damf/boosting.hpp"
#include "damf/calendar.hpp"
#include "damf/dataset.hpp"
#include "damf/learners.hpp"
#include "damf/lstm.hpp"
#include "damf/metrics.hpp"
#include "damf/model_io.hpp"

namespace damf {

enum class ModelKind { naive, lstm_ffec, levelwise_exact, leafwise_histogram, oblivious_ordered };

inline constexpr ModelKind kAllModels[] = {ModelKind::naive, ModelKind::lstm_ffec, ModelKind::levelwise_exact,
                                           ModelKind::leafwise_histogram, ModelKind::oblivious_ordered};

std::string_view to_string(ModelKind m) noexcept;
bool parse_model_kind(std::string_view text, ModelKind& out);
std::string model_names();  // comma-separated list for messages

// Hyperparameters for every model kind; defaults are the benchmark presets.
struct ModelSettings {
    std::map<Variant, BoostConfig> boost;
    LearnerOptions learners;
    TrainConfig lstm;

    ModelSettings();
};

// A market's price frame after gap filling, and its shifted dataset.
struct MarketData {
    std::string name;
    TimeSeriesFrame frame;
    SupervisedDataset dataset;

    static MarketData from_frame(std::string name, const TimeSeriesFrame& raw);
    static MarketData load(std::string name, const std::filesystem::path& csv);
};

// A monthly split with scalers fit on its training rows only.
struct PreparedSplit {
    WindowSplit raw;
    ScalerParams feature_scaler;
    ScalerParams target_scaler;
    SupervisedDataset train;  // scaled
    SupervisedDataset test;   // scaled
};

PreparedSplit prepare_split(const SupervisedDataset& ds, int window_days, YearMonth month);

ModelFile fit_model(ModelKind kind, const PreparedSplit& split, const ModelSettings& settings, std::uint64_t seed);
// Predictions in price units for the raw (unscaled) rows of `raw`.
std::vector<double> predict_model(const ModelFile& model, const SupervisedDataset& raw, const TimeSeriesFrame& frame);

std::uint64_t cell_seed(std::uint64_t run_seed, std::string_view market, int window_days, ModelKind model,
                        YearMonth month);

struct ExperimentConfig {
    std::vector<std::pair<std::string, std::filesystem::path>> markets;
    std::vector<int> windows;
    std::vector<ModelKind> models;
    std::vector<YearMonth> months;  // empty: every month the data touches
    std::uint64_t seed = 42;
    std::size_t jobs = 1;
    ModelSettings settings;
    std::vector<std::pair<std::string, std::string>> echo;  // config entries for the manifest

    // Flat key-value file; paths resolve against the file's directory.
    static ExperimentConfig from_file(const std::filesystem::path& path);
    static ExperimentConfig from_text(std::string_view text, const std::filesystem::path& base_dir);
};

struct TraceRecord {
    std::string market;
    int window_days = 0;
    ModelKind model = ModelKind::naive;
    HourStamp time;
    double actual = 0.0;
    double prediction = 0.0;
    double persistence = 0.0;  // same-hour previous-day actual, for FSI
};

enum class CellStatus { completed, skipped, failed };

struct CellOutcome {
    std::string market;
    int window_days = 0;
    ModelKind model = ModelKind::naive;
    YearMonth month;
    CellStatus status = CellStatus::completed;
    std::string reason;
    std::vector<TraceRecord> traces;
};

struct GridKey {
    std::string market;
    int window_days = 0;
    ModelKind model = ModelKind::naive;

    friend auto operator<=>(const GridKey&, const GridKey&) = default;
};

struct ExperimentResult {
    std::vector<std::string> market_order;
    std::vector<int> windows;
    std::vector<ModelKind> models;
    std::vector<CellOutcome> cells;  // grid order
    std::map<GridKey, MetricsReport> grid;
    std::vector<TraceRecord> traces;  // grid order, then time
};

// Executes every (market, window, model, month) cell on up to cfg.jobs
// threads. Output does not depend on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::vector<MarketData>& markets);

// Pooled metrics per (market, window, model); FSI against the persistence
// forecast of the same rows.
std::map<GridKey, MetricsReport> grid_metrics(const std::vector<TraceRecord>& traces);

std::string_view season_of(int month) noexcept;

struct SeasonalKey {
    std::string market;
    std::string season;
    int window_days = 0;
    ModelKind model = ModelKind::naive;

    friend auto operator<=>(const SeasonalKey&, const SeasonalKey&) = default;
};
struct SeasonalCell {
    double mae = 0.0;
    std::size_t hours = 0;
};
std::map<SeasonalKey, SeasonalCell> seasonal_breakdown(const std::vector<TraceRecord>& traces);

struct PeakValleyCell {
    double peak_mae = 0.0;
    double valley_mae = 0.0;
    std::size_t days = 0;
    std::size_t partial_days = 0;
};
std::map<GridKey, PeakValleyCell> peak_valley_analysis(const std::vector<TraceRecord>& traces);

// Writes results.csv, results_table.csv, traces.csv, aggregates.json and manifest.json.
void emit_report(const ExperimentResult& result, const ExperimentConfig& cfg, const std::filesystem::path& dir);

// Reads traces.csv back from a report directory.
std::vector<TraceRecord> read_traces(const std::filesystem::path& csv);
std::string format_results_csv(const std::map<GridKey, MetricsReport>& grid, const std::vector<std::string>& markets,
                               const std::vector<int>& windows, const std::vector<ModelKind>& models);

}  // namespace damf
