#include "damf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "damf/error.hpp"
#include "damf/kv_config.hpp"
#include "damf/numfmt.hpp"

namespace damf {

std::string_view to_string(ModelKind m) noexcept {
    switch (m) {
    case ModelKind::naive: return "naive";
    case ModelKind::lstm_ffec: return "lstm_ffec";
    case ModelKind::levelwise_exact: return "levelwise_exact";
    case ModelKind::leafwise_histogram: return "leafwise_histogram";
    case ModelKind::oblivious_ordered: return "oblivious_ordered";
    }
    return "unknown";
}

bool parse_model_kind(std::string_view text, ModelKind& out) {
    for (ModelKind m : kAllModels) {
        if (text == to_string(m)) {
            out = m;
            return true;
        }
    }
    return false;
}

std::string model_names() {
    std::string s;
    for (ModelKind m : kAllModels) {
        if (!s.empty()) {
            s += ", ";
        }
        s += to_string(m);
    }
    return s;
}

namespace {

bool to_variant(ModelKind m, Variant& v) {
    switch (m) {
    case ModelKind::levelwise_exact: v = Variant::levelwise_exact; return true;
    case ModelKind::leafwise_histogram: v = Variant::leafwise_histogram; return true;
    case ModelKind::oblivious_ordered: v = Variant::oblivious_ordered; return true;
    default: return false;
    }
}

}  // namespace

ModelSettings::ModelSettings() {
    for (Variant v : {Variant::levelwise_exact, Variant::leafwise_histogram, Variant::oblivious_ordered}) {
        boost[v] = preset_config(v);
    }
}

MarketData MarketData::from_frame(std::string name, const TimeSeriesFrame& raw) {
    MarketData m;
    m.name = std::move(name);
    m.frame = interpolate_missing(raw);
    m.dataset = shift_timesteps(m.frame, kDefaultLagDepth);
    return m;
}

MarketData MarketData::load(std::string name, const std::filesystem::path& csv) {
    return from_frame(std::move(name), ingest_csv(csv));
}

namespace {

SupervisedDataset scaled_copy(const SupervisedDataset& ds, const ScalerParams& fs, const ScalerParams& ts) {
    SupervisedDataset out = ds;
    out.X = apply_scaler(fs, ds.X);
    out.y = apply_scaler(ts, ds.y);
    return out;
}

}  // namespace

PreparedSplit prepare_split(const SupervisedDataset& ds, int window_days, YearMonth month) {
    PreparedSplit p;
    p.raw = split_monthly(ds, window_days, month);
    p.feature_scaler = fit_scaler(p.raw.train.X, {}, p.raw.train.categorical_slots);
    p.target_scaler = fit_scaler(p.raw.train.y);
    p.train = scaled_copy(p.raw.train, p.feature_scaler, p.target_scaler);
    p.test = scaled_copy(p.raw.test, p.feature_scaler, p.target_scaler);
    return p;
}

ModelFile fit_model(ModelKind kind, const PreparedSplit& split, const ModelSettings& settings, std::uint64_t seed) {
    ModelFile mf;
    mf.model_name = std::string(to_string(kind));
    mf.window_days = split.raw.window_days;
    mf.month = split.raw.month;
    mf.lag_depth = split.raw.train.lag_depth;
    mf.feature_names = split.raw.train.feature_names;
    mf.categorical_slots = split.raw.train.categorical_slots;
    mf.feature_scaler = split.feature_scaler;
    mf.target_scaler = split.target_scaler;
    Variant v;
    if (kind == ModelKind::lstm_ffec) {
        TrainConfig cfg = settings.lstm;
        cfg.seed = seed;
        mf.body = train_lstm_ffec(split.train, cfg);
    } else if (to_variant(kind, v)) {
        BoostConfig cfg = settings.boost.at(v);
        cfg.seed = seed;
        const auto learner = make_learner(v, settings.learners);
        mf.body = boost_fit(split.train, *learner, cfg).ensemble;
    }
    return mf;
}

std::vector<double> predict_model(const ModelFile& model, const SupervisedDataset& raw, const TimeSeriesFrame& frame) {
    if (std::holds_alternative<std::monostate>(model.body)) {
        return naive_persistence(frame, raw.row_times);
    }
    if (raw.X.cols() != model.feature_names.size() || raw.lag_depth != model.lag_depth) {
        throw Error(ErrorCode::FeatureCountMismatch, "dataset layout differs from the model's training layout");
    }
    SupervisedDataset scaled = raw;
    scaled.X = apply_scaler(model.feature_scaler, raw.X);
    std::vector<double> pred;
    if (const auto* e = std::get_if<Ensemble>(&model.body)) {
        pred = ensemble_predict(*e, scaled.X);
    } else {
        pred = lstm_ffec_predict(std::get<LstmFfecModel>(model.body), scaled);
    }
    return invert_scaler(model.target_scaler, pred);
}

std::uint64_t cell_seed(std::uint64_t run_seed, std::string_view market, int window_days, ModelKind model,
                        YearMonth month) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix_bytes = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        h ^= 0xff;
        h *= 1099511628211ULL;
    };
    mix_bytes(market);
    mix_bytes(std::to_string(window_days));
    mix_bytes(to_string(model));
    mix_bytes(format_year_month(month));
    std::uint64_t z = run_seed ^ h;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::BadConfig, what); }

double config_double(const std::string& key, const std::string& value) {
    const auto v = parse_double(value);
    if (!v) {
        config_error(key + ": not a number: '" + value + "'");
    }
    return *v;
}

long long config_int(const std::string& key, const std::string& value) {
    const double v = config_double(key, value);
    if (v != std::floor(v) || std::abs(v) > 1e15) {
        config_error(key + ": not an integer: '" + value + "'");
    }
    return static_cast<long long>(v);
}

void apply_boost_override(BoostConfig& cfg, const std::string& key, const std::string& param,
                          const std::string& value) {
    if (param == "learning_rate") cfg.learning_rate = config_double(key, value);
    else if (param == "n_trees") cfg.n_trees = static_cast<int>(config_int(key, value));
    else if (param == "lambda") cfg.lambda = config_double(key, value);
    else if (param == "gamma") cfg.gamma = config_double(key, value);
    else if (param == "max_depth") cfg.max_depth = static_cast<int>(config_int(key, value));
    else if (param == "subsample") cfg.subsample = config_double(key, value);
    else if (param == "colsample_bytree") cfg.colsample_bytree = config_double(key, value);
    else if (param == "min_child_weight") cfg.min_child_weight = config_double(key, value);
    else if (param == "loss") {
        if (!parse_loss(value, cfg.loss)) config_error(key + ": unknown loss '" + value + "'");
    } else {
        config_error("unknown key '" + key + "'");
    }
}

void apply_override(ModelSettings& s, const std::string& key, const std::string& value) {
    const std::size_t dot = key.find('.');
    const std::string scope = key.substr(0, dot);
    const std::string param = key.substr(dot + 1);
    ModelKind kind;
    if (!parse_model_kind(scope, kind) || kind == ModelKind::naive) {
        config_error("unknown key '" + key + "'");
    }
    if (kind == ModelKind::lstm_ffec) {
        TrainConfig& t = s.lstm;
        if (param == "units") t.units = static_cast<std::size_t>(config_int(key, value));
        else if (param == "dropout") t.dropout = config_double(key, value);
        else if (param == "learning_rate") t.lstm_learning_rate = config_double(key, value);
        else if (param == "ffec_learning_rate") t.ffec_learning_rate = config_double(key, value);
        else if (param == "epochs") t.lstm_epochs = t.ffec_epochs = static_cast<int>(config_int(key, value));
        else if (param == "lstm_epochs") t.lstm_epochs = static_cast<int>(config_int(key, value));
        else if (param == "ffec_epochs") t.ffec_epochs = static_cast<int>(config_int(key, value));
        else if (param == "batch") t.batch = static_cast<std::size_t>(config_int(key, value));
        else if (param == "ffec_layer1") t.ffec_layer1 = static_cast<std::size_t>(config_int(key, value));
        else if (param == "ffec_layer2") t.ffec_layer2 = static_cast<std::size_t>(config_int(key, value));
        else config_error("unknown key '" + key + "'");
        return;
    }
    Variant v{};
    to_variant(kind, v);
    if (kind == ModelKind::leafwise_histogram) {
        LeafwiseOptions& o = s.learners.leafwise;
        if (param == "max_leaves") { o.max_leaves = static_cast<std::size_t>(config_int(key, value)); return; }
        if (param == "min_samples_leaf") { o.min_samples_leaf = static_cast<std::size_t>(config_int(key, value)); return; }
        if (param == "min_child_weight") { o.min_child_weight = config_double(key, value); return; }
        if (param == "max_bins") { o.max_bins = static_cast<std::size_t>(config_int(key, value)); return; }
        if (param == "goss_top") { o.goss_top = config_double(key, value); return; }
        if (param == "goss_other") { o.goss_other = config_double(key, value); return; }
        if (param == "bundle_features") { o.bundle_features = config_int(key, value) != 0; return; }
    }
    if (kind == ModelKind::oblivious_ordered) {
        ObliviousOptions& o = s.learners.oblivious;
        if (param == "prior") { o.prior = config_double(key, value); return; }
        if (param == "prior_strength") { o.prior_strength = config_double(key, value); return; }
        if (param == "schedule") {
            if (value == "exponential") o.schedule = PrefixSchedule::exponential;
            else if (value == "stride1") o.schedule = PrefixSchedule::stride1;
            else config_error(key + ": expected exponential or stride1");
            return;
        }
    }
    apply_boost_override(s.boost[v], key, param, value);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_text(std::string_view text, const std::filesystem::path& base_dir) {
    const KeyValueConfig kv = KeyValueConfig::parse(text);
    ExperimentConfig cfg;
    std::set<std::string> market_names;
    for (const auto& [key, value] : kv.entries()) {
        if (key != "output" && key != "jobs") {
            cfg.echo.emplace_back(key, value);
        }
        if (key == "market") {
            const std::size_t colon = value.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == value.size()) {
                config_error("market: expected name:path, got '" + value + "'");
            }
            const std::string name = value.substr(0, colon);
            if (!market_names.insert(name).second) {
                config_error("market '" + name + "' listed twice");
            }
            std::filesystem::path p = value.substr(colon + 1);
            if (p.is_relative()) {
                p = base_dir / p;
            }
            cfg.markets.emplace_back(name, p);
        } else if (key == "window") {
            const auto w = static_cast<int>(config_int(key, value));
            if (!is_valid_window(w)) {
                config_error("window must be one of 7, 14, 30, 45, 60, 90; got " + value);
            }
            cfg.windows.push_back(w);
        } else if (key == "model") {
            ModelKind m;
            if (!parse_model_kind(value, m)) {
                config_error("unknown model '" + value + "' (valid: " + model_names() + ")");
            }
            cfg.models.push_back(m);
        } else if (key == "month") {
            YearMonth ym;
            if (!parse_year_month(value, ym)) {
                config_error("month: expected YYYY-MM, got '" + value + "'");
            }
            cfg.months.push_back(ym);
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(config_int(key, value));
        } else if (key == "jobs") {
            const long long j = config_int(key, value);
            if (j < 1) {
                config_error("jobs must be >= 1");
            }
            cfg.jobs = static_cast<std::size_t>(j);
        } else if (key == "output") {
            // Read by the command line front end.
        } else if (key.find('.') != std::string::npos) {
            apply_override(cfg.settings, key, value);
        } else {
            config_error("unknown key '" + key + "'");
        }
    }
    if (cfg.markets.empty()) config_error("no market listed");
    if (cfg.windows.empty()) config_error("no window listed");
    if (cfg.models.empty()) config_error("no model listed");
    std::sort(cfg.windows.begin(), cfg.windows.end());
    cfg.windows.erase(std::unique(cfg.windows.begin(), cfg.windows.end()), cfg.windows.end());
    std::vector<ModelKind> ordered;
    for (ModelKind m : kAllModels) {
        if (std::find(cfg.models.begin(), cfg.models.end(), m) != cfg.models.end()) {
            ordered.push_back(m);
        }
    }
    cfg.models = ordered;
    std::sort(cfg.months.begin(), cfg.months.end());
    cfg.months.erase(std::unique(cfg.months.begin(), cfg.months.end()), cfg.months.end());
    for (const auto& [v, b] : cfg.settings.boost) {
        try {
            b.validate();
        } catch (const Error& e) {
            config_error(std::string(to_string(v)) + ": " + e.what());
        }
    }
    try {
        cfg.settings.lstm.validate();
    } catch (const Error& e) {
        config_error(std::string("lstm_ffec: ") + e.what());
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::FileUnreadable, "cannot read config " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str(), path.parent_path());
}

namespace {

std::vector<YearMonth> months_of(const TimeSeriesFrame& frame) {
    std::vector<YearMonth> out;
    if (frame.length() == 0) {
        return out;
    }
    YearMonth ym = year_month_of(frame.start);
    const YearMonth last = year_month_of(frame.time_at(frame.length() - 1));
    while (ym <= last) {
        out.push_back(ym);
        ym = next_month(ym);
    }
    return out;
}

CellOutcome run_cell(const MarketData& market, int window, ModelKind model, YearMonth month,
                     const ExperimentConfig& cfg) {
    CellOutcome c;
    c.market = market.name;
    c.window_days = window;
    c.model = model;
    c.month = month;
    PreparedSplit split;
    try {
        split = prepare_split(market.dataset, window, month);
    } catch (const Error& e) {
        c.status = e.code() == ErrorCode::InsufficientHistory || e.code() == ErrorCode::MonthNotCovered
                       ? CellStatus::skipped
                       : CellStatus::failed;
        c.reason = e.what();
        return c;
    }
    try {
        const std::vector<double> persistence = naive_persistence(market.frame, split.raw.test.row_times);
        const ModelFile mf = fit_model(model, split, cfg.settings, cell_seed(cfg.seed, market.name, window, model, month));
        const std::vector<double> pred = predict_model(mf, split.raw.test, market.frame);
        c.traces.reserve(pred.size());
        for (std::size_t i = 0; i < pred.size(); ++i) {
            TraceRecord t;
            t.market = market.name;
            t.window_days = window;
            t.model = model;
            t.time = split.raw.test.row_times[i];
            // Traces are the data of record: metrics use the values as printed.
            t.actual = round_sig6(split.raw.test.y[i]);
            t.prediction = round_sig6(pred[i]);
            t.persistence = round_sig6(persistence[i]);
            if (!std::isfinite(t.prediction)) {
                throw Error(ErrorCode::LearnerFailure, "non-finite prediction at " + format_iso_hour(t.time));
            }
            c.traces.push_back(t);
        }
    } catch (const std::exception& e) {
        c.status = CellStatus::failed;
        c.reason = e.what();
        c.traces.clear();
    }
    return c;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::vector<MarketData>& markets) {
    struct Task {
        std::size_t market;
        int window;
        ModelKind model;
        YearMonth month;
    };
    std::vector<Task> tasks;
    ExperimentResult result;
    result.windows = cfg.windows;
    result.models = cfg.models;
    for (std::size_t m = 0; m < markets.size(); ++m) {
        result.market_order.push_back(markets[m].name);
        const std::vector<YearMonth> months = cfg.months.empty() ? months_of(markets[m].frame) : cfg.months;
        for (int w : cfg.windows) {
            for (ModelKind model : cfg.models) {
                for (YearMonth ym : months) {
                    tasks.push_back(Task{m, w, model, ym});
                }
            }
        }
    }
    result.cells.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) {
            const Task& t = tasks[k];
            result.cells[k] = run_cell(markets[t.market], t.window, t.model, t.month, cfg);
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, tasks.size()));
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }

    std::size_t completed = 0;
    for (const CellOutcome& c : result.cells) {
        if (c.status == CellStatus::completed) {
            ++completed;
            result.traces.insert(result.traces.end(), c.traces.begin(), c.traces.end());
        }
    }
    if (completed == 0) {
        throw Error(ErrorCode::NoFeasibleCells, "no (market, window, model, month) cell completed");
    }
    result.grid = grid_metrics(result.traces);
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    std::vector<MarketData> markets;
    markets.reserve(cfg.markets.size());
    for (const auto& [name, path] : cfg.markets) {
        markets.push_back(MarketData::load(name, path));
    }
    return run_experiment(cfg, markets);
}

std::map<GridKey, MetricsReport> grid_metrics(const std::vector<TraceRecord>& traces) {
    struct Pool {
        std::vector<double> pred, actual, persistence;
    };
    std::map<GridKey, Pool> pools;
    for (const TraceRecord& t : traces) {
        Pool& p = pools[GridKey{t.market, t.window_days, t.model}];
        p.pred.push_back(t.prediction);
        p.actual.push_back(t.actual);
        p.persistence.push_back(t.persistence);
    }
    std::map<GridKey, MetricsReport> grid;
    for (const auto& [key, p] : pools) {
        std::optional<double> pr;
        if (std::all_of(p.persistence.begin(), p.persistence.end(), [](double v) { return std::isfinite(v); })) {
            pr = rmse(p.persistence, p.actual);
            if (!(*pr > 0.0)) {
                pr.reset();
            }
        }
        MetricsReport m;
        try {
            m = compute_metrics(p.pred, p.actual, pr);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ConstantActualsForR2) {
                throw;
            }
            m.n_hours = p.pred.size();
            m.mae = mae(p.pred, p.actual);
            m.rmse = rmse(p.pred, p.actual);
            m.r2 = std::numeric_limits<double>::quiet_NaN();
            if (pr) {
                m.fsi = fsi(m.rmse, *pr);
            }
        }
        grid[key] = m;
    }
    return grid;
}

std::string_view season_of(int month) noexcept {
    switch (month) {
    case 12: case 1: case 2: return "winter";
    case 3: case 4: case 5: return "spring";
    case 6: case 7: case 8: return "summer";
    default: return "fall";
    }
}

std::map<SeasonalKey, SeasonalCell> seasonal_breakdown(const std::vector<TraceRecord>& traces) {
    std::map<SeasonalKey, SeasonalCell> out;
    for (const TraceRecord& t : traces) {
        SeasonalCell& c = out[SeasonalKey{t.market, std::string(season_of(to_civil(t.time).month)), t.window_days,
                                          t.model}];
        c.mae += std::abs(t.prediction - t.actual);
        c.hours += 1;
    }
    for (auto& [k, c] : out) {
        c.mae /= static_cast<double>(c.hours);
    }
    return out;
}

std::map<GridKey, PeakValleyCell> peak_valley_analysis(const std::vector<TraceRecord>& traces) {
    // (key, day) -> the day's records by hour
    std::map<std::pair<GridKey, std::int64_t>, std::vector<const TraceRecord*>> days;
    for (const TraceRecord& t : traces) {
        const std::int64_t day = (t.time.hours - hour_of_day(t.time)) / 24;
        days[{GridKey{t.market, t.window_days, t.model}, day}].push_back(&t);
    }
    std::map<GridKey, PeakValleyCell> out;
    for (auto& [kd, recs] : days) {
        PeakValleyCell& c = out[kd.first];
        std::sort(recs.begin(), recs.end(), [](const TraceRecord* a, const TraceRecord* b) { return a->time < b->time; });
        bool full = recs.size() == 24;
        for (std::size_t h = 0; full && h < recs.size(); ++h) {
            full = hour_of_day(recs[h]->time) == static_cast<int>(h);
        }
        if (!full) {
            ++c.partial_days;
            continue;
        }
        std::size_t peak = 0;
        std::size_t valley = 0;
        for (std::size_t h = 1; h < 24; ++h) {
            if (recs[h]->actual > recs[peak]->actual) peak = h;
            if (recs[h]->actual < recs[valley]->actual) valley = h;
        }
        c.peak_mae += std::abs(recs[peak]->prediction - recs[peak]->actual);
        c.valley_mae += std::abs(recs[valley]->prediction - recs[valley]->actual);
        ++c.days;
    }
    for (auto& [k, c] : out) {
        if (c.days > 0) {
            c.peak_mae /= static_cast<double>(c.days);
            c.valley_mae /= static_cast<double>(c.days);
        }
    }
    return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::OutputUnwritable, "cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::OutputUnwritable, "write failed for " + path.string());
    }
}

struct MetricField {
    const char* name;
    std::optional<double> (*get)(const MetricsReport&);
};

const MetricField kMetricFields[] = {
    {"mae", [](const MetricsReport& m) -> std::optional<double> { return m.mae; }},
    {"mape", [](const MetricsReport& m) -> std::optional<double> { return m.mape; }},
    {"rmse", [](const MetricsReport& m) -> std::optional<double> { return m.rmse; }},
    {"r2", [](const MetricsReport& m) -> std::optional<double> {
         return std::isfinite(m.r2) ? std::optional<double>(m.r2) : std::nullopt;
     }},
    {"fsi", [](const MetricsReport& m) -> std::optional<double> { return m.fsi; }},
    {"n_hours", [](const MetricsReport& m) -> std::optional<double> { return static_cast<double>(m.n_hours); }},
    {"n_mape_excluded",
     [](const MetricsReport& m) -> std::optional<double> { return static_cast<double>(m.n_mape_excluded); }},
};

std::string format_table_csv(const std::map<GridKey, MetricsReport>& grid, const std::vector<std::string>& markets,
                             const std::vector<int>& windows, const std::vector<ModelKind>& models) {
    std::string s = "window_days,metric";
    for (const auto& market : markets) {
        for (ModelKind m : models) {
            s += "," + market + "/" + std::string(to_string(m));
        }
    }
    s += "\n";
    for (int w : windows) {
        for (const MetricField& f : kMetricFields) {
            s += std::to_string(w) + "," + f.name;
            for (const auto& market : markets) {
                for (ModelKind m : models) {
                    s += ",";
                    const auto it = grid.find(GridKey{market, w, m});
                    if (it != grid.end()) {
                        if (const auto v = f.get(it->second)) {
                            s += format_sig6(*v);
                        }
                    }
                }
            }
            s += "\n";
        }
    }
    return s;
}

double json_number(double v) { return round_sig6(v); }

}  // namespace

std::string format_results_csv(const std::map<GridKey, MetricsReport>& grid, const std::vector<std::string>& markets,
                               const std::vector<int>& windows, const std::vector<ModelKind>& models) {
    std::string s = "market,window_days,model,metric,value\n";
    for (const auto& market : markets) {
        for (int w : windows) {
            for (ModelKind m : models) {
                const auto it = grid.find(GridKey{market, w, m});
                if (it == grid.end()) {
                    continue;
                }
                for (const MetricField& f : kMetricFields) {
                    if (const auto v = f.get(it->second)) {
                        s += market + "," + std::to_string(w) + "," + std::string(to_string(m)) + "," + f.name + "," +
                             format_sig6(*v) + "\n";
                    }
                }
            }
        }
    }
    return s;
}

void emit_report(const ExperimentResult& result, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::OutputUnwritable, "cannot create " + dir.string() + ": " + ec.message());
    }
    write_text(dir / "results.csv", format_results_csv(result.grid, result.market_order, result.windows, result.models));
    write_text(dir / "results_table.csv",
               format_table_csv(result.grid, result.market_order, result.windows, result.models));

    std::string traces = "market,window_days,model,timestamp,actual,prediction\n";
    for (const TraceRecord& t : result.traces) {
        traces += t.market + "," + std::to_string(t.window_days) + "," + std::string(to_string(t.model)) + "," +
                  format_iso_hour(t.time) + "," + format_sig6(t.actual) + "," + format_sig6(t.prediction) + "\n";
    }
    write_text(dir / "traces.csv", traces);

    using nlohmann::ordered_json;
    ordered_json agg;
    agg["aggregation"] = "pooled test hours";
    ordered_json seasonal = ordered_json::array();
    for (const auto& [k, c] : seasonal_breakdown(result.traces)) {
        seasonal.push_back({{"market", k.market},
                            {"season", k.season},
                            {"window_days", k.window_days},
                            {"model", std::string(to_string(k.model))},
                            {"mae", json_number(c.mae)},
                            {"hours", c.hours}});
    }
    agg["seasonal"] = seasonal;
    ordered_json peaks = ordered_json::array();
    for (const auto& [k, c] : peak_valley_analysis(result.traces)) {
        peaks.push_back({{"market", k.market},
                         {"window_days", k.window_days},
                         {"model", std::string(to_string(k.model))},
                         {"peak_mae", json_number(c.peak_mae)},
                         {"valley_mae", json_number(c.valley_mae)},
                         {"days", c.days},
                         {"partial_days", c.partial_days}});
    }
    agg["peak_valley"] = peaks;
    write_text(dir / "aggregates.json", agg.dump(2) + "\n");

    ordered_json manifest;
    manifest["format_version"] = kModelFormatVersion;
    manifest["seed"] = cfg.seed;
    manifest["aggregation"] = "metrics pool every test hour of a (market, window, model) across months";
    manifest["persistence"] = "same hour of the previous day";
    manifest["rounding"] = "values written with 6 significant digits; metrics computed from the written values";
    ordered_json echo = ordered_json::array();
    for (const auto& [k, v] : cfg.echo) {
        echo.push_back({{"key", k}, {"value", v}});
    }
    manifest["config"] = echo;
    std::size_t completed = 0;
    ordered_json skipped = ordered_json::array();
    ordered_json failed = ordered_json::array();
    for (const CellOutcome& c : result.cells) {
        if (c.status == CellStatus::completed) {
            ++completed;
            continue;
        }
        ordered_json e = {{"market", c.market},
                          {"window_days", c.window_days},
                          {"model", std::string(to_string(c.model))},
                          {"month", format_year_month(c.month)},
                          {"reason", c.reason}};
        (c.status == CellStatus::skipped ? skipped : failed).push_back(e);
    }
    manifest["cells_total"] = result.cells.size();
    manifest["cells_completed"] = completed;
    manifest["skipped"] = skipped;
    manifest["failed"] = failed;
    manifest["seasonal_rows"] = agg["seasonal"].size();
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<TraceRecord> read_traces(const std::filesystem::path& csv) {
    std::ifstream in(csv, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::FileUnreadable, "cannot read " + csv.string());
    }
    std::string line;
    std::getline(in, line);
    if (line != "market,window_days,model,timestamp,actual,prediction") {
        throw Error(ErrorCode::BadValue, csv.string() + ": unexpected header");
    }
    std::vector<TraceRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        auto fail = [&] { throw Error(ErrorCode::BadValue, csv.string() + ": line " + std::to_string(line_no)); };
        if (f.size() != 6) fail();
        TraceRecord t;
        t.market = f[0];
        const auto w = parse_double(f[1]);
        const auto a = parse_double(f[4]);
        const auto p = parse_double(f[5]);
        if (!w || !a || !p || !parse_iso_hour(f[3], t.time) || !parse_model_kind(f[2], t.model)) fail();
        t.window_days = static_cast<int>(*w);
        t.actual = *a;
        t.prediction = *p;
        t.persistence = std::numeric_limits<double>::quiet_NaN();
        out.push_back(t);
    }
    // Persistence comes from the naive rows of the same (market, window, hour).
    std::map<std::tuple<std::string, int, std::int64_t>, double> naive;
    for (const TraceRecord& t : out) {
        if (t.model == ModelKind::naive) {
            naive[{t.market, t.window_days, t.time.hours}] = t.prediction;
        }
    }
    for (TraceRecord& t : out) {
        const auto it = naive.find({t.market, t.window_days, t.time.hours});
        if (it != naive.end()) {
            t.persistence = it->second;
        }
    }
    return out;
}

}  // namespace damf
