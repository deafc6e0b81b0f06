#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "damf/bench.hpp"
#include "damf/error.hpp"
#include "damf/kv_config.hpp"
#include "damf/metrics.hpp"
#include "damf/model_io.hpp"
#include "damf/numfmt.hpp"
#include "damf/synthetic.hpp"

namespace {

using namespace damf;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

struct Globals {
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
    bool quiet = false;
};

void say(const Globals& g, const std::string& line) {
    if (!g.quiet) {
        std::cout << line << '\n';
    }
}

struct SynthArgs {
    int days = 0;
    std::string out;
    std::string spec;
};

int cmd_synth(const SynthArgs& a, const Globals& g) {
    SyntheticSpec spec;
    if (!a.spec.empty()) {
        spec = SyntheticSpec::from_config(KeyValueConfig::load(a.spec));
    }
    const TimeSeriesFrame frame = gen_synthetic(a.days, spec, g.seed.value_or(42));
    write_csv(frame, a.out);
    say(g, "wrote " + std::to_string(frame.length()) + " hours to " + a.out);
    return kExitOk;
}

int cmd_ingest_check(const std::string& data, const Globals& g) {
    const TimeSeriesFrame frame = ingest_csv(data);
    say(g, "hours " + std::to_string(frame.length()) + " from " + format_iso_hour(frame.start) + " to " +
               format_iso_hour(frame.time_at(frame.length() == 0 ? 0 : frame.length() - 1)));
    for (std::size_t c = 0; c < frame.width(); ++c) {
        std::size_t missing = 0;
        for (auto m : frame.missing[c]) {
            missing += m;
        }
        say(g, frame.names[c] + " missing " + std::to_string(missing));
    }
    const TimeSeriesFrame filled = interpolate_missing(frame);
    const SupervisedDataset ds = shift_timesteps(filled);
    say(g, "supervised rows " + std::to_string(ds.size()) + ", features " + std::to_string(ds.X.cols()));
    return kExitOk;
}

struct TrainArgs {
    std::string data;
    std::string model;
    int window = 0;
    std::string month;
    std::string out;
    std::string config;
};

int cmd_train(const TrainArgs& a, const Globals& g) {
    ModelKind kind;
    if (!parse_model_kind(a.model, kind)) {
        std::cerr << "unknown model '" << a.model << "'; valid models: " << model_names() << '\n';
        return kExitUsage;
    }
    if (!is_valid_window(a.window)) {
        std::cerr << "window must be one of 7, 14, 30, 45, 60, 90\n";
        return kExitUsage;
    }
    YearMonth month;
    if (!parse_year_month(a.month, month)) {
        std::cerr << "month must be YYYY-MM\n";
        return kExitUsage;
    }
    ModelSettings settings;
    if (!a.config.empty()) {
        settings = ExperimentConfig::from_file(a.config).settings;
    }
    const MarketData market = MarketData::load("data", a.data);
    const PreparedSplit split = prepare_split(market.dataset, a.window, month);
    const std::uint64_t seed = g.seed.value_or(42);
    const ModelFile mf = fit_model(kind, split, settings, seed);
    write_model(mf, a.out);
    const std::vector<double> fitted = predict_model(mf, split.raw.train, market.frame);
    say(g, "train_mae " + format_sig6(mae(fitted, split.raw.train.y)) + " rows " +
               std::to_string(split.raw.train.size()) + " model " + a.out);
    return kExitOk;
}

struct EvaluateArgs {
    std::string data;
    std::string model_file;
    std::string predictions;
};

int cmd_evaluate(const EvaluateArgs& a, const Globals& g) {
    const ModelFile mf = read_model(a.model_file);
    const MarketData market = MarketData::load("data", a.data);
    const WindowSplit split = split_monthly(market.dataset, mf.window_days, mf.month);
    const std::vector<double> pred = predict_model(mf, split.test, market.frame);
    const std::vector<double> naive = naive_persistence(market.frame, split.test.row_times);
    const double pr = rmse(naive, split.test.y);
    const MetricsReport m = compute_metrics(pred, split.test.y, pr > 0.0 ? std::optional<double>(pr) : std::nullopt);
    say(g, "model " + mf.model_name + " window " + std::to_string(mf.window_days) + " month " +
               format_year_month(mf.month) + " hours " + std::to_string(m.n_hours));
    say(g, "mae " + format_sig6(m.mae) + " mape " + format_sig6(m.mape) + " rmse " + format_sig6(m.rmse) + " r2 " +
               format_sig6(m.r2) + " fsi " + (m.fsi ? format_sig6(*m.fsi) : std::string("NA")));
    if (!a.predictions.empty()) {
        std::string csv = "timestamp,actual,prediction\n";
        for (std::size_t i = 0; i < pred.size(); ++i) {
            csv += format_iso_hour(split.test.row_times[i]) + "," + format_exact(split.test.y[i]) + "," +
                   format_exact(pred[i]) + "\n";
        }
        FILE* f = std::fopen(a.predictions.c_str(), "wb");
        if (!f || std::fwrite(csv.data(), 1, csv.size(), f) != csv.size()) {
            if (f) std::fclose(f);
            throw Error(ErrorCode::OutputUnwritable, "cannot write " + a.predictions);
        }
        std::fclose(f);
    }
    return kExitOk;
}

struct BenchmarkArgs {
    std::string config;
    std::string output;
};

int cmd_benchmark(const BenchmarkArgs& a, const Globals& g, bool jobs_given) {
    ExperimentConfig cfg = ExperimentConfig::from_file(a.config);
    if (g.seed) {
        cfg.seed = *g.seed;
    }
    if (jobs_given) {
        cfg.jobs = g.jobs;
    }
    std::filesystem::path out = a.output;
    if (out.empty()) {
        const KeyValueConfig kv = KeyValueConfig::load(a.config);
        const auto o = kv.get("output");
        if (!o) {
            throw Error(ErrorCode::BadConfig, "no output directory: pass --output or set 'output' in the config");
        }
        out = *o;
        if (out.is_relative()) {
            out = std::filesystem::path(a.config).parent_path() / out;
        }
    }
    const ExperimentResult result = run_experiment(cfg);
    emit_report(result, cfg, out);
    std::size_t done = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
    for (const CellOutcome& c : result.cells) {
        done += c.status == CellStatus::completed;
        skipped += c.status == CellStatus::skipped;
        failed += c.status == CellStatus::failed;
    }
    say(g, "cells completed " + std::to_string(done) + " skipped " + std::to_string(skipped) + " failed " +
               std::to_string(failed) + "; report in " + out.string());
    return kExitOk;
}

int cmd_report(const std::string& dir, bool check, const Globals& g) {
    const std::filesystem::path d = dir;
    const std::vector<TraceRecord> traces = read_traces(d / "traces.csv");
    const auto grid = grid_metrics(traces);
    std::vector<std::string> markets;
    std::vector<int> windows;
    std::vector<ModelKind> models;
    for (const auto& [k, m] : grid) {
        if (std::find(markets.begin(), markets.end(), k.market) == markets.end()) markets.push_back(k.market);
        if (std::find(windows.begin(), windows.end(), k.window_days) == windows.end()) windows.push_back(k.window_days);
    }
    std::sort(windows.begin(), windows.end());
    for (ModelKind m : kAllModels) {
        for (const auto& [k, r] : grid) {
            if (k.model == m) {
                models.push_back(m);
                break;
            }
        }
    }
    const std::string recomputed = format_results_csv(grid, markets, windows, models);
    if (!check) {
        std::cout << recomputed;
        return kExitOk;
    }
    std::ifstream in(d / "results.csv", std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::FileUnreadable, "cannot read " + (d / "results.csv").string());
    }
    std::string line;
    std::size_t compared = 0;
    std::size_t mismatched = 0;
    std::map<std::string, std::string> expected;
    {
        std::istringstream rs(recomputed);
        std::getline(rs, line);
        while (std::getline(rs, line)) {
            const std::size_t cut = line.rfind(',');
            expected[line.substr(0, cut)] = line.substr(cut + 1);
        }
    }
    std::getline(in, line);
    while (std::getline(in, line)) {
        const std::size_t cut = line.rfind(',');
        const std::string key = line.substr(0, cut);
        const auto emitted = parse_double(line.substr(cut + 1));
        const auto it = expected.find(key);
        ++compared;
        if (!emitted || it == expected.end() || std::abs(*parse_double(it->second) - *emitted) > 1e-9) {
            ++mismatched;
            std::cerr << "mismatch: " << line << '\n';
        }
    }
    say(g, "compared " + std::to_string(compared) + " values, mismatched " + std::to_string(mismatched));
    return mismatched == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Day-ahead electricity price forecasting benchmark"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    std::uint64_t seed_value = 42;
    auto* seed_opt = app.add_option("--seed", seed_value, "Seed for every random choice (default 42)");
    auto* jobs_opt = app.add_option("--jobs", g.jobs, "Worker threads for benchmark cells")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", g.quiet, "Suppress summary output");

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Write a synthetic market CSV");
    c_synth->add_option("--days", synth.days, "Number of days")->required()->check(CLI::Range(1, 100000));
    c_synth->add_option("--out", synth.out, "Output CSV path")->required();
    c_synth->add_option("--spec", synth.spec, "Key-value file overriding the synthetic market parameters");

    std::string ingest_data;
    auto* c_ingest = app.add_subcommand("ingest-check", "Validate a market CSV and summarize gaps");
    c_ingest->add_option("--data", ingest_data, "Market CSV")->required();

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "Fit one model on one monthly split and save it");
    c_train->add_option("--data", train.data, "Market CSV")->required();
    c_train->add_option("--model", train.model, "Model name: " + model_names())->required();
    c_train->add_option("--window", train.window, "Look-back window in days (7, 14, 30, 45, 60, 90)")->required();
    c_train->add_option("--month", train.month, "Test month, YYYY-MM")->required();
    c_train->add_option("--out", train.out, "Model file to write")->required();
    c_train->add_option("--config", train.config, "Benchmark config whose model overrides to apply");

    EvaluateArgs eval;
    auto* c_eval = app.add_subcommand("evaluate", "Score a saved model on its test split");
    c_eval->add_option("--data", eval.data, "Market CSV")->required();
    c_eval->add_option("--model-file", eval.model_file, "Model file from train")->required();
    c_eval->add_option("--predictions", eval.predictions, "Optional CSV of test predictions");

    BenchmarkArgs bench;
    auto* c_bench = app.add_subcommand("benchmark", "Run the market x window x model x month grid");
    c_bench->add_option("--config", bench.config, "Benchmark config file")->required();
    c_bench->add_option("--output", bench.output, "Report directory (overrides the config's output key)");

    std::string report_dir;
    bool report_check = false;
    auto* c_report = app.add_subcommand("report", "Recompute grid metrics from a report's traces");
    c_report->add_option("--dir", report_dir, "Report directory")->required();
    c_report->add_flag("--check", report_check, "Compare against results.csv; exit 3 on any mismatch");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (seed_opt->count() > 0) {
        g.seed = seed_value;
    }

    try {
        if (*c_synth) return cmd_synth(synth, g);
        if (*c_ingest) return cmd_ingest_check(ingest_data, g);
        if (*c_train) return cmd_train(train, g);
        if (*c_eval) return cmd_evaluate(eval, g);
        if (*c_bench) return cmd_benchmark(bench, g, jobs_opt->count() > 0);
        if (*c_report) return cmd_report(report_dir, report_check, g);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_data_error(e.code()) ? kExitData : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
