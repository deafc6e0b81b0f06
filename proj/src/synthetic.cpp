#include "damf/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "damf/error.hpp"

namespace damf {

namespace {

constexpr double kHoursPerYear = 8766.0;

}  // namespace

SyntheticSpec SyntheticSpec::from_config(const KeyValueConfig& cfg) {
    static const std::vector<std::string_view> known = {
        "start", "base_price", "daily_amplitude", "daily_peak_hour", "weekly_amplitude", "annual_amplitude",
        "noise_sd", "spike_rate", "spike_scale", "wind_sd", "wind_persistence", "load_dev_sd",
        "load_dev_persistence", "price_per_wind_mw", "price_per_load_mw", "load_base", "load_daily_amplitude",
        "solar_peak", "wind_base", "flow_sd", "forecast_noise_sd"};
    if (auto unknown = cfg.unknown_keys(known); !unknown.empty()) {
        throw Error(ErrorCode::BadConfig, cfg.origin() + ": unknown key '" + unknown.front() + "'");
    }
    SyntheticSpec s;
    if (auto start = cfg.get("start")) {
        HourStamp t;
        if (!parse_iso_hour(*start, t) && !parse_iso_hour(*start + "T00:00:00Z", t)) {
            throw Error(ErrorCode::BadConfig, cfg.origin() + ": bad start '" + *start + "'");
        }
        s.start = t;
    }
    s.base_price = cfg.get_double("base_price", s.base_price);
    s.daily_amplitude = cfg.get_double("daily_amplitude", s.daily_amplitude);
    s.daily_peak_hour = static_cast<int>(cfg.get_int("daily_peak_hour", s.daily_peak_hour));
    s.weekly_amplitude = cfg.get_double("weekly_amplitude", s.weekly_amplitude);
    s.annual_amplitude = cfg.get_double("annual_amplitude", s.annual_amplitude);
    s.noise_sd = cfg.get_double("noise_sd", s.noise_sd);
    s.spike_rate = cfg.get_double("spike_rate", s.spike_rate);
    s.spike_scale = cfg.get_double("spike_scale", s.spike_scale);
    s.wind_sd = cfg.get_double("wind_sd", s.wind_sd);
    s.wind_persistence = cfg.get_double("wind_persistence", s.wind_persistence);
    s.load_dev_sd = cfg.get_double("load_dev_sd", s.load_dev_sd);
    s.load_dev_persistence = cfg.get_double("load_dev_persistence", s.load_dev_persistence);
    s.price_per_wind_mw = cfg.get_double("price_per_wind_mw", s.price_per_wind_mw);
    s.price_per_load_mw = cfg.get_double("price_per_load_mw", s.price_per_load_mw);
    s.load_base = cfg.get_double("load_base", s.load_base);
    s.load_daily_amplitude = cfg.get_double("load_daily_amplitude", s.load_daily_amplitude);
    s.solar_peak = cfg.get_double("solar_peak", s.solar_peak);
    s.wind_base = cfg.get_double("wind_base", s.wind_base);
    s.flow_sd = cfg.get_double("flow_sd", s.flow_sd);
    s.forecast_noise_sd = cfg.get_double("forecast_noise_sd", s.forecast_noise_sd);
    if (s.spike_rate < 0.0 || s.spike_rate > 1.0 || s.noise_sd < 0.0 || s.wind_sd < 0.0 || s.load_dev_sd < 0.0 ||
        s.flow_sd < 0.0 || s.forecast_noise_sd < 0.0 || std::abs(s.wind_persistence) >= 1.0 ||
        std::abs(s.load_dev_persistence) >= 1.0) {
        throw Error(ErrorCode::BadConfig, cfg.origin() + ": parameter out of range");
    }
    return s;
}

double seasonal_price(const SyntheticSpec& spec, HourStamp t) {
    using std::numbers::pi;
    const double h = static_cast<double>(t.hours);
    // Peak at daily_peak_hour, trough twelve hours earlier.
    const double daily = spec.daily_amplitude * std::sin(2.0 * pi * (hour_of_day(t) - spec.daily_peak_hour + 6) / 24.0);
    const double weekly = spec.weekly_amplitude * std::sin(2.0 * pi * (day_of_week(t) * 24 + hour_of_day(t)) / 168.0);
    const double annual = spec.annual_amplitude * std::cos(2.0 * pi * h / kHoursPerYear);
    return spec.base_price + daily + weekly + annual;
}

TimeSeriesFrame gen_synthetic(int days, const SyntheticSpec& spec, std::uint64_t seed) {
    using std::numbers::pi;
    if (days < 1) {
        throw Error(ErrorCode::InvalidArgument, "days must be at least 1");
    }
    const auto n = static_cast<std::size_t>(days) * 24;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> spike_size(1.0);

    // AR(1) drivers scaled to the requested stationary standard deviation.
    const double wind_innov = spec.wind_sd * std::sqrt(1.0 - spec.wind_persistence * spec.wind_persistence);
    const double load_innov =
        spec.load_dev_sd * std::sqrt(1.0 - spec.load_dev_persistence * spec.load_dev_persistence);
    double wind_dev = spec.wind_sd * normal(rng);
    double load_dev = spec.load_dev_sd * normal(rng);

    std::vector<double> price(n), load(n), res(n), gen(n), flow(n);
    for (std::size_t i = 0; i < n; ++i) {
        const HourStamp t = spec.start + static_cast<std::int64_t>(i);
        const int hour = hour_of_day(t);
        if (i > 0) {
            wind_dev = spec.wind_persistence * wind_dev + wind_innov * normal(rng);
            load_dev = spec.load_dev_persistence * load_dev + load_innov * normal(rng);
        }
        const double noise = spec.noise_sd * normal(rng);
        const bool spike = unit(rng) < spec.spike_rate;
        const double spike_height = spike_size(rng);
        const double flow_dev = spec.flow_sd * normal(rng);
        const double fc_noise_load = spec.forecast_noise_sd * normal(rng);
        const double fc_noise_res = spec.forecast_noise_sd * normal(rng);
        const double fc_noise_gen = spec.forecast_noise_sd * normal(rng);

        double p = seasonal_price(spec, t);
        p += spec.price_per_load_mw * load_dev - spec.price_per_wind_mw * wind_dev;
        p += noise;
        if (spike) {
            p += spec.spike_scale * spike_height;
        }

        const double load_shape = std::sin(2.0 * pi * (hour - 13) / 24.0);
        const double solar = spec.solar_peak * std::max(0.0, std::sin(pi * (hour - 6) / 12.0));
        const double wind = std::max(0.0, spec.wind_base + wind_dev);
        const double load_mw = spec.load_base + spec.load_daily_amplitude * load_shape + load_dev;
        const double net_flow = 0.1 * (load_mw - spec.load_base) + flow_dev;

        price[i] = p;
        load[i] = load_mw + fc_noise_load;
        res[i] = solar + wind + fc_noise_res;
        gen[i] = load_mw - net_flow + fc_noise_gen;
        flow[i] = net_flow;
    }

    TimeSeriesFrame frame;
    frame.start = spec.start;
    frame.add_column("price_eur_mwh", std::move(price));
    frame.add_column("load_fc_mw", std::move(load));
    frame.add_column("res_fc_mw", std::move(res));
    frame.add_column("gen_fc_mw", std::move(gen));
    frame.add_column("netflow_fc_mw", std::move(flow));
    return frame;
}

}  // namespace damf
