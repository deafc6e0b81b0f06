#pragma once

#include <cstdint>

#include "damf/calendar.hpp"
#include "damf/dataset.hpp"
#include "damf/kv_config.hpp"

namespace damf {

// Parameters of the synthetic market. Price is a sum of daily, weekly and
// annual sinusoids, a weather-driven component shared with the RES forecast,
// a load-driven component shared with the load forecast, white noise, and
// sparse positive spikes.
struct SyntheticSpec {
    HourStamp start = make_hour(2023, 1, 1);
    double base_price = 100.0;
    double daily_amplitude = 25.0;
    int daily_peak_hour = 19;
    double weekly_amplitude = 8.0;
    double annual_amplitude = 20.0;
    double noise_sd = 4.0;
    double spike_rate = 0.005;  // per hour
    double spike_scale = 60.0;  // mean spike height

    // Slowly varying drivers (AR(1) per hour); zero sd disables them.
    double wind_sd = 1500.0;       // MW
    double wind_persistence = 0.985;
    double load_dev_sd = 400.0;    // MW
    double load_dev_persistence = 0.95;
    double price_per_wind_mw = 0.012;   // EUR/MWh per MW of wind deviation (negative effect)
    double price_per_load_mw = 0.010;   // EUR/MWh per MW of load deviation

    double load_base = 6000.0;
    double load_daily_amplitude = 1200.0;
    double solar_peak = 2500.0;
    double wind_base = 2000.0;
    double flow_sd = 150.0;
    double forecast_noise_sd = 50.0;  // MW, added to each published forecast

    static SyntheticSpec from_config(const KeyValueConfig& cfg);
};

// Closed-form seasonal part of the price (no drivers, noise or spikes).
double seasonal_price(const SyntheticSpec& spec, HourStamp t);

TimeSeriesFrame gen_synthetic(int days, const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace damf
