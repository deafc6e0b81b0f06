#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace damf {

// Hour-aligned UTC instant, counted in whole hours since 1970-01-01T00:00Z.
struct HourStamp {
    std::int64_t hours = 0;

    friend auto operator<=>(const HourStamp&, const HourStamp&) = default;

    HourStamp operator+(std::int64_t h) const { return HourStamp{hours + h}; }
    HourStamp operator-(std::int64_t h) const { return HourStamp{hours - h}; }
    std::int64_t operator-(HourStamp other) const { return hours - other.hours; }
};

struct YearMonth {
    int year = 1970;
    int month = 1;  // 1..12

    friend auto operator<=>(const YearMonth&, const YearMonth&) = default;
};

struct CivilHour {
    int year;
    int month;
    int day;
    int hour;
};

HourStamp make_hour(int year, int month, int day, int hour = 0);
CivilHour to_civil(HourStamp t);

int hour_of_day(HourStamp t);
// ISO weekday, Monday = 0 ... Sunday = 6.
int day_of_week(HourStamp t);
YearMonth year_month_of(HourStamp t);

int days_in_month(YearMonth ym);
HourStamp month_start(YearMonth ym);
YearMonth next_month(YearMonth ym);

// Accepts "YYYY-MM-DDTHH:MM:SSZ" (also "+00:00" suffix); minutes and seconds
// must be zero. Returns false on any malformed or out-of-range field.
bool parse_iso_hour(std::string_view text, HourStamp& out);
std::string format_iso_hour(HourStamp t);

// "YYYY-MM"
bool parse_year_month(std::string_view text, YearMonth& out);
std::string format_year_month(YearMonth ym);

}  // namespace damf
