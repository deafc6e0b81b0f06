#include "damf/calendar.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace damf {

namespace {

using namespace std::chrono;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

sys_days day_of(HourStamp t) {
    return sys_days{days{floor_div(t.hours, 24)}};
}

bool parse_int(std::string_view text, int& out) {
    if (text.empty()) {
        return false;
    }
    for (char c : text) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

HourStamp make_hour(int year, int month, int day, int hour) {
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                             std::chrono::day{static_cast<unsigned>(day)}};
    const sys_days d{ymd};
    return HourStamp{static_cast<std::int64_t>(d.time_since_epoch().count()) * 24 + hour};
}

CivilHour to_civil(HourStamp t) {
    const year_month_day ymd{day_of(t)};
    return CivilHour{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
                     static_cast<int>(static_cast<unsigned>(ymd.day())), hour_of_day(t)};
}

int hour_of_day(HourStamp t) {
    return static_cast<int>(t.hours - floor_div(t.hours, 24) * 24);
}

int day_of_week(HourStamp t) {
    return static_cast<int>(weekday{day_of(t)}.iso_encoding()) - 1;
}

YearMonth year_month_of(HourStamp t) {
    const CivilHour c = to_civil(t);
    return YearMonth{c.year, c.month};
}

int days_in_month(YearMonth ym) {
    const year_month_day_last last{std::chrono::year{ym.year},
                                   month_day_last{std::chrono::month{static_cast<unsigned>(ym.month)}}};
    return static_cast<int>(static_cast<unsigned>(last.day()));
}

HourStamp month_start(YearMonth ym) {
    return make_hour(ym.year, ym.month, 1, 0);
}

YearMonth next_month(YearMonth ym) {
    return ym.month == 12 ? YearMonth{ym.year + 1, 1} : YearMonth{ym.year, ym.month + 1};
}

bool parse_iso_hour(std::string_view text, HourStamp& out) {
    // 2023-01-01T00:00:00Z
    if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':' || text[16] != ':') {
        return false;
    }
    const std::string_view suffix = text.substr(19);
    if (suffix != "Z" && suffix != "+00:00") {
        return false;
    }
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) || !parse_int(text.substr(8, 2), d) ||
        !parse_int(text.substr(11, 2), h) || !parse_int(text.substr(14, 2), mi) || !parse_int(text.substr(17, 2), s)) {
        return false;
    }
    if (h > 23 || mi != 0 || s != 0) {
        return false;
    }
    const year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                             std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        return false;
    }
    out = make_hour(y, mo, d, h);
    return true;
}

std::string format_iso_hour(HourStamp t) {
    const CivilHour c = to_civil(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:00:00Z", c.year, c.month, c.day, c.hour);
    return buf;
}

bool parse_year_month(std::string_view text, YearMonth& out) {
    if (text.size() != 7 || text[4] != '-') {
        return false;
    }
    int y = 0, m = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) || m < 1 || m > 12) {
        return false;
    }
    out = YearMonth{y, m};
    return true;
}

std::string format_year_month(YearMonth ym) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", ym.year, ym.month);
    return buf;
}

}  // namespace damf
