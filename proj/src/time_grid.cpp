#include "station_pulse/time_grid.hpp"

#include <array>
#include <charconv>

#include "station_pulse/error.hpp"

namespace stationpulse {

namespace {

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, unsigned& out) {
    unsigned value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        const char c = s[i];
        if (c < '0' || c > '9') return false;
        value = value * 10 + static_cast<unsigned>(c - '0');
    }
    out = value;
    return true;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

TimeGrid make_grid(std::int64_t start, std::size_t n_steps) {
    if (start % TimeGrid::step_seconds != 0)
        fail(ErrorCode::validation,
             "grid start " + format_time_utc(start) + " is not aligned to an hour boundary");
    if (n_steps < 2)
        fail(ErrorCode::validation, "grid needs at least 2 steps, got " + std::to_string(n_steps));
    return TimeGrid{start, n_steps};
}

std::int64_t parse_time_utc(std::string_view iso) {
    // YYYY-MM-DDTHH:MM:SSZ
    unsigned year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    const bool shape_ok =
        iso.size() == 20 && iso[4] == '-' && iso[7] == '-' && iso[10] == 'T' && iso[13] == ':' &&
        iso[16] == ':' && iso[19] == 'Z' && parse_fixed_uint(iso, 0, 4, year) &&
        parse_fixed_uint(iso, 5, 2, month) && parse_fixed_uint(iso, 8, 2, day) &&
        parse_fixed_uint(iso, 11, 2, hour) && parse_fixed_uint(iso, 14, 2, minute) &&
        parse_fixed_uint(iso, 17, 2, second);
    if (!shape_ok || month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
        second > 60)
        fail(ErrorCode::parse, "invalid UTC timestamp '" + std::string(iso) +
                                   "' (expected YYYY-MM-DDTHH:MM:SSZ)");
    const std::int64_t days = days_from_civil(static_cast<std::int64_t>(year), month, day);
    return days * 86400 + hour * 3600 + minute * 60 + second;
}

std::string format_time_utc(std::int64_t epoch_seconds) {
    const std::int64_t days = floor_div(epoch_seconds, 86400);
    std::int64_t secs = epoch_seconds - days * 86400;
    std::int64_t y = 0;
    unsigned m = 0, d = 0;
    civil_from_days(days, y, m, d);
    const unsigned hour = static_cast<unsigned>(secs / 3600);
    const unsigned minute = static_cast<unsigned>((secs / 60) % 60);
    const unsigned second = static_cast<unsigned>(secs % 60);
    char buf[21];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02u:%02u:%02uZ", static_cast<long long>(y),
                  m, d, hour, minute, second);
    return std::string(buf);
}

std::int64_t snap_to_hour(std::int64_t epoch_seconds) {
    return floor_div(epoch_seconds + 1800, 3600) * 3600;
}

}  // namespace stationpulse
