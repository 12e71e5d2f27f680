#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace stationpulse {

/// Fixed hourly grid. `start` is epoch seconds, aligned to an exact hour.
struct TimeGrid {
    std::int64_t start = 0;
    std::size_t n_steps = 0;

    static constexpr std::int64_t step_seconds = 3600;

    std::int64_t time_at(std::size_t i) const {
        return start + static_cast<std::int64_t>(i) * step_seconds;
    }
    std::int64_t last() const { return time_at(n_steps - 1); }

    bool operator==(const TimeGrid&) const = default;
};

/// Validates hour alignment and n_steps >= 2.
TimeGrid make_grid(std::int64_t start, std::size_t n_steps);

/// Parses "YYYY-MM-DDTHH:MM:SSZ" to epoch seconds. Throws a parse error on
/// anything else.
std::int64_t parse_time_utc(std::string_view iso);

std::string format_time_utc(std::int64_t epoch_seconds);

/// Rounds to the nearest hour boundary; exactly half an hour rounds up.
std::int64_t snap_to_hour(std::int64_t epoch_seconds);

}  // namespace stationpulse
