#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "station_pulse/time_grid.hpp"

namespace stationpulse {

struct StationMeta {
    std::string station_id;
    std::string name;
    double lat = 0.0;
    double lon = 0.0;
    std::optional<double> storage_kg;

    bool operator==(const StationMeta&) const = default;
};

/// One station's hourly trace. `observed[i]` stays false for imputed points
/// so imputation density remains visible downstream.
struct StationSeries {
    StationMeta meta;
    std::vector<double> values;
    std::vector<std::uint8_t> observed;

    std::size_t observed_count() const;

    bool operator==(const StationSeries&) const = default;
};

struct Dataset {
    TimeGrid grid;
    std::vector<StationSeries> stations;
    /// "none" until preprocess runs; then the normalization method name.
    std::string normalization = "none";

    /// Index of station_id, or -1.
    std::ptrdiff_t index_of(std::string_view station_id) const;

    bool operator==(const Dataset&) const = default;
};

/// Checks all Dataset invariants (lengths, id uniqueness, coordinate ranges,
/// observed values finite and non-negative). Throws on violation.
void validate_dataset(const Dataset& ds);

void validate_coordinates(double lat, double lon, const std::string& context);

}  // namespace stationpulse
