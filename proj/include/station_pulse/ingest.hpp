#pragma once

#include <optional>
#include <string>
#include <vector>

#include "station_pulse/dataset.hpp"

namespace stationpulse {

/// Loads readings (`timestamp,station_id,capacity_kg`) against station
/// metadata (`station_id,name,lat,lon,storage_kg`). Station order follows the
/// metadata file and is the canonical index order downstream.
///
/// Timestamps snap to the nearest hour. Duplicate (station, hour) readings
/// keep the last row in file order. With no grid given, the minimal grid
/// spanning the snapped timestamps is used; with an explicit grid, readings
/// outside it are dropped with a warning.
Dataset load_readings(const std::string& readings_path, const std::string& meta_path,
                      const std::optional<TimeGrid>& grid = std::nullopt,
                      std::vector<std::string>* warnings = nullptr);

/// Removes the listed stations, preserving the order of the rest. Unknown
/// ids are appended to `unknown_ids` (when given) rather than failing.
Dataset exclude_stations(const Dataset& ds, const std::vector<std::string>& ids,
                         std::vector<std::string>* unknown_ids = nullptr);

/// Inverse of load_readings for observed points: one readings row per
/// observed (station, hour), plus the metadata table.
void write_dataset_csv(const Dataset& ds, const std::string& readings_path,
                       const std::string& meta_path);

}  // namespace stationpulse
