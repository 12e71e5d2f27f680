#pragma once

#include <string>
#include <vector>

#include "station_pulse/dataset.hpp"

namespace stationpulse {

enum class NormalizationMethod { min_max, storage_fraction, z_score };

const char* normalization_name(NormalizationMethod m);
NormalizationMethod normalization_from_name(const std::string& name);

/// Fills gaps: interior gaps get the straight line between the surrounding
/// observed values, edge gaps repeat the nearest observed value. Observed
/// values and the mask itself are untouched.
StationSeries impute_linear(const StationSeries& s);

/// Rescales a fully imputed series. storage_fraction divides by storage_kg
/// and falls back to min_max (with a warning) when storage is unknown;
/// min_max maps a constant series to all-0.5; z_score uses the population
/// standard deviation and rejects constant series.
StationSeries normalize(const StationSeries& s, NormalizationMethod method,
                        std::vector<std::string>* warnings = nullptr);

/// impute_linear + normalize over every station, order preserved. Errors are
/// annotated with the offending station_id.
Dataset preprocess_all(const Dataset& ds, NormalizationMethod method,
                       std::vector<std::string>* warnings = nullptr);

}  // namespace stationpulse
