#pragma once

#include <map>
#include <optional>
#include <string>

#include "station_pulse/json_io.hpp"

namespace stationpulse {

/// Maps each cluster to the majority label among its annotated members
/// (annotations CSV: `station_id,label`). Ties become "ambiguous", clusters
/// with no annotated member "unlabeled". Unknown station ids are an error.
std::map<int, std::string> annotate_clusters(const ClusterModel& model,
                                             const std::vector<std::string>& station_ids,
                                             const std::string& annotations_path);

/// Writes report.json (stable key order, round-trip floats, so identical
/// inputs produce identical bytes) and the plot-ready CSV with one
/// `station_id,cluster,hour_index,normalized_value` row per station-hour.
void emit_report(const Dataset& ds, const ClusterRun& clusters,
                 const std::optional<SpatialRun>& moran,
                 const std::optional<std::map<int, std::string>>& annotations,
                 const std::string& out_json_path, const std::string& out_plot_path);

}  // namespace stationpulse
