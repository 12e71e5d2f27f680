#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "station_pulse/cluster.hpp"
#include "station_pulse/dataset.hpp"
#include "station_pulse/spatial.hpp"

namespace stationpulse {

inline constexpr const char* kToolName = "station-pulse";
inline constexpr const char* kToolVersion = "0.1.0";

/// Serialization unit for clusters.json: the fitted model plus the
/// silhouette evaluation, the k-selection score table (single entry when k
/// was fixed) and the station order the fit ran on.
struct ClusterRun {
    ClusterModel model;
    SilhouetteReport silhouette;
    std::vector<std::pair<int, double>> score_table;
    std::vector<std::string> station_ids;
};

/// Serialization unit for moran.json.
struct SpatialRun {
    WeightScheme scheme = WeightScheme::inverse_distance;
    int knn_k = 0;
    bool row_standardized = true;
    int n_permutations = 0;
    std::uint64_t seed = 0;
    MoranScan scan;
};

nlohmann::json dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const nlohmann::json& j);

nlohmann::json cluster_run_to_json(const ClusterRun& run);
ClusterRun cluster_run_from_json(const nlohmann::json& j);

/// `grid` supplies ISO timestamps for the snapshot indices; pass nullptr to
/// omit them.
nlohmann::json spatial_run_to_json(const SpatialRun& run, const TimeGrid* grid);
SpatialRun spatial_run_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const nlohmann::json& j, const std::string& path);

}  // namespace stationpulse
