#include "station_pulse/json_io.hpp"

#include <algorithm>
#include <fstream>

#include "station_pulse/error.hpp"

namespace stationpulse {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key, const std::string& context) {
    const auto it = j.find(key);
    if (it == j.end())
        fail(ErrorCode::parse, context + ": missing key '" + std::string(key) + "'");
    return *it;
}

}  // namespace

json dataset_to_json(const Dataset& ds) {
    json stations = json::array();
    for (const StationSeries& s : ds.stations) {
        json station{
            {"id", s.meta.station_id},
            {"name", s.meta.name},
            {"lat", s.meta.lat},
            {"lon", s.meta.lon},
            {"storage_kg", s.meta.storage_kg ? json(*s.meta.storage_kg) : json(nullptr)},
            {"values", s.values},
        };
        json observed = json::array();
        for (std::uint8_t o : s.observed) observed.push_back(o != 0);
        station["observed"] = std::move(observed);
        stations.push_back(std::move(station));
    }
    return json{
        {"format", "station-pulse.dataset/v1"},
        {"grid",
         {{"start", format_time_utc(ds.grid.start)},
          {"n_steps", ds.grid.n_steps},
          {"step_hours", 1}}},
        {"normalization", ds.normalization},
        {"stations", std::move(stations)},
    };
}

Dataset dataset_from_json(const json& j) {
    const std::string ctx = "dataset json";
    if (require(j, "format", ctx).get<std::string>() != "station-pulse.dataset/v1")
        fail(ErrorCode::parse, ctx + ": unsupported format tag");
    const json& grid = require(j, "grid", ctx);
    Dataset ds;
    ds.grid = make_grid(parse_time_utc(require(grid, "start", ctx).get<std::string>()),
                        require(grid, "n_steps", ctx).get<std::size_t>());
    ds.normalization = require(j, "normalization", ctx).get<std::string>();
    for (const json& station : require(j, "stations", ctx)) {
        StationSeries s;
        s.meta.station_id = require(station, "id", ctx).get<std::string>();
        s.meta.name = require(station, "name", ctx).get<std::string>();
        s.meta.lat = require(station, "lat", ctx).get<double>();
        s.meta.lon = require(station, "lon", ctx).get<double>();
        const json& storage = require(station, "storage_kg", ctx);
        if (!storage.is_null()) s.meta.storage_kg = storage.get<double>();
        s.values = require(station, "values", ctx).get<std::vector<double>>();
        for (const json& o : require(station, "observed", ctx))
            s.observed.push_back(o.get<bool>() ? 1 : 0);
        ds.stations.push_back(std::move(s));
    }
    validate_dataset(ds);
    return ds;
}

json cluster_run_to_json(const ClusterRun& run) {
    const ClusterModel& m = run.model;
    json assignments = json::object();
    json per_station = json::object();
    for (std::size_t i = 0; i < run.station_ids.size(); ++i) {
        assignments[run.station_ids[i]] = m.assignments[i];
        per_station[run.station_ids[i]] = run.silhouette.per_station[i];
    }
    json score_table = json::array();
    for (const auto& [k, score] : run.score_table)
        score_table.push_back(json{{"k", k}, {"mean_silhouette", score}});
    json medoids = json::array();
    for (int idx : m.medoid_indices)
        medoids.push_back(run.station_ids[static_cast<std::size_t>(idx)]);
    return json{
        {"format", "station-pulse.clusters/v1"},
        {"k", m.k},
        {"seed", m.seed},
        {"metric", metric_name(m.metric)},
        {"algo", algo_name(m.algo)},
        {"station_ids", run.station_ids},
        {"assignments", std::move(assignments)},
        {"silhouette",
         {{"mean", run.silhouette.mean},
          {"k", run.silhouette.k},
          {"per_station", std::move(per_station)}}},
        {"score_table", std::move(score_table)},
        {"centroids", m.centroids},
        {"medoid_ids", std::move(medoids)},
        {"inertia", m.inertia},
        {"n_iterations", m.n_iterations},
        {"objective_history", m.objective_history},
    };
}

ClusterRun cluster_run_from_json(const json& j) {
    const std::string ctx = "clusters json";
    if (require(j, "format", ctx).get<std::string>() != "station-pulse.clusters/v1")
        fail(ErrorCode::parse, ctx + ": unsupported format tag");
    ClusterRun run;
    run.station_ids = require(j, "station_ids", ctx).get<std::vector<std::string>>();
    ClusterModel& m = run.model;
    m.k = require(j, "k", ctx).get<int>();
    m.seed = require(j, "seed", ctx).get<std::uint64_t>();
    m.metric = metric_from_name(require(j, "metric", ctx).get<std::string>());
    m.algo = algo_from_name(require(j, "algo", ctx).get<std::string>());
    m.inertia = require(j, "inertia", ctx).get<double>();
    m.n_iterations = require(j, "n_iterations", ctx).get<int>();
    m.objective_history = require(j, "objective_history", ctx).get<std::vector<double>>();
    m.centroids = require(j, "centroids", ctx).get<std::vector<std::vector<double>>>();
    const json& assignments = require(j, "assignments", ctx);
    const json& per_station = require(j, "silhouette", ctx);
    for (const std::string& id : run.station_ids) {
        if (!assignments.contains(id))
            fail(ErrorCode::consistency, ctx + ": station '" + id + "' missing from assignments");
        m.assignments.push_back(assignments[id].get<int>());
        run.silhouette.per_station.push_back(
            require(per_station, "per_station", ctx)[id].get<double>());
    }
    run.silhouette.mean = require(per_station, "mean", ctx).get<double>();
    run.silhouette.k = require(per_station, "k", ctx).get<int>();
    for (const json& row : require(j, "score_table", ctx))
        run.score_table.emplace_back(require(row, "k", ctx).get<int>(),
                                     require(row, "mean_silhouette", ctx).get<double>());
    for (const json& id : require(j, "medoid_ids", ctx)) {
        const auto it =
            std::find(run.station_ids.begin(), run.station_ids.end(), id.get<std::string>());
        if (it == run.station_ids.end())
            fail(ErrorCode::consistency, ctx + ": unknown medoid id");
        m.medoid_indices.push_back(static_cast<int>(it - run.station_ids.begin()));
    }
    return run;
}

namespace {

json moran_result_to_json(const MoranResult& r, const TimeGrid* grid) {
    json out{
        {"i_observed", r.i_observed},
        {"e_i", r.e_i},
        {"p_value", r.p_value},
        {"n_permutations", r.n_permutations},
        {"perm_mean", r.perm_mean},
        {"perm_sd", r.perm_sd},
    };
    if (r.timestamp == MoranResult::npos) {
        out["snapshot"] = "mean_utilization";
    } else {
        out["snapshot"] = r.timestamp;
        if (grid) out["timestamp"] = format_time_utc(grid->time_at(r.timestamp));
    }
    return out;
}

MoranResult moran_result_from_json(const json& j) {
    MoranResult r;
    const std::string ctx = "moran json";
    const json& snapshot = require(j, "snapshot", ctx);
    r.timestamp = snapshot.is_string() ? MoranResult::npos : snapshot.get<std::size_t>();
    r.i_observed = require(j, "i_observed", ctx).get<double>();
    r.e_i = require(j, "e_i", ctx).get<double>();
    r.p_value = require(j, "p_value", ctx).get<double>();
    r.n_permutations = require(j, "n_permutations", ctx).get<int>();
    r.perm_mean = require(j, "perm_mean", ctx).get<double>();
    r.perm_sd = require(j, "perm_sd", ctx).get<double>();
    return r;
}

}  // namespace

json spatial_run_to_json(const SpatialRun& run, const TimeGrid* grid) {
    json results = json::array();
    for (const MoranResult& r : run.scan.results) results.push_back(moran_result_to_json(r, grid));
    return json{
        {"format", "station-pulse.moran/v1"},
        {"scheme", weight_scheme_name(run.scheme)},
        {"knn_k", run.scheme == WeightScheme::knn ? json(run.knn_k) : json(nullptr)},
        {"row_standardized", run.row_standardized},
        {"n_permutations", run.n_permutations},
        {"seed", run.seed},
        {"results", std::move(results)},
        {"skipped_snapshots", run.scan.skipped},
        {"summary",
         run.scan.summary ? moran_result_to_json(*run.scan.summary, grid) : json(nullptr)},
    };
}

SpatialRun spatial_run_from_json(const json& j) {
    const std::string ctx = "moran json";
    if (require(j, "format", ctx).get<std::string>() != "station-pulse.moran/v1")
        fail(ErrorCode::parse, ctx + ": unsupported format tag");
    SpatialRun run;
    const std::string scheme = require(j, "scheme", ctx).get<std::string>();
    if (scheme == "inverse_distance") run.scheme = WeightScheme::inverse_distance;
    else if (scheme == "knn") run.scheme = WeightScheme::knn;
    else fail(ErrorCode::parse, ctx + ": unknown scheme '" + scheme + "'");
    const json& knn_k = require(j, "knn_k", ctx);
    run.knn_k = knn_k.is_null() ? 0 : knn_k.get<int>();
    run.row_standardized = require(j, "row_standardized", ctx).get<bool>();
    run.n_permutations = require(j, "n_permutations", ctx).get<int>();
    run.seed = require(j, "seed", ctx).get<std::uint64_t>();
    for (const json& r : require(j, "results", ctx))
        run.scan.results.push_back(moran_result_from_json(r));
    run.scan.skipped = require(j, "skipped_snapshots", ctx).get<std::vector<std::size_t>>();
    const json& summary = require(j, "summary", ctx);
    if (!summary.is_null()) run.scan.summary = moran_result_from_json(summary);
    return run;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::parse, path + ": " + e.what());
    }
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out.flush()) fail(ErrorCode::io, "write failed for '" + path + "'");
}

}  // namespace stationpulse
