#include "station_pulse/report.hpp"

#include <fstream>
#include <unordered_map>

#include "station_pulse/csv.hpp"
#include "station_pulse/error.hpp"

namespace stationpulse {

std::map<int, std::string> annotate_clusters(const ClusterModel& model,
                                             const std::vector<std::string>& station_ids,
                                             const std::string& annotations_path) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < station_ids.size(); ++i) index[station_ids[i]] = i;

    CsvReader reader(annotations_path);
    std::vector<std::string> fields;
    if (!reader.next_row(fields) || fields != std::vector<std::string>{"station_id", "label"})
        fail(ErrorCode::parse, annotations_path + ": expected header 'station_id,label'");

    // Last annotation wins when a station appears twice.
    std::unordered_map<std::size_t, std::string> station_label;
    while (reader.next_row(fields)) {
        if (fields.size() != 2)
            fail(ErrorCode::parse, annotations_path + ":" +
                                       std::to_string(reader.line_number()) +
                                       ": expected 2 fields");
        const auto it = index.find(fields[0]);
        if (it == index.end())
            fail(ErrorCode::referential, annotations_path + ":" +
                                             std::to_string(reader.line_number()) +
                                             ": unknown station '" + fields[0] + "'");
        station_label[it->second] = fields[1];
    }

    std::map<int, std::string> out;
    for (int c = 0; c < model.k; ++c) {
        std::map<std::string, int> votes;
        for (std::size_t i = 0; i < model.assignments.size(); ++i) {
            if (model.assignments[i] != c) continue;
            const auto it = station_label.find(i);
            if (it != station_label.end()) ++votes[it->second];
        }
        if (votes.empty()) {
            out[c] = "unlabeled";
            continue;
        }
        int best = 0;
        int best_count = 0;
        std::string best_label;
        for (const auto& [label, count] : votes) {
            if (count > best) {
                best = count;
                best_count = 1;
                best_label = label;
            } else if (count == best) {
                ++best_count;
            }
        }
        out[c] = best_count == 1 ? best_label : "ambiguous";
    }
    return out;
}

void emit_report(const Dataset& ds, const ClusterRun& clusters,
                 const std::optional<SpatialRun>& moran,
                 const std::optional<std::map<int, std::string>>& annotations,
                 const std::string& out_json_path, const std::string& out_plot_path) {
    // The cluster run must cover exactly the dataset's stations, in order.
    if (clusters.station_ids.size() != ds.stations.size())
        fail(ErrorCode::consistency,
             "cluster run covers " + std::to_string(clusters.station_ids.size()) +
                 " stations but the dataset has " + std::to_string(ds.stations.size()));
    for (std::size_t i = 0; i < ds.stations.size(); ++i)
        if (ds.stations[i].meta.station_id != clusters.station_ids[i])
            fail(ErrorCode::consistency, "station order mismatch at index " + std::to_string(i) +
                                             ": dataset has '" +
                                             ds.stations[i].meta.station_id +
                                             "', cluster run has '" + clusters.station_ids[i] +
                                             "'");
    if (annotations)
        for (const auto& [cluster, label] : *annotations)
            if (cluster < 0 || cluster >= clusters.model.k)
                fail(ErrorCode::consistency,
                     "annotation references cluster " + std::to_string(cluster) +
                         " outside [0, " + std::to_string(clusters.model.k) + ")");

    nlohmann::json imputed = nlohmann::json::object();
    for (const StationSeries& s : ds.stations) {
        const double missing =
            static_cast<double>(s.values.size() - s.observed_count()) /
            static_cast<double>(s.values.size());
        imputed[s.meta.station_id] = missing;
    }

    nlohmann::json cluster_sizes = nlohmann::json::object();
    for (int c = 0; c < clusters.model.k; ++c) {
        std::size_t size = 0;
        for (int a : clusters.model.assignments) size += (a == c);
        cluster_sizes[std::to_string(c)] = size;
    }

    nlohmann::json report{
        {"format", "station-pulse.report/v1"},
        {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
        {"dataset",
         {{"station_count", ds.stations.size()},
          {"n_steps", ds.grid.n_steps},
          {"start", format_time_utc(ds.grid.start)},
          {"end", format_time_utc(ds.grid.last())},
          {"normalization", ds.normalization},
          {"imputed_fraction", std::move(imputed)}}},
        {"clustering", cluster_run_to_json(clusters)},
        {"cluster_sizes", std::move(cluster_sizes)},
        {"spatial", moran ? spatial_run_to_json(*moran, &ds.grid) : nlohmann::json(nullptr)},
    };
    if (annotations) {
        nlohmann::json ann = nlohmann::json::object();
        for (const auto& [cluster, label] : *annotations) ann[std::to_string(cluster)] = label;
        report["cluster_labels"] = std::move(ann);
    } else {
        report["cluster_labels"] = nullptr;
    }
    write_json_file(report, out_json_path);

    std::ofstream plot(out_plot_path);
    if (!plot) fail(ErrorCode::io, "cannot write '" + out_plot_path + "'");
    plot << "station_id,cluster,hour_index,normalized_value\n";
    for (std::size_t i = 0; i < ds.stations.size(); ++i) {
        const StationSeries& s = ds.stations[i];
        const int cluster = clusters.model.assignments[i];
        for (std::size_t t = 0; t < s.values.size(); ++t)
            plot << csv_escape(s.meta.station_id) << ',' << cluster << ',' << t << ','
                 << format_double(s.values[t]) << '\n';
    }
    if (!plot.flush()) fail(ErrorCode::io, "write failed for '" + out_plot_path + "'");
}

}  // namespace stationpulse
