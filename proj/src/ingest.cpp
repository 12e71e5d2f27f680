#include "station_pulse/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "station_pulse/csv.hpp"
#include "station_pulse/error.hpp"

namespace stationpulse {

namespace {

std::string at_line(const CsvReader& reader) {
    return reader.path() + ":" + std::to_string(reader.line_number());
}

void expect_header(CsvReader& reader, const std::vector<std::string>& expected) {
    std::vector<std::string> fields;
    if (!reader.next_row(fields))
        fail(ErrorCode::empty_input, reader.path() + " is empty");
    if (fields != expected) {
        std::string want;
        for (const auto& f : expected) want += (want.empty() ? "" : ",") + f;
        fail(ErrorCode::parse, at_line(reader) + ": expected header '" + want + "'");
    }
}

std::vector<StationMeta> load_meta(const std::string& meta_path) {
    CsvReader reader(meta_path);
    expect_header(reader, {"station_id", "name", "lat", "lon", "storage_kg"});
    std::vector<StationMeta> metas;
    std::unordered_set<std::string> seen;
    std::vector<std::string> fields;
    while (reader.next_row(fields)) {
        if (fields.size() != 5)
            fail(ErrorCode::parse, at_line(reader) + ": expected 5 fields, got " +
                                       std::to_string(fields.size()));
        StationMeta meta;
        meta.station_id = fields[0];
        meta.name = fields[1];
        if (meta.station_id.empty())
            fail(ErrorCode::validation, at_line(reader) + ": empty station_id");
        if (!seen.insert(meta.station_id).second)
            fail(ErrorCode::validation,
                 at_line(reader) + ": duplicate station_id '" + meta.station_id + "'");
        if (!parse_double(fields[2], meta.lat) || !parse_double(fields[3], meta.lon))
            fail(ErrorCode::parse, at_line(reader) + ": malformed coordinates");
        validate_coordinates(meta.lat, meta.lon, at_line(reader));
        if (!fields[4].empty()) {
            double storage = 0.0;
            if (!parse_double(fields[4], storage))
                fail(ErrorCode::parse, at_line(reader) + ": malformed storage_kg '" + fields[4] + "'");
            if (!(std::isfinite(storage) && storage > 0.0))
                fail(ErrorCode::validation, at_line(reader) + ": storage_kg must be positive");
            meta.storage_kg = storage;
        }
        metas.push_back(std::move(meta));
    }
    if (metas.empty()) fail(ErrorCode::empty_input, meta_path + " has no stations");
    return metas;
}

struct RawReading {
    std::int64_t snapped;
    std::size_t station;
    double value;
};

}  // namespace

Dataset load_readings(const std::string& readings_path, const std::string& meta_path,
                      const std::optional<TimeGrid>& grid,
                      std::vector<std::string>* warnings) {
    const std::vector<StationMeta> metas = load_meta(meta_path);
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < metas.size(); ++i) index[metas[i].station_id] = i;

    CsvReader reader(readings_path);
    expect_header(reader, {"timestamp", "station_id", "capacity_kg"});

    std::vector<RawReading> readings;
    std::vector<std::string> fields;
    std::int64_t min_ts = std::numeric_limits<std::int64_t>::max();
    std::int64_t max_ts = std::numeric_limits<std::int64_t>::min();
    while (reader.next_row(fields)) {
        if (fields.size() != 3)
            fail(ErrorCode::parse, at_line(reader) + ": expected 3 fields, got " +
                                       std::to_string(fields.size()));
        std::int64_t ts = 0;
        try {
            ts = parse_time_utc(fields[0]);
        } catch (const Error& e) {
            fail(ErrorCode::parse, at_line(reader) + ": " + e.what());
        }
        const auto it = index.find(fields[1]);
        if (it == index.end())
            fail(ErrorCode::referential,
                 at_line(reader) + ": reading references unknown station '" + fields[1] + "'");
        double value = 0.0;
        if (!parse_double(fields[2], value))
            fail(ErrorCode::parse, at_line(reader) + ": malformed capacity_kg '" + fields[2] + "'");
        if (!std::isfinite(value))
            fail(ErrorCode::validation, at_line(reader) + ": capacity_kg is not finite");
        if (value < 0.0)
            fail(ErrorCode::validation, at_line(reader) + ": capacity_kg is negative");
        const std::int64_t snapped = snap_to_hour(ts);
        min_ts = std::min(min_ts, snapped);
        max_ts = std::max(max_ts, snapped);
        readings.push_back({snapped, it->second, value});
    }
    if (readings.empty()) fail(ErrorCode::empty_input, readings_path + " has no readings");

    TimeGrid g;
    if (grid) {
        g = make_grid(grid->start, grid->n_steps);
    } else {
        const std::size_t n =
            static_cast<std::size_t>((max_ts - min_ts) / TimeGrid::step_seconds) + 1;
        g = make_grid(min_ts, n);
    }

    Dataset ds;
    ds.grid = g;
    ds.stations.reserve(metas.size());
    for (const StationMeta& meta : metas) {
        StationSeries s;
        s.meta = meta;
        s.values.assign(g.n_steps, 0.0);
        s.observed.assign(g.n_steps, 0);
        ds.stations.push_back(std::move(s));
    }

    // Replay in file order so the last row wins for duplicate (station, hour).
    std::size_t dropped = 0;
    for (const RawReading& r : readings) {
        if (r.snapped < g.start || r.snapped > g.last()) {
            ++dropped;
            continue;
        }
        const std::size_t step =
            static_cast<std::size_t>((r.snapped - g.start) / TimeGrid::step_seconds);
        ds.stations[r.station].values[step] = r.value;
        ds.stations[r.station].observed[step] = 1;
    }
    if (dropped > 0 && warnings)
        warnings->push_back(std::to_string(dropped) + " reading(s) outside the requested grid");

    validate_dataset(ds);
    return ds;
}

Dataset exclude_stations(const Dataset& ds, const std::vector<std::string>& ids,
                         std::vector<std::string>* unknown_ids) {
    std::unordered_set<std::string> to_drop;
    for (const std::string& id : ids) {
        if (ds.index_of(id) < 0) {
            if (unknown_ids) unknown_ids->push_back(id);
        } else {
            to_drop.insert(id);
        }
    }
    Dataset out;
    out.grid = ds.grid;
    out.normalization = ds.normalization;
    for (const StationSeries& s : ds.stations)
        if (!to_drop.contains(s.meta.station_id)) out.stations.push_back(s);
    if (out.stations.empty())
        fail(ErrorCode::empty_input, "excluding all " + std::to_string(ds.stations.size()) +
                                         " stations leaves an empty dataset");
    return out;
}

void write_dataset_csv(const Dataset& ds, const std::string& readings_path,
                       const std::string& meta_path) {
    std::ofstream meta(meta_path);
    if (!meta) fail(ErrorCode::io, "cannot write '" + meta_path + "'");
    meta << "station_id,name,lat,lon,storage_kg\n";
    for (const StationSeries& s : ds.stations) {
        meta << csv_escape(s.meta.station_id) << ',' << csv_escape(s.meta.name) << ','
             << format_double(s.meta.lat) << ',' << format_double(s.meta.lon) << ','
             << (s.meta.storage_kg ? format_double(*s.meta.storage_kg) : "") << '\n';
    }
    if (!meta.flush()) fail(ErrorCode::io, "write failed for '" + meta_path + "'");

    std::ofstream readings(readings_path);
    if (!readings) fail(ErrorCode::io, "cannot write '" + readings_path + "'");
    readings << "timestamp,station_id,capacity_kg\n";
    for (const StationSeries& s : ds.stations) {
        for (std::size_t i = 0; i < ds.grid.n_steps; ++i) {
            if (!s.observed[i]) continue;
            readings << format_time_utc(ds.grid.time_at(i)) << ','
                     << csv_escape(s.meta.station_id) << ',' << format_double(s.values[i]) << '\n';
        }
    }
    if (!readings.flush()) fail(ErrorCode::io, "write failed for '" + readings_path + "'");
}

}  // namespace stationpulse
