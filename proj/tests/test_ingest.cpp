#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "station_pulse/ingest.hpp"
#include "station_pulse/json_io.hpp"
#include "test_support.hpp"

using namespace stationpulse;
using namespace test_support;

namespace {

const char* kMetaThree =
    "station_id,name,lat,lon,storage_kg\n"
    "ANAHEIM,Anaheim,33.84,-117.91,180\n"
    "CAMPBELL,Campbell,37.28,-121.94,\n"
    "LAKE_FOREST,Lake Forest,33.64,-117.69,350\n";

std::string hourly_rows(const std::string& id, std::int64_t start, std::size_t hours,
                        double base) {
    std::string out;
    for (std::size_t i = 0; i < hours; ++i) {
        out += format_time_utc(start + static_cast<std::int64_t>(i) * 3600) + "," + id + "," +
               std::to_string(base + static_cast<double>(i % 24)) + "\n";
    }
    return out;
}

}  // namespace

TEST_CASE("time parsing and snapping") {
    CHECK(parse_time_utc("2018-10-01T00:00:00Z") == 1538352000);
    CHECK(format_time_utc(1538352000) == "2018-10-01T00:00:00Z");
    CHECK(thrown_code([] { parse_time_utc("2018-10-01 00:00:00"); }) == ErrorCode::parse);
    CHECK(thrown_code([] { parse_time_utc("2018-13-01T00:00:00Z"); }) == ErrorCode::parse);

    // within half an hour of a boundary snaps to it; exactly 30 min rounds up
    CHECK(snap_to_hour(parse_time_utc("2018-10-01T00:29:59Z")) ==
          parse_time_utc("2018-10-01T00:00:00Z"));
    CHECK(snap_to_hour(parse_time_utc("2018-10-01T00:30:00Z")) ==
          parse_time_utc("2018-10-01T01:00:00Z"));
    CHECK(snap_to_hour(parse_time_utc("2018-10-01T23:42:00Z")) ==
          parse_time_utc("2018-10-02T00:00:00Z"));
}

TEST_CASE("full three-month load: all observed") {
    TempDir dir("ingest_full");
    const std::int64_t start = parse_time_utc("2018-10-01T00:00:00Z");
    std::string readings = "timestamp,station_id,capacity_kg\n";
    readings += hourly_rows("ANAHEIM", start, 2208, 10.0);
    readings += hourly_rows("CAMPBELL", start, 2208, 20.0);
    readings += hourly_rows("LAKE_FOREST", start, 2208, 30.0);
    write_file(dir.file("readings.csv"), readings);
    write_file(dir.file("meta.csv"), kMetaThree);

    const Dataset ds = load_readings(dir.file("readings.csv"), dir.file("meta.csv"));
    CHECK(ds.grid.n_steps == 2208);
    CHECK(ds.grid.start == start);
    CHECK(ds.stations.size() == 3);
    // canonical order follows the metadata file
    CHECK(ds.stations[0].meta.station_id == "ANAHEIM");
    CHECK(ds.stations[1].meta.station_id == "CAMPBELL");
    CHECK(!ds.stations[1].meta.storage_kg.has_value());
    for (const StationSeries& s : ds.stations) CHECK(s.observed_count() == 2208);
}

TEST_CASE("gap mask and duplicate policy") {
    TempDir dir("ingest_gaps");
    write_file(dir.file("meta.csv"),
               "station_id,name,lat,lon,storage_kg\nS1,One,34.0,-118.0,100\n");
    write_file(dir.file("readings.csv"),
               "timestamp,station_id,capacity_kg\n"
               "2018-10-01T00:00:00Z,S1,5\n"
               "2018-10-01T02:00:00Z,S1,10\n"
               "2018-10-01T02:10:00Z,S1,12\n");  // same snapped hour: last row wins

    const TimeGrid grid = make_grid(parse_time_utc("2018-10-01T00:00:00Z"), 3);
    const Dataset ds = load_readings(dir.file("readings.csv"), dir.file("meta.csv"), grid);
    CHECK(ds.stations[0].observed == std::vector<std::uint8_t>{1, 0, 1});
    CHECK(ds.stations[0].values[0] == 5.0);
    CHECK(ds.stations[0].values[2] == 12.0);
}

TEST_CASE("load failure modes") {
    TempDir dir("ingest_errors");
    write_file(dir.file("meta.csv"),
               "station_id,name,lat,lon,storage_kg\nS1,One,34.0,-118.0,100\n");

    SUBCASE("malformed row reports the line number") {
        write_file(dir.file("readings.csv"),
                   "timestamp,station_id,capacity_kg\n"
                   "2018-10-01T00:00:00Z,S1,5\n"
                   "not-a-time,S1,5\n");
        try {
            load_readings(dir.file("readings.csv"), dir.file("meta.csv"));
            FAIL("expected parse error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::parse);
            CHECK(std::string(e.what()).find(":3") != std::string::npos);
        }
    }
    SUBCASE("unknown station is a referential error") {
        write_file(dir.file("readings.csv"),
                   "timestamp,station_id,capacity_kg\n2018-10-01T00:00:00Z,GHOST,5\n");
        CHECK(thrown_code([&] {
                  load_readings(dir.file("readings.csv"), dir.file("meta.csv"));
              }) == ErrorCode::referential);
    }
    SUBCASE("negative and non-finite capacities are rejected") {
        write_file(dir.file("readings.csv"),
                   "timestamp,station_id,capacity_kg\n2018-10-01T00:00:00Z,S1,-2\n");
        CHECK(thrown_code([&] {
                  load_readings(dir.file("readings.csv"), dir.file("meta.csv"));
              }) == ErrorCode::validation);
        write_file(dir.file("readings.csv"),
                   "timestamp,station_id,capacity_kg\n2018-10-01T00:00:00Z,S1,nan\n");
        CHECK(thrown_code([&] {
                  load_readings(dir.file("readings.csv"), dir.file("meta.csv"));
              }) == ErrorCode::validation);
    }
    SUBCASE("empty readings file") {
        write_file(dir.file("readings.csv"), "timestamp,station_id,capacity_kg\n");
        CHECK(thrown_code([&] {
                  load_readings(dir.file("readings.csv"), dir.file("meta.csv"));
              }) == ErrorCode::empty_input);
    }
    SUBCASE("bad header") {
        write_file(dir.file("readings.csv"), "time,station,kg\n");
        CHECK(thrown_code([&] {
                  load_readings(dir.file("readings.csv"), dir.file("meta.csv"));
              }) == ErrorCode::parse);
    }
}

TEST_CASE("exclude_stations") {
    Rng rng(31);
    std::vector<StationSeries> stations;
    for (int i = 0; i < 33; ++i)
        stations.push_back(make_station("S" + std::to_string(i), random_series(rng, 8)));
    const Dataset ds = make_dataset(std::move(stations));

    SUBCASE("drops listed stations, preserves order") {
        const Dataset out = exclude_stations(ds, {"S3", "S30"});
        CHECK(out.stations.size() == 31);
        CHECK(out.index_of("S3") == -1);
        CHECK(out.index_of("S30") == -1);
        // relative order intact
        CHECK(out.stations[2].meta.station_id == "S2");
        CHECK(out.stations[3].meta.station_id == "S4");
    }
    SUBCASE("empty exclusion list is the identity") {
        CHECK(exclude_stations(ds, {}) == ds);
    }
    SUBCASE("unknown ids warn, not fail") {
        std::vector<std::string> unknown;
        const Dataset out = exclude_stations(ds, {"XX"}, &unknown);
        CHECK(out == ds);
        CHECK(unknown == std::vector<std::string>{"XX"});
    }
    SUBCASE("excluding everything is an error") {
        std::vector<std::string> all;
        for (const StationSeries& s : ds.stations) all.push_back(s.meta.station_id);
        CHECK(thrown_code([&] { exclude_stations(ds, all); }) == ErrorCode::empty_input);
    }
}

TEST_CASE("csv round-trip reproduces the dataset") {
    Rng rng(32);
    std::vector<StationSeries> stations;
    for (int i = 0; i < 4; ++i) {
        StationSeries s = make_station("ST" + std::to_string(i), random_series(rng, 50, 0, 80),
                                       33.0 + i, -118.0 - i);
        s.meta.name = "Station, the " + std::to_string(i) + "th";  // comma forces quoting
        if (i % 2 == 0) s.meta.storage_kg = 120.5 + i;
        for (std::size_t t = 0; t < s.observed.size(); ++t)
            if (rng.uniform01() < 0.2) {
                s.observed[t] = 0;
                s.values[t] = 0.0;  // unobserved slots carry the placeholder
            }
        stations.push_back(std::move(s));
    }
    stations.front().observed.front() = 1;  // pin the grid ends
    stations.front().observed.back() = 1;
    const Dataset ds = make_dataset(std::move(stations));

    TempDir dir("roundtrip");
    write_dataset_csv(ds, dir.file("readings.csv"), dir.file("meta.csv"));
    const Dataset reloaded =
        load_readings(dir.file("readings.csv"), dir.file("meta.csv"), ds.grid);
    CHECK(reloaded == ds);

    // load is deterministic: identical bytes give identical datasets
    const Dataset again =
        load_readings(dir.file("readings.csv"), dir.file("meta.csv"), ds.grid);
    CHECK(again == reloaded);
}

TEST_CASE("row order does not change the dataset apart from exact duplicates") {
    TempDir dir("order");
    write_file(dir.file("meta.csv"),
               "station_id,name,lat,lon,storage_kg\nA,A,34,-118,\nB,B,35,-119,\n");
    write_file(dir.file("fwd.csv"),
               "timestamp,station_id,capacity_kg\n"
               "2018-10-01T00:00:00Z,A,1\n"
               "2018-10-01T01:00:00Z,A,2\n"
               "2018-10-01T00:00:00Z,B,3\n"
               "2018-10-01T01:00:00Z,B,4\n");
    write_file(dir.file("rev.csv"),
               "timestamp,station_id,capacity_kg\n"
               "2018-10-01T01:00:00Z,B,4\n"
               "2018-10-01T00:00:00Z,B,3\n"
               "2018-10-01T01:00:00Z,A,2\n"
               "2018-10-01T00:00:00Z,A,1\n");
    const Dataset fwd = load_readings(dir.file("fwd.csv"), dir.file("meta.csv"));
    const Dataset rev = load_readings(dir.file("rev.csv"), dir.file("meta.csv"));
    CHECK(fwd == rev);
}

TEST_CASE("dataset json round-trip") {
    Rng rng(33);
    Dataset ds = make_dataset({make_station("A", random_series(rng, 24, 0, 10)),
                               make_station("B", random_series(rng, 24, 0, 10))});
    ds.stations[0].observed[5] = 0;
    ds.stations[1].meta.storage_kg = 77.25;

    const Dataset back = dataset_from_json(dataset_to_json(ds));
    CHECK(back == ds);

    TempDir dir("dsjson");
    write_json_file(dataset_to_json(ds), dir.file("ds.json"));
    const Dataset from_file = dataset_from_json(read_json_file(dir.file("ds.json")));
    CHECK(from_file == ds);
}
