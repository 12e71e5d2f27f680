#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "station_pulse/cluster.hpp"
#include "station_pulse/preprocess.hpp"
#include "station_pulse/report.hpp"
#include "station_pulse/synth.hpp"
#include "test_support.hpp"

using namespace stationpulse;
using namespace test_support;

namespace {

struct Fixture {
    Dataset ds;
    ClusterRun run;

    Fixture() {
        ArchetypeSpec reliable{ArchetypeKind::reliable, 4, 0.05, 7, TimeGrid{1538352000, 120}, {}};
        ArchetypeSpec connector = reliable;
        connector.kind = ArchetypeKind::connector;
        const SynthResult bench = benchmark_set({reliable, connector});
        ds = bench.dataset;
        const DistanceMatrix dm = pairwise_matrix(ds, Metric::cid);
        run.model = kmeans_fit(ds, 2, 42, Metric::cid);
        run.silhouette = silhouette(dm, run.model.assignments);
        run.score_table = {{2, run.silhouette.mean}};
        run.station_ids = dm.ids;
    }
};

}  // namespace

TEST_CASE("cluster annotation from a labels file") {
    Fixture fx;
    TempDir dir("annotate");

    SUBCASE("majority label wins") {
        std::string csv = "station_id,label\n";
        // 4 stations of cluster A labeled reliable, 1 labeled overstressed
        std::vector<std::string> members;
        for (std::size_t i = 0; i < fx.run.station_ids.size(); ++i)
            if (fx.run.model.assignments[i] == 0) members.push_back(fx.run.station_ids[i]);
        REQUIRE(members.size() >= 2);
        for (std::size_t i = 0; i + 1 < members.size(); ++i) csv += members[i] + ",reliable\n";
        csv += members.back() + ",overstressed\n";
        write_file(dir.file("ann.csv"), csv);
        const auto labels = annotate_clusters(fx.run.model, fx.run.station_ids, dir.file("ann.csv"));
        CHECK(labels.at(0) == "reliable");
        CHECK(labels.at(1) == "unlabeled");  // no annotated member
    }
    SUBCASE("ties are ambiguous") {
        std::vector<std::string> members;
        for (std::size_t i = 0; i < fx.run.station_ids.size(); ++i)
            if (fx.run.model.assignments[i] == 0) members.push_back(fx.run.station_ids[i]);
        REQUIRE(members.size() == 4);
        std::string csv = "station_id,label\n";
        csv += members[0] + ",reliable\n" + members[1] + ",reliable\n";
        csv += members[2] + ",overstressed\n" + members[3] + ",overstressed\n";
        write_file(dir.file("ann.csv"), csv);
        const auto labels = annotate_clusters(fx.run.model, fx.run.station_ids, dir.file("ann.csv"));
        CHECK(labels.at(0) == "ambiguous");
    }
    SUBCASE("unknown station id is a referential error") {
        write_file(dir.file("ann.csv"), "station_id,label\nGHOST,reliable\n");
        CHECK(thrown_code([&] {
                  annotate_clusters(fx.run.model, fx.run.station_ids, dir.file("ann.csv"));
              }) == ErrorCode::referential);
    }
}

TEST_CASE("emit_report writes deterministic json and plot csv") {
    Fixture fx;
    TempDir dir("report");

    emit_report(fx.ds, fx.run, std::nullopt, std::nullopt, dir.file("a.json"),
                dir.file("a.csv"));
    emit_report(fx.ds, fx.run, std::nullopt, std::nullopt, dir.file("b.json"),
                dir.file("b.csv"));
    CHECK(read_file(dir.file("a.json")) == read_file(dir.file("b.json")));
    CHECK(read_file(dir.file("a.csv")) == read_file(dir.file("b.csv")));

    // plotdata has one row per station-hour plus the header
    const std::string plot = read_file(dir.file("a.csv"));
    const std::size_t rows = static_cast<std::size_t>(
        std::count(plot.begin(), plot.end(), '\n'));
    CHECK(rows == 1 + fx.ds.stations.size() * fx.ds.grid.n_steps);

    // numeric fields round-trip at full precision
    const nlohmann::json report = read_json_file(dir.file("a.json"));
    CHECK(report["clustering"]["silhouette"]["mean"].get<double>() == fx.run.silhouette.mean);
    CHECK(report["clustering"]["inertia"].get<double>() == fx.run.model.inertia);
    CHECK(report["dataset"]["station_count"].get<std::size_t>() == fx.ds.stations.size());
    CHECK(report["tool"]["version"].get<std::string>() == kToolVersion);
}

TEST_CASE("emit_report rejects inconsistent station sets") {
    Fixture fx;
    TempDir dir("report_bad");

    SUBCASE("dropped station") {
        Dataset smaller = fx.ds;
        smaller.stations.pop_back();
        CHECK(thrown_code([&] {
                  emit_report(smaller, fx.run, std::nullopt, std::nullopt, dir.file("r.json"),
                              dir.file("p.csv"));
              }) == ErrorCode::consistency);
    }
    SUBCASE("renamed station") {
        Dataset renamed = fx.ds;
        renamed.stations[0].meta.station_id = "SOMETHING_ELSE";
        CHECK(thrown_code([&] {
                  emit_report(renamed, fx.run, std::nullopt, std::nullopt, dir.file("r.json"),
                              dir.file("p.csv"));
              }) == ErrorCode::consistency);
    }
    SUBCASE("annotation for a cluster outside the model") {
        std::map<int, std::string> bad{{7, "reliable"}};
        CHECK(thrown_code([&] {
                  emit_report(fx.ds, fx.run, std::nullopt, bad, dir.file("r.json"),
                              dir.file("p.csv"));
              }) == ErrorCode::consistency);
    }
}

TEST_CASE("cluster run json round-trip") {
    Fixture fx;
    const nlohmann::json j = cluster_run_to_json(fx.run);
    const ClusterRun back = cluster_run_from_json(j);
    CHECK(back.model.assignments == fx.run.model.assignments);
    CHECK(back.model.k == fx.run.model.k);
    CHECK(back.model.inertia == fx.run.model.inertia);
    CHECK(back.model.centroids == fx.run.model.centroids);
    CHECK(back.silhouette.per_station == fx.run.silhouette.per_station);
    CHECK(back.silhouette.mean == fx.run.silhouette.mean);
    CHECK(back.score_table == fx.run.score_table);
    CHECK(back.station_ids == fx.run.station_ids);
}

TEST_CASE("imputed fraction reflects the observation mask") {
    Fixture fx;
    for (std::size_t t = 0; t < 30; ++t) fx.ds.stations[0].observed[t] = 0;  // 30 of 120
    TempDir dir("imputed");
    emit_report(fx.ds, fx.run, std::nullopt, std::nullopt, dir.file("r.json"),
                dir.file("p.csv"));
    const nlohmann::json report = read_json_file(dir.file("r.json"));
    const std::string id0 = fx.ds.stations[0].meta.station_id;
    CHECK(report["dataset"]["imputed_fraction"][id0].get<double>() == doctest::Approx(0.25));
}
