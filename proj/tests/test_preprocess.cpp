#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "station_pulse/preprocess.hpp"
#include "test_support.hpp"

using namespace stationpulse;
using namespace test_support;

namespace {

StationSeries with_gaps(std::vector<double> values, std::vector<int> observed) {
    StationSeries s = make_station("G", std::move(values));
    for (std::size_t i = 0; i < observed.size(); ++i) s.observed[i] = observed[i] ? 1 : 0;
    return s;
}

}  // namespace

TEST_CASE("interior gaps bridge linearly") {
    const StationSeries s = with_gaps({10, 0, 0, 4}, {1, 0, 0, 1});
    const StationSeries imputed = impute_linear(s);
    CHECK(imputed.values[0] == 10.0);
    CHECK(imputed.values[1] == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(imputed.values[2] == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(imputed.values[3] == 4.0);
    // mask untouched: imputed points stay unobserved
    CHECK(imputed.observed == std::vector<std::uint8_t>{1, 0, 0, 1});
}

TEST_CASE("edge gaps take the nearest observed value") {
    const StationSeries s = with_gaps({0, 5, 0}, {0, 1, 0});
    const StationSeries imputed = impute_linear(s);
    CHECK(imputed.values == std::vector<double>{5, 5, 5});
}

TEST_CASE("masking a linear signal imputes it back exactly") {
    // oracle: the signal is analytic, so expected values are regenerated
    const auto line = [](std::size_t i) { return 3.5 + 0.25 * static_cast<double>(i); };
    StationSeries s = make_station("L", {});
    s.values.resize(100);
    s.observed.assign(100, 1);
    for (std::size_t i = 0; i < 100; ++i) s.values[i] = line(i);

    Rng rng(11);
    std::size_t masked = 0;
    while (masked < 20) {
        const std::size_t i = 1 + rng.below(98);  // keep endpoints observed
        if (!s.observed[i]) continue;
        s.observed[i] = 0;
        s.values[i] = -1.0;  // poison so a missed fill is visible
        ++masked;
    }

    const StationSeries imputed = impute_linear(s);
    double max_err = 0.0;
    for (std::size_t i = 0; i < 100; ++i)
        max_err = std::max(max_err, std::abs(imputed.values[i] - line(i)));
    CHECK(max_err < 1e-9);
}

TEST_CASE("imputation is idempotent and preserves observed values bit-exactly") {
    Rng rng(12);
    StationSeries s = make_station("I", random_series(rng, 200, 0.0, 50.0));
    for (std::size_t i = 0; i < s.observed.size(); ++i)
        if (rng.uniform01() < 0.3) s.observed[i] = 0;
    s.observed[17] = 1;  // at least one observation

    const StationSeries once = impute_linear(s);
    const StationSeries twice = impute_linear(once);
    CHECK(once == twice);
    for (std::size_t i = 0; i < s.values.size(); ++i)
        if (s.observed[i]) CHECK(once.values[i] == s.values[i]);
}

TEST_CASE("all-missing station is an error naming the station") {
    StationSeries s = with_gaps({0, 0, 0}, {0, 0, 0});
    s.meta.station_id = "NEWPORT";
    try {
        impute_linear(s);
        FAIL("expected all-missing error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::all_missing);
        CHECK(std::string(e.what()).find("NEWPORT") != std::string::npos);
    }
}

TEST_CASE("normalization methods") {
    StationSeries s = make_station("N", {0, 12, 24});
    s.meta.storage_kg = 24.0;

    SUBCASE("storage_fraction divides by rated storage") {
        const StationSeries out = normalize(s, NormalizationMethod::storage_fraction);
        CHECK(out.values == std::vector<double>{0.0, 0.5, 1.0});
    }
    SUBCASE("min_max maps a constant series to 0.5") {
        const StationSeries out =
            normalize(make_station("C", {3, 3, 3}), NormalizationMethod::min_max);
        CHECK(out.values == std::vector<double>{0.5, 0.5, 0.5});
    }
    SUBCASE("z_score uses the population stddev") {
        // mean 4, population sd sqrt(8/3)
        const StationSeries out =
            normalize(make_station("Z", {2, 4, 6}), NormalizationMethod::z_score);
        const double sd = std::sqrt(8.0 / 3.0);
        CHECK(out.values[0] == doctest::Approx(-2.0 / sd).epsilon(1e-12));
        CHECK(out.values[0] == doctest::Approx(-1.2247).epsilon(1e-4));
        CHECK(out.values[1] == doctest::Approx(0.0));
        CHECK(out.values[2] == doctest::Approx(1.2247).epsilon(1e-4));
    }
    SUBCASE("storage_fraction without storage falls back to min_max with a warning") {
        StationSeries bare = make_station("B", {0, 12, 24});
        std::vector<std::string> warnings;
        const StationSeries out =
            normalize(bare, NormalizationMethod::storage_fraction, &warnings);
        CHECK(out.values == std::vector<double>{0.0, 0.5, 1.0});
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("min_max") != std::string::npos);
    }
    SUBCASE("z_score on a constant series is degenerate") {
        CHECK(thrown_code([] {
                  normalize(make_station("C", {3, 3, 3}), NormalizationMethod::z_score);
              }) == ErrorCode::degenerate);
    }
}

TEST_CASE("normalization output ranges hold on random series") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        StationSeries s = make_station("R", random_series(rng, 128, 0.0, 40.0));

        const StationSeries mm = normalize(s, NormalizationMethod::min_max);
        for (double v : mm.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }

        const StationSeries z = normalize(s, NormalizationMethod::z_score);
        double mean = 0.0;
        for (double v : z.values) mean += v;
        mean /= static_cast<double>(z.values.size());
        double var = 0.0;
        for (double v : z.values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(z.values.size());
        CHECK(std::abs(mean) < 1e-12);
        CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-12);
    }
}

TEST_CASE("preprocess_all composes and annotates failures") {
    Rng rng(14);
    Dataset ds = make_dataset({make_station("A", random_series(rng, 48, 0.0, 30.0)),
                               make_station("B", random_series(rng, 48, 5.0, 9.0))});
    ds.stations[0].observed[10] = 0;

    const Dataset out = preprocess_all(ds, NormalizationMethod::min_max);
    CHECK(out.normalization == "min_max");
    CHECK(out.stations.size() == 2);
    CHECK(out.stations[0].observed == ds.stations[0].observed);
    for (const StationSeries& s : out.stations)
        for (double v : s.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }

    // normalization is per-station: changing B never affects A's output
    Dataset tweaked = ds;
    for (double& v : tweaked.stations[1].values) v *= 3.0;
    const Dataset out2 = preprocess_all(tweaked, NormalizationMethod::min_max);
    CHECK(out2.stations[0].values == out.stations[0].values);

    Dataset with_dead = ds;
    with_dead.stations.push_back(make_station("DEAD", std::vector<double>(48, 0.0)));
    with_dead.stations.back().observed.assign(48, 0);
    try {
        preprocess_all(with_dead, NormalizationMethod::min_max);
        FAIL("expected all-missing error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::all_missing);
        CHECK(std::string(e.what()).find("DEAD") != std::string::npos);
    }

    CHECK(thrown_code([] {
              preprocess_all(Dataset{}, NormalizationMethod::min_max);
          }) == ErrorCode::empty_input);
}
