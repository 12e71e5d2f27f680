#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "station_pulse/cluster.hpp"
#include "station_pulse/synth.hpp"
#include "test_support.hpp"

using namespace stationpulse;
using namespace test_support;

namespace {

// Pair-counting ARI, an independent route from the library's contingency
// table.
double pair_count_ari(const std::vector<int>& a, const std::vector<int>& b) {
    double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            n11 += sa && sb;
            n10 += sa && !sb;
            n01 += !sa && sb;
            n00 += !sa && !sb;
        }
    const double denom = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00);
    if (denom == 0.0) return 1.0;
    return 2.0 * (n11 * n00 - n10 * n01) / denom;
}

ArchetypeSpec spec_of(ArchetypeKind kind, std::size_t n_series, double sigma,
                      std::uint64_t seed, std::size_t hours = 2208) {
    ArchetypeSpec spec;
    spec.kind = kind;
    spec.n_series = n_series;
    spec.noise_sigma = sigma;
    spec.seed = seed;
    spec.grid = TimeGrid{1538352000, hours};
    return spec;
}

Dataset random_dataset(Rng& rng, std::size_t n_stations, std::size_t n_steps) {
    std::vector<StationSeries> stations;
    for (std::size_t s = 0; s < n_stations; ++s)
        stations.push_back(make_station("S" + std::to_string(s), random_series(rng, n_steps)));
    return make_dataset(std::move(stations));
}

}  // namespace

TEST_CASE("kmeans: k == n gives singleton clusters with zero inertia") {
    Rng rng(50);
    const Dataset ds = random_dataset(rng, 6, 32);
    const ClusterModel model = kmeans_fit(ds, 6, 123, Metric::cid);
    CHECK(model.inertia == 0.0);
    std::vector<int> sorted = model.assignments;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("kmeans recovers two archetypes exactly") {
    const SynthResult bench = benchmark_set(
        {spec_of(ArchetypeKind::reliable, 8, 0.05, 7),
         spec_of(ArchetypeKind::overstressed, 8, 0.05, 7)});
    const ClusterModel model = kmeans_fit(bench.dataset, 2, 42, Metric::cid);
    CHECK(adjusted_rand_index(model.assignments, bench.labels) == 1.0);
}

TEST_CASE("kmeans is deterministic in (dataset, k, seed, metric)") {
    Rng rng(51);
    const Dataset ds = random_dataset(rng, 10, 64);
    for (Metric metric : {Metric::cid, Metric::euclidean}) {
        const ClusterModel a = kmeans_fit(ds, 3, 99, metric);
        const ClusterModel b = kmeans_fit(ds, 3, 99, metric);
        CHECK(a.assignments == b.assignments);
        CHECK(a.centroids == b.centroids);  // bit-identical
        CHECK(a.inertia == b.inertia);
    }
}

TEST_CASE("converged kmeans is a fixed point of the assignment rule") {
    Rng rng(52);
    const Dataset ds = random_dataset(rng, 12, 48);
    const ClusterModel model = kmeans_fit(ds, 3, 7, Metric::cid);
    for (std::size_t i = 0; i < ds.stations.size(); ++i) {
        int best = 0;
        double best_d = cid(ds.stations[i].values, model.centroids[0]);
        for (std::size_t c = 1; c < model.centroids.size(); ++c) {
            const double d = cid(ds.stations[i].values, model.centroids[c]);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        CHECK(best == model.assignments[i]);
    }
}

TEST_CASE("assignment step never increases inertia") {
    Rng rng(53);
    const Dataset ds = random_dataset(rng, 16, 40);
    for (Metric metric : {Metric::cid, Metric::euclidean}) {
        // random centroids (data points) and a random assignment
        std::vector<std::vector<double>> centroids;
        for (int c = 0; c < 4; ++c)
            centroids.push_back(ds.stations[rng.below(ds.stations.size())].values);
        double before = 0.0;
        double after = 0.0;
        for (const StationSeries& s : ds.stations) {
            const std::size_t random_c = rng.below(4);
            before += series_distance(s.values, centroids[random_c], metric);
            double best = series_distance(s.values, centroids[0], metric);
            for (int c = 1; c < 4; ++c)
                best = std::min(best, series_distance(s.values, centroids[c], metric));
            after += best;
        }
        CHECK(after <= before);
    }
}

TEST_CASE("euclidean Lloyd objective is non-increasing") {
    Rng rng(54);
    for (int trial = 0; trial < 10; ++trial) {
        const Dataset ds = random_dataset(rng, 20, 24);
        const ClusterModel model =
            kmeans_fit(ds, 4, 1000 + static_cast<std::uint64_t>(trial), Metric::euclidean);
        for (std::size_t i = 1; i < model.objective_history.size(); ++i)
            CHECK(model.objective_history[i] <= model.objective_history[i - 1]);
    }
}

TEST_CASE("kmeans rejects bad k") {
    Rng rng(55);
    const Dataset ds = random_dataset(rng, 4, 16);
    CHECK(thrown_code([&] { kmeans_fit(ds, 5, 1, Metric::cid); }) == ErrorCode::parameter);
    CHECK(thrown_code([&] { kmeans_fit(ds, 0, 1, Metric::cid); }) == ErrorCode::parameter);
}

TEST_CASE("kmedoids: 1-medoid minimizes the summed distance") {
    Rng rng(56);
    const Dataset ds = random_dataset(rng, 9, 32);
    const DistanceMatrix dm = pairwise_matrix(ds, Metric::cid);
    const ClusterModel model = kmedoids_fit(dm, 1, 3);

    // brute-force oracle over every candidate medoid
    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t cand = 0; cand < dm.n; ++cand) {
        double cost = 0.0;
        for (std::size_t i = 0; i < dm.n; ++i) cost += dm.at(cand, i);
        if (cost < best_cost) {
            best_cost = cost;
            best = cand;
        }
    }
    REQUIRE(model.medoid_indices.size() == 1);
    CHECK(model.medoid_indices[0] == static_cast<int>(best));
    CHECK(model.inertia == doctest::Approx(best_cost).epsilon(1e-12));
}

TEST_CASE("kmedoids recovers four archetypes") {
    const SynthResult bench = benchmark_set(
        {spec_of(ArchetypeKind::reliable, 8, 0.05, 7),
         spec_of(ArchetypeKind::overstressed, 8, 0.05, 7),
         spec_of(ArchetypeKind::connector, 8, 0.05, 7),
         spec_of(ArchetypeKind::cryo_small_tank, 8, 0.05, 7)});
    const ClusterModel model = kmedoids_fit(bench.dataset, Metric::cid, 4, 42);
    CHECK(adjusted_rand_index(model.assignments, bench.labels) >= 0.9);
    CHECK(model.centroids.size() == 4);  // medoid series exposed as centroids
}

TEST_CASE("kmedoids on two identical stations has zero cost") {
    const std::vector<double> v{0.2, 0.8, 0.3, 0.7};
    const Dataset ds = make_dataset({make_station("A", v), make_station("B", v)});
    const DistanceMatrix dm = pairwise_matrix(ds, Metric::cid);
    const ClusterModel model = kmedoids_fit(dm, 2, 5);
    CHECK(model.inertia == 0.0);
}

TEST_CASE("silhouette on two tight far blobs") {
    // direct 4-point construction: within 0.1, across 10
    DistanceMatrix dm;
    dm.n = 4;
    dm.metric = Metric::cid;
    dm.ids = {"a", "b", "c", "d"};
    dm.d.assign(16, 10.0);
    for (std::size_t i = 0; i < 4; ++i) dm.at(i, i) = 0.0;
    dm.at(0, 1) = dm.at(1, 0) = 0.1;
    dm.at(2, 3) = dm.at(3, 2) = 0.1;

    const SilhouetteReport rep = silhouette(dm, {0, 0, 1, 1});
    // direct formula: s = (10 - 0.1) / 10 for every point
    for (double s : rep.per_station) CHECK(s == doctest::Approx(0.99).epsilon(1e-12));
    CHECK(rep.mean > 0.9);
    CHECK(rep.k == 2);
}

TEST_CASE("silhouette conventions") {
    DistanceMatrix dm;
    dm.n = 4;
    dm.ids = {"a", "b", "c", "d"};
    dm.d.assign(16, 1.0);
    for (std::size_t i = 0; i < 4; ++i) dm.at(i, i) = 0.0;

    SUBCASE("all points equidistant score zero") {
        const SilhouetteReport rep = silhouette(dm, {0, 0, 1, 1});
        for (double s : rep.per_station) CHECK(s == 0.0);
    }
    SUBCASE("singleton cluster scores zero") {
        const SilhouetteReport rep = silhouette(dm, {0, 0, 0, 1});
        CHECK(rep.per_station[3] == 0.0);
    }
    SUBCASE("single cluster is an error") {
        CHECK(thrown_code([&] { silhouette(dm, {0, 0, 0, 0}); }) == ErrorCode::degenerate);
    }
}

TEST_CASE("relabeling clusters changes neither inertia nor silhouette mean") {
    Rng rng(57);
    const Dataset ds = random_dataset(rng, 10, 32);
    const DistanceMatrix dm = pairwise_matrix(ds, Metric::cid);
    const ClusterModel model = kmeans_fit(ds, 3, 11, Metric::cid);
    const SilhouetteReport before = silhouette(dm, model.assignments);

    std::vector<int> relabeled = model.assignments;
    for (int& a : relabeled) a = (a + 1) % 3;
    const SilhouetteReport after = silhouette(dm, relabeled);
    CHECK(after.mean == doctest::Approx(before.mean).epsilon(1e-15));
}

TEST_CASE("select_k finds the archetype count") {
    std::vector<ArchetypeSpec> specs = {
        spec_of(ArchetypeKind::reliable, 6, 0.05, 17, 1104),
        spec_of(ArchetypeKind::overstressed, 6, 0.05, 17, 1104),
        spec_of(ArchetypeKind::connector, 6, 0.05, 17, 1104),
        spec_of(ArchetypeKind::cryo_small_tank, 6, 0.05, 17, 1104)};
    const SynthResult bench = benchmark_set(specs);
    const KSelection sel = select_k(bench.dataset, 2, 6, 42, Metric::cid);
    CHECK(sel.k_best == 4);
    CHECK(sel.scores.size() == 5);

    // two archetypes, range [2,4]
    const SynthResult two = benchmark_set({specs[0], specs[3]});
    const KSelection sel2 = select_k(two.dataset, 2, 4, 42, Metric::cid);
    CHECK(sel2.k_best == 2);
}

TEST_CASE("select_k degenerate range returns that k") {
    Rng rng(58);
    const Dataset ds = random_dataset(rng, 8, 32);
    const KSelection sel = select_k(ds, 3, 3, 1, Metric::cid);
    CHECK(sel.k_best == 3);
    CHECK(sel.scores.size() == 1);
    CHECK(sel.scores[0].first == 3);
}

TEST_CASE("select_k is invariant to station input order") {
    std::vector<ArchetypeSpec> specs = {
        spec_of(ArchetypeKind::reliable, 5, 0.05, 23, 720),
        spec_of(ArchetypeKind::connector, 5, 0.05, 23, 720),
        spec_of(ArchetypeKind::cryo_small_tank, 5, 0.05, 23, 720)};
    const SynthResult bench = benchmark_set(specs);
    const KSelection sel = select_k(bench.dataset, 2, 6, 9, Metric::cid);

    Dataset shuffled = bench.dataset;
    Rng rng(59);
    rng.shuffle(shuffled.stations);
    const KSelection sel_shuffled = select_k(shuffled, 2, 6, 9, Metric::cid);
    CHECK(sel.k_best == sel_shuffled.k_best);
}

TEST_CASE("scaling every series by a power of two leaves assignments identical") {
    Rng rng(60);
    const Dataset ds = random_dataset(rng, 12, 40);
    for (Metric metric : {Metric::cid, Metric::euclidean}) {
        const ClusterModel base = kmeans_fit(ds, 3, 77, metric);
        Dataset scaled = ds;
        for (StationSeries& s : scaled.stations)
            for (double& v : s.values) v *= 4.0;
        const ClusterModel model = kmeans_fit(scaled, 3, 77, metric);
        CHECK(model.assignments == base.assignments);
    }
}

TEST_CASE("adjusted rand index") {
    CHECK(adjusted_rand_index({0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}) == 1.0);
    CHECK(adjusted_rand_index({5, 5, 9, 9}, {1, 1, 0, 0}) == 1.0);  // renamed labels

    // all-in-one vs all-singletons: chance-level agreement
    CHECK(adjusted_rand_index({0, 0, 0, 0}, {0, 1, 2, 3}) == 0.0);

    CHECK(thrown_code([] { adjusted_rand_index({0, 1}, {0, 1, 2}); }) == ErrorCode::shape);

    // label-permutation invariance + agreement with the pair-counting oracle
    Rng rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<int> a(12), b(12);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = static_cast<int>(rng.below(3));
            b[i] = static_cast<int>(rng.below(4));
        }
        const double direct = adjusted_rand_index(a, b);
        CHECK(direct == doctest::Approx(pair_count_ari(a, b)).epsilon(1e-12));

        std::vector<int> permuted = b;
        for (int& label : permuted) label = (label + 2) % 4;
        CHECK(adjusted_rand_index(a, permuted) == doctest::Approx(direct).epsilon(1e-12));
    }
}
