#include "station_pulse/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "station_pulse/error.hpp"
#include "station_pulse/rng.hpp"

namespace stationpulse {

namespace {

constexpr std::uint64_t kKmeansStream = 0x6b6d65616e73ULL;   // "kmeans"
constexpr std::uint64_t kKmedoidsStream = 0x6b6d65646f69ULL; // "kmedoi"

void check_k(int k, std::size_t n) {
    if (k < 1) fail(ErrorCode::parameter, "k must be >= 1, got " + std::to_string(k));
    if (static_cast<std::size_t>(k) > n)
        fail(ErrorCode::parameter, "k = " + std::to_string(k) + " exceeds the " +
                                       std::to_string(n) + " available stations");
}

void check_max_iter(int max_iter) {
    if (max_iter < 1)
        fail(ErrorCode::parameter, "max_iter must be >= 1, got " + std::to_string(max_iter));
}

double centroid_distance(std::span<const double> x, double ce_x, std::span<const double> c,
                         double ce_c, Metric metric) {
    return metric == Metric::cid ? cid_with_ce(x, c, ce_x, ce_c) : euclidean_distance(x, c);
}

/// Weighted pick proportional to `weights` using normalized cumulative sums;
/// invariant under uniform scaling of the weights. Falls back to the lowest
/// index with zero weight when everything is at distance zero.
std::size_t weighted_pick(const std::vector<double>& weights, Rng& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) {
        for (std::size_t i = 0; i < weights.size(); ++i)
            if (weights[i] == 0.0) return i;
        return 0;
    }
    const double target = rng.uniform01() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cum += weights[i];
        if (target < cum) return i;
    }
    return weights.size() - 1;
}

}  // namespace

const char* algo_name(ClusterAlgo a) {
    return a == ClusterAlgo::kmeans ? "kmeans" : "kmedoids";
}

ClusterAlgo algo_from_name(const std::string& name) {
    if (name == "kmeans") return ClusterAlgo::kmeans;
    if (name == "kmedoids") return ClusterAlgo::kmedoids;
    fail(ErrorCode::parameter, "unknown clustering algorithm '" + name + "'");
}

ClusterModel kmeans_fit(const Dataset& ds, int k, std::uint64_t seed, Metric metric,
                        int max_iter) {
    const std::size_t n = ds.stations.size();
    check_k(k, n);
    check_max_iter(max_iter);
    const std::size_t kk = static_cast<std::size_t>(k);

    std::vector<std::span<const double>> pts;
    pts.reserve(n);
    for (const StationSeries& s : ds.stations) pts.emplace_back(s.values);
    std::vector<double> pt_ce(n, 0.0);
    if (metric == Metric::cid)
        for (std::size_t i = 0; i < n; ++i) pt_ce[i] = complexity_estimate(pts[i]);

    Rng rng = Rng::substream(seed, kKmeansStream);

    // k-means++ seeding under the fit metric.
    std::vector<std::vector<double>> centroids;
    centroids.reserve(kk);
    std::vector<double> centroid_ce(kk, 0.0);
    auto set_centroid = [&](std::size_t slot, std::span<const double> series) {
        if (slot == centroids.size())
            centroids.emplace_back(series.begin(), series.end());
        else
            centroids[slot].assign(series.begin(), series.end());
        if (metric == Metric::cid) centroid_ce[slot] = complexity_estimate(centroids[slot]);
    };

    {
        const std::size_t first = static_cast<std::size_t>(rng.below(n));
        set_centroid(0, pts[first]);
        std::vector<double> d2(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double d =
                centroid_distance(pts[i], pt_ce[i], centroids[0], centroid_ce[0], metric);
            d2[i] = d * d;
        }
        for (std::size_t c = 1; c < kk; ++c) {
            const std::size_t pick = weighted_pick(d2, rng);
            set_centroid(c, pts[pick]);
            for (std::size_t i = 0; i < n; ++i) {
                const double d =
                    centroid_distance(pts[i], pt_ce[i], centroids[c], centroid_ce[c], metric);
                d2[i] = std::min(d2[i], d * d);
            }
        }
    }

    std::vector<int> assignments(n, -1);
    std::vector<int> previous(n, -1);
    std::vector<double> dist_to_assigned(n, 0.0);
    std::vector<std::size_t> counts(kk, 0);
    std::vector<double> objective_history;
    int iterations = 0;

    for (int iter = 0; iter < max_iter; ++iter) {
        ++iterations;

        // Assignment step; ties go to the lowest centroid index.
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d =
                centroid_distance(pts[i], pt_ce[i], centroids[0], centroid_ce[0], metric);
            for (std::size_t c = 1; c < kk; ++c) {
                const double d =
                    centroid_distance(pts[i], pt_ce[i], centroids[c], centroid_ce[c], metric);
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(c);
                }
            }
            assignments[i] = best;
            dist_to_assigned[i] = best_d;
        }

        // Reseed emptied clusters with the worst-fit station whose donor
        // cluster keeps at least one member. Ties to the lowest station index.
        std::fill(counts.begin(), counts.end(), 0);
        for (int a : assignments) ++counts[static_cast<std::size_t>(a)];
        for (std::size_t c = 0; c < kk; ++c) {
            if (counts[c] > 0) continue;
            std::ptrdiff_t candidate = -1;
            double worst = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(assignments[i])] < 2) continue;
                if (dist_to_assigned[i] > worst) {
                    worst = dist_to_assigned[i];
                    candidate = static_cast<std::ptrdiff_t>(i);
                }
            }
            if (candidate < 0) fail(ErrorCode::internal, "cannot repair empty cluster");
            --counts[static_cast<std::size_t>(assignments[candidate])];
            assignments[candidate] = static_cast<int>(c);
            counts[c] = 1;
            dist_to_assigned[candidate] = 0.0;  // it becomes the cluster's seed
        }

        if (assignments == previous) break;
        previous = assignments;

        // Mean update.
        for (std::size_t c = 0; c < kk; ++c)
            std::fill(centroids[c].begin(), centroids[c].end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double>& c = centroids[static_cast<std::size_t>(assignments[i])];
            for (std::size_t t = 0; t < c.size(); ++t) c[t] += pts[i][t];
        }
        for (std::size_t c = 0; c < kk; ++c) {
            const double inv = 1.0 / static_cast<double>(counts[c]);
            for (double& v : centroids[c]) v *= inv;
            if (metric == Metric::cid) centroid_ce[c] = complexity_estimate(centroids[c]);
        }

        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = static_cast<std::size_t>(assignments[i]);
            const double d =
                centroid_distance(pts[i], pt_ce[i], centroids[c], centroid_ce[c], metric);
            objective += metric == Metric::euclidean ? d * d : d;
        }
        objective_history.push_back(objective);
    }

    ClusterModel model;
    model.k = k;
    model.metric = metric;
    model.algo = ClusterAlgo::kmeans;
    model.seed = seed;
    model.assignments = std::move(assignments);
    model.centroids = std::move(centroids);
    model.n_iterations = iterations;
    model.objective_history = std::move(objective_history);
    model.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = static_cast<std::size_t>(model.assignments[i]);
        model.inertia +=
            centroid_distance(pts[i], pt_ce[i], model.centroids[c], centroid_ce[c], metric);
    }
    return model;
}

ClusterModel kmedoids_fit(const DistanceMatrix& dm, int k, std::uint64_t seed, int max_iter) {
    const std::size_t n = dm.n;
    check_k(k, n);
    check_max_iter(max_iter);
    const std::size_t kk = static_cast<std::size_t>(k);

    Rng rng = Rng::substream(seed, kKmedoidsStream);

    // Seed medoids with squared-distance weighting, like k-means++.
    std::vector<std::size_t> medoids;
    medoids.reserve(kk);
    {
        medoids.push_back(static_cast<std::size_t>(rng.below(n)));
        std::vector<double> d2(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = dm.at(i, medoids[0]);
            d2[i] = d * d;
        }
        while (medoids.size() < kk) {
            const std::size_t pick = weighted_pick(d2, rng);
            medoids.push_back(pick);
            for (std::size_t i = 0; i < n; ++i) {
                const double d = dm.at(i, pick);
                d2[i] = std::min(d2[i], d * d);
            }
        }
    }

    std::vector<int> assignments(n, -1);
    int iterations = 0;
    std::vector<double> objective_history;

    for (int iter = 0; iter < max_iter; ++iter) {
        ++iterations;

        // Assign: medoids claim themselves, everyone else goes to the
        // nearest medoid (ties to the lowest cluster index).
        std::vector<int> next(n, -1);
        for (std::size_t c = 0; c < kk; ++c) next[medoids[c]] = static_cast<int>(c);
        for (std::size_t i = 0; i < n; ++i) {
            if (next[i] >= 0) continue;
            int best = 0;
            double best_d = dm.at(i, medoids[0]);
            for (std::size_t c = 1; c < kk; ++c) {
                const double d = dm.at(i, medoids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(c);
                }
            }
            next[i] = best;
        }

        // Update: per cluster, move the medoid to the member minimizing the
        // within-cluster distance sum (ties to the lowest station index).
        bool changed_medoid = false;
        std::vector<std::vector<std::size_t>> members(kk);
        for (std::size_t i = 0; i < n; ++i)
            members[static_cast<std::size_t>(next[i])].push_back(i);
        for (std::size_t c = 0; c < kk; ++c) {
            double best_cost = std::numeric_limits<double>::infinity();
            std::size_t best_m = medoids[c];
            for (std::size_t cand : members[c]) {
                double cost = 0.0;
                for (std::size_t other : members[c]) cost += dm.at(cand, other);
                if (cost < best_cost) {
                    best_cost = cost;
                    best_m = cand;
                }
            }
            if (best_m != medoids[c]) {
                medoids[c] = best_m;
                changed_medoid = true;
            }
        }

        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            objective += dm.at(i, medoids[static_cast<std::size_t>(next[i])]);
        objective_history.push_back(objective);

        const bool converged = !changed_medoid && next == assignments;
        assignments = std::move(next);
        if (converged) break;
    }

    ClusterModel model;
    model.k = k;
    model.metric = dm.metric;
    model.algo = ClusterAlgo::kmedoids;
    model.seed = seed;
    model.assignments = std::move(assignments);
    model.medoid_indices.reserve(kk);
    for (std::size_t m : medoids) model.medoid_indices.push_back(static_cast<int>(m));
    model.n_iterations = iterations;
    model.objective_history = std::move(objective_history);
    model.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        model.inertia += dm.at(i, medoids[static_cast<std::size_t>(model.assignments[i])]);
    return model;
}

ClusterModel kmedoids_fit(const Dataset& ds, Metric metric, int k, std::uint64_t seed,
                          int max_iter) {
    const DistanceMatrix dm = pairwise_matrix(ds, metric);
    ClusterModel model = kmedoids_fit(dm, k, seed, max_iter);
    model.centroids.reserve(model.medoid_indices.size());
    for (int m : model.medoid_indices)
        model.centroids.push_back(ds.stations[static_cast<std::size_t>(m)].values);
    return model;
}

SilhouetteReport silhouette(const DistanceMatrix& dm, const std::vector<int>& assignments) {
    const std::size_t n = dm.n;
    if (assignments.size() != n)
        fail(ErrorCode::shape, "assignments length " + std::to_string(assignments.size()) +
                                   " != matrix size " + std::to_string(n));

    std::unordered_map<int, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters[assignments[i]].push_back(i);
    if (clusters.size() < 2)
        fail(ErrorCode::degenerate, "silhouette is undefined for a single cluster");

    SilhouetteReport report;
    report.k = static_cast<int>(clusters.size());
    report.per_station.assign(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<std::size_t>& own = clusters[assignments[i]];
        if (own.size() == 1) continue;  // singleton convention: s = 0
        double a = 0.0;
        for (std::size_t j : own)
            if (j != i) a += dm.at(i, j);
        a /= static_cast<double>(own.size() - 1);

        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, members] : clusters) {
            if (label == assignments[i]) continue;
            double mean = 0.0;
            for (std::size_t j : members) mean += dm.at(i, j);
            mean /= static_cast<double>(members.size());
            b = std::min(b, mean);
        }

        const double denom = std::max(a, b);
        report.per_station[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }

    double sum = 0.0;
    for (double s : report.per_station) sum += s;
    report.mean = sum / static_cast<double>(n);
    return report;
}

KSelection select_k(const Dataset& ds, int k_min, int k_max, std::uint64_t seed, Metric metric,
                    ClusterAlgo algo, int max_iter) {
    const std::size_t n = ds.stations.size();
    if (k_min < 2 || k_min > k_max || static_cast<std::size_t>(k_max) > n - 1)
        fail(ErrorCode::parameter, "k range [" + std::to_string(k_min) + ", " +
                                       std::to_string(k_max) + "] invalid for " +
                                       std::to_string(n) + " stations (need 2 <= k_min <= " +
                                       "k_max <= n-1)");

    const DistanceMatrix dm = pairwise_matrix(ds, metric);
    KSelection sel;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = k_min; k <= k_max; ++k) {
        ClusterModel model = algo == ClusterAlgo::kmeans
                                 ? kmeans_fit(ds, k, seed, metric, max_iter)
                                 : kmedoids_fit(ds, metric, k, seed, max_iter);
        const SilhouetteReport rep = silhouette(dm, model.assignments);
        sel.scores.emplace_back(k, rep.mean);
        if (rep.mean > best_score) {  // ties keep the smaller k
            best_score = rep.mean;
            sel.k_best = k;
            sel.best = std::move(model);
        }
    }
    return sel;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size())
        fail(ErrorCode::shape, "labelings have different lengths: " + std::to_string(a.size()) +
                                   " vs " + std::to_string(b.size()));
    const std::size_t n = a.size();
    if (n < 2) fail(ErrorCode::parameter, "ARI needs at least 2 points");

    auto compact = [](const std::vector<int>& labels) {
        std::unordered_map<int, int> ids;
        std::vector<int> out(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const auto [it, _] = ids.try_emplace(labels[i], static_cast<int>(ids.size()));
            out[i] = it->second;
        }
        return std::make_pair(out, ids.size());
    };
    const auto [ca, na] = compact(a);
    const auto [cb, nb] = compact(b);

    std::vector<long long> table(na * nb, 0);
    std::vector<long long> row(na, 0), col(nb, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++table[static_cast<std::size_t>(ca[i]) * nb + static_cast<std::size_t>(cb[i])];
        ++row[static_cast<std::size_t>(ca[i])];
        ++col[static_cast<std::size_t>(cb[i])];
    }
    auto comb2 = [](long long m) { return static_cast<double>(m) * (m - 1) / 2.0; };
    double sum_cells = 0.0;
    for (long long c : table) sum_cells += comb2(c);
    double sum_rows = 0.0;
    for (long long r : row) sum_rows += comb2(r);
    double sum_cols = 0.0;
    for (long long c : col) sum_cols += comb2(c);
    const double total = comb2(static_cast<long long>(n));
    const double expected = sum_rows * sum_cols / total;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;  // both partitions trivial and identical
    return (sum_cells - expected) / (max_index - expected);
}

}  // namespace stationpulse
