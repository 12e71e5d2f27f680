#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "station_pulse/dataset.hpp"
#include "station_pulse/distance.hpp"

namespace stationpulse {

enum class ClusterAlgo { kmeans, kmedoids };

const char* algo_name(ClusterAlgo a);
ClusterAlgo algo_from_name(const std::string& name);

struct ClusterModel {
    int k = 0;
    Metric metric = Metric::cid;
    ClusterAlgo algo = ClusterAlgo::kmeans;
    std::uint64_t seed = 0;
    std::vector<int> assignments;               // one cluster index per station
    std::vector<std::vector<double>> centroids; // mean series (k-means) or medoid series
    std::vector<int> medoid_indices;            // k-medoids only
    double inertia = 0.0;                       // sum of distance to assigned centroid
    int n_iterations = 0;
    /// Per-round Lloyd objective. For the euclidean metric this is the sum of
    /// squared distances (the quantity the mean update minimizes, so it is
    /// non-increasing); for cid it is the plain distance sum, recorded as a
    /// diagnostic only.
    std::vector<double> objective_history;
};

struct SilhouetteReport {
    std::vector<double> per_station;
    double mean = 0.0;
    int k = 0;  // number of distinct clusters present
};

/// Lloyd's algorithm under the chosen metric: k-means++ seeding, assignment
/// to the nearest centroid (ties to the lowest index), pointwise-mean
/// centroid update. An emptied cluster is reseeded with the station farthest
/// from its assigned centroid. Stops when assignments stop changing.
ClusterModel kmeans_fit(const Dataset& ds, int k, std::uint64_t seed, Metric metric,
                        int max_iter = 300);

/// Alternating k-medoids on a precomputed matrix: seeded initial medoids,
/// then assign / re-pick the member minimizing the within-cluster distance
/// sum, until no swap improves the total cost. Medoids stay assigned to
/// their own cluster, so no cluster can empty out.
ClusterModel kmedoids_fit(const DistanceMatrix& dm, int k, std::uint64_t seed,
                          int max_iter = 300);

/// Convenience wrapper that also fills ClusterModel::centroids with the
/// medoid series.
ClusterModel kmedoids_fit(const Dataset& ds, Metric metric, int k, std::uint64_t seed,
                          int max_iter = 300);

/// Standard silhouette on a precomputed matrix. Singleton clusters score 0
/// by convention. Fails if fewer than 2 distinct clusters are present.
SilhouetteReport silhouette(const DistanceMatrix& dm, const std::vector<int>& assignments);

struct KSelection {
    int k_best = 0;
    std::vector<std::pair<int, double>> scores;  // (k, mean silhouette)
    ClusterModel best;
};

/// Fits every k in [k_min, k_max] with the same seed, scores each by mean
/// silhouette on the pairwise matrix of the fit metric, and returns the
/// argmax (ties to the smallest k).
KSelection select_k(const Dataset& ds, int k_min, int k_max, std::uint64_t seed, Metric metric,
                    ClusterAlgo algo = ClusterAlgo::kmeans, int max_iter = 300);

/// Chance-adjusted Rand index between two labelings of the same points.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace stationpulse
