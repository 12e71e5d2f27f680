#pragma once

#include <span>
#include <string>
#include <vector>

#include "station_pulse/dataset.hpp"

namespace stationpulse {

enum class Metric { cid, euclidean };

const char* metric_name(Metric m);
Metric metric_from_name(const std::string& name);

/// Complexity estimate: root of summed squared consecutive differences.
/// Zero iff the series is constant. Requires length >= 2.
double complexity_estimate(std::span<const double> x);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Complexity-invariant distance: ED(q,c) * max(CE)/min(CE). Both CE below
/// 1e-12 degrades to plain ED; exactly one below clamps the denominator to
/// 1e-12 instead of dividing by zero.
double cid(std::span<const double> q, std::span<const double> c);

/// cid() with both complexity estimates precomputed (used by the clusterers,
/// which cache CE per series).
double cid_with_ce(std::span<const double> q, std::span<const double> c, double ce_q, double ce_c);

double series_distance(std::span<const double> a, std::span<const double> b, Metric m);

/// Symmetric pairwise matrix over the dataset's stations, in station order.
struct DistanceMatrix {
    std::size_t n = 0;
    Metric metric = Metric::cid;
    std::vector<double> d;  // row-major n*n
    std::vector<std::string> ids;

    double at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
    double& at(std::size_t i, std::size_t j) { return d[i * n + j]; }
};

/// Computes the upper triangle and mirrors it, so symmetry is bit-exact.
DistanceMatrix pairwise_matrix(const Dataset& ds, Metric metric);

/// CSV with a header row and leading column of station ids.
void write_matrix_csv(const DistanceMatrix& m, const std::string& path);

}  // namespace stationpulse
