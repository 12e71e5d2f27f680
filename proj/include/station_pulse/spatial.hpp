#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "station_pulse/dataset.hpp"

namespace stationpulse {

enum class WeightScheme { inverse_distance, knn };

const char* weight_scheme_name(WeightScheme s);

/// Great-circle distance in km (Earth radius 6371.0 km).
double haversine_km(double lat_a, double lon_a, double lat_b, double lon_b);

struct SpatialWeights {
    std::size_t n = 0;
    std::vector<double> w;  // row-major n*n, zero diagonal
    WeightScheme scheme = WeightScheme::inverse_distance;
    bool row_standardized = true;
    int knn_k = 0;

    double at(std::size_t i, std::size_t j) const { return w[i * n + j]; }
    double& at(std::size_t i, std::size_t j) { return w[i * n + j]; }
};

/// inverse_distance: w[i][j] = 1/d_km. knn(k): w[i][j] = 1 for the k nearest
/// neighbours of i (asymmetric allowed). Optional row standardization.
SpatialWeights build_weights(const std::vector<StationMeta>& metas, WeightScheme scheme,
                             int knn_k = 0, bool row_standardize = true);

/// Global Moran's I: (N/W) * sum_ij w_ij (x_i - mean)(x_j - mean) / sum_i
/// (x_i - mean)^2. Rejects constant vectors.
double morans_i(std::span<const double> x, const SpatialWeights& w);

struct MoranResult {
    std::size_t timestamp = 0;  // grid index; npos for the mean-utilization summary
    double i_observed = 0.0;
    double e_i = 0.0;  // -1/(N-1), emitted rather than recomputed
    double p_value = 0.0;
    int n_permutations = 0;
    double perm_mean = 0.0;
    double perm_sd = 0.0;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Two-sided permutation test. Each permutation draws from its own substream
/// of (seed, permutation index), so the p-value is schedule-independent.
MoranResult permutation_test(std::span<const double> x, const SpatialWeights& w,
                             int n_permutations, std::uint64_t seed);

struct MoranScan {
    std::vector<MoranResult> results;
    std::vector<std::size_t> skipped;  // constant snapshots
    std::optional<MoranResult> summary;
};

/// Runs permutation_test on the cross-station vector at each grid index.
/// Constant snapshots are skipped and reported in `skipped`.
MoranScan moran_scan(const Dataset& ds, const SpatialWeights& w,
                     const std::vector<std::size_t>& timestamps, int n_permutations,
                     std::uint64_t seed);

/// Same test on each station's mean value over the whole grid.
MoranResult moran_summary(const Dataset& ds, const SpatialWeights& w, int n_permutations,
                          std::uint64_t seed);

}  // namespace stationpulse
