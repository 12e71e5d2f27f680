#include "station_pulse/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "station_pulse/error.hpp"
#include "station_pulse/rng.hpp"

namespace stationpulse {

namespace {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kPermStream = 0x6d6f72616eULL;  // "moran"
constexpr std::uint64_t kScanStream = 0x7363616eULL;    // "scan"

double deg2rad(double deg) { return deg * kPi / 180.0; }

struct CenteredX {
    std::vector<double> z;
    double variance_sum = 0.0;
};

CenteredX center(std::span<const double> x) {
    CenteredX out;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    out.z.reserve(x.size());
    for (double v : x) {
        const double z = v - mean;
        out.z.push_back(z);
        out.variance_sum += z * z;
    }
    return out;
}

double moran_from_centered(const CenteredX& cx, const SpatialWeights& w, double weight_sum) {
    double cross = 0.0;
    for (std::size_t i = 0; i < w.n; ++i) {
        const double zi = cx.z[i];
        if (zi == 0.0) continue;
        const double* row = &w.w[i * w.n];
        double acc = 0.0;
        for (std::size_t j = 0; j < w.n; ++j) acc += row[j] * cx.z[j];
        cross += zi * acc;
    }
    return (static_cast<double>(w.n) / weight_sum) * cross / cx.variance_sum;
}

double total_weight(const SpatialWeights& w) {
    double sum = 0.0;
    for (double v : w.w) sum += v;
    return sum;
}

void check_vector(std::span<const double> x, const SpatialWeights& w) {
    if (x.size() != w.n)
        fail(ErrorCode::shape, "value vector length " + std::to_string(x.size()) +
                                   " != weight matrix size " + std::to_string(w.n));
    for (double v : x)
        if (!std::isfinite(v)) fail(ErrorCode::validation, "value vector has non-finite entries");
}

}  // namespace

const char* weight_scheme_name(WeightScheme s) {
    return s == WeightScheme::inverse_distance ? "inverse_distance" : "knn";
}

double haversine_km(double lat_a, double lon_a, double lat_b, double lon_b) {
    validate_coordinates(lat_a, lon_a, "haversine point a");
    validate_coordinates(lat_b, lon_b, "haversine point b");
    const double phi_a = deg2rad(lat_a);
    const double phi_b = deg2rad(lat_b);
    const double d_phi = deg2rad(lat_b - lat_a);
    const double d_lambda = deg2rad(lon_b - lon_a);
    const double s_phi = std::sin(d_phi / 2.0);
    const double s_lambda = std::sin(d_lambda / 2.0);
    const double h = s_phi * s_phi + std::cos(phi_a) * std::cos(phi_b) * s_lambda * s_lambda;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

SpatialWeights build_weights(const std::vector<StationMeta>& metas, WeightScheme scheme,
                             int knn_k, bool row_standardize) {
    const std::size_t n = metas.size();
    if (n < 3)
        fail(ErrorCode::parameter,
             "spatial weights need at least 3 stations, got " + std::to_string(n));
    if (scheme == WeightScheme::knn &&
        (knn_k < 1 || static_cast<std::size_t>(knn_k) >= n))
        fail(ErrorCode::parameter, "knn k = " + std::to_string(knn_k) +
                                       " must be in [1, n-1] for n = " + std::to_string(n));

    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d =
                haversine_km(metas[i].lat, metas[i].lon, metas[j].lat, metas[j].lon);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }

    SpatialWeights w;
    w.n = n;
    w.scheme = scheme;
    w.row_standardized = row_standardize;
    w.knn_k = scheme == WeightScheme::knn ? knn_k : 0;
    w.w.assign(n * n, 0.0);

    if (scheme == WeightScheme::inverse_distance) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double d = dist[i * n + j];
                if (d == 0.0)
                    fail(ErrorCode::degenerate, "stations '" + metas[i].station_id + "' and '" +
                                                    metas[j].station_id +
                                                    "' are coincident; inverse-distance weights "
                                                    "are undefined");
                w.at(i, j) = 1.0 / d;
            }
    } else {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            // Nearest first; equal distances break toward the lower index.
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const double da = dist[i * n + a];
                const double db = dist[i * n + b];
                return da != db ? da < db : a < b;
            });
            int taken = 0;
            for (std::size_t j : order) {
                if (j == i) continue;
                w.at(i, j) = 1.0;
                if (++taken == knn_k) break;
            }
        }
    }

    if (row_standardize) {
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) sum += w.at(i, j);
            if (sum > 0.0)
                for (std::size_t j = 0; j < n; ++j) w.at(i, j) /= sum;
        }
    }
    return w;
}

double morans_i(std::span<const double> x, const SpatialWeights& w) {
    check_vector(x, w);
    const CenteredX cx = center(x);
    if (cx.variance_sum == 0.0)
        fail(ErrorCode::degenerate, "Moran's I is undefined for a constant value vector");
    return moran_from_centered(cx, w, total_weight(w));
}

MoranResult permutation_test(std::span<const double> x, const SpatialWeights& w,
                             int n_permutations, std::uint64_t seed) {
    if (n_permutations < 1)
        fail(ErrorCode::parameter,
             "n_permutations must be >= 1, got " + std::to_string(n_permutations));
    check_vector(x, w);
    const CenteredX cx = center(x);
    if (cx.variance_sum == 0.0)
        fail(ErrorCode::degenerate, "Moran's I is undefined for a constant value vector");

    const double weight_sum = total_weight(w);
    const double i_obs = moran_from_centered(cx, w, weight_sum);
    const double e_i = -1.0 / static_cast<double>(w.n - 1);
    const double reference = std::abs(i_obs - e_i);

    // Permuting x permutes the centered values; mean and variance are
    // permutation-invariant.
    std::size_t extreme = 0;
    double sum_i = 0.0;
    double sum_i2 = 0.0;
    CenteredX perm = cx;
    for (int p = 0; p < n_permutations; ++p) {
        Rng rng = Rng::substream(seed, kPermStream, static_cast<std::uint64_t>(p));
        perm.z = cx.z;
        rng.shuffle(perm.z);
        const double i_p = moran_from_centered(perm, w, weight_sum);
        if (std::abs(i_p - e_i) >= reference) ++extreme;
        sum_i += i_p;
        sum_i2 += i_p * i_p;
    }

    MoranResult result;
    result.timestamp = MoranResult::npos;
    result.i_observed = i_obs;
    result.e_i = e_i;
    result.p_value =
        (1.0 + static_cast<double>(extreme)) / (static_cast<double>(n_permutations) + 1.0);
    result.n_permutations = n_permutations;
    result.perm_mean = sum_i / static_cast<double>(n_permutations);
    const double var =
        sum_i2 / static_cast<double>(n_permutations) - result.perm_mean * result.perm_mean;
    result.perm_sd = std::sqrt(std::max(0.0, var));
    return result;
}

MoranScan moran_scan(const Dataset& ds, const SpatialWeights& w,
                     const std::vector<std::size_t>& timestamps, int n_permutations,
                     std::uint64_t seed) {
    if (timestamps.empty()) fail(ErrorCode::parameter, "no snapshot timestamps given");
    if (ds.stations.size() != w.n)
        fail(ErrorCode::shape, "dataset station count " + std::to_string(ds.stations.size()) +
                                   " != weight matrix size " + std::to_string(w.n));

    MoranScan scan;
    std::vector<double> x(ds.stations.size(), 0.0);
    for (std::size_t idx : timestamps) {
        if (idx >= ds.grid.n_steps)
            fail(ErrorCode::parameter, "snapshot index " + std::to_string(idx) +
                                           " outside grid of " +
                                           std::to_string(ds.grid.n_steps) + " steps");
        for (std::size_t s = 0; s < ds.stations.size(); ++s) x[s] = ds.stations[s].values[idx];
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        if (*lo == *hi) {
            scan.skipped.push_back(idx);
            continue;
        }
        MoranResult r = permutation_test(x, w, n_permutations, derive_stream(seed, kScanStream, idx));
        r.timestamp = idx;
        scan.results.push_back(r);
    }
    return scan;
}

MoranResult moran_summary(const Dataset& ds, const SpatialWeights& w, int n_permutations,
                          std::uint64_t seed) {
    if (ds.stations.size() != w.n)
        fail(ErrorCode::shape, "dataset station count " + std::to_string(ds.stations.size()) +
                                   " != weight matrix size " + std::to_string(w.n));
    std::vector<double> means;
    means.reserve(ds.stations.size());
    for (const StationSeries& s : ds.stations) {
        const double sum = std::accumulate(s.values.begin(), s.values.end(), 0.0);
        means.push_back(sum / static_cast<double>(s.values.size()));
    }
    MoranResult r = permutation_test(means, w, n_permutations,
                                     derive_stream(seed, kScanStream, MoranResult::npos));
    r.timestamp = MoranResult::npos;
    return r;
}

}  // namespace stationpulse
