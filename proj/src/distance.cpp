#include "station_pulse/distance.hpp"

#include <cmath>
#include <fstream>

#include "station_pulse/csv.hpp"
#include "station_pulse/error.hpp"

namespace stationpulse {

namespace {
constexpr double kComplexityEpsilon = 1e-12;

void check_pair(std::span<const double> q, std::span<const double> c) {
    if (q.size() != c.size())
        fail(ErrorCode::shape, "series lengths differ: " + std::to_string(q.size()) + " vs " +
                                   std::to_string(c.size()));
    if (q.size() < 2)
        fail(ErrorCode::length, "series of length " + std::to_string(q.size()) +
                                    " has no complexity estimate (need >= 2)");
}
}  // namespace

const char* metric_name(Metric m) {
    return m == Metric::cid ? "cid" : "euclidean";
}

Metric metric_from_name(const std::string& name) {
    if (name == "cid") return Metric::cid;
    if (name == "euclidean") return Metric::euclidean;
    fail(ErrorCode::parameter, "unknown metric '" + name + "'");
}

double complexity_estimate(std::span<const double> x) {
    if (x.size() < 2)
        fail(ErrorCode::length, "series of length " + std::to_string(x.size()) +
                                    " has no complexity estimate (need >= 2)");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double d = x[i] - x[i + 1];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        fail(ErrorCode::shape, "series lengths differ: " + std::to_string(a.size()) + " vs " +
                                   std::to_string(b.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double cid_with_ce(std::span<const double> q, std::span<const double> c, double ce_q,
                   double ce_c) {
    const double ed = euclidean_distance(q, c);
    const double hi = std::max(ce_q, ce_c);
    const double lo = std::min(ce_q, ce_c);
    if (hi < kComplexityEpsilon) return ed;  // both flat: CF := 1
    return ed * (hi / std::max(lo, kComplexityEpsilon));
}

double cid(std::span<const double> q, std::span<const double> c) {
    check_pair(q, c);
    return cid_with_ce(q, c, complexity_estimate(q), complexity_estimate(c));
}

double series_distance(std::span<const double> a, std::span<const double> b, Metric m) {
    return m == Metric::cid ? cid(a, b) : euclidean_distance(a, b);
}

DistanceMatrix pairwise_matrix(const Dataset& ds, Metric metric) {
    const std::size_t n = ds.stations.size();
    if (n < 2)
        fail(ErrorCode::parameter,
             "pairwise matrix needs at least 2 stations, got " + std::to_string(n));
    for (const StationSeries& s : ds.stations)
        for (double v : s.values)
            if (!std::isfinite(v))
                fail(ErrorCode::validation,
                     "station '" + s.meta.station_id + "' has non-finite values");

    DistanceMatrix m;
    m.n = n;
    m.metric = metric;
    m.d.assign(n * n, 0.0);
    m.ids.reserve(n);
    for (const StationSeries& s : ds.stations) m.ids.push_back(s.meta.station_id);

    std::vector<double> ce;
    if (metric == Metric::cid) {
        ce.reserve(n);
        for (const StationSeries& s : ds.stations) ce.push_back(complexity_estimate(s.values));
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v =
                metric == Metric::cid
                    ? cid_with_ce(ds.stations[i].values, ds.stations[j].values, ce[i], ce[j])
                    : euclidean_distance(ds.stations[i].values, ds.stations[j].values);
            m.at(i, j) = v;
            m.at(j, i) = v;
        }
    }
    return m;
}

void write_matrix_csv(const DistanceMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write '" + path + "'");
    out << "station_id";
    for (const std::string& id : m.ids) out << ',' << csv_escape(id);
    out << '\n';
    for (std::size_t i = 0; i < m.n; ++i) {
        out << csv_escape(m.ids[i]);
        for (std::size_t j = 0; j < m.n; ++j) out << ',' << format_double(m.at(i, j));
        out << '\n';
    }
    if (!out.flush()) fail(ErrorCode::io, "write failed for '" + path + "'");
}

}  // namespace stationpulse
