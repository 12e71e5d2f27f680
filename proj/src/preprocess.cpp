#include "station_pulse/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "station_pulse/error.hpp"

namespace stationpulse {

const char* normalization_name(NormalizationMethod m) {
    switch (m) {
        case NormalizationMethod::min_max: return "min_max";
        case NormalizationMethod::storage_fraction: return "storage_fraction";
        case NormalizationMethod::z_score: return "z_score";
    }
    return "unknown";
}

NormalizationMethod normalization_from_name(const std::string& name) {
    if (name == "min_max") return NormalizationMethod::min_max;
    if (name == "storage_fraction") return NormalizationMethod::storage_fraction;
    if (name == "z_score") return NormalizationMethod::z_score;
    fail(ErrorCode::parameter, "unknown normalization method '" + name + "'");
}

StationSeries impute_linear(const StationSeries& s) {
    std::vector<std::size_t> obs;
    for (std::size_t i = 0; i < s.observed.size(); ++i)
        if (s.observed[i]) obs.push_back(i);
    if (obs.empty())
        fail(ErrorCode::all_missing,
             "station '" + s.meta.station_id + "' has no observed values");

    StationSeries out = s;
    // Leading and trailing gaps take the nearest observed value.
    for (std::size_t i = 0; i < obs.front(); ++i) out.values[i] = s.values[obs.front()];
    for (std::size_t i = obs.back() + 1; i < s.values.size(); ++i)
        out.values[i] = s.values[obs.back()];
    // Interior gaps are bridged linearly between their observed endpoints.
    for (std::size_t seg = 0; seg + 1 < obs.size(); ++seg) {
        const std::size_t lo = obs[seg];
        const std::size_t hi = obs[seg + 1];
        const double v_lo = s.values[lo];
        const double v_hi = s.values[hi];
        const double span = static_cast<double>(hi - lo);
        for (std::size_t i = lo + 1; i < hi; ++i)
            out.values[i] = v_lo + (v_hi - v_lo) * static_cast<double>(i - lo) / span;
    }
    return out;
}

StationSeries normalize(const StationSeries& s, NormalizationMethod method,
                        std::vector<std::string>* warnings) {
    StationSeries out = s;
    const std::size_t n = s.values.size();

    if (method == NormalizationMethod::storage_fraction && !s.meta.storage_kg) {
        if (warnings)
            warnings->push_back("station '" + s.meta.station_id +
                                "': storage_kg unknown, falling back to min_max");
        method = NormalizationMethod::min_max;
    }

    switch (method) {
        case NormalizationMethod::storage_fraction: {
            const double storage = *s.meta.storage_kg;
            for (double& v : out.values) v /= storage;
            break;
        }
        case NormalizationMethod::min_max: {
            const auto [lo_it, hi_it] = std::minmax_element(s.values.begin(), s.values.end());
            const double lo = *lo_it;
            const double hi = *hi_it;
            if (hi > lo) {
                const double range = hi - lo;
                for (double& v : out.values) v = (v - lo) / range;
            } else {
                std::fill(out.values.begin(), out.values.end(), 0.5);
            }
            break;
        }
        case NormalizationMethod::z_score: {
            double mean = 0.0;
            for (double v : s.values) mean += v;
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (double v : s.values) var += (v - mean) * (v - mean);
            var /= static_cast<double>(n);  // population variance
            const double sd = std::sqrt(var);
            if (sd == 0.0)
                fail(ErrorCode::degenerate, "station '" + s.meta.station_id +
                                                "': constant series has no z_score");
            for (double& v : out.values) v = (v - mean) / sd;
            break;
        }
    }
    return out;
}

Dataset preprocess_all(const Dataset& ds, NormalizationMethod method,
                       std::vector<std::string>* warnings) {
    if (ds.stations.empty()) fail(ErrorCode::empty_input, "dataset has no stations");
    Dataset out;
    out.grid = ds.grid;
    out.normalization = normalization_name(method);
    out.stations.reserve(ds.stations.size());
    for (const StationSeries& s : ds.stations) {
        try {
            out.stations.push_back(normalize(impute_linear(s), method, warnings));
        } catch (const Error& e) {
            if (std::string(e.what()).find(s.meta.station_id) != std::string::npos) throw;
            fail(e.code(), "station '" + s.meta.station_id + "': " + e.what());
        }
    }
    return out;
}

}  // namespace stationpulse
