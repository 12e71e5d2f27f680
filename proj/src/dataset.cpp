#include "station_pulse/dataset.hpp"

#include <cmath>
#include <unordered_set>

#include "station_pulse/error.hpp"

namespace stationpulse {

std::size_t StationSeries::observed_count() const {
    std::size_t n = 0;
    for (std::uint8_t o : observed) n += (o != 0);
    return n;
}

std::ptrdiff_t Dataset::index_of(std::string_view station_id) const {
    for (std::size_t i = 0; i < stations.size(); ++i)
        if (stations[i].meta.station_id == station_id) return static_cast<std::ptrdiff_t>(i);
    return -1;
}

void validate_coordinates(double lat, double lon, const std::string& context) {
    if (!(std::isfinite(lat) && lat >= -90.0 && lat <= 90.0))
        fail(ErrorCode::validation, context + ": latitude " + std::to_string(lat) +
                                        " outside [-90, 90]");
    if (!(std::isfinite(lon) && lon >= -180.0 && lon <= 180.0))
        fail(ErrorCode::validation, context + ": longitude " + std::to_string(lon) +
                                        " outside [-180, 180]");
}

void validate_dataset(const Dataset& ds) {
    make_grid(ds.grid.start, ds.grid.n_steps);
    std::unordered_set<std::string> seen;
    for (const StationSeries& s : ds.stations) {
        const std::string& id = s.meta.station_id;
        if (id.empty()) fail(ErrorCode::validation, "station with empty station_id");
        if (!seen.insert(id).second)
            fail(ErrorCode::validation, "duplicate station_id '" + id + "'");
        validate_coordinates(s.meta.lat, s.meta.lon, "station '" + id + "'");
        if (s.meta.storage_kg && !(*s.meta.storage_kg > 0.0 && std::isfinite(*s.meta.storage_kg)))
            fail(ErrorCode::validation, "station '" + id + "': storage_kg must be positive");
        if (s.values.size() != ds.grid.n_steps || s.observed.size() != ds.grid.n_steps)
            fail(ErrorCode::shape, "station '" + id + "': series length " +
                                       std::to_string(s.values.size()) + " != grid length " +
                                       std::to_string(ds.grid.n_steps));
        // Raw capacities must be non-negative; normalized values may not be
        // (z_score), so only finiteness is required once normalization ran.
        const bool raw = ds.normalization == "none";
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            if (!std::isfinite(s.values[i]))
                fail(ErrorCode::validation, "station '" + id + "': value at step " +
                                                std::to_string(i) + " is not finite");
            if (raw && s.observed[i] && s.values[i] < 0.0)
                fail(ErrorCode::validation, "station '" + id + "': observed value at step " +
                                                std::to_string(i) + " is negative");
        }
    }
}

}  // namespace stationpulse
