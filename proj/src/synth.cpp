#include "station_pulse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "station_pulse/error.hpp"
#include "station_pulse/rng.hpp"

namespace stationpulse {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kClampCeiling = 1.2;  // above 1.0 so noise cannot fake a flat-top

// California-ish bounding box for the coordinate pool.
constexpr double kLatMin = 32.5, kLatMax = 42.0;
constexpr double kLonMin = -124.4, kLonMax = -114.1;

// Substream tags.
constexpr std::uint64_t kShapeStream = 1;
constexpr std::uint64_t kPhaseStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kCoordStream = 4;

std::uint64_t kind_tag(ArchetypeKind k) { return static_cast<std::uint64_t>(k) + 1; }

const char* kind_code(ArchetypeKind k) {
    switch (k) {
        case ArchetypeKind::reliable: return "REL";
        case ArchetypeKind::overstressed: return "OVR";
        case ArchetypeKind::connector: return "CON";
        case ArchetypeKind::cryo_small_tank: return "CRY";
        case ArchetypeKind::downtime: return "DWN";
    }
    return "UNK";
}

double default_drawdown_rate(ArchetypeKind k) {
    switch (k) {
        case ArchetypeKind::overstressed: return 0.2;
        default: return 0.025;  // 1.0 -> 0.4 over a 24 h refill period
    }
}

std::size_t default_phase_jitter(ArchetypeKind k) {
    switch (k) {
        case ArchetypeKind::connector: return 2;
        case ArchetypeKind::reliable:
        case ArchetypeKind::downtime: return 1;
        // A shift on fast cycles decorrelates same-kind pairs completely,
        // which would defeat the within-kind tightness the benchmark needs.
        case ArchetypeKind::overstressed:
        case ArchetypeKind::cryo_small_tank: return 0;
    }
    return 0;
}

void validate_spec(const ArchetypeSpec& spec) {
    make_grid(spec.grid.start, spec.grid.n_steps);
    if (spec.n_series < 1) fail(ErrorCode::parameter, "n_series must be >= 1");
    if (!(spec.noise_sigma >= 0.0 && spec.noise_sigma < 0.5))
        fail(ErrorCode::parameter, "noise_sigma must be in [0, 0.5), got " +
                                       std::to_string(spec.noise_sigma));
    if (!(spec.params.refill_period_h >= 2.0))
        fail(ErrorCode::parameter, "refill_period_h must be >= 2");
    if (spec.params.cycle_period_h < 2)
        fail(ErrorCode::parameter, "cycle_period_h must be >= 2 at hourly sampling");
    if (!(spec.params.depletion_floor >= 0.0 && spec.params.depletion_floor < 1.0))
        fail(ErrorCode::parameter, "depletion_floor must be in [0, 1)");
    if (spec.params.downtime_span_h >= spec.grid.n_steps)
        fail(ErrorCode::parameter, "downtime_span_h " +
                                       std::to_string(spec.params.downtime_span_h) +
                                       " must be shorter than the grid (" +
                                       std::to_string(spec.grid.n_steps) + " h)");
    const double rate = spec.params.drawdown_rate.value_or(default_drawdown_rate(spec.kind));
    if (!(rate > 0.0 && rate <= 1.0))
        fail(ErrorCode::parameter, "drawdown_rate must be in (0, 1]");
}

/// Reliable shape: refill to 1.0 every refill_period_h, linear drawdown, a
/// mild 24 h modulation on top.
double reliable_value(std::size_t t, const ArchetypeParams& p, double rate) {
    const double period = p.refill_period_h;
    const double h = std::fmod(static_cast<double>(t), period);
    const double base = 1.0 - rate * h;
    const double diurnal =
        0.02 * std::sin(2.0 * kPi * static_cast<double>(t % 24) / 24.0);
    return std::max(0.0, base + diurnal);
}

std::vector<double> overstressed_canonical(const ArchetypeSpec& spec, double rate) {
    std::vector<double> out(spec.grid.n_steps, 0.0);
    Rng rng = Rng::substream(spec.seed, kind_tag(spec.kind), kShapeStream);
    const double floor = spec.params.depletion_floor;
    double level = 1.0;
    bool draining = true;
    std::int64_t delay_left = 0;
    for (std::size_t t = 0; t < out.size(); ++t) {
        out[t] = level;
        if (draining) {
            level = std::max(floor, level - rate);
            if (level <= floor) {
                draining = false;
                delay_left = rng.range(2, 6);  // refill held back 2-6 h
            }
        } else {
            if (--delay_left <= 0) {
                level = 1.0;
                draining = true;
            }
        }
    }
    return out;
}

std::vector<double> connector_canonical(const ArchetypeSpec& spec) {
    const double baseline = 0.95;
    std::vector<double> out(spec.grid.n_steps, baseline);
    Rng rng = Rng::substream(spec.seed, kind_tag(spec.kind), kShapeStream);
    // Sparse draw events, at most ~2 per week by construction.
    std::size_t t = static_cast<std::size_t>(rng.range(0, 96));
    while (t < out.size()) {
        const double depth = rng.uniform(0.08, 0.2);
        const std::size_t duration = static_cast<std::size_t>(rng.range(2, 6));
        for (std::size_t d = 0; d < duration && t + d < out.size(); ++d) {
            const double frac =
                1.0 - std::abs(2.0 * static_cast<double>(d) / static_cast<double>(duration - 1) -
                               1.0);
            out[t + d] = baseline - depth * frac;
        }
        t += duration + static_cast<std::size_t>(rng.range(84, 132));
    }
    return out;
}

std::vector<double> canonical_trajectory(const ArchetypeSpec& spec, double rate,
                                         std::size_t jitter) {
    const std::size_t n = spec.grid.n_steps;
    std::vector<double> out(n, 0.0);
    switch (spec.kind) {
        case ArchetypeKind::reliable:
            for (std::size_t t = 0; t < n; ++t) out[t] = reliable_value(t, spec.params, rate);
            break;
        case ArchetypeKind::overstressed:
            out = overstressed_canonical(spec, rate);
            break;
        case ArchetypeKind::connector:
            out = connector_canonical(spec);
            break;
        case ArchetypeKind::cryo_small_tank: {
            const std::size_t c = spec.params.cycle_period_h;
            for (std::size_t t = 0; t < n; ++t)
                out[t] = 1.0 - static_cast<double>(t % c) / static_cast<double>(c - 1);
            break;
        }
        case ArchetypeKind::downtime: {
            for (std::size_t t = 0; t < n; ++t) out[t] = reliable_value(t, spec.params, rate);
            const std::size_t span = spec.params.downtime_span_h;
            // Keep the flatline clear of the wrap point under any phase shift.
            const std::size_t slack = (n - span) / 2;
            const std::size_t margin = std::min(jitter, slack);
            const std::size_t lo = margin;
            const std::size_t hi = n - span - margin;
            Rng rng = Rng::substream(spec.seed, kind_tag(spec.kind), kShapeStream);
            const std::size_t start =
                hi > lo ? lo + static_cast<std::size_t>(
                                   rng.below(static_cast<std::uint64_t>(hi - lo)))
                        : lo;
            std::fill(out.begin() + static_cast<std::ptrdiff_t>(start),
                      out.begin() + static_cast<std::ptrdiff_t>(start + span), 0.0);
            break;
        }
    }
    return out;
}

std::vector<std::pair<double, double>> coordinate_pool(const ArchetypeSpec& spec) {
    Rng rng = Rng::substream(spec.seed, kind_tag(spec.kind), kCoordStream);
    std::vector<std::pair<double, double>> pool(2 * spec.n_series);
    for (auto& [lat, lon] : pool) {
        lat = rng.uniform(kLatMin, kLatMax);
        lon = rng.uniform(kLonMin, kLonMax);
    }
    rng.shuffle(pool);
    pool.resize(spec.n_series);
    return pool;
}

}  // namespace

const char* archetype_name(ArchetypeKind k) {
    switch (k) {
        case ArchetypeKind::reliable: return "reliable";
        case ArchetypeKind::overstressed: return "overstressed";
        case ArchetypeKind::connector: return "connector";
        case ArchetypeKind::cryo_small_tank: return "cryo_small_tank";
        case ArchetypeKind::downtime: return "downtime";
    }
    return "unknown";
}

ArchetypeKind archetype_from_name(const std::string& name) {
    if (name == "reliable") return ArchetypeKind::reliable;
    if (name == "overstressed") return ArchetypeKind::overstressed;
    if (name == "connector") return ArchetypeKind::connector;
    if (name == "cryo" || name == "cryo_small_tank") return ArchetypeKind::cryo_small_tank;
    if (name == "downtime") return ArchetypeKind::downtime;
    fail(ErrorCode::parameter, "unknown archetype kind '" + name + "'");
}

SynthResult generate(const ArchetypeSpec& spec) {
    validate_spec(spec);
    const std::size_t n = spec.grid.n_steps;
    const double rate = spec.params.drawdown_rate.value_or(default_drawdown_rate(spec.kind));
    const std::size_t jitter =
        spec.params.phase_jitter_h.value_or(default_phase_jitter(spec.kind));

    const std::vector<double> canon = canonical_trajectory(spec, rate, jitter);
    const auto coords = coordinate_pool(spec);

    SynthResult result;
    result.dataset.grid = spec.grid;
    result.label_names = {archetype_name(spec.kind)};
    result.labels.assign(spec.n_series, 0);

    for (std::size_t s = 0; s < spec.n_series; ++s) {
        Rng phase_rng = Rng::substream(spec.seed, kind_tag(spec.kind) * 8 + kPhaseStream, s);
        Rng noise_rng = Rng::substream(spec.seed, kind_tag(spec.kind) * 8 + kNoiseStream, s);
        const std::size_t phase =
            jitter == 0 ? 0 : static_cast<std::size_t>(phase_rng.below(jitter + 1));

        StationSeries series;
        char id[16];
        std::snprintf(id, sizeof(id), "%s-%02zu", kind_code(spec.kind), s);
        series.meta.station_id = id;
        series.meta.name = std::string(archetype_name(spec.kind)) + " archetype " +
                           std::to_string(s);
        series.meta.lat = coords[s].first;
        series.meta.lon = coords[s].second;
        series.values.resize(n);
        series.observed.assign(n, 1);
        for (std::size_t t = 0; t < n; ++t) {
            double v = canon[(t + phase) % n];
            if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise_rng.normal();
            series.values[t] = std::clamp(v, 0.0, kClampCeiling);
        }
        result.dataset.stations.push_back(std::move(series));
    }
    return result;
}

SynthResult benchmark_set(const std::vector<ArchetypeSpec>& specs) {
    if (specs.empty()) fail(ErrorCode::parameter, "benchmark_set needs at least one archetype");
    for (const ArchetypeSpec& spec : specs)
        if (!(spec.grid == specs.front().grid))
            fail(ErrorCode::parameter, "all archetype specs must share one grid");

    std::vector<SynthResult> parts;
    parts.reserve(specs.size());
    std::size_t max_series = 0;
    for (const ArchetypeSpec& spec : specs) {
        parts.push_back(generate(spec));
        max_series = std::max(max_series, spec.n_series);
    }

    SynthResult result;
    result.dataset.grid = specs.front().grid;
    for (const ArchetypeSpec& spec : specs)
        result.label_names.push_back(archetype_name(spec.kind));

    // Round-robin interleave so input order carries no kind signal.
    std::unordered_set<std::string> ids;
    for (std::size_t round = 0; round < max_series; ++round) {
        for (std::size_t p = 0; p < parts.size(); ++p) {
            if (round >= parts[p].dataset.stations.size()) continue;
            StationSeries s = parts[p].dataset.stations[round];
            if (!ids.insert(s.meta.station_id).second)
                fail(ErrorCode::parameter,
                     "duplicate station id '" + s.meta.station_id +
                         "' across archetype specs; use distinct kinds per spec");
            result.dataset.stations.push_back(std::move(s));
            result.labels.push_back(static_cast<int>(p));
        }
    }
    return result;
}

}  // namespace stationpulse
