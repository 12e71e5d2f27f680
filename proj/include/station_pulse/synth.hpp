#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "station_pulse/dataset.hpp"

namespace stationpulse {

/// Behavioral archetypes for the built-in benchmark generator. Values are in
/// normalized [0, 1] units before noise.
enum class ArchetypeKind { reliable, overstressed, connector, cryo_small_tank, downtime };

const char* archetype_name(ArchetypeKind k);
ArchetypeKind archetype_from_name(const std::string& name);

struct ArchetypeParams {
    double refill_period_h = 24.0;            // reliable/downtime sawtooth period
    std::optional<double> drawdown_rate;      // per hour; kind default when unset
    double depletion_floor = 0.05;            // overstressed floor level
    std::size_t downtime_span_h = 168;        // downtime flatline length
    std::size_t cycle_period_h = 3;           // cryo cycle, >= 2 at hourly sampling
    std::optional<std::size_t> phase_jitter_h;  // max per-series shift; kind default when unset
};

struct ArchetypeSpec {
    ArchetypeKind kind = ArchetypeKind::reliable;
    std::size_t n_series = 1;
    double noise_sigma = 0.0;  // must stay < 0.5 or archetypes blur together
    std::uint64_t seed = 0;
    TimeGrid grid;
    ArchetypeParams params;
};

struct SynthResult {
    Dataset dataset;
    std::vector<int> labels;               // one entry per station
    std::vector<std::string> label_names;  // label value -> archetype name
};

/// Deterministic generation from the spec seed. Series of one kind share a
/// canonical trajectory and differ by a seeded circular phase shift plus
/// Gaussian noise (clamped to [0, 1.2]). Coordinates come from a shuffled
/// pool of points in a California bounding box, so placement carries no
/// spatial pattern.
SynthResult generate(const ArchetypeSpec& spec);

/// Concatenates several archetypes into one dataset with round-robin station
/// interleaving and ground-truth labels (label = index of the spec).
SynthResult benchmark_set(const std::vector<ArchetypeSpec>& specs);

}  // namespace stationpulse
