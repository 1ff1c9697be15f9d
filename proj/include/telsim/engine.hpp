// Per-event pipeline orchestration: propagation, frame rotation, the
// worker-pool dispatch over optical modules, hit merging and phase timing.
//
// Determinism contract: with a fixed seed, simulate_event produces the
// same result (excluding timing) for every worker count and both
// scheduling modes. This holds because each (event, OM) pair draws from
// its own derived RNG stream and per-OM outputs land in per-OM slots that
// are concatenated in om_id order after a barrier.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "telsim/geometry.hpp"
#include "telsim/hitgen.hpp"
#include "telsim/photonics.hpp"
#include "telsim/propagation.hpp"
#include "telsim/rng.hpp"

namespace telsim {

enum class Scheduling : std::uint8_t { static_block, dynamic };

const char* scheduling_name(Scheduling s);
Scheduling scheduling_from_name(const std::string& name);

struct SimConfig {
    std::uint64_t seed = 1;
    int workers = 1;
    Scheduling scheduling = Scheduling::dynamic;
    int chunk = 4;  // OMs per dispatch under dynamic scheduling

    // muon propagation
    double step_m = 10.0;
    double e_min_gev = 1.0;
    int max_steps = 100;
    double a_gevm = 0.24;
    double b_perm = 3.4e-4;
    double shower_prob = 0.1;
    double shower_frac_min = 0.01;
    double shower_frac_max = 0.05;
    double shower_threshold_gev = 0.5;

    // light yield and detection
    double yield_muon_per_m = 3.5e4;
    double yield_shower_per_gev = 1.0e5;
    double lambda_abs_m = 50.0;
    double scatter_fraction = 0.2;
    double n_water = 1.35;
    double d_min_m = 0.5;
    double mu_max = 1.0e4;

    double merge_window_ns = 1.0;

    void validate() const;  // throws std::invalid_argument
};

// Flat "key = value" text, '#' comments; unknown keys are errors.
// Values overwrite fields of `config` in place.
void load_config_file(const std::string& path, SimConfig& config);
void apply_config_entry(const std::string& key, const std::string& value, SimConfig& config);

struct PhaseTimings {
    std::int64_t parse_ns = 0;
    std::int64_t propagate_ns = 0;
    std::int64_t rotate_ns = 0;
    std::int64_t hit_detect_ns = 0;
    std::int64_t merge_ns = 0;
    std::int64_t write_ns = 0;
    std::int64_t total_ns = 0;  // whole pipeline; may exceed the phase sum
};

struct EventResult {
    std::uint64_t event_id = 0;
    bool ok = true;
    std::string error;  // set when !ok; deterministic across worker counts
    std::vector<Hit> hits;  // merged, sorted by (om_id, pmt_id, time)
    std::uint64_t n_raw_hits = 0;
    PhaseTimings timing;
};

struct TimingReport {
    std::string energy_slice = "all";
    int workers = 1;
    Scheduling scheduling = Scheduling::dynamic;
    std::uint64_t n_events = 0;
    PhaseTimings phase_totals;
    double mean_hit_detect_ms = 0;
    double mean_total_ms = 0;
};

// Dispatches fn(i) for i in [0, n) over `workers` lanes. static_block
// hands each lane one contiguous range; dynamic hands out `chunk`-sized
// ranges from a shared atomic cursor. Every index runs exactly once.
void run_parallel(std::size_t n, int workers, Scheduling mode, int chunk,
                  const std::function<void(std::size_t)>& fn);

// Steps 2-4 of the pipeline for one event. Per-OM failures (for example a
// hit expectation exceeding mu_max) abort only that event; the failure is
// reported on the result with the lowest failing om_id, independent of
// scheduling.
EventResult simulate_event(const Event& event, const DetectorGeometry& geometry,
                           const CdfSet& cdfs, const SimConfig& config);

struct BatchResult {
    std::vector<EventResult> results;
    TimingReport report;
};

// Sequential event loop (parallelism lives inside each event). Processing
// continues past per-event failures.
BatchResult run_batch(const std::vector<Event>& events, const DetectorGeometry& geometry,
                      const CdfSet& cdfs, const SimConfig& config);

}  // namespace telsim
