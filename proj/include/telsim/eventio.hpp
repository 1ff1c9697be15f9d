// Text I/O for events, results and timing reports.
//
// Event file:  EVENT <id> <n_tracks>
//              TRACK <muon|em_shower> <x> <y> <z> <dx> <dy> <dz> <E_GeV> <t_ns>
// Result file: EVENT <id> <n_hits> <n_raw_hits>
//              HIT <om_id> <pmt_id> <t_ns> <npe> <light_class>
// Reals are written with 12 significant digits, so equal values produce
// byte-identical files and survive a round trip.

#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "telsim/engine.hpp"
#include "telsim/propagation.hpp"

namespace telsim {

inline constexpr std::uint64_t kAllEvents = std::numeric_limits<std::uint64_t>::max();

// Yields events [first, first + count) in file order; a range beyond EOF
// returns fewer events. Only the requested range is materialized.
std::vector<Event> read_events(const std::string& path, std::uint64_t first = 0,
                               std::uint64_t count = kAllEvents);

void write_events(const std::string& path, const std::vector<Event>& events);
void write_events(std::ostream& out, const std::vector<Event>& events);

// Results must be sorted by event_id. Failed events appear as comment
// lines, keeping the physics records byte-comparable across runs.
void write_results(const std::string& path, const std::vector<EventResult>& results);
void write_results(std::ostream& out, const std::vector<EventResult>& results);

// Reads back hit records written by write_results (used by verification
// tooling; failed-event comments are skipped).
struct ResultRecord {
    std::uint64_t event_id = 0;
    std::uint64_t n_raw_hits = 0;
    std::vector<Hit> hits;
};
std::vector<ResultRecord> read_results(const std::string& path);

// CSV columns: energy_slice, workers, scheduling, mean_hit_detect_ms,
// mean_total_ms, speedup_hit_detect, speedup_total. Speedups are relative
// to the workers=1 row of the same slice and are computed from the time
// values exactly as printed, so recomputing ratios from the CSV matches
// the speedup columns bit for bit. A slice without a workers=1 row
// reports speedups relative to the row itself.
void write_timing_csv(const std::string& path, const std::vector<TimingReport>& per_worker_runs);
void write_timing_csv(std::ostream& out, const std::vector<TimingReport>& per_worker_runs);

}  // namespace telsim
