// Scaling-study harness: energy-slice classification, deterministic
// benchmark event generation, and the sequential-vs-multithreaded timing
// runs. Benchmarks never alter physics; result bytes must be identical
// across worker counts or the run aborts with DeterminismError.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "telsim/engine.hpp"
#include "telsim/eventio.hpp"

namespace telsim {

// Low [100 GeV, 10 TeV), Mid [10 TeV, 1 PeV), High [1 PeV, inf);
// boundaries belong to the upper slice.
enum class EnergySlice : std::uint8_t { low, mid, high, all };

const char* energy_slice_name(EnergySlice s);
EnergySlice energy_slice_from_name(const std::string& name);

inline constexpr double kSpectrumFloorGev = 100.0;
inline constexpr double kLowMidBoundaryGev = 1.0e4;   // 10 TeV
inline constexpr double kMidHighBoundaryGev = 1.0e6;  // 1 PeV

// Throws std::invalid_argument below 100 GeV. Never returns `all`.
EnergySlice classify_energy(double energy_gev);

struct BenchPlan {
    std::vector<int> worker_counts = {1, 2, 4};
    std::uint64_t events_per_slice = 500;
    // slice mix for `all`: mostly low energy, some mid, few high
    double mix_low = 0.80;
    double mix_mid = 0.15;
    double mix_high = 0.05;
    int repetitions = 3;
    int warmup = 2;
    double high_cap_gev = 1.0e8;  // 100 PeV

    void validate() const;  // worker_counts must contain 1, repetitions >= 1
};

// Single-muon events: log-uniform energy within the slice bounds, random
// downgoing directions, start positions inside the detector bounding box
// inflated by 100 m. Deterministic in the seed.
std::vector<Event> make_bench_events(const BenchPlan& plan, EnergySlice slice,
                                     std::uint64_t seed, const DetectorGeometry& geometry,
                                     std::uint64_t n_events);

// Same, written as an event file.
void generate_bench_events(const BenchPlan& plan, EnergySlice slice, std::uint64_t seed,
                           const DetectorGeometry& geometry, const std::string& out_path);

class DeterminismError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// For each worker count: warmup runs discarded, then `repetitions` timed
// runs over the same events with the same seed, reported as the median.
// Result bytes are compared across worker counts; a mismatch throws
// DeterminismError. Returns one report per worker count.
std::vector<TimingReport> run_bench(const BenchPlan& plan, EnergySlice slice,
                                    const DetectorGeometry& geometry, const CdfSet& cdfs,
                                    const SimConfig& config);

}  // namespace telsim
