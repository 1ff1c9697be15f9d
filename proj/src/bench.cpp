#include "telsim/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "telsim/rng.hpp"

namespace telsim {

const char* energy_slice_name(EnergySlice s) {
    switch (s) {
        case EnergySlice::low: return "low";
        case EnergySlice::mid: return "mid";
        case EnergySlice::high: return "high";
        case EnergySlice::all: return "all";
    }
    throw std::invalid_argument("bad energy slice value");
}

EnergySlice energy_slice_from_name(const std::string& name) {
    for (EnergySlice s :
         {EnergySlice::low, EnergySlice::mid, EnergySlice::high, EnergySlice::all})
        if (name == energy_slice_name(s)) return s;
    throw std::invalid_argument("unknown energy slice '" + name + "'");
}

EnergySlice classify_energy(double energy_gev) {
    if (!(energy_gev >= kSpectrumFloorGev))
        throw std::invalid_argument("energy " + std::to_string(energy_gev) +
                                    " GeV is below the 100 GeV spectrum floor");
    if (energy_gev < kLowMidBoundaryGev) return EnergySlice::low;
    if (energy_gev < kMidHighBoundaryGev) return EnergySlice::mid;
    return EnergySlice::high;
}

void BenchPlan::validate() const {
    if (std::find(worker_counts.begin(), worker_counts.end(), 1) == worker_counts.end())
        throw std::invalid_argument("bench plan: worker_counts must contain the baseline 1");
    for (int w : worker_counts)
        if (w < 1) throw std::invalid_argument("bench plan: worker counts must be >= 1");
    if (repetitions < 1) throw std::invalid_argument("bench plan: repetitions must be >= 1");
    if (warmup < 0) throw std::invalid_argument("bench plan: warmup must be >= 0");
    double mix = mix_low + mix_mid + mix_high;
    if (std::abs(mix - 1.0) > 1e-9)
        throw std::invalid_argument("bench plan: slice mix must sum to 1");
}

namespace {

struct SliceBounds {
    double lo, hi;
};

SliceBounds slice_bounds(EnergySlice s, double high_cap) {
    switch (s) {
        case EnergySlice::low: return {kSpectrumFloorGev, kLowMidBoundaryGev};
        case EnergySlice::mid: return {kLowMidBoundaryGev, kMidHighBoundaryGev};
        case EnergySlice::high: return {kMidHighBoundaryGev, high_cap};
        default: throw std::invalid_argument("slice_bounds: no bounds for 'all'");
    }
}

double log_uniform(double lo, double hi, double u) {
    double e = std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
    if (e >= hi) e = std::nextafter(hi, lo);  // keep the half-open bound
    return e < lo ? lo : e;
}

}  // namespace

std::vector<Event> make_bench_events(const BenchPlan& plan, EnergySlice slice,
                                     std::uint64_t seed, const DetectorGeometry& geometry,
                                     std::uint64_t n_events) {
    plan.validate();
    if (geometry.oms.empty()) throw std::invalid_argument("make_bench_events: empty geometry");

    Vec3 lo = geometry.oms.front().position, hi = lo;
    for (const OpticalModule& om : geometry.oms) {
        lo = {std::min(lo.x, om.position.x), std::min(lo.y, om.position.y),
              std::min(lo.z, om.position.z)};
        hi = {std::max(hi.x, om.position.x), std::max(hi.y, om.position.y),
              std::max(hi.z, om.position.z)};
    }
    const double inflate = 100.0;
    lo = lo - Vec3{inflate, inflate, inflate};
    hi = hi + Vec3{inflate, inflate, inflate};

    RngStream rng{splitmix64(seed)};
    std::vector<Event> events;
    events.reserve(n_events);
    for (std::uint64_t i = 0; i < n_events; ++i) {
        EnergySlice pick = slice;
        if (slice == EnergySlice::all) {
            double u = next_uniform(rng);
            pick = u < plan.mix_low                  ? EnergySlice::low
                   : u < plan.mix_low + plan.mix_mid ? EnergySlice::mid
                                                     : EnergySlice::high;
        }
        SliceBounds bounds = slice_bounds(pick, plan.high_cap_gev);
        double energy = log_uniform(bounds.lo, bounds.hi, next_uniform(rng));

        double dz = -0.1 - 0.9 * next_uniform(rng);  // downgoing
        double phi = 2.0 * M_PI * next_uniform(rng);
        double sin_zen = std::sqrt(1.0 - dz * dz);
        Vec3 direction{sin_zen * std::cos(phi), sin_zen * std::sin(phi), dz};

        Vec3 position{lo.x + (hi.x - lo.x) * next_uniform(rng),
                      lo.y + (hi.y - lo.y) * next_uniform(rng),
                      lo.z + (hi.z - lo.z) * next_uniform(rng)};

        Event event;
        event.event_id = i;
        event.tracks.push_back(Track{TrackKind::muon, position, direction, energy, 0.0});
        events.push_back(std::move(event));
    }
    return events;
}

void generate_bench_events(const BenchPlan& plan, EnergySlice slice, std::uint64_t seed,
                           const DetectorGeometry& geometry, const std::string& out_path) {
    write_events(out_path, make_bench_events(plan, slice, seed, geometry, plan.events_per_slice));
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];  // lower median, deterministic
}

std::string result_bytes(const std::vector<EventResult>& results) {
    std::ostringstream ss;
    write_results(ss, results);
    return ss.str();
}

}  // namespace

std::vector<TimingReport> run_bench(const BenchPlan& plan, EnergySlice slice,
                                    const DetectorGeometry& geometry, const CdfSet& cdfs,
                                    const SimConfig& config) {
    plan.validate();
    config.validate();

    int max_workers = *std::max_element(plan.worker_counts.begin(), plan.worker_counts.end());
    unsigned hw = std::thread::hardware_concurrency();
    if (hw > 0 && static_cast<unsigned>(max_workers) > hw)
        std::fprintf(stderr,
                     "warning: benchmarking %d workers on %u hardware threads; "
                     "timing will not show real scaling\n",
                     max_workers, hw);

    std::vector<Event> events =
        make_bench_events(plan, slice, config.seed, geometry, plan.events_per_slice);

    std::vector<TimingReport> reports;
    std::string baseline;
    bool have_baseline = false;

    for (int workers : plan.worker_counts) {
        SimConfig cfg = config;
        cfg.workers = workers;

        for (int i = 0; i < plan.warmup; ++i) run_batch(events, geometry, cdfs, cfg);

        std::vector<double> hit_ms, total_ms;
        std::string bytes;
        TimingReport report;
        for (int rep = 0; rep < plan.repetitions; ++rep) {
            BatchResult batch = run_batch(events, geometry, cdfs, cfg);
            hit_ms.push_back(batch.report.mean_hit_detect_ms);
            total_ms.push_back(batch.report.mean_total_ms);
            if (rep == 0) {
                bytes = result_bytes(batch.results);
                report = batch.report;
            }
        }

        if (!have_baseline) {
            baseline = std::move(bytes);
            have_baseline = true;
        } else if (bytes != baseline) {
            throw DeterminismError("result bytes differ between " +
                                   std::to_string(plan.worker_counts.front()) + " and " +
                                   std::to_string(workers) + " workers (slice " +
                                   energy_slice_name(slice) + ")");
        }

        report.energy_slice = energy_slice_name(slice);
        report.mean_hit_detect_ms = median(hit_ms);
        report.mean_total_ms = median(total_ms);
        reports.push_back(report);
    }
    return reports;
}

}  // namespace telsim
