// Photoelectron hit generation: expected-count computation per
// (source, PMT, light class), Poisson sampling of the count, arrival-time
// sampling from the CDF tables, and time-window hit merging.
//
// This is the hot path; it dominates the per-event runtime. Iteration
// and RNG draw orders are normative (sources in input order, PMTs in
// module order, direct before scattered; count draw before time draws)
// so results are reproducible bit for bit.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "telsim/geometry.hpp"
#include "telsim/photonics.hpp"
#include "telsim/propagation.hpp"
#include "telsim/rng.hpp"

namespace telsim {

struct SimConfig;

struct Hit {
    int om_id = 0;
    int pmt_id = 0;
    double time_ns = 0;
    std::uint32_t npe = 1;
    LightClass light_class = LightClass::muon_direct;

    bool operator==(const Hit& o) const = default;
};

struct HitExpectation {
    double mu = 0;       // expected photoelectron count
    double r = 0;        // source-to-module distance used for table lookup
    double cos_inc = 0;  // incidence cosine used for table lookup
    double t_geo = 0;    // geometric arrival time, ns
    LightClass light_class = LightClass::muon_direct;
};

// mu = N_gamma * (radius^2 / 4d^2) * max(0, cos eta) * exp(-d / lambda)
//      * quantum_efficiency * class_factor
// with d the emission-to-module distance clamped below by d_min_m and
// eta the angle between the PMT normal and the direction back toward the
// emission point. Muon segments emit yield_muon_per_m photons per meter
// from the segment midpoint; showers emit yield_shower_per_gev * E from
// their point. Geometry must already be in the track frame.
HitExpectation expected_npe(const Segment& segment, const OpticalModule& om, const Pmt& pmt,
                            LightClass light_class, const SimConfig& config);
HitExpectation expected_npe(const ShowerSource& shower, const OpticalModule& om, const Pmt& pmt,
                            LightClass light_class, const SimConfig& config);

// Knuth multiplicative inversion, normative for reproducibility:
//   L = exp(-mu); k = 0; p = 1;
//   repeat { k += 1; p *= U } while p > L;  return k - 1.
// Consumes exactly one uniform when mu = 0. Throws std::invalid_argument
// when mu exceeds mu_max (a pathological configuration).
template <typename Stream>
std::uint32_t sample_poisson(double mu, Stream& rng, double mu_max = 1.0e4) {
    if (!(mu >= 0) || !std::isfinite(mu))
        throw std::invalid_argument("sample_poisson: mu must be finite and >= 0");
    if (mu > mu_max)
        throw std::invalid_argument("sample_poisson: mu = " + std::to_string(mu) +
                                    " exceeds mu_max = " + std::to_string(mu_max));
    const double limit = mu == 0.0 ? 1.0 : std::exp(-mu);
    std::uint32_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= next_uniform(rng);
    } while (p > limit);
    return k - 1;
}

// Draws the photoelectron count, then one arrival time per photoelectron:
//   t_i = t_geo + invert_cdf(table, r, cos_inc, U)
// Zero-flux neighborhoods place all photoelectrons at t_geo exactly.
template <typename Stream>
std::vector<Hit> generate_hits(const HitExpectation& exp, const CdfSet& cdfs, int om_id,
                               int pmt_id, Stream& rng, double mu_max = 1.0e4) {
    std::uint32_t n = sample_poisson(exp.mu, rng, mu_max);
    std::vector<Hit> hits;
    if (n == 0) return hits;
    hits.reserve(n);
    const CdfTable& table = cdfs.table(exp.light_class);
    const bool dark = table.zero_flux_neighborhood(exp.r, exp.cos_inc);
    for (std::uint32_t i = 0; i < n; ++i) {
        double t = exp.t_geo;
        if (!dark) t += invert_cdf(table, exp.r, exp.cos_inc, next_uniform(rng));
        hits.push_back(Hit{om_id, pmt_id, t, 1, exp.light_class});
    }
    return hits;
}

// The parallel work unit: all hits of one optical module for one set of
// sources, using exactly one RNG stream obtained from rng_factory.
// Output sorted by (pmt_id, time, light_class).
std::vector<Hit> process_om(const OpticalModule& om_in_track_frame,
                            const std::vector<Segment>& segments,
                            const std::vector<ShowerSource>& showers, const CdfSet& cdfs,
                            const SimConfig& config,
                            const std::function<RngStream&(int om_id)>& rng_factory);

// Greedy left-to-right clustering per (om_id, pmt_id, light_class): a hit
// within `window_ns` of its cluster's earliest time joins the cluster;
// each cluster collapses to one hit at the earliest time with summed npe.
// Output sorted by (om_id, pmt_id, time). Total npe is conserved and the
// pass is idempotent.
std::vector<Hit> merge_hits(std::vector<Hit> hits, double window_ns);

}  // namespace telsim
