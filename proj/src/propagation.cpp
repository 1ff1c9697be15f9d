#include "telsim/propagation.hpp"

#include <stdexcept>

#include "telsim/engine.hpp"

namespace telsim {

double energy_loss(double energy_gev, double dx_m, double a_gevm, double b_perm) {
    if (energy_gev <= 0 || dx_m <= 0)
        throw std::invalid_argument("energy_loss: energy and step must be > 0");
    double loss = (a_gevm + b_perm * energy_gev) * dx_m;
    return loss < energy_gev ? loss : energy_gev;
}

PropagationResult propagate_muon(const Track& track, const SimConfig& config, RngStream& rng) {
    if (track.kind != TrackKind::muon)
        throw std::invalid_argument("propagate_muon: track is not a muon");

    PropagationResult out;
    double energy = track.energy_gev;
    const double step = config.step_m;
    const double step_time = step / kSpeedOfLightMPerNs;

    for (int k = 0; k < config.max_steps && energy > config.e_min_gev; ++k) {
        Segment seg;
        seg.z_start_m = k * step;
        seg.z_end_m = (k + 1) * step;
        seg.energy_start_gev = energy;
        seg.time_start_ns = track.time_ns + k * step_time;
        out.segments.push_back(seg);

        double loss = energy_loss(energy, step, config.a_gevm, config.b_perm);
        energy -= loss;
        out.continuous_loss_gev += loss;

        if (config.shower_prob > 0) {
            // draw order is normative: shower flag first, then fraction
            if (next_uniform(rng) < config.shower_prob) {
                double frac = config.shower_frac_min +
                              next_uniform(rng) *
                                  (config.shower_frac_max - config.shower_frac_min);
                double shower_energy = frac * energy;
                energy -= shower_energy;
                out.shower_deducted_gev += shower_energy;
                if (shower_energy >= config.shower_threshold_gev)
                    out.showers.push_back(ShowerSource{seg.z_start_m + 0.5 * step, shower_energy,
                                                       track.time_ns + (k + 0.5) * step_time});
            }
        }
    }
    out.final_energy_gev = energy;
    return out;
}

std::vector<ShowerSource> shower_track_sources(const Event& event) {
    std::vector<ShowerSource> out;
    for (const Track& t : event.tracks)
        if (t.kind == TrackKind::em_shower)
            out.push_back(ShowerSource{0.0, t.energy_gev, t.time_ns});
    return out;
}

}  // namespace telsim
