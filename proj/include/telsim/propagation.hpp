// Discrete-step muon propagation with continuous energy loss and
// stochastic EM-shower spawning. All positions are in the track frame
// (path along +z from the origin), so a segment is just a z interval.

#pragma once

#include <cstdint>
#include <vector>

#include "telsim/geometry.hpp"
#include "telsim/rng.hpp"

namespace telsim {

inline constexpr double kSpeedOfLightMPerNs = 0.299792458;

enum class TrackKind : std::uint8_t { muon, em_shower };

struct Track {
    TrackKind kind = TrackKind::muon;
    Vec3 position;   // meters
    Vec3 direction;  // unit
    double energy_gev = 0;
    double time_ns = 0;
};

struct Event {
    std::uint64_t event_id = 0;
    std::vector<Track> tracks;
};

struct Segment {
    double z_start_m = 0;
    double z_end_m = 0;  // > z_start_m
    double energy_start_gev = 0;
    double time_start_ns = 0;
};

struct ShowerSource {
    double z_m = 0;  // track frame
    double energy_gev = 0;
    double time_ns = 0;
};

struct SimConfig;  // engine.hpp

// dE/dx model (a + b*E) integrated over one step, capped at E.
double energy_loss(double energy_gev, double dx_m, double a_gevm, double b_perm);

struct PropagationResult {
    std::vector<Segment> segments;
    std::vector<ShowerSource> showers;
    double final_energy_gev = 0;
    double continuous_loss_gev = 0;
    double shower_deducted_gev = 0;  // includes sub-threshold deductions
};

// Fixed-length steps along +z until the energy drops to e_min or the step
// budget runs out. Per step: continuous loss first; then, with probability
// shower_prob, a uniform fraction of the remaining energy converts to a
// shower at the step midpoint (energy deducted even below the emission
// threshold). RNG draw order is normative: shower flag, then fraction.
// With shower_prob = 0 no draws are consumed.
PropagationResult propagate_muon(const Track& track, const SimConfig& config, RngStream& rng);

// Each em_shower track becomes one point source in its own frame.
std::vector<ShowerSource> shower_track_sources(const Event& event);

}  // namespace telsim
