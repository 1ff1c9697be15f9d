#include "telsim/hitgen.hpp"

#include <algorithm>
#include <cmath>

#include "telsim/engine.hpp"

namespace telsim {

namespace {

HitExpectation expectation_from_point(const Vec3& emission, double emit_time_ns, double n_gamma,
                                      const OpticalModule& om, const Pmt& pmt,
                                      LightClass light_class, const SimConfig& config) {
    Vec3 to_om = om.position - emission;
    double d = to_om.norm();
    if (d < config.d_min_m) d = config.d_min_m;

    // normal pointing back toward the emission point sees the light head-on
    Vec3 toward_source = (emission - om.position) * (1.0 / d);
    double cos_inc = pmt.direction.dot(toward_source);

    double geo = pmt.radius_m * pmt.radius_m / (4.0 * d * d) * std::max(0.0, cos_inc);
    double survival = std::exp(-d / config.lambda_abs_m);
    bool scattered =
        light_class == LightClass::muon_scattered || light_class == LightClass::shower_scattered;
    double class_factor = scattered ? config.scatter_fraction : 1.0 - config.scatter_fraction;

    HitExpectation exp;
    exp.mu = n_gamma * geo * survival * pmt.quantum_efficiency * class_factor;
    exp.r = d;
    exp.cos_inc = cos_inc;
    exp.t_geo = emit_time_ns + d / (kSpeedOfLightMPerNs / config.n_water);
    exp.light_class = light_class;
    return exp;
}

}  // namespace

HitExpectation expected_npe(const Segment& segment, const OpticalModule& om, const Pmt& pmt,
                            LightClass light_class, const SimConfig& config) {
    double length = segment.z_end_m - segment.z_start_m;
    Vec3 midpoint{0, 0, 0.5 * (segment.z_start_m + segment.z_end_m)};
    double mid_time = segment.time_start_ns + 0.5 * length / kSpeedOfLightMPerNs;
    return expectation_from_point(midpoint, mid_time, config.yield_muon_per_m * length, om, pmt,
                                  light_class, config);
}

HitExpectation expected_npe(const ShowerSource& shower, const OpticalModule& om, const Pmt& pmt,
                            LightClass light_class, const SimConfig& config) {
    return expectation_from_point(Vec3{0, 0, shower.z_m}, shower.time_ns,
                                  config.yield_shower_per_gev * shower.energy_gev, om, pmt,
                                  light_class, config);
}

std::vector<Hit> process_om(const OpticalModule& om, const std::vector<Segment>& segments,
                            const std::vector<ShowerSource>& showers, const CdfSet& cdfs,
                            const SimConfig& config,
                            const std::function<RngStream&(int)>& rng_factory) {
    RngStream& rng = rng_factory(om.om_id);
    std::vector<Hit> hits;

    // Hot path. The emission geometry (distance, absorption, arrival time)
    // is shared by all PMTs and both light classes of one source, so it is
    // computed once per (source, module). The arithmetic matches
    // expectation_from_point operation for operation; results are
    // bit-identical to composing expected_npe per combination.
    auto emit_source = [&](const Vec3& emission, double emit_time_ns, double n_gamma,
                           LightClass direct_cls, LightClass scattered_cls) {
        Vec3 to_om = om.position - emission;
        double d = to_om.norm();
        if (d < config.d_min_m) d = config.d_min_m;
        Vec3 toward_source = (emission - om.position) * (1.0 / d);
        double survival = std::exp(-d / config.lambda_abs_m);
        double t_geo = emit_time_ns + d / (kSpeedOfLightMPerNs / config.n_water);
        double direct_factor = 1.0 - config.scatter_fraction;

        HitExpectation exp;
        exp.r = d;
        exp.t_geo = t_geo;
        for (const Pmt& pmt : om.pmts) {
            double cos_inc = pmt.direction.dot(toward_source);
            double geo =
                pmt.radius_m * pmt.radius_m / (4.0 * d * d) * std::max(0.0, cos_inc);
            double mu_base = n_gamma * geo * survival * pmt.quantum_efficiency;
            exp.cos_inc = cos_inc;

            exp.mu = mu_base * direct_factor;
            exp.light_class = direct_cls;
            std::vector<Hit> h =
                generate_hits(exp, cdfs, om.om_id, pmt.pmt_id, rng, config.mu_max);
            hits.insert(hits.end(), h.begin(), h.end());

            exp.mu = mu_base * config.scatter_fraction;
            exp.light_class = scattered_cls;
            h = generate_hits(exp, cdfs, om.om_id, pmt.pmt_id, rng, config.mu_max);
            hits.insert(hits.end(), h.begin(), h.end());
        }
    };

    // normative order: sources in input order (segments before showers),
    // PMTs in module order, direct before scattered
    for (const Segment& seg : segments) {
        double length = seg.z_end_m - seg.z_start_m;
        emit_source(Vec3{0, 0, 0.5 * (seg.z_start_m + seg.z_end_m)},
                    seg.time_start_ns + 0.5 * length / kSpeedOfLightMPerNs,
                    config.yield_muon_per_m * length, LightClass::muon_direct,
                    LightClass::muon_scattered);
    }
    for (const ShowerSource& shower : showers)
        emit_source(Vec3{0, 0, shower.z_m}, shower.time_ns,
                    config.yield_shower_per_gev * shower.energy_gev, LightClass::shower_direct,
                    LightClass::shower_scattered);

    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.pmt_id != b.pmt_id) return a.pmt_id < b.pmt_id;
        if (a.time_ns != b.time_ns) return a.time_ns < b.time_ns;
        return a.light_class < b.light_class;
    });
    return hits;
}

std::vector<Hit> merge_hits(std::vector<Hit> hits, double window_ns) {
    if (window_ns < 0) throw std::invalid_argument("merge_hits: window must be >= 0");

    // group by (om, pmt, class), time-ordered within each group
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.om_id != b.om_id) return a.om_id < b.om_id;
        if (a.pmt_id != b.pmt_id) return a.pmt_id < b.pmt_id;
        if (a.light_class != b.light_class) return a.light_class < b.light_class;
        return a.time_ns < b.time_ns;
    });

    std::vector<Hit> merged;
    merged.reserve(hits.size());
    size_t i = 0;
    while (i < hits.size()) {
        Hit cluster = hits[i];
        size_t j = i + 1;
        while (j < hits.size() && hits[j].om_id == cluster.om_id &&
               hits[j].pmt_id == cluster.pmt_id && hits[j].light_class == cluster.light_class &&
               hits[j].time_ns - cluster.time_ns <= window_ns) {
            cluster.npe += hits[j].npe;
            ++j;
        }
        merged.push_back(cluster);
        i = j;
    }

    std::sort(merged.begin(), merged.end(), [](const Hit& a, const Hit& b) {
        if (a.om_id != b.om_id) return a.om_id < b.om_id;
        if (a.pmt_id != b.pmt_id) return a.pmt_id < b.pmt_id;
        if (a.time_ns != b.time_ns) return a.time_ns < b.time_ns;
        return a.light_class < b.light_class;
    });
    return merged;
}

}  // namespace telsim
