#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "support.hpp"
#include "telsim/engine.hpp"
#include "telsim/hitgen.hpp"
#include "telsim/rng.hpp"

using namespace telsim;
using testsupport::ForcedStream;

namespace {

OpticalModule om_at(const Vec3& pos, const Vec3& pmt_dir, double radius, double qe) {
    OpticalModule om;
    om.om_id = 0;
    om.position = pos;
    om.pmts = {Pmt{0, pmt_dir, radius, qe}};
    return om;
}

std::uint64_t total_npe(const std::vector<Hit>& hits) {
    return std::accumulate(hits.begin(), hits.end(), std::uint64_t{0},
                           [](std::uint64_t acc, const Hit& h) { return acc + h.npe; });
}

std::vector<Hit> random_hit_list(RngStream& rng) {
    std::vector<Hit> hits;
    int n = static_cast<int>(next_uniform(rng) * 40);
    for (int i = 0; i < n; ++i)
        hits.push_back(Hit{static_cast<int>(next_uniform(rng) * 3),
                           static_cast<int>(next_uniform(rng) * 4),
                           next_uniform(rng) * 30.0,
                           1 + static_cast<std::uint32_t>(next_uniform(rng) * 3),
                           static_cast<LightClass>(static_cast<int>(next_uniform(rng) * 4))});
    return hits;
}

}  // namespace

TEST_CASE("expected_npe: hand-evaluated formula") {
    // QE 1, cos_eta 1, d 10, lambda 50, radius 0.1, N_gamma 1e6, factor 1:
    // P_geo = 2.5e-5, P_surv = exp(-0.2) -> mu = 25 exp(-0.2) = 20.468268827
    SimConfig cfg;
    cfg.yield_shower_per_gev = 1e5;
    cfg.lambda_abs_m = 50.0;
    cfg.scatter_fraction = 0.0;  // direct factor 1

    ShowerSource source{0.0, 10.0, 0.0};  // N_gamma = 1e6
    OpticalModule om = om_at({10, 0, 0}, {-1, 0, 0}, 0.1, 1.0);

    HitExpectation e = expected_npe(source, om, om.pmts[0], LightClass::shower_direct, cfg);
    CHECK(e.mu == doctest::Approx(20.468268826949545).epsilon(1e-10));
    CHECK(e.r == 10.0);
    CHECK(e.cos_inc == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.t_geo == doctest::Approx(10.0 * 1.35 / 0.299792458).epsilon(1e-12));
    CHECK(e.light_class == LightClass::shower_direct);
}

TEST_CASE("expected_npe edge rules") {
    SimConfig cfg;
    cfg.scatter_fraction = 0.0;
    ShowerSource source{0.0, 10.0, 0.0};

    SUBCASE("a PMT facing away sees nothing") {
        OpticalModule om = om_at({10, 0, 0}, {1, 0, 0}, 0.1, 1.0);
        CHECK(expected_npe(source, om, om.pmts[0], LightClass::shower_direct, cfg).mu == 0.0);
    }
    SUBCASE("zero photon budget gives mu = 0") {
        Segment seg{0.0, 10.0, 100.0, 0.0};
        SimConfig zero_yield = cfg;
        zero_yield.yield_muon_per_m = 1e-300;  // config requires > 0
        OpticalModule om = om_at({10, 0, 5}, {-1, 0, 0}, 0.1, 1.0);
        CHECK(expected_npe(seg, om, om.pmts[0], LightClass::muon_direct, zero_yield).mu <
              1e-290);
    }
    SUBCASE("the distance clamp removes the singularity") {
        OpticalModule om = om_at({0.001, 0, 0}, {-1, 0, 0}, 0.1, 1.0);
        HitExpectation e = expected_npe(source, om, om.pmts[0], LightClass::shower_direct, cfg);
        CHECK(e.r == cfg.d_min_m);
        CHECK(std::isfinite(e.mu));
    }
    SUBCASE("scattered and direct split the photon budget") {
        SimConfig split = cfg;
        split.scatter_fraction = 0.2;
        OpticalModule om = om_at({10, 0, 0}, {-1, 0, 0}, 0.1, 1.0);
        double direct = expected_npe(source, om, om.pmts[0], LightClass::shower_direct, split).mu;
        double scattered =
            expected_npe(source, om, om.pmts[0], LightClass::shower_scattered, split).mu;
        CHECK(scattered / direct == doctest::Approx(0.25).epsilon(1e-12));  // 0.2 / 0.8
    }
}

TEST_CASE("expected_npe is monotone in distance, linear in QE and yield") {
    SimConfig cfg;
    ShowerSource source{0.0, 100.0, 0.0};
    double prev = 1e300;
    for (double d = 1.0; d < 300.0; d += 7.3) {
        OpticalModule om = om_at({d, 0, 0}, {-1, 0, 0}, 0.05, 0.5);
        double mu = expected_npe(source, om, om.pmts[0], LightClass::shower_direct, cfg).mu;
        CHECK(mu <= prev);
        prev = mu;
    }

    OpticalModule om = om_at({25, 0, 0}, {-1, 0, 0}, 0.05, 0.5);
    double base = expected_npe(source, om, om.pmts[0], LightClass::shower_direct, cfg).mu;

    OpticalModule om_qe = om_at({25, 0, 0}, {-1, 0, 0}, 0.05, 1.0);
    CHECK(expected_npe(source, om_qe, om_qe.pmts[0], LightClass::shower_direct, cfg).mu ==
          doctest::Approx(2.0 * base).epsilon(1e-12));

    SimConfig doubled = cfg;
    doubled.yield_shower_per_gev *= 2.0;
    CHECK(expected_npe(source, om, om.pmts[0], LightClass::shower_direct, doubled).mu ==
          doctest::Approx(2.0 * base).epsilon(1e-12));
}

TEST_CASE("sample_poisson: traced algorithm") {
    SUBCASE("mu = 0 returns 0 after exactly one uniform") {
        ForcedStream s{{0.7}};
        CHECK(sample_poisson(0.0, s) == 0);
        CHECK(s.values.empty());
    }
    SUBCASE("mu = 1 with uniforms (0.5, 0.5) returns 1") {
        // L = e^-1 = 0.36788; p: 0.5 > L, then 0.25 <= L
        ForcedStream s{{0.5, 0.5}};
        CHECK(sample_poisson(1.0, s) == 1);
        CHECK(s.values.empty());
    }
    SUBCASE("invalid mu") {
        ForcedStream s{{0.5}};
        CHECK_THROWS_AS(sample_poisson(-1.0, s), std::invalid_argument);
        CHECK_THROWS_AS(sample_poisson(2e4, s), std::invalid_argument);  // > mu_max
        RngStream rng{3};
        CHECK_NOTHROW(sample_poisson(2e4, rng, 1e5));  // raised ceiling admits it
    }
}

TEST_CASE("sample_poisson moments at mu = 3") {
    const int n = 100000;
    RngStream rng{404};
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        double k = sample_poisson(3.0, rng);
        sum += k;
        sum2 += k * k;
    }
    double mean = sum / n;
    double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean - 3.0) < 3.0 * std::sqrt(3.0 / n));
    CHECK(std::abs(var - 3.0) < 0.05 * 3.0);
}

TEST_CASE("generate_hits") {
    CdfSet cdfs = testsupport::uniform_cdf_set({0, 10, 20}, {0.0, 0.5, 1.0});

    SUBCASE("mu = 0 yields no hits") {
        ForcedStream s{{0.9}};
        HitExpectation e{0.0, 5.0, 0.5, 100.0, LightClass::muon_direct};
        CHECK(generate_hits(e, cdfs, 1, 2, s).empty());
    }

    SUBCASE("two hits from traced uniforms land at t_geo + inverted times") {
        // count draws: mu = 3 -> L = e^-3 = 0.0498;
        // 0.9 > L, 0.81 > L, 0.81e-4 <= L -> n = 2; then times 0.25, 0.75
        ForcedStream s{{0.9, 0.9, 1e-4, 0.25, 0.75}};
        HitExpectation e{3.0, 0.0, 0.0, 100.0, LightClass::muon_direct};
        std::vector<Hit> hits = generate_hits(e, cdfs, 4, 7, s);
        REQUIRE(hits.size() == 2);
        CHECK(hits[0].time_ns == doctest::Approx(105.0).epsilon(1e-12));
        CHECK(hits[1].time_ns == doctest::Approx(115.0).epsilon(1e-12));
        CHECK(hits[0].om_id == 4);
        CHECK(hits[0].pmt_id == 7);
        CHECK(hits[0].npe == 1);
        CHECK(hits[0].light_class == LightClass::muon_direct);
        CHECK(s.values.empty());
    }

    SUBCASE("identical stream state gives identical hits") {
        HitExpectation e{2.5, 0.0, 0.0, 50.0, LightClass::shower_scattered};
        RngStream a{99}, b{99};
        CHECK(generate_hits(e, cdfs, 0, 0, a) == generate_hits(e, cdfs, 0, 0, b));
    }

    SUBCASE("zero-flux neighborhoods emit everything at t_geo") {
        CdfSet dark = testsupport::uniform_cdf_set({0, 10, 20}, {0.0, 0.0, 0.0});
        for (int c = 0; c < kNumLightClasses; ++c) dark.tables[c].zero_flux.assign(4, 1);
        HitExpectation e{4.0, 0.0, 0.0, 77.0, LightClass::muon_scattered};
        RngStream rng{12};
        std::vector<Hit> hits = generate_hits(e, dark, 0, 0, rng);
        for (const Hit& h : hits) CHECK(h.time_ns == 77.0);
    }
}

TEST_CASE("process_om") {
    CdfSet cdfs = testsupport::uniform_cdf_set({0, 10, 20}, {0.0, 0.5, 1.0});
    SimConfig cfg;
    cfg.scatter_fraction = 0.0;

    OpticalModule om;
    om.om_id = 3;
    om.position = {5, 0, 0};
    om.pmts = {Pmt{0, {-1, 0, 0}, 0.1, 1.0}, Pmt{1, {1, 0, 0}, 0.1, 1.0}};

    std::vector<RngStream> streams(10);
    auto factory = [&](int id) -> RngStream& { return streams[id]; };

    SUBCASE("no sources, no hits") {
        CHECK(process_om(om, {}, {}, cdfs, cfg, factory).empty());
    }

    SUBCASE("scatter_fraction 0 produces only direct hits") {
        std::vector<ShowerSource> showers{{0.0, 50.0, 0.0}};
        streams[3] = derive_stream(1, 0, 3);
        std::vector<Hit> hits = process_om(om, {}, showers, cdfs, cfg, factory);
        REQUIRE(!hits.empty());
        for (const Hit& h : hits) {
            CHECK(h.light_class == LightClass::shower_direct);
            CHECK(h.om_id == 3);
        }
    }

    SUBCASE("output is sorted by (pmt, time, class) and reproducible") {
        std::vector<Segment> segments{{0, 10, 1000, 0}, {10, 20, 990, 33}};
        std::vector<ShowerSource> showers{{5.0, 20.0, 16.0}};
        cfg.scatter_fraction = 0.2;

        streams[3] = derive_stream(7, 0, 3);
        std::vector<Hit> first = process_om(om, segments, showers, cdfs, cfg, factory);
        streams[3] = derive_stream(7, 0, 3);
        std::vector<Hit> second = process_om(om, segments, showers, cdfs, cfg, factory);
        CHECK(first == second);

        for (size_t i = 1; i < first.size(); ++i) {
            const Hit& a = first[i - 1];
            const Hit& b = first[i];
            bool sorted = a.pmt_id < b.pmt_id ||
                          (a.pmt_id == b.pmt_id &&
                           (a.time_ns < b.time_ns ||
                            (a.time_ns == b.time_ns && a.light_class <= b.light_class)));
            CHECK(sorted);
        }
    }
}

TEST_CASE("process_om equals the per-combination composition bit for bit") {
    // reference route: public expected_npe + generate_hits called per
    // (source, pmt, class) in normative order on the same stream
    CdfSet cdfs = build_cdf_set(make_synthetic_pdf_set(SynthParams{}), 1);
    SimConfig cfg;

    OpticalModule om;
    om.om_id = 2;
    om.position = {14.0, -6.0, 35.0};
    om.pmts = {Pmt{0, Vec3{-1, 0, 0}, 0.04, 0.1}, Pmt{1, Vec3{0.6, 0, 0.8}, 0.04, 0.1},
               Pmt{2, Vec3{0, -1, 0}, 0.05, 0.3}};

    std::vector<Segment> segments{{0, 10, 5000, 0}, {10, 20, 4990, 33.3}};
    std::vector<ShowerSource> showers{{15.0, 800.0, 50.0}, {25.0, 40.0, 83.0}};

    RngStream impl_stream = derive_stream(42, 0, 2);
    std::vector<RngStream> streams{RngStream{}, RngStream{}, impl_stream};
    std::vector<Hit> via_process =
        process_om(om, segments, showers, cdfs, cfg,
                   [&](int id) -> RngStream& { return streams[id]; });

    RngStream ref_stream = derive_stream(42, 0, 2);
    std::vector<Hit> reference;
    auto add = [&](const HitExpectation& e, int pmt_id) {
        std::vector<Hit> h = generate_hits(e, cdfs, om.om_id, pmt_id, ref_stream, cfg.mu_max);
        reference.insert(reference.end(), h.begin(), h.end());
    };
    for (const Segment& s : segments)
        for (const Pmt& p : om.pmts) {
            add(expected_npe(s, om, p, LightClass::muon_direct, cfg), p.pmt_id);
            add(expected_npe(s, om, p, LightClass::muon_scattered, cfg), p.pmt_id);
        }
    for (const ShowerSource& s : showers)
        for (const Pmt& p : om.pmts) {
            add(expected_npe(s, om, p, LightClass::shower_direct, cfg), p.pmt_id);
            add(expected_npe(s, om, p, LightClass::shower_scattered, cfg), p.pmt_id);
        }
    std::sort(reference.begin(), reference.end(), [](const Hit& a, const Hit& b) {
        if (a.pmt_id != b.pmt_id) return a.pmt_id < b.pmt_id;
        if (a.time_ns != b.time_ns) return a.time_ns < b.time_ns;
        return a.light_class < b.light_class;
    });

    REQUIRE(!via_process.empty());
    CHECK(via_process == reference);
    CHECK(streams[2].state == ref_stream.state);  // same draws consumed
}

TEST_CASE("merge_hits: hand-applied greedy rule") {
    std::vector<Hit> hits{{0, 0, 100.0, 1, LightClass::muon_direct},
                          {0, 0, 100.5, 2, LightClass::muon_direct}};
    std::vector<Hit> merged = merge_hits(hits, 1.0);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].time_ns == 100.0);
    CHECK(merged[0].npe == 3);
}

TEST_CASE("merge_hits edge rules") {
    SUBCASE("window 0 with distinct times only sorts") {
        std::vector<Hit> hits{{0, 0, 5.0, 1, LightClass::muon_direct},
                              {0, 0, 2.0, 1, LightClass::muon_direct}};
        std::vector<Hit> merged = merge_hits(hits, 0.0);
        REQUIRE(merged.size() == 2);
        CHECK(merged[0].time_ns == 2.0);
        CHECK(merged[1].time_ns == 5.0);
    }
    SUBCASE("window 0 merges exactly coincident hits") {
        std::vector<Hit> hits{{0, 0, 5.0, 1, LightClass::muon_direct},
                              {0, 0, 5.0, 2, LightClass::muon_direct}};
        CHECK(merge_hits(hits, 0.0).size() == 1);
    }
    SUBCASE("different PMTs never merge") {
        std::vector<Hit> hits{{0, 0, 5.0, 1, LightClass::muon_direct},
                              {0, 1, 5.0, 1, LightClass::muon_direct}};
        CHECK(merge_hits(hits, 10.0).size() == 2);
    }
    SUBCASE("different classes never merge") {
        std::vector<Hit> hits{{0, 0, 5.0, 1, LightClass::muon_direct},
                              {0, 0, 5.0, 1, LightClass::muon_scattered}};
        CHECK(merge_hits(hits, 10.0).size() == 2);
    }
    SUBCASE("negative window is rejected") {
        CHECK_THROWS_AS(merge_hits({}, -1.0), std::invalid_argument);
    }
    SUBCASE("greedy anchor: a chain merges only while within the first hit") {
        std::vector<Hit> hits{{0, 0, 0.0, 1, LightClass::muon_direct},
                              {0, 0, 0.9, 1, LightClass::muon_direct},
                              {0, 0, 1.8, 1, LightClass::muon_direct}};
        std::vector<Hit> merged = merge_hits(hits, 1.0);
        REQUIRE(merged.size() == 2);
        CHECK(merged[0].npe == 2);
        CHECK(merged[1].time_ns == 1.8);
    }
}

TEST_CASE("merge_hits conservation properties") {
    RngStream rng{31415};
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<Hit> hits = random_hit_list(rng);
        double window = next_uniform(rng) * 5.0;
        std::vector<Hit> merged = merge_hits(hits, window);

        CHECK(total_npe(merged) == total_npe(hits));
        CHECK(merged.size() <= hits.size());
        CHECK(merge_hits(merged, window) == merged);  // idempotent
    }
}
