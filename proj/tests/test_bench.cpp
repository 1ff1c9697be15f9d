#include <doctest.h>

#include <cmath>
#include <sstream>

#include "support.hpp"
#include "telsim/bench.hpp"
#include "telsim/eventio.hpp"

using namespace telsim;

namespace {

DetectorGeometry tiny_detector() {
    DetectorGeometry geom;
    for (int i = 0; i < 6; ++i) {
        OpticalModule om;
        om.om_id = i;
        om.position = {30.0 * (i % 3) - 30.0, 25.0 * (i / 3) - 12.5, 40.0 * i - 100.0};
        om.pmts = {Pmt{0, Vec3{0, 0, -1}, 0.08, 0.5}, Pmt{1, Vec3{-1, 0, 0}, 0.08, 0.5}};
        geom.oms.push_back(om);
    }
    return geom;
}

}  // namespace

TEST_CASE("classify_energy: slice bounds") {
    CHECK(classify_energy(5000.0) == EnergySlice::low);    // 5 TeV
    CHECK(classify_energy(50000.0) == EnergySlice::mid);   // 50 TeV
    CHECK(classify_energy(2.0e6) == EnergySlice::high);    // 2 PeV

    // boundaries belong to the upper slice
    CHECK(classify_energy(100.0) == EnergySlice::low);
    CHECK(classify_energy(1.0e4) == EnergySlice::mid);
    CHECK(classify_energy(1.0e6) == EnergySlice::high);

    CHECK_THROWS_AS(classify_energy(99.9), std::invalid_argument);
}

TEST_CASE("classify_energy partitions the spectrum") {
    RngStream rng{5};
    for (int i = 0; i < 10000; ++i) {
        double e = std::exp(std::log(100.0) + next_uniform(rng) * std::log(1e7));
        EnergySlice s = classify_energy(e);
        int matches = 0;
        if (e >= 100.0 && e < 1e4) matches += s == EnergySlice::low;
        if (e >= 1e4 && e < 1e6) matches += s == EnergySlice::mid;
        if (e >= 1e6) matches += s == EnergySlice::high;
        CHECK(matches == 1);
    }
}

TEST_CASE("bench plan validation") {
    BenchPlan plan;
    CHECK_NOTHROW(plan.validate());

    plan.worker_counts = {2, 4};  // missing the baseline
    CHECK_THROWS_AS(plan.validate(), std::invalid_argument);

    plan = BenchPlan{};
    plan.repetitions = 0;
    CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
}

TEST_CASE("generated benchmark events respect the slice bounds") {
    DetectorGeometry geom = tiny_detector();
    BenchPlan plan;

    for (EnergySlice slice : {EnergySlice::low, EnergySlice::mid, EnergySlice::high}) {
        std::vector<Event> events = make_bench_events(plan, slice, 13, geom, 100);
        REQUIRE(events.size() == 100);
        for (const Event& e : events) {
            REQUIRE(e.tracks.size() == 1);
            const Track& t = e.tracks[0];
            CHECK(t.kind == TrackKind::muon);
            CHECK(classify_energy(t.energy_gev) == slice);
            CHECK(t.direction.z < 0.0);  // downgoing
            CHECK(std::abs(t.direction.norm() - 1.0) < 1e-9);
            // inside the inflated bounding box
            CHECK(t.position.x >= -130.0);
            CHECK(t.position.x <= 130.0);
            CHECK(t.position.z >= -200.0);
            CHECK(t.position.z <= 200.0);
        }
    }
    std::vector<Event> high = make_bench_events(plan, EnergySlice::high, 13, geom, 200);
    for (const Event& e : high) CHECK(e.tracks[0].energy_gev < plan.high_cap_gev);
}

TEST_CASE("event generation is deterministic in the seed") {
    DetectorGeometry geom = tiny_detector();
    BenchPlan plan;
    std::ostringstream a, b, c;
    write_events(a, make_bench_events(plan, EnergySlice::all, 21, geom, 50));
    write_events(b, make_bench_events(plan, EnergySlice::all, 21, geom, 50));
    write_events(c, make_bench_events(plan, EnergySlice::all, 22, geom, 50));
    CHECK(a.str() == b.str());
    CHECK(a.str() != c.str());
}

TEST_CASE("the all-spectrum mix matches the configured proportions") {
    DetectorGeometry geom = tiny_detector();
    BenchPlan plan;
    const std::uint64_t n = 2000;
    std::vector<Event> events = make_bench_events(plan, EnergySlice::all, 3, geom, n);

    std::uint64_t counts[3] = {0, 0, 0};
    for (const Event& e : events)
        counts[static_cast<int>(classify_energy(e.tracks[0].energy_gev))]++;

    auto within_3_sigma = [&](std::uint64_t count, double p) {
        double sigma = std::sqrt(n * p * (1 - p));
        return std::abs(static_cast<double>(count) - n * p) <= 3.0 * sigma;
    };
    CHECK(within_3_sigma(counts[0], plan.mix_low));
    CHECK(within_3_sigma(counts[1], plan.mix_mid));
    CHECK(within_3_sigma(counts[2], plan.mix_high));
}

TEST_CASE("run_bench produces per-worker rows with exact baseline speedups") {
    DetectorGeometry geom = tiny_detector();
    CdfSet cdfs = build_cdf_set(make_synthetic_pdf_set(SynthParams{}), 1);

    BenchPlan plan;
    plan.worker_counts = {1, 2};
    plan.events_per_slice = 12;
    plan.repetitions = 2;
    plan.warmup = 0;

    SimConfig cfg;
    cfg.seed = 5;
    std::vector<TimingReport> rows = run_bench(plan, EnergySlice::low, geom, cdfs, cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].workers == 1);
    CHECK(rows[1].workers == 2);
    CHECK(rows[0].energy_slice == "low");
    CHECK(rows[0].n_events == 12);
    CHECK(rows[0].mean_hit_detect_ms > 0.0);

    std::ostringstream csv;
    write_timing_csv(csv, rows);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);  // header
    std::getline(in, line);  // workers=1 row
    CHECK(line.find(",1.00000000000e+00,1.00000000000e+00") != std::string::npos);
}

TEST_CASE("run_bench with a single worker count reports speedup 1.0") {
    DetectorGeometry geom = tiny_detector();
    CdfSet cdfs = build_cdf_set(make_synthetic_pdf_set(SynthParams{}), 1);
    BenchPlan plan;
    plan.worker_counts = {1};
    plan.events_per_slice = 6;
    plan.repetitions = 1;
    plan.warmup = 0;
    SimConfig cfg;

    std::vector<TimingReport> rows = run_bench(plan, EnergySlice::mid, geom, cdfs, cfg);
    REQUIRE(rows.size() == 1);
    std::ostringstream csv;
    write_timing_csv(csv, rows);
    CHECK(csv.str().find(",1.00000000000e+00,1.00000000000e+00") != std::string::npos);
}
