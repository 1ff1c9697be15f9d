// Command-line driver: simulate events against a detector, run the
// thread-scaling benchmark, and generate the input files (tables,
// geometry, benchmark events) a fresh checkout needs.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "telsim/bench.hpp"
#include "telsim/engine.hpp"
#include "telsim/eventio.hpp"
#include "telsim/geometry.hpp"
#include "telsim/photonics.hpp"
#include "telsim/textio.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count() / 1e6;
}

void ensure_parent_dir(const std::string& path) {
    std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

struct SimulateArgs {
    std::string geometry, tables, input, output, config_path, timing_csv, scheduling;
    int workers = 0;
    std::uint64_t seed = 0;
    std::uint64_t first = 0;
    std::uint64_t count = telsim::kAllEvents;
};

int run_simulate(const SimulateArgs& args, const CLI::App& cmd) {
    telsim::SimConfig config;
    if (!args.config_path.empty()) telsim::load_config_file(args.config_path, config);
    if (cmd.count("--workers")) config.workers = args.workers;
    if (cmd.count("--seed")) config.seed = args.seed;
    if (cmd.count("--scheduling"))
        config.scheduling = telsim::scheduling_from_name(args.scheduling);
    config.validate();

    telsim::DetectorGeometry geometry = telsim::load_geometry(args.geometry);
    telsim::PdfSet pdfs = telsim::load_pdf_set(args.tables);
    telsim::CdfSet cdfs = telsim::build_cdf_set(pdfs, config.workers);

    auto t_parse = Clock::now();
    std::vector<telsim::Event> events = telsim::read_events(args.input, args.first, args.count);
    double parse_ms = ms_since(t_parse);

    telsim::BatchResult batch = telsim::run_batch(events, geometry, cdfs, config);

    auto t_write = Clock::now();
    ensure_parent_dir(args.output);
    telsim::write_results(args.output, batch.results);
    double write_ms = ms_since(t_write);

    std::uint64_t failed = 0, hits = 0;
    for (const telsim::EventResult& r : batch.results) {
        if (!r.ok) {
            ++failed;
            std::fprintf(stderr, "event %llu failed: %s\n",
                         static_cast<unsigned long long>(r.event_id), r.error.c_str());
        }
        hits += r.hits.size();
    }

    batch.report.phase_totals.parse_ns = static_cast<std::int64_t>(parse_ms * 1e6);
    batch.report.phase_totals.write_ns = static_cast<std::int64_t>(write_ms * 1e6);
    if (!args.timing_csv.empty()) telsim::write_timing_csv(args.timing_csv, {batch.report});

    std::printf("simulated %zu events (%llu failed), %llu merged hits -> %s\n", events.size(),
                static_cast<unsigned long long>(failed), static_cast<unsigned long long>(hits),
                args.output.c_str());
    std::printf("phases [ms]: parse %.2f, propagate %.2f, rotate %.2f, hit_detect %.2f, "
                "merge %.2f, write %.2f\n",
                parse_ms, batch.report.phase_totals.propagate_ns / 1e6,
                batch.report.phase_totals.rotate_ns / 1e6,
                batch.report.phase_totals.hit_detect_ns / 1e6,
                batch.report.phase_totals.merge_ns / 1e6, write_ms);
    return 0;
}

struct BenchArgs {
    std::string geometry, tables, slice = "mid", scheduling, config_path, out_csv;
    std::vector<int> workers = {1, 2, 4};
    std::uint64_t events = 500;
    std::uint64_t seed = 0;
    int reps = 3;
    int warmup = 2;
};

int run_bench_cmd(const BenchArgs& args, const CLI::App& cmd) {
    telsim::SimConfig config;
    if (!args.config_path.empty()) telsim::load_config_file(args.config_path, config);
    if (cmd.count("--seed")) config.seed = args.seed;
    if (cmd.count("--scheduling"))
        config.scheduling = telsim::scheduling_from_name(args.scheduling);
    config.validate();

    telsim::BenchPlan plan;
    plan.worker_counts = args.workers;
    plan.events_per_slice = args.events;
    plan.repetitions = args.reps;
    plan.warmup = args.warmup;

    telsim::DetectorGeometry geometry = telsim::load_geometry(args.geometry);
    telsim::CdfSet cdfs = telsim::build_cdf_set(telsim::load_pdf_set(args.tables),
                                                *std::max_element(args.workers.begin(),
                                                                  args.workers.end()));

    std::vector<telsim::TimingReport> rows = telsim::run_bench(
        plan, telsim::energy_slice_from_name(args.slice), geometry, cdfs, config);
    ensure_parent_dir(args.out_csv);
    telsim::write_timing_csv(args.out_csv, rows);

    for (const telsim::TimingReport& r : rows) {
        double share = r.phase_totals.total_ns > 0
                           ? 100.0 * r.phase_totals.hit_detect_ns / r.phase_totals.total_ns
                           : 0.0;
        std::printf("slice %-4s workers %d (%s): hit_detect %.3f ms/event, total %.3f ms/event "
                    "(hit_detect %.1f%% of total)\n",
                    r.energy_slice.c_str(), r.workers, telsim::scheduling_name(r.scheduling),
                    r.mean_hit_detect_ms, r.mean_total_ms, share);
    }
    std::printf("timing csv -> %s\n", args.out_csv.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"detector response simulator for high energy neutrino telescopes"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    CLI::App* sim = app.add_subcommand("simulate", "simulate events and write hits");
    sim->add_option("--geometry", sim_args.geometry, "detector geometry file")->required();
    sim->add_option("--tables", sim_args.tables, "directory with the four PDF tables")->required();
    sim->add_option("--input", sim_args.input, "event file")->required();
    sim->add_option("--output", sim_args.output, "result file")->required();
    sim->add_option("--config", sim_args.config_path, "key = value config file");
    sim->add_option("--workers", sim_args.workers, "worker lanes (overrides config)");
    sim->add_option("--seed", sim_args.seed, "RNG seed (overrides config)");
    sim->add_option("--scheduling", sim_args.scheduling, "static or dynamic")
        ->check(CLI::IsMember({"static", "dynamic"}));
    sim->add_option("--first", sim_args.first, "first event index to process");
    sim->add_option("--count", sim_args.count, "number of events to process");
    sim->add_option("--timing-csv", sim_args.timing_csv, "write phase timings as CSV");

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "run the thread-scaling benchmark");
    bench->add_option("--geometry", bench_args.geometry, "detector geometry file")->required();
    bench->add_option("--tables", bench_args.tables, "directory with the four PDF tables")
        ->required();
    bench->add_option("--slice", bench_args.slice, "energy slice: low, mid, high or all")
        ->check(CLI::IsMember({"low", "mid", "high", "all"}));
    bench->add_option("--events", bench_args.events, "events per run");
    bench->add_option("--workers", bench_args.workers, "worker counts, e.g. 1,2,4")
        ->delimiter(',');
    bench->add_option("--scheduling", bench_args.scheduling, "static or dynamic")
        ->check(CLI::IsMember({"static", "dynamic"}));
    bench->add_option("--out", bench_args.out_csv, "output CSV path")->required();
    bench->add_option("--config", bench_args.config_path, "key = value config file");
    bench->add_option("--seed", bench_args.seed, "RNG seed (overrides config)");
    bench->add_option("--reps", bench_args.reps, "timed repetitions per worker count");
    bench->add_option("--warmup", bench_args.warmup, "discarded warmup runs per worker count");

    std::string tables_out, tables_preset = "default";
    CLI::App* gen_tables = app.add_subcommand("gen-tables", "generate synthetic PDF tables");
    gen_tables->add_option("--out", tables_out, "output directory")->required();
    gen_tables->add_option("--preset", tables_preset, "parameter preset")
        ->check(CLI::IsMember({"default"}));

    std::string geo_out;
    CLI::App* gen_geo =
        app.add_subcommand("gen-geometry", "write the default 115-module benchmark detector");
    gen_geo->add_option("--out", geo_out, "output geometry file")->required();

    struct {
        std::string geometry, slice = "all", out;
        std::uint64_t events = 100, seed = 1;
    } gen_ev_args;
    CLI::App* gen_ev = app.add_subcommand("gen-events", "generate benchmark events");
    gen_ev->add_option("--geometry", gen_ev_args.geometry, "detector geometry file")->required();
    gen_ev->add_option("--slice", gen_ev_args.slice, "energy slice: low, mid, high or all")
        ->check(CLI::IsMember({"low", "mid", "high", "all"}));
    gen_ev->add_option("--events", gen_ev_args.events, "number of events");
    gen_ev->add_option("--seed", gen_ev_args.seed, "RNG seed");
    gen_ev->add_option("--out", gen_ev_args.out, "output event file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*sim) return run_simulate(sim_args, *sim);
        if (*bench) return run_bench_cmd(bench_args, *bench);
        if (*gen_tables) {
            std::filesystem::create_directories(tables_out);
            telsim::generate_synthetic_pdf_set(telsim::SynthParams{}, tables_out);
            std::printf("wrote 4 tables -> %s\n", tables_out.c_str());
            return 0;
        }
        if (*gen_geo) {
            ensure_parent_dir(geo_out);
            telsim::save_geometry(geo_out, telsim::default_detector());
            std::printf("wrote geometry -> %s\n", geo_out.c_str());
            return 0;
        }
        if (*gen_ev) {
            telsim::BenchPlan plan;
            plan.events_per_slice = gen_ev_args.events;
            ensure_parent_dir(gen_ev_args.out);
            telsim::generate_bench_events(plan, telsim::energy_slice_from_name(gen_ev_args.slice),
                                          gen_ev_args.seed,
                                          telsim::load_geometry(gen_ev_args.geometry),
                                          gen_ev_args.out);
            std::printf("wrote %llu events -> %s\n",
                        static_cast<unsigned long long>(gen_ev_args.events),
                        gen_ev_args.out.c_str());
            return 0;
        }
    } catch (const telsim::DeterminismError& e) {
        std::fprintf(stderr, "determinism regression: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
