#include "telsim/engine.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "telsim/textio.hpp"

namespace telsim {

const char* scheduling_name(Scheduling s) {
    return s == Scheduling::static_block ? "static_block" : "dynamic";
}

Scheduling scheduling_from_name(const std::string& name) {
    if (name == "static_block" || name == "static") return Scheduling::static_block;
    if (name == "dynamic") return Scheduling::dynamic;
    throw std::invalid_argument("unknown scheduling mode '" + name +
                                "' (expected static_block or dynamic)");
}

void SimConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0)) throw std::invalid_argument(std::string("config: ") + name + " must be > 0");
    };
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (chunk < 1) throw std::invalid_argument("config: chunk must be >= 1");
    if (max_steps < 1) throw std::invalid_argument("config: max_steps must be >= 1");
    positive(step_m, "step_m");
    positive(e_min_gev, "e_min_gev");
    positive(a_gevm, "a_gevm");
    if (b_perm < 0) throw std::invalid_argument("config: b_perm must be >= 0");
    if (shower_prob < 0 || shower_prob > 1)
        throw std::invalid_argument("config: shower_prob must be in [0,1]");
    if (shower_frac_min < 0 || shower_frac_max < shower_frac_min || shower_frac_max > 1)
        throw std::invalid_argument("config: need 0 <= shower_frac_min <= shower_frac_max <= 1");
    positive(shower_threshold_gev, "shower_threshold_gev");
    positive(yield_muon_per_m, "yield_muon_per_m");
    positive(yield_shower_per_gev, "yield_shower_per_gev");
    positive(lambda_abs_m, "lambda_abs_m");
    if (scatter_fraction < 0 || scatter_fraction > 1)
        throw std::invalid_argument("config: scatter_fraction must be in [0,1]");
    positive(n_water, "n_water");
    positive(d_min_m, "d_min_m");
    positive(mu_max, "mu_max");
    if (merge_window_ns < 0) throw std::invalid_argument("config: merge_window_ns must be >= 0");
}

void apply_config_entry(const std::string& key, const std::string& value, SimConfig& c) {
    const std::string ctx = "config key '" + key + "'";
    if (key == "seed") c.seed = parse_u64(value, ctx);
    else if (key == "workers") c.workers = static_cast<int>(parse_int(value, ctx));
    else if (key == "scheduling") c.scheduling = scheduling_from_name(value);
    else if (key == "chunk") c.chunk = static_cast<int>(parse_int(value, ctx));
    else if (key == "step_m") c.step_m = parse_real(value, ctx);
    else if (key == "e_min_gev") c.e_min_gev = parse_real(value, ctx);
    else if (key == "max_steps") c.max_steps = static_cast<int>(parse_int(value, ctx));
    else if (key == "a_gevm") c.a_gevm = parse_real(value, ctx);
    else if (key == "b_perm") c.b_perm = parse_real(value, ctx);
    else if (key == "shower_prob") c.shower_prob = parse_real(value, ctx);
    else if (key == "shower_frac_min") c.shower_frac_min = parse_real(value, ctx);
    else if (key == "shower_frac_max") c.shower_frac_max = parse_real(value, ctx);
    else if (key == "shower_threshold_gev") c.shower_threshold_gev = parse_real(value, ctx);
    else if (key == "yield_muon_per_m") c.yield_muon_per_m = parse_real(value, ctx);
    else if (key == "yield_shower_per_gev") c.yield_shower_per_gev = parse_real(value, ctx);
    else if (key == "lambda_abs_m") c.lambda_abs_m = parse_real(value, ctx);
    else if (key == "scatter_fraction") c.scatter_fraction = parse_real(value, ctx);
    else if (key == "n_water") c.n_water = parse_real(value, ctx);
    else if (key == "d_min_m") c.d_min_m = parse_real(value, ctx);
    else if (key == "mu_max") c.mu_max = parse_real(value, ctx);
    else if (key == "merge_window_ns") c.merge_window_ns = parse_real(value, ctx);
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

void load_config_file(const std::string& path, SimConfig& config) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        try {
            apply_config_entry(key, value, config);
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void run_parallel(std::size_t n, int workers, Scheduling mode, int chunk,
                  const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    int lanes = static_cast<int>(std::min<std::size_t>(workers, n));

    if (mode == Scheduling::static_block) {
        std::size_t per = (n + lanes - 1) / lanes;
        auto block = [&](int lane) {
            std::size_t b = std::min(n, lane * per);
            std::size_t e = std::min(n, (lane + 1) * per);
            for (std::size_t i = b; i < e; ++i) fn(i);
        };
        std::vector<std::thread> threads;
        threads.reserve(lanes - 1);
        for (int lane = 1; lane < lanes; ++lane) threads.emplace_back(block, lane);
        block(0);
        for (auto& t : threads) t.join();
    } else {
        std::atomic<std::size_t> cursor{0};
        std::size_t step = static_cast<std::size_t>(chunk);
        auto drain = [&] {
            for (;;) {
                std::size_t b = cursor.fetch_add(step, std::memory_order_relaxed);
                if (b >= n) return;
                std::size_t e = std::min(n, b + step);
                for (std::size_t i = b; i < e; ++i) fn(i);
            }
        };
        std::vector<std::thread> threads;
        threads.reserve(lanes - 1);
        for (int lane = 1; lane < lanes; ++lane) threads.emplace_back(drain);
        drain();
        for (auto& t : threads) t.join();
    }
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

}  // namespace

EventResult simulate_event(const Event& event, const DetectorGeometry& geometry,
                           const CdfSet& cdfs, const SimConfig& config) {
    config.validate();
    if (geometry.oms.empty()) throw std::invalid_argument("simulate_event: empty geometry");

    const auto event_start = Clock::now();
    EventResult result;
    result.event_id = event.event_id;

    const std::size_t n_oms = geometry.oms.size();
    std::vector<std::vector<Hit>> slots(n_oms);
    std::vector<std::string> errors(n_oms);

    // one stream per OM for the whole event, consumed across track rounds;
    // the propagation stream uses the reserved sentinel id
    std::vector<RngStream> streams(n_oms);
    for (std::size_t i = 0; i < n_oms; ++i)
        streams[i] = derive_stream(config.seed, event.event_id, i);
    RngStream prop_stream = derive_stream(config.seed, event.event_id, kPropagationStreamId);

    std::vector<OpticalModule> local_oms(n_oms);

    for (const Track& track : event.tracks) {
        std::vector<Segment> segments;
        std::vector<ShowerSource> showers;

        if (track.kind == TrackKind::muon) {
            auto t0 = Clock::now();
            PropagationResult prop = propagate_muon(track, config, prop_stream);
            result.timing.propagate_ns += elapsed_ns(t0);
            segments = std::move(prop.segments);
            showers = std::move(prop.showers);
        } else {
            // one point source at the origin of this track's own frame
            Event solo;
            solo.event_id = event.event_id;
            solo.tracks.push_back(track);
            showers = shower_track_sources(solo);
        }

        auto t1 = Clock::now();
        FrameTransform frame = track_frame(track.direction, track.position);
        run_parallel(n_oms, config.workers, config.scheduling, config.chunk,
                     [&](std::size_t i) { local_oms[i] = transform_om(geometry.oms[i], frame); });
        result.timing.rotate_ns += elapsed_ns(t1);

        auto t2 = Clock::now();
        run_parallel(n_oms, config.workers, config.scheduling, config.chunk, [&](std::size_t i) {
            if (!errors[i].empty()) return;  // this OM already failed in an earlier round
            try {
                std::vector<Hit> hits =
                    process_om(local_oms[i], segments, showers, cdfs, config,
                               [&](int om_id) -> RngStream& { return streams[om_id]; });
                slots[i].insert(slots[i].end(), hits.begin(), hits.end());
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        });
        result.timing.hit_detect_ns += elapsed_ns(t2);
    }

    for (std::size_t i = 0; i < n_oms; ++i) {
        if (!errors[i].empty()) {
            result.ok = false;
            result.error = "om " + std::to_string(i) + ": " + errors[i];
            break;  // lowest om_id wins, independent of scheduling
        }
    }

    if (result.ok) {
        auto t3 = Clock::now();
        std::vector<Hit> raw;
        for (std::size_t i = 0; i < n_oms; ++i)
            raw.insert(raw.end(), slots[i].begin(), slots[i].end());
        result.n_raw_hits = raw.size();
        result.hits = merge_hits(std::move(raw), config.merge_window_ns);
        result.timing.merge_ns += elapsed_ns(t3);
    }

    result.timing.total_ns = elapsed_ns(event_start);
    return result;
}

BatchResult run_batch(const std::vector<Event>& events, const DetectorGeometry& geometry,
                      const CdfSet& cdfs, const SimConfig& config) {
    config.validate();
    BatchResult out;
    out.report.workers = config.workers;
    out.report.scheduling = config.scheduling;
    out.results.reserve(events.size());

    for (const Event& event : events) {
        EventResult r;
        try {
            r = simulate_event(event, geometry, cdfs, config);
        } catch (const std::exception& e) {
            // e.g. a malformed track; the event is recorded as failed and
            // the batch moves on
            r = EventResult{};
            r.event_id = event.event_id;
            r.ok = false;
            r.error = e.what();
        }
        out.report.phase_totals.propagate_ns += r.timing.propagate_ns;
        out.report.phase_totals.rotate_ns += r.timing.rotate_ns;
        out.report.phase_totals.hit_detect_ns += r.timing.hit_detect_ns;
        out.report.phase_totals.merge_ns += r.timing.merge_ns;
        out.report.phase_totals.total_ns += r.timing.total_ns;
        out.results.push_back(std::move(r));
    }
    out.report.n_events = events.size();
    if (!events.empty()) {
        out.report.mean_hit_detect_ms =
            static_cast<double>(out.report.phase_totals.hit_detect_ns) / events.size() / 1e6;
        out.report.mean_total_ms =
            static_cast<double>(out.report.phase_totals.total_ns) / events.size() / 1e6;
    }
    return out;
}

}  // namespace telsim
