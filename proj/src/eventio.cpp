#include "telsim/eventio.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "telsim/textio.hpp"

namespace telsim {

namespace {

const char* track_kind_name(TrackKind k) { return k == TrackKind::muon ? "muon" : "em_shower"; }

TrackKind track_kind_from_name(const std::string& s, const LineReader& reader) {
    if (s == "muon") return TrackKind::muon;
    if (s == "em_shower") return TrackKind::em_shower;
    throw ParseError(reader.name() + ":" + std::to_string(reader.line_number()) +
                     ": unknown track kind '" + s + "'");
}

}  // namespace

std::vector<Event> read_events(const std::string& path, std::uint64_t first,
                               std::uint64_t count) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open event file: " + path);
    LineReader reader(in, path);

    std::vector<Event> out;
    std::vector<std::string> tok;
    std::uint64_t index = 0;
    bool have_prev_id = false;
    std::uint64_t prev_id = 0;

    while (reader.next(tok)) {
        std::string ctx = path + ":" + std::to_string(reader.line_number());
        if (tok[0] != "EVENT" || tok.size() != 3)
            reader.fail("expected 'EVENT <id> <n_tracks>'");
        Event event;
        event.event_id = parse_u64(tok[1], ctx);
        std::uint64_t n_tracks = parse_u64(tok[2], ctx);
        if (have_prev_id && event.event_id <= prev_id)
            reader.fail("event ids must be strictly increasing");
        prev_id = event.event_id;
        have_prev_id = true;

        bool keep = index >= first && index - first < count;
        if (keep) event.tracks.reserve(n_tracks);
        for (std::uint64_t t = 0; t < n_tracks; ++t) {
            if (!reader.next(tok)) reader.fail("unexpected end of file inside event");
            ctx = path + ":" + std::to_string(reader.line_number());
            if (tok[0] != "TRACK" || tok.size() != 10)
                reader.fail("expected 'TRACK <kind> <x> <y> <z> <dx> <dy> <dz> <E_GeV> <t_ns>'");
            if (!keep) continue;
            Track track;
            track.kind = track_kind_from_name(tok[1], reader);
            track.position = {parse_real(tok[2], ctx), parse_real(tok[3], ctx),
                              parse_real(tok[4], ctx)};
            track.direction = {parse_real(tok[5], ctx), parse_real(tok[6], ctx),
                               parse_real(tok[7], ctx)};
            track.energy_gev = parse_real(tok[8], ctx);
            track.time_ns = parse_real(tok[9], ctx);
            if (track.energy_gev <= 0) reader.fail("track energy must be > 0");
            if (std::abs(track.direction.norm() - 1.0) > 1e-9)
                reader.fail("track direction is not unit length");
            event.tracks.push_back(track);
        }
        if (keep) out.push_back(std::move(event));
        ++index;
        if (index >= first && index - first >= count) break;
    }
    return out;
}

void write_events(std::ostream& out, const std::vector<Event>& events) {
    out << "# event file\n";
    for (const Event& e : events) {
        out << "EVENT " << e.event_id << ' ' << e.tracks.size() << '\n';
        for (const Track& t : e.tracks)
            out << "TRACK " << track_kind_name(t.kind) << ' ' << format_real(t.position.x) << ' '
                << format_real(t.position.y) << ' ' << format_real(t.position.z) << ' '
                << format_real(t.direction.x) << ' ' << format_real(t.direction.y) << ' '
                << format_real(t.direction.z) << ' ' << format_real(t.energy_gev) << ' '
                << format_real(t.time_ns) << '\n';
    }
}

void write_events(const std::string& path, const std::vector<Event>& events) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write event file: " + path);
    write_events(out, events);
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_results(std::ostream& out, const std::vector<EventResult>& results) {
    out << "# results v1\n";
    for (const EventResult& r : results) {
        if (!r.ok) {
            out << "# EVENT " << r.event_id << " failed: " << r.error << '\n';
            continue;
        }
        out << "EVENT " << r.event_id << ' ' << r.hits.size() << ' ' << r.n_raw_hits << '\n';
        for (const Hit& h : r.hits)
            out << "HIT " << h.om_id << ' ' << h.pmt_id << ' ' << format_real(h.time_ns) << ' '
                << h.npe << ' ' << light_class_name(h.light_class) << '\n';
    }
}

void write_results(const std::string& path, const std::vector<EventResult>& results) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write result file: " + path);
    write_results(out, results);
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ResultRecord> read_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open result file: " + path);
    LineReader reader(in, path);

    std::vector<ResultRecord> out;
    std::vector<std::string> tok;
    while (reader.next(tok)) {
        std::string ctx = path + ":" + std::to_string(reader.line_number());
        if (tok[0] != "EVENT" || tok.size() != 4)
            reader.fail("expected 'EVENT <id> <n_hits> <n_raw_hits>'");
        ResultRecord rec;
        rec.event_id = parse_u64(tok[1], ctx);
        std::uint64_t n_hits = parse_u64(tok[2], ctx);
        rec.n_raw_hits = parse_u64(tok[3], ctx);
        rec.hits.reserve(n_hits);
        for (std::uint64_t i = 0; i < n_hits; ++i) {
            if (!reader.next(tok)) reader.fail("unexpected end of file inside event");
            ctx = path + ":" + std::to_string(reader.line_number());
            if (tok[0] != "HIT" || tok.size() != 6)
                reader.fail("expected 'HIT <om_id> <pmt_id> <t_ns> <npe> <light_class>'");
            Hit h;
            h.om_id = static_cast<int>(parse_int(tok[1], ctx));
            h.pmt_id = static_cast<int>(parse_int(tok[2], ctx));
            h.time_ns = parse_real(tok[3], ctx);
            h.npe = static_cast<std::uint32_t>(parse_u64(tok[4], ctx));
            h.light_class = light_class_from_name(tok[5]);
            rec.hits.push_back(h);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

void write_timing_csv(std::ostream& out, const std::vector<TimingReport>& runs) {
    out << "energy_slice,workers,scheduling,mean_hit_detect_ms,mean_total_ms,"
           "speedup_hit_detect,speedup_total\n";

    // Speedups are ratios of the values as printed: format, parse back,
    // divide. A reader recomputing from the CSV gets the same bits.
    auto printed = [](double v) { return parse_real(format_real(v), "timing csv"); };

    for (const TimingReport& run : runs) {
        const TimingReport* base = &run;
        for (const TimingReport& cand : runs)
            if (cand.energy_slice == run.energy_slice && cand.workers == 1) {
                base = &cand;
                break;
            }
        double hit = printed(run.mean_hit_detect_ms);
        double total = printed(run.mean_total_ms);
        double base_hit = printed(base->mean_hit_detect_ms);
        double base_total = printed(base->mean_total_ms);
        double speedup_hit = hit > 0 ? base_hit / hit : 1.0;
        double speedup_total = total > 0 ? base_total / total : 1.0;
        out << run.energy_slice << ',' << run.workers << ',' << scheduling_name(run.scheduling)
            << ',' << format_real(hit) << ',' << format_real(total) << ','
            << format_real(speedup_hit) << ',' << format_real(speedup_total) << '\n';
    }
}

void write_timing_csv(const std::string& path, const std::vector<TimingReport>& runs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write timing csv: " + path);
    write_timing_csv(out, runs);
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace telsim
