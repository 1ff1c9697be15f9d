#include "telsim/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "telsim/textio.hpp"

namespace telsim {

const char* light_class_name(LightClass c) {
    switch (c) {
        case LightClass::muon_direct: return "muon_direct";
        case LightClass::muon_scattered: return "muon_scattered";
        case LightClass::shower_direct: return "shower_direct";
        case LightClass::shower_scattered: return "shower_scattered";
    }
    throw std::invalid_argument("bad light class value");
}

LightClass light_class_from_name(const std::string& name) {
    for (int i = 0; i < kNumLightClasses; ++i) {
        auto c = static_cast<LightClass>(i);
        if (name == light_class_name(c)) return c;
    }
    throw std::invalid_argument("unknown light class '" + name + "'");
}

namespace {

void check_grid(const std::vector<double>& g, const std::string& what) {
    if (g.size() < 2) throw std::runtime_error(what + ": grid needs at least 2 points");
    for (size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1]))
            throw std::runtime_error(what + ": grid not strictly ascending at index " +
                                     std::to_string(i));
}

void validate_pdf(const PdfTable& t, const std::string& what) {
    check_grid(t.r_grid, what + " r_grid");
    check_grid(t.cos_grid, what + " cos_grid");
    check_grid(t.t_grid, what + " t_grid");
    if (t.r_grid.front() < 0) throw std::runtime_error(what + ": negative distance in r_grid");
    if (t.cos_grid.front() < -1 || t.cos_grid.back() > 1)
        throw std::runtime_error(what + ": cos_grid outside [-1,1]");
    size_t expect = t.r_grid.size() * t.cos_grid.size() * t.t_grid.size();
    if (t.density.size() != expect)
        throw std::runtime_error(what + ": density size " + std::to_string(t.density.size()) +
                                 " does not match grids (" + std::to_string(expect) + ")");
    for (size_t ir = 0; ir < t.r_grid.size(); ++ir)
        for (size_t ic = 0; ic < t.cos_grid.size(); ++ic)
            for (size_t it = 0; it < t.t_grid.size(); ++it)
                if (t.at(ir, ic, it) < 0)
                    throw std::runtime_error(what + ": negative density at [" +
                                             std::to_string(ir) + "][" + std::to_string(ic) +
                                             "][" + std::to_string(it) + "]");
}

// Clamped cell lookup on one axis: indices (lo, hi) and weight of hi.
struct AxisPos {
    size_t lo = 0, hi = 0;
    double w = 0;
};

AxisPos locate(const std::vector<double>& grid, double x) {
    if (x <= grid.front()) return {0, 0, 0.0};
    if (x >= grid.back()) return {grid.size() - 1, grid.size() - 1, 0.0};
    size_t hi = std::upper_bound(grid.begin(), grid.end(), x) - grid.begin();
    size_t lo = hi - 1;
    return {lo, hi, (x - grid[lo]) / (grid[hi] - grid[lo])};
}

// Single (r,cos) slice: trapezoidal prefix masses normalized by the slice
// total. The final node divides the total by itself, so non-zero slices
// terminate at 1.0 exactly.
void build_cdf_slice(const PdfTable& pdf, CdfTable& cdf, size_t slice) {
    size_t n_t = pdf.t_grid.size();
    size_t base = slice * n_t;
    double running = 0.0;
    cdf.cumulative[base] = 0.0;
    for (size_t j = 1; j < n_t; ++j) {
        double mass = 0.5 * (pdf.density[base + j - 1] + pdf.density[base + j]) *
                      (pdf.t_grid[j] - pdf.t_grid[j - 1]);
        running += mass;
        cdf.cumulative[base + j] = running;
    }
    double total = cdf.cumulative[base + n_t - 1];
    if (total == 0.0) {
        cdf.zero_flux[slice] = 1;
        return;
    }
    for (size_t j = 0; j < n_t; ++j) cdf.cumulative[base + j] /= total;
}

}  // namespace

CdfTable build_cdf_table(const PdfTable& pdf) {
    validate_pdf(pdf, light_class_name(pdf.light_class));
    CdfTable cdf;
    cdf.light_class = pdf.light_class;
    cdf.r_grid = pdf.r_grid;
    cdf.cos_grid = pdf.cos_grid;
    cdf.t_grid = pdf.t_grid;
    cdf.cumulative.assign(pdf.density.size(), 0.0);
    cdf.zero_flux.assign(pdf.r_grid.size() * pdf.cos_grid.size(), 0);

    size_t n_slices = pdf.r_grid.size() * pdf.cos_grid.size();
    for (size_t s = 0; s < n_slices; ++s) build_cdf_slice(pdf, cdf, s);
    return cdf;
}

CdfSet build_cdf_set(const PdfSet& pdfs, int workers) {
    if (workers < 1) throw std::invalid_argument("build_cdf_set: workers must be >= 1");

    CdfSet out;
    for (int c = 0; c < kNumLightClasses; ++c) {
        const PdfTable& pdf = pdfs.tables[c];
        validate_pdf(pdf, light_class_name(pdf.light_class));
        CdfTable& cdf = out.tables[c];
        cdf.light_class = pdf.light_class;
        cdf.r_grid = pdf.r_grid;
        cdf.cos_grid = pdf.cos_grid;
        cdf.t_grid = pdf.t_grid;
        cdf.cumulative.assign(pdf.density.size(), 0.0);
        cdf.zero_flux.assign(pdf.r_grid.size() * pdf.cos_grid.size(), 0);
    }

    // Flatten (class, r, cos) slices into one index space; every slice is
    // independent and writes a disjoint region, so any static partition
    // gives a bit-identical result.
    struct SliceRange {
        int cls;
        size_t first, count;
    };
    std::vector<SliceRange> ranges;
    size_t total_slices = 0;
    for (int c = 0; c < kNumLightClasses; ++c) {
        size_t n = pdfs.tables[c].r_grid.size() * pdfs.tables[c].cos_grid.size();
        ranges.push_back({c, total_slices, n});
        total_slices += n;
    }

    auto run_range = [&](size_t begin, size_t end) {
        for (const SliceRange& r : ranges) {
            size_t lo = std::max(begin, r.first);
            size_t hi = std::min(end, r.first + r.count);
            for (size_t s = lo; s < hi; ++s)
                build_cdf_slice(pdfs.tables[r.cls], out.tables[r.cls], s - r.first);
        }
    };

    int n_workers = std::min<size_t>(workers, std::max<size_t>(total_slices, 1));
    if (n_workers <= 1) {
        run_range(0, total_slices);
    } else {
        size_t per = (total_slices + n_workers - 1) / n_workers;
        std::vector<std::thread> threads;
        for (int w = 1; w < n_workers; ++w) {
            size_t b = std::min(total_slices, w * per);
            size_t e = std::min(total_slices, (w + 1) * per);
            threads.emplace_back(run_range, b, e);
        }
        run_range(0, std::min(total_slices, per));
        for (auto& t : threads) t.join();
    }
    return out;
}

bool CdfTable::zero_flux_neighborhood(double r, double cos_inc) const {
    AxisPos pr = locate(r_grid, r);
    AxisPos pc = locate(cos_grid, cos_inc);
    return slice_zero_flux(pr.lo, pc.lo) && slice_zero_flux(pr.lo, pc.hi) &&
           slice_zero_flux(pr.hi, pc.lo) && slice_zero_flux(pr.hi, pc.hi);
}

double eval_cdf(const CdfTable& table, double r, double cos_inc, double t) {
    AxisPos pr = locate(table.r_grid, r);
    AxisPos pc = locate(table.cos_grid, cos_inc);
    AxisPos pt = locate(table.t_grid, t);

    auto corner = [&](size_t ir, size_t ic) {
        double a = table.at(ir, ic, pt.lo);
        double b = table.at(ir, ic, pt.hi);
        return a + (b - a) * pt.w;
    };
    double c00 = corner(pr.lo, pc.lo), c01 = corner(pr.lo, pc.hi);
    double c10 = corner(pr.hi, pc.lo), c11 = corner(pr.hi, pc.hi);
    double c0 = c00 + (c01 - c00) * pc.w;
    double c1 = c10 + (c11 - c10) * pc.w;
    return c0 + (c1 - c0) * pr.w;
}

double invert_cdf(const CdfTable& table, double r, double cos_inc, double u) {
    if (u < 0 || u >= 1) throw std::invalid_argument("invert_cdf: u must be in [0,1)");
    AxisPos pr = locate(table.r_grid, r);
    AxisPos pc = locate(table.cos_grid, cos_inc);
    if (table.slice_zero_flux(pr.lo, pc.lo) && table.slice_zero_flux(pr.lo, pc.hi) &&
        table.slice_zero_flux(pr.hi, pc.lo) && table.slice_zero_flux(pr.hi, pc.hi))
        throw std::domain_error("invert_cdf: zero-flux neighborhood at r=" + std::to_string(r) +
                                " cos=" + std::to_string(cos_inc));
    if (u == 0.0) return table.t_grid.front();

    double w00 = (1 - pr.w) * (1 - pc.w), w01 = (1 - pr.w) * pc.w;
    double w10 = pr.w * (1 - pc.w), w11 = pr.w * pc.w;
    auto node = [&](size_t k) {
        return w00 * table.at(pr.lo, pc.lo, k) + w01 * table.at(pr.lo, pc.hi, k) +
               w10 * table.at(pr.hi, pc.lo, k) + w11 * table.at(pr.hi, pc.hi, k);
    };

    size_t last = table.t_grid.size() - 1;
    if (node(0) >= u) return table.t_grid.front();
    // Mixed neighborhoods with zero-flux corners can top out below 1.
    if (node(last) < u) return table.t_grid.back();

    // bisection: smallest node k with c(k) >= u, with c(lo) < u <= c(hi)
    size_t lo = 0, hi = last;
    while (hi - lo > 1) {
        size_t mid = lo + (hi - lo) / 2;
        if (node(mid) >= u)
            hi = mid;
        else
            lo = mid;
    }
    double c_lo = node(lo), c_hi = node(hi);
    double t_lo = table.t_grid[lo], t_hi = table.t_grid[hi];
    return t_lo + (u - c_lo) / (c_hi - c_lo) * (t_hi - t_lo);
}

PdfTable load_pdf_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open table file: " + path);
    LineReader reader(in, path);

    PdfTable table;
    std::vector<std::string> tok;
    if (!reader.next(tok) || tok[0] != "CLASS" || tok.size() != 2)
        reader.fail("expected 'CLASS <name>' header");
    table.light_class = light_class_from_name(tok[1]);

    auto read_grid = [&](const char* tag, std::vector<double>& grid) {
        if (!reader.next(tok) || tok[0] != tag)
            reader.fail(std::string("expected '") + tag + " <n> v1 ... vn'");
        std::string ctx = path + ":" + std::to_string(reader.line_number());
        size_t n = static_cast<size_t>(parse_int(tok[1], ctx));
        if (tok.size() != n + 2) reader.fail(std::string(tag) + ": value count mismatch");
        grid.resize(n);
        for (size_t i = 0; i < n; ++i) grid[i] = parse_real(tok[i + 2], ctx);
    };
    read_grid("RGRID", table.r_grid);
    read_grid("COSGRID", table.cos_grid);
    read_grid("TGRID", table.t_grid);

    size_t n_r = table.r_grid.size(), n_cos = table.cos_grid.size(), n_t = table.t_grid.size();
    table.density.assign(n_r * n_cos * n_t, -1.0);
    std::vector<bool> seen(n_r * n_cos, false);
    for (size_t row = 0; row < n_r * n_cos; ++row) {
        if (!reader.next(tok) || tok[0] != "ROW")
            reader.fail("expected ROW line " + std::to_string(row + 1) + " of " +
                        std::to_string(n_r * n_cos));
        std::string ctx = path + ":" + std::to_string(reader.line_number());
        if (tok.size() != n_t + 3) reader.fail("ROW: value count mismatch");
        size_t ir = static_cast<size_t>(parse_int(tok[1], ctx));
        size_t ic = static_cast<size_t>(parse_int(tok[2], ctx));
        if (ir >= n_r || ic >= n_cos) reader.fail("ROW: indices out of range");
        if (seen[ir * n_cos + ic]) reader.fail("ROW: duplicate slice");
        seen[ir * n_cos + ic] = true;
        for (size_t j = 0; j < n_t; ++j)
            table.density[table.index(ir, ic, j)] = parse_real(tok[j + 3], ctx);
    }
    validate_pdf(table, path);
    return table;
}

void save_pdf_table(const std::string& path, const PdfTable& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write table file: " + path);
    out << "CLASS " << light_class_name(table.light_class) << '\n';
    auto write_grid = [&](const char* tag, const std::vector<double>& g) {
        out << tag << ' ' << g.size();
        for (double v : g) out << ' ' << format_real(v);
        out << '\n';
    };
    write_grid("RGRID", table.r_grid);
    write_grid("COSGRID", table.cos_grid);
    write_grid("TGRID", table.t_grid);
    for (size_t ir = 0; ir < table.r_grid.size(); ++ir)
        for (size_t ic = 0; ic < table.cos_grid.size(); ++ic) {
            out << "ROW " << ir << ' ' << ic;
            for (size_t j = 0; j < table.t_grid.size(); ++j)
                out << ' ' << format_real(table.at(ir, ic, j));
            out << '\n';
        }
    if (!out) throw std::runtime_error("write failed: " + path);
}

PdfSet load_pdf_set(const std::string& dir) {
    PdfSet set;
    for (int c = 0; c < kNumLightClasses; ++c) {
        auto cls = static_cast<LightClass>(c);
        std::string path = dir + "/" + light_class_name(cls) + ".pdf.txt";
        std::ifstream probe(path);
        if (!probe)
            throw std::runtime_error("missing table file for class '" +
                                     std::string(light_class_name(cls)) + "': " + path);
        probe.close();
        PdfTable t = load_pdf_table(path);
        if (t.light_class != cls)
            throw std::runtime_error(path + ": CLASS header does not match file name");
        set.tables[c] = std::move(t);
    }
    return set;
}

namespace {

std::vector<double> linspace(double a, double b, size_t n) {
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
    return v;
}

}  // namespace

PdfSet make_synthetic_pdf_set(const SynthParams& p) {
    if (p.n_r < 2 || p.n_cos < 2 || p.n_t < 2)
        throw std::invalid_argument("synthetic tables: grids need at least 2 points");
    if (p.sigma_ns <= 0 || p.tail_tau_ns <= 0)
        throw std::invalid_argument("synthetic tables: spread constants must be > 0");

    PdfSet set;
    for (int c = 0; c < kNumLightClasses; ++c) {
        auto cls = static_cast<LightClass>(c);
        bool scattered = cls == LightClass::muon_scattered || cls == LightClass::shower_scattered;
        bool shower = cls == LightClass::shower_direct || cls == LightClass::shower_scattered;

        PdfTable t;
        t.light_class = cls;
        t.r_grid = linspace(p.r_min_m, p.r_max_m, p.n_r);
        t.cos_grid = linspace(-1.0, 1.0, p.n_cos);
        t.t_grid = linspace(0.0, p.t_max_ns, p.n_t);
        t.density.resize(p.n_r * p.n_cos * p.n_t);

        double width_scale = shower ? p.shower_width_scale : 1.0;
        for (size_t ir = 0; ir < p.n_r; ++ir) {
            double r = t.r_grid[ir];
            double peak = p.peak_ns + p.peak_slope_ns_per_m * r;
            double sigma = (p.sigma_ns + p.sigma_slope_ns_per_m * r) * width_scale;
            if (scattered) sigma *= p.scatter_width_scale;
            for (size_t ic = 0; ic < p.n_cos; ++ic) {
                double c_inc = t.cos_grid[ic];
                double amp = scattered ? 1.0 + 0.2 * c_inc : 1.0 + 0.5 * c_inc;
                for (size_t it = 0; it < p.n_t; ++it) {
                    double dt = t.t_grid[it] - peak;
                    double d = std::exp(-0.5 * (dt / sigma) * (dt / sigma));
                    if (scattered && dt >= 0) d += p.tail_weight * std::exp(-dt / p.tail_tau_ns);
                    d *= amp;
                    t.density[t.index(ir, ic, it)] = d < 1e-30 ? 0.0 : d;
                }
            }
        }
        set.tables[c] = std::move(t);
    }
    return set;
}

void generate_synthetic_pdf_set(const SynthParams& params, const std::string& out_dir) {
    PdfSet set = make_synthetic_pdf_set(params);
    for (int c = 0; c < kNumLightClasses; ++c) {
        auto cls = static_cast<LightClass>(c);
        save_pdf_table(out_dir + "/" + light_class_name(cls) + ".pdf.txt", set.tables[c]);
    }
}

}  // namespace telsim
