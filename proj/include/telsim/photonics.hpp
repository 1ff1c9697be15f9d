// Arrival-time tables for the four light classes: PDF ingestion, parallel
// PDF->CDF conversion, trilinear CDF evaluation and inverse-transform time
// sampling.
//
// Tables are gridded over (distance r, incidence cosine, residual time t).
// Queries outside the grid hull clamp to the nearest face; extrapolating
// arrival-time tails is never done. Slices whose density integrates to
// zero carry an explicit zero-flux flag so samplers can skip them.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace telsim {

enum class LightClass : std::uint8_t {
    muon_direct = 0,
    muon_scattered = 1,
    shower_direct = 2,
    shower_scattered = 3,
};

inline constexpr int kNumLightClasses = 4;

const char* light_class_name(LightClass c);
LightClass light_class_from_name(const std::string& name);

struct PdfTable {
    LightClass light_class = LightClass::muon_direct;
    std::vector<double> r_grid;    // meters, strictly ascending, >= 0
    std::vector<double> cos_grid;  // [-1, 1], strictly ascending
    std::vector<double> t_grid;    // ns, strictly ascending
    std::vector<double> density;   // [r][cos][t], probability density per ns

    size_t index(size_t ir, size_t ic, size_t it) const {
        return (ir * cos_grid.size() + ic) * t_grid.size() + it;
    }
    double at(size_t ir, size_t ic, size_t it) const { return density[index(ir, ic, it)]; }
};

struct CdfTable {
    LightClass light_class = LightClass::muon_direct;
    std::vector<double> r_grid;
    std::vector<double> cos_grid;
    std::vector<double> t_grid;
    std::vector<double> cumulative;      // [r][cos][t], in [0,1], non-decreasing along t
    std::vector<std::uint8_t> zero_flux; // [r][cos]

    size_t index(size_t ir, size_t ic, size_t it) const {
        return (ir * cos_grid.size() + ic) * t_grid.size() + it;
    }
    double at(size_t ir, size_t ic, size_t it) const { return cumulative[index(ir, ic, it)]; }
    bool slice_zero_flux(size_t ir, size_t ic) const {
        return zero_flux[ir * cos_grid.size() + ic] != 0;
    }

    // True when every (r,cos) corner slice of the clamped interpolation
    // cell is zero-flux; invert_cdf must not be called there.
    bool zero_flux_neighborhood(double r, double cos_inc) const;
};

struct PdfSet {
    PdfTable tables[kNumLightClasses];

    const PdfTable& table(LightClass c) const { return tables[static_cast<int>(c)]; }
    PdfTable& table(LightClass c) { return tables[static_cast<int>(c)]; }
};

struct CdfSet {
    CdfTable tables[kNumLightClasses];

    const CdfTable& table(LightClass c) const { return tables[static_cast<int>(c)]; }
    CdfTable& table(LightClass c) { return tables[static_cast<int>(c)]; }
};

// Table file format (one file per class, named <class>.pdf.txt):
//   CLASS <name>
//   RGRID <n> v1 ... vn
//   COSGRID <m> v1 ... vm
//   TGRID <k> v1 ... vk
//   ROW <i> <j> d1 ... dk     (n*m lines, i over r, j over cos)
PdfTable load_pdf_table(const std::string& path);
void save_pdf_table(const std::string& path, const PdfTable& table);
PdfSet load_pdf_set(const std::string& dir);

// Trapezoidal integration along t, each slice normalized to end at 1
// exactly; all-zero slices are flagged zero-flux. The result is
// bit-identical for every worker count.
CdfSet build_cdf_set(const PdfSet& pdfs, int workers);
CdfTable build_cdf_table(const PdfTable& pdf);

// Trilinear interpolation of the cumulative at (r, cos, t), clamped to
// the grid hull. Zero-flux slices contribute 0.
double eval_cdf(const CdfTable& table, double r, double cos_inc, double t);

// Smallest t on the interpolated cumulative curve c(t) with c(t) >= u,
// found by bisection over t nodes and linear inversion in the bracketing
// cell. u = 0 returns t_grid.front(). Throws std::domain_error when the
// (r,cos) neighborhood is entirely zero-flux.
double invert_cdf(const CdfTable& table, double r, double cos_inc, double u);

// Synthetic table generation, replacing external PDF data. Direct classes
// peak near residual time 0 with width growing linearly in r; scattered
// classes widen the peak and add an exponential tail.
struct SynthParams {
    size_t n_r = 12;
    size_t n_cos = 9;
    size_t n_t = 100;
    double r_min_m = 1.0;
    double r_max_m = 260.0;
    double t_max_ns = 500.0;
    double peak_ns = 2.0;               // direct peak position at r = 0
    double peak_slope_ns_per_m = 0.02;  // peak drift with distance
    double sigma_ns = 3.0;              // direct peak width at r = 0
    double sigma_slope_ns_per_m = 0.08; // width growth with distance
    double scatter_width_scale = 2.0;   // scattered peak width multiplier
    double tail_tau_ns = 60.0;          // scattered exponential decay
    double tail_weight = 0.8;           // tail amplitude relative to peak
    double shower_width_scale = 1.5;    // shower classes vs muon classes
};

PdfSet make_synthetic_pdf_set(const SynthParams& params);
void generate_synthetic_pdf_set(const SynthParams& params, const std::string& out_dir);

}  // namespace telsim
