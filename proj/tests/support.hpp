// Shared test helpers: scratch directories, forced uniform streams, and
// small hand-built tables.

#pragma once

#include <cstdio>
#include <deque>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "telsim/photonics.hpp"

namespace testsupport {

// Unique scratch directory, removed on destruction.
class ScratchDir {
  public:
    ScratchDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("telsim_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string str() const { return path_.string(); }

  private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("test: cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Stream yielding a scripted sequence of uniforms via ADL next_uniform.
struct ForcedStream {
    std::deque<double> values;
};

inline double next_uniform(ForcedStream& s) {
    if (s.values.empty()) throw std::runtime_error("ForcedStream exhausted");
    double v = s.values.front();
    s.values.pop_front();
    return v;
}

// Minimal one-class CDF table on given grids with a single cumulative row
// replicated over all (r, cos) slices.
inline telsim::CdfTable single_row_cdf(std::vector<double> t_grid,
                                       std::vector<double> cumulative) {
    telsim::CdfTable table;
    table.light_class = telsim::LightClass::muon_direct;
    table.r_grid = {0.0, 1000.0};
    table.cos_grid = {-1.0, 1.0};
    table.t_grid = std::move(t_grid);
    size_t n_t = table.t_grid.size();
    table.cumulative.resize(2 * 2 * n_t);
    table.zero_flux.assign(4, 0);
    for (size_t s = 0; s < 4; ++s)
        for (size_t j = 0; j < n_t; ++j) table.cumulative[s * n_t + j] = cumulative[j];
    return table;
}

// CdfSet with the same single-row table for all four classes.
inline telsim::CdfSet uniform_cdf_set(std::vector<double> t_grid,
                                      std::vector<double> cumulative) {
    telsim::CdfSet set;
    for (int c = 0; c < telsim::kNumLightClasses; ++c) {
        set.tables[c] = single_row_cdf(t_grid, cumulative);
        set.tables[c].light_class = static_cast<telsim::LightClass>(c);
    }
    return set;
}

}  // namespace testsupport
