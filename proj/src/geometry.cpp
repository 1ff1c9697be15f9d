#include "telsim/geometry.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "telsim/textio.hpp"

namespace telsim {

namespace {

constexpr double kUnitTol = 1e-9;

void require_unit(const Vec3& v, const std::string& what) {
    if (std::abs(v.norm() - 1.0) > kUnitTol)
        throw std::invalid_argument(what + ": direction is not unit length (|v| = " +
                                    std::to_string(v.norm()) + ")");
}

Mat3 rodrigues(const Vec3& axis, double cos_a, double sin_a) {
    const Vec3& u = axis;
    double c1 = 1.0 - cos_a;
    Mat3 r;
    r.m[0] = {cos_a + c1 * u.x * u.x, c1 * u.x * u.y - sin_a * u.z, c1 * u.x * u.z + sin_a * u.y};
    r.m[1] = {c1 * u.y * u.x + sin_a * u.z, cos_a + c1 * u.y * u.y, c1 * u.y * u.z - sin_a * u.x};
    r.m[2] = {c1 * u.z * u.x - sin_a * u.y, c1 * u.z * u.y + sin_a * u.x, cos_a + c1 * u.z * u.z};
    return r;
}

}  // namespace

FrameTransform track_frame(const Vec3& direction, const Vec3& position) {
    require_unit(direction, "track_frame");
    const Vec3 zhat{0, 0, 1};
    Vec3 cross = direction.cross(zhat);
    double sin_a = cross.norm();
    double cos_a = direction.dot(zhat);

    FrameTransform t;
    t.origin = position;
    if (sin_a < 1e-12) {
        if (cos_a > 0) {
            t.rotation = Mat3::identity();  // already on z
        } else {
            // antiparallel: pi about x
            t.rotation = Mat3::identity();
            t.rotation.m[1][1] = -1.0;
            t.rotation.m[2][2] = -1.0;
        }
        return t;
    }
    t.rotation = rodrigues(cross * (1.0 / sin_a), cos_a, sin_a);
    return t;
}

OpticalModule transform_om(const OpticalModule& om, const FrameTransform& t) {
    OpticalModule out;
    out.om_id = om.om_id;
    out.position = t.apply_point(om.position);
    out.pmts.reserve(om.pmts.size());
    for (const Pmt& p : om.pmts)
        out.pmts.push_back(Pmt{p.pmt_id, t.apply_direction(p.direction), p.radius_m,
                               p.quantum_efficiency});
    return out;
}

ClosestApproach closest_approach(const Vec3& pos) {
    return {std::sqrt(pos.x * pos.x + pos.y * pos.y), pos.z};
}

void validate_geometry(const DetectorGeometry& geom) {
    if (geom.oms.empty()) throw std::runtime_error("geometry: no optical modules");
    for (size_t i = 0; i < geom.oms.size(); ++i) {
        const OpticalModule& om = geom.oms[i];
        if (om.om_id != static_cast<int>(i))
            throw std::runtime_error("geometry: om ids must be dense from 0, got om " +
                                     std::to_string(om.om_id) + " at index " + std::to_string(i));
        if (om.pmts.empty())
            throw std::runtime_error("geometry: om " + std::to_string(om.om_id) + " has no PMTs");
        for (const Pmt& p : om.pmts) {
            std::string where = "geometry: om " + std::to_string(om.om_id) + " pmt " +
                                std::to_string(p.pmt_id);
            if (std::abs(p.direction.norm() - 1.0) > kUnitTol)
                throw std::runtime_error(where + ": direction is not unit length");
            if (p.radius_m <= 0) throw std::runtime_error(where + ": radius must be > 0");
            if (p.quantum_efficiency <= 0 || p.quantum_efficiency > 1)
                throw std::runtime_error(where + ": quantum efficiency must be in (0, 1]");
        }
        for (size_t j = 0; j < i; ++j)
            if (geom.oms[j].position == om.position)
                throw std::runtime_error("geometry: om " + std::to_string(om.om_id) +
                                         " shares a position with om " +
                                         std::to_string(geom.oms[j].om_id));
    }
}

DetectorGeometry load_geometry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open geometry file: " + path);
    LineReader reader(in, path);

    DetectorGeometry geom;
    std::vector<std::string> tok;
    while (reader.next(tok)) {
        std::string ctx = path + ":" + std::to_string(reader.line_number());
        if (tok[0] == "OM") {
            if (tok.size() != 5) reader.fail("OM line needs 4 fields: OM <id> <x> <y> <z>");
            OpticalModule om;
            om.om_id = static_cast<int>(parse_int(tok[1], ctx));
            om.position = {parse_real(tok[2], ctx), parse_real(tok[3], ctx),
                           parse_real(tok[4], ctx)};
            geom.oms.push_back(std::move(om));
        } else if (tok[0] == "PMT") {
            if (geom.oms.empty()) reader.fail("PMT line before any OM line");
            if (tok.size() != 7)
                reader.fail("PMT line needs 6 fields: PMT <id> <dx> <dy> <dz> <radius> <qe>");
            Pmt p;
            p.pmt_id = static_cast<int>(parse_int(tok[1], ctx));
            p.direction = {parse_real(tok[2], ctx), parse_real(tok[3], ctx),
                           parse_real(tok[4], ctx)};
            p.radius_m = parse_real(tok[5], ctx);
            p.quantum_efficiency = parse_real(tok[6], ctx);
            geom.oms.back().pmts.push_back(p);
        } else {
            reader.fail("unknown record '" + tok[0] + "'");
        }
    }
    validate_geometry(geom);
    return geom;
}

void save_geometry(const std::string& path, const DetectorGeometry& geom) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write geometry file: " + path);
    out << "# detector geometry\n";
    for (const OpticalModule& om : geom.oms) {
        out << "OM " << om.om_id << ' ' << format_real(om.position.x) << ' '
            << format_real(om.position.y) << ' ' << format_real(om.position.z) << '\n';
        for (const Pmt& p : om.pmts)
            out << "PMT " << p.pmt_id << ' ' << format_real(p.direction.x) << ' '
                << format_real(p.direction.y) << ' ' << format_real(p.direction.z) << ' '
                << format_real(p.radius_m) << ' ' << format_real(p.quantum_efficiency) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

// Near-uniform directions on the sphere (Fibonacci lattice), renormalized
// so they survive the 12-digit text round trip within tolerance.
std::vector<Vec3> fibonacci_sphere(int n) {
    std::vector<Vec3> dirs;
    dirs.reserve(n);
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        double z = 1.0 - 2.0 * (i + 0.5) / n;
        double rho = std::sqrt(1.0 - z * z);
        double phi = golden * i;
        dirs.push_back(Vec3{rho * std::cos(phi), rho * std::sin(phi), z}.normalized());
    }
    return dirs;
}

}  // namespace

DetectorGeometry default_detector() {
    std::vector<Vec3> string_xy;
    string_xy.push_back({0, 0, 0});
    for (int k = 0; k < 7; ++k) {
        double a = 2.0 * M_PI * k / 7.0;
        string_xy.push_back({110.0 * std::cos(a), 110.0 * std::sin(a), 0});
    }
    for (int k = 0; k < 15; ++k) {
        double a = 2.0 * M_PI * k / 15.0;
        string_xy.push_back({220.0 * std::cos(a), 220.0 * std::sin(a), 0});
    }

    const std::vector<Vec3> pmt_dirs = fibonacci_sphere(31);
    DetectorGeometry geom;
    int id = 0;
    for (const Vec3& s : string_xy) {
        for (int level = 0; level < 5; ++level) {
            OpticalModule om;
            om.om_id = id++;
            om.position = {s.x, s.y, -140.0 + 70.0 * level};
            om.pmts.reserve(pmt_dirs.size());
            for (size_t p = 0; p < pmt_dirs.size(); ++p)
                om.pmts.push_back(Pmt{static_cast<int>(p), pmt_dirs[p], 0.04, 0.1});
            geom.oms.push_back(std::move(om));
        }
    }
    return geom;
}

}  // namespace telsim
