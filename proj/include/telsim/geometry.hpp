// Detector description and the track-frame rotation.
//
// A simulated particle path is rotated onto the +z axis; the same
// transform is applied to every optical module so all downstream hit
// computations see the track along z starting at the origin.

#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace telsim {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const Vec3& o) const = default;

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        double n = norm();
        return {x / n, y / n, z / n};
    }
};

struct Mat3 {
    // row-major
    std::array<std::array<double, 3>, 3> m{};

    static Mat3 identity() {
        Mat3 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
        return r;
    }
    Vec3 apply(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
};

struct Pmt {
    int pmt_id = 0;
    Vec3 direction;  // outward normal, unit
    double radius_m = 0;
    double quantum_efficiency = 0;
};

struct OpticalModule {
    int om_id = 0;
    Vec3 position;
    std::vector<Pmt> pmts;
};

struct DetectorGeometry {
    std::vector<OpticalModule> oms;
};

// v  ->  rotation * (v - origin); directions rotate without translation.
struct FrameTransform {
    Mat3 rotation;
    Vec3 origin;

    Vec3 apply_point(const Vec3& v) const { return rotation.apply(v - origin); }
    Vec3 apply_direction(const Vec3& v) const { return rotation.apply(v); }
};

// Rotation taking unit direction d onto +z: Rodrigues rotation about
// normalize(d x z) by acos(d.z). d == +z yields the identity; d == -z
// rotates by pi about x. Throws std::invalid_argument for non-unit d.
FrameTransform track_frame(const Vec3& direction, const Vec3& position);

OpticalModule transform_om(const OpticalModule& om, const FrameTransform& t);

// Perpendicular distance to the z-axis and the z coordinate, for a
// position already expressed in the track frame.
struct ClosestApproach {
    double r = 0;
    double z = 0;
};
ClosestApproach closest_approach(const Vec3& pos_in_track_frame);

// Geometry text format: '#' comments, then per module
//   OM <om_id> <x> <y> <z>
//   PMT <pmt_id> <dx> <dy> <dz> <radius> <qe>   (one or more)
// om_id must be dense and increasing from 0.
DetectorGeometry load_geometry(const std::string& path);
void save_geometry(const std::string& path, const DetectorGeometry& geom);

// Validates all invariants (unit vectors, dense ids, distinct positions);
// throws std::runtime_error naming the offending OM/PMT.
void validate_geometry(const DetectorGeometry& geom);

// Benchmark detector: 23 strings (1 + 7 + 15 on two rings) x 5 modules,
// 31 outward PMTs per module = 115 OMs x 31 PMTs.
DetectorGeometry default_detector();

}  // namespace telsim
