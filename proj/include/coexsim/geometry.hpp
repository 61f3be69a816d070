#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coexsim {

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    double norm2d() const { return std::hypot(x, y); }
    Vec3 normalized() const {
        double n = norm();
        if (n <= 0.0) throw std::invalid_argument("cannot normalize zero vector");
        return {x / n, y / n, z / n};
    }
};

// Position in the global Cartesian frame, z = height above ground.
using Position3D = Vec3;

inline double distance2d(const Vec3& a, const Vec3& b) { return (a - b).norm2d(); }
inline double distance3d(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Axis-aligned box, used for the factory hall and the impact-area hotspot.
struct Box {
    Vec3 min;
    Vec3 max;

    bool contains(const Vec3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
               p.z >= min.z && p.z <= max.z;
    }

    bool contains_xy(const Vec3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }

    Vec3 center() const { return (min + max) * 0.5; }
};

// Where a segment from an outside point to an inside point crosses the box
// shell: the crossing point, the outward unit normal of the crossed face and
// the grazing angle (angle between the ray and the face plane, pi/2 at
// perpendicular incidence).
struct WallCrossing {
    Vec3 point;
    Vec3 normal;
    double grazingAngle_rad = 0.0;
};

// Slab intersection for a segment entering the box. `outside` must be outside
// and `inside` inside, otherwise the result is meaningless.
inline WallCrossing wall_crossing(const Box& box, const Vec3& outside, const Vec3& inside) {
    const Vec3 d = inside - outside;
    double tEnter = -std::numeric_limits<double>::infinity();
    int axis = -1;
    double sign = 0.0;

    const double dv[3] = {d.x, d.y, d.z};
    const double ov[3] = {outside.x, outside.y, outside.z};
    const double lo[3] = {box.min.x, box.min.y, box.min.z};
    const double hi[3] = {box.max.x, box.max.y, box.max.z};

    for (int i = 0; i < 3; ++i) {
        if (std::abs(dv[i]) < 1e-15) continue;
        double t1 = (lo[i] - ov[i]) / dv[i];
        double t2 = (hi[i] - ov[i]) / dv[i];
        double near = std::min(t1, t2);
        if (near > tEnter) {
            tEnter = near;
            axis = i;
            sign = (dv[i] > 0.0) ? -1.0 : 1.0; // outward normal opposes travel
        }
    }
    if (axis < 0) throw std::invalid_argument("degenerate wall crossing segment");

    tEnter = std::clamp(tEnter, 0.0, 1.0);
    WallCrossing wc;
    wc.point = outside + d * tEnter;
    wc.normal = {0.0, 0.0, 0.0};
    if (axis == 0) wc.normal.x = sign;
    if (axis == 1) wc.normal.y = sign;
    if (axis == 2) wc.normal.z = sign;

    const Vec3 dir = d.normalized();
    double cosToNormal = std::abs(dir.dot(wc.normal));
    cosToNormal = std::clamp(cosToNormal, 0.0, 1.0);
    wc.grazingAngle_rad = std::asin(cosToNormal); // angle to the wall plane
    return wc;
}

inline Vec3 rotate_z(const Vec3& v, double angle_rad) {
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

} // namespace coexsim
