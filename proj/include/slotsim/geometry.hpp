#pragma once

#include <cmath>

namespace slotsim {

struct Vec3 {
    double x{0.0}, y{0.0}, z{0.0};

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

    double norm2() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Axis-aligned box given by its two corners (lo <= hi componentwise).
struct Aabb {
    Vec3 lo, hi;

    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x &&
               p.y >= lo.y && p.y <= hi.y &&
               p.z >= lo.z && p.z <= hi.z;
    }
    bool contains_open(const Vec3& p) const {
        return p.x > lo.x && p.x < hi.x &&
               p.y > lo.y && p.y < hi.y &&
               p.z > lo.z && p.z < hi.z;
    }
    double volume() const {
        return (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z);
    }
};

} // namespace slotsim
