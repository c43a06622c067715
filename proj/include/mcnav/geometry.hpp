#ifndef MCNAV_GEOMETRY_HPP
#define MCNAV_GEOMETRY_HPP

#include <array>
#include <cmath>

namespace mcnav {

/// 3D position in meters (right-handed frame).
struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    friend bool operator==(const Vec3& a, const Vec3& b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

inline double euclidean(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

inline double squared_distance(const Vec3& a, const Vec3& b) {
    const Vec3 d = a - b;
    return d.x * d.x + d.y * d.y + d.z * d.z;
}

} // namespace mcnav

#endif
