#pragma once

#include <cmath>

#include "headlead/error.hpp"

namespace headlead {

// Camera frame used throughout: x right, y down, z forward (depth).
// Yaw 0 looks along +z; positive yaw turns the forward axis toward +x.

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    double norm() const { return std::sqrt(x * x + y * y + z * z); }

    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// Scalar-first unit quaternion. Construction normalizes, so the unit-norm
/// invariant holds for any non-degenerate input.
struct UnitQuaternion {
    double qw = 1.0;
    double qx = 0.0;
    double qy = 0.0;
    double qz = 0.0;

    UnitQuaternion() = default;
    UnitQuaternion(double w, double x, double y, double z);

    double norm() const {
        return std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
    }

    /// Rotate a vector by this quaternion (sandwich product q v q*).
    Vec3 rotate(const Vec3& v) const;

    /// Pure-yaw rotation about the vertical (y) axis.
    static UnitQuaternion from_yaw(double theta);
};

/// Yaw angle wrapped to (-pi, pi].
struct YawAngle {
    double theta = 0.0;
};

/// Reduce an angle modulo 2*pi into (-pi, pi]. Throws on non-finite input.
YawAngle wrap_angle(double raw);

/// Yaw of the orientation's forward axis (+z) projected onto the horizontal
/// x-z plane. Throws when the rotated forward axis is vertical within 1e-9.
YawAngle yaw_from_quaternion(const UnitQuaternion& q);

/// Head-pose angle: yaw of the nose orientation relative to the waist
/// orientation, wrapped to (-pi, pi].
YawAngle relative_head_yaw(const UnitQuaternion& nose_q,
                           const UnitQuaternion& waist_q);

/// Rotate v about the vertical axis by theta. Leaves y untouched;
/// rotate_yaw((0,0,1), +pi/2) = (1,0,0).
Vec3 rotate_yaw(const Vec3& v, const YawAngle& theta);

} // namespace headlead
