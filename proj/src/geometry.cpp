#include "headlead/geometry.hpp"

#include <numbers>

namespace headlead {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
} // namespace

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (!std::isfinite(n) || n < 1e-12) {
        throw Error(ErrorKind::invalid_argument,
                    "quaternion has zero or non-finite norm");
    }
    qw = w / n;
    qx = x / n;
    qy = y / n;
    qz = z / n;
}

Vec3 UnitQuaternion::rotate(const Vec3& v) const {
    // v' = v + 2 u x (u x v + w v), u = (qx, qy, qz)
    const double tx = 2.0 * (qy * v.z - qz * v.y);
    const double ty = 2.0 * (qz * v.x - qx * v.z);
    const double tz = 2.0 * (qx * v.y - qy * v.x);
    return {v.x + qw * tx + (qy * tz - qz * ty),
            v.y + qw * ty + (qz * tx - qx * tz),
            v.z + qw * tz + (qx * ty - qy * tx)};
}

UnitQuaternion UnitQuaternion::from_yaw(double theta) {
    UnitQuaternion q;
    q.qw = std::cos(0.5 * theta);
    q.qy = std::sin(0.5 * theta);
    return q;
}

YawAngle wrap_angle(double raw) {
    if (!std::isfinite(raw)) {
        throw Error(ErrorKind::invalid_argument, "angle must be finite");
    }
    double r = std::remainder(raw, kTwoPi); // [-pi, pi]
    if (r <= -kPi) {
        r += kTwoPi;
    }
    return {r};
}

YawAngle yaw_from_quaternion(const UnitQuaternion& q) {
    const Vec3 fwd = q.rotate({0.0, 0.0, 1.0});
    if (std::hypot(fwd.x, fwd.z) <= 1e-9) {
        throw Error(ErrorKind::degenerate_orientation,
                    "forward axis is vertical; yaw undefined");
    }
    return wrap_angle(std::atan2(fwd.x, fwd.z));
}

YawAngle relative_head_yaw(const UnitQuaternion& nose_q,
                           const UnitQuaternion& waist_q) {
    return wrap_angle(yaw_from_quaternion(nose_q).theta -
                      yaw_from_quaternion(waist_q).theta);
}

Vec3 rotate_yaw(const Vec3& v, const YawAngle& theta) {
    const double c = std::cos(theta.theta);
    const double s = std::sin(theta.theta);
    return {v.x * c + v.z * s, v.y, -v.x * s + v.z * c};
}

} // namespace headlead
