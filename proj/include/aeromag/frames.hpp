// Reference frames, rotations, and angle utilities.
//
// Conventions: the body frame {b} is fixed to the aircraft (x forward,
// y right, z down), the Earth frame {e} is local NED. R_eb maps
// body-frame vectors into the Earth frame; attitude is intrinsic
// Z-Y-X (yaw, pitch, roll). All angles are in radians; degrees appear
// only at the CLI boundary.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace aeromag {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Euler attitude in radians. Pitch stays inside (-pi/2, pi/2) for all
/// generated trajectories, keeping the angles uniquely recoverable.
struct EulerAttitude {
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;
};

/// R_eb for the intrinsic Z-Y-X (yaw-pitch-roll) composition:
/// R_eb = Rz(yaw) * Ry(pitch) * Rx(roll).
inline Mat3 euler_to_rotation(const EulerAttitude& att) {
    const double cr = std::cos(att.roll), sr = std::sin(att.roll);
    const double cp = std::cos(att.pitch), sp = std::sin(att.pitch);
    const double cy = std::cos(att.yaw), sy = std::sin(att.yaw);
    Mat3 r;
    r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
         sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
         -sp,     cp * sr,                cp * cr;
    return r;
}

/// Inverse of euler_to_rotation away from gimbal lock (|pitch| < pi/2).
inline EulerAttitude rotation_to_euler(const Mat3& r_eb) {
    EulerAttitude att;
    att.roll = std::atan2(r_eb(2, 1), r_eb(2, 2));
    att.pitch = std::asin(std::clamp(-r_eb(2, 0), -1.0, 1.0));
    att.yaw = std::atan2(r_eb(1, 0), r_eb(0, 0));
    return att;
}

/// Expresses an Earth-frame vector in the body frame: R_eb^T * v_e.
inline Vec3 rotate_to_body(const Mat3& r_eb, const Vec3& v_e) {
    return r_eb.transpose() * v_e;
}

/// Angle between two vectors in [0, pi], via atan2 of cross/dot
/// magnitudes (stable near 0 and pi).
inline double angle_between(const Vec3& u, const Vec3& v) {
    if (u.norm() == 0.0 || v.norm() == 0.0) {
        throw std::domain_error("angle_between: zero-length vector");
    }
    return std::atan2(u.cross(v).norm(), u.dot(v));
}

/// Rodrigues rotation exp([theta x]) for a rotation-vector theta.
inline Mat3 small_angle_rotation(const Vec3& theta) {
    const double angle = theta.norm();
    if (angle < 1e-300) return Mat3::Identity();
    const Vec3 axis = theta / angle;
    return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

/// True when R is orthonormal with determinant +1 within tol.
inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
    const double ortho = (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

}  // namespace aeromag
