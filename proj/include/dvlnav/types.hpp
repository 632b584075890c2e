#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dvlnav {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kGravity = 9.80665;
constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kRadToDeg = 180.0 / kPi;

// Error categories. The CLI maps each to a distinct exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input streams.
class InputError : public IoError {
public:
    using IoError::IoError;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

inline Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return m;
}

/// Quaternion for the rotation vector `phi` (exact exponential map).
inline Quat quat_exp(const Vec3& phi) {
    const double angle = phi.norm();
    if (angle < 1e-12) {
        Quat q(1.0, 0.5 * phi.x(), 0.5 * phi.y(), 0.5 * phi.z());
        return q.normalized();
    }
    return Quat(Eigen::AngleAxisd(angle, phi / angle));
}

/// Rotation vector of a unit quaternion, angle in [0, pi].
inline Vec3 quat_log(const Quat& q_in) {
    Quat q = q_in.w() < 0.0 ? Quat(-q_in.w(), -q_in.x(), -q_in.y(), -q_in.z()) : q_in;
    const Vec3 v = q.vec();
    const double s = v.norm();
    if (s < 1e-12) {
        return 2.0 * v;
    }
    const double angle = 2.0 * std::atan2(s, q.w());
    return v * (angle / s);
}

/// ZYX Euler angles (roll, pitch, yaw) in radians to body-to-navigation quaternion.
inline Quat quat_from_euler(double roll, double pitch, double yaw) {
    return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                Eigen::AngleAxisd(roll, Vec3::UnitX()));
}

/// Inverse of quat_from_euler; returns (roll, pitch, yaw) in radians, yaw in (-pi, pi].
inline Vec3 euler_from_quat(const Quat& q) {
    const Mat3 c = q.toRotationMatrix();
    const double pitch = std::asin(std::clamp(-c(2, 0), -1.0, 1.0));
    const double roll = std::atan2(c(2, 1), c(2, 2));
    const double yaw = std::atan2(c(1, 0), c(0, 0));
    return {roll, pitch, yaw};
}

/// Wraps an angle in degrees to (-180, 180].
inline double wrap_deg(double a) {
    double w = std::fmod(a, 360.0);
    if (w <= -180.0) w += 360.0;
    if (w > 180.0) w -= 360.0;
    return w;
}

}  // namespace dvlnav
