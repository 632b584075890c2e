#include "dvlnav/dvl_geometry.hpp"

#include <string>

namespace dvlnav {
namespace {

void check_pitch(double pitch_rad) {
    if (!(pitch_rad > 0.0 && pitch_rad < 0.5 * kPi)) {
        throw ArgumentError("beam pitch must lie in (0, pi/2), got " + std::to_string(pitch_rad) + " rad");
    }
}

Vec3 direction(double yaw, double pitch) {
    return {std::cos(yaw) * std::sin(pitch), std::sin(yaw) * std::sin(pitch), std::cos(pitch)};
}

}  // namespace

double default_beam_yaw(int index) {
    if (index < 1 || index > BeamGeometry::kBeamCount) {
        throw ArgumentError("beam index must be in 1..4, got " + std::to_string(index));
    }
    return ((index - 1) * 90.0 + 45.0) * kDegToRad;
}

BeamGeometry::BeamGeometry(double pitch_rad)
    : pitch_(pitch_rad),
      yaw_{default_beam_yaw(1), default_beam_yaw(2), default_beam_yaw(3), default_beam_yaw(4)} {
    check_pitch(pitch_);
}

BeamGeometry::BeamGeometry(double pitch_rad, const std::array<double, 4>& yaw_rad)
    : pitch_(pitch_rad), yaw_(yaw_rad) {
    check_pitch(pitch_);
}

BeamGeometry BeamGeometry::from_degrees(double pitch_deg, const std::optional<std::array<double, 4>>& yaw_deg) {
    if (!yaw_deg) {
        return BeamGeometry(pitch_deg * kDegToRad);
    }
    std::array<double, 4> yaw{};
    for (int i = 0; i < 4; ++i) {
        yaw[i] = (*yaw_deg)[i] * kDegToRad;
    }
    return BeamGeometry(pitch_deg * kDegToRad, yaw);
}

Vec3 beam_direction(int index, double pitch_rad) {
    check_pitch(pitch_rad);
    return direction(default_beam_yaw(index), pitch_rad);
}

TransformMatrix build_transform(const BeamGeometry& geometry) {
    TransformMatrix t;
    for (int i = 0; i < BeamGeometry::kBeamCount; ++i) {
        t.row(i) = direction(geometry.yaw_angles()[i], geometry.pitch()).transpose();
    }
    return t;
}

}  // namespace dvlnav
