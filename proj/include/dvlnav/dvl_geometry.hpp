#pragma once

#include <array>
#include <optional>

#include "dvlnav/types.hpp"

namespace dvlnav {

using TransformMatrix = Eigen::Matrix<double, 4, 3>;

/// Janus "x" beam layout: four beams sharing one pitch angle.
class BeamGeometry {
public:
    static constexpr int kBeamCount = 4;
    static constexpr double kDefaultPitchDeg = 20.0;

    /// Yaw angles follow (i-1)*90 + 45 degrees.
    explicit BeamGeometry(double pitch_rad = kDefaultPitchDeg * kDegToRad);
    BeamGeometry(double pitch_rad, const std::array<double, 4>& yaw_rad);

    static BeamGeometry from_degrees(double pitch_deg,
                                     const std::optional<std::array<double, 4>>& yaw_deg = std::nullopt);

    double pitch() const { return pitch_; }
    const std::array<double, 4>& yaw_angles() const { return yaw_; }

private:
    double pitch_;
    std::array<double, 4> yaw_;
};

/// Default yaw of beam `index` (1-based).
double default_beam_yaw(int index);

/// Unit direction of beam `index` (1..4) for the default yaw pattern.
Vec3 beam_direction(int index, double pitch_rad);

/// Row i is the direction of beam i+1.
TransformMatrix build_transform(const BeamGeometry& geometry);

}  // namespace dvlnav
