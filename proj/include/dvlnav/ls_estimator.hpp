#pragma once

#include "dvlnav/dvl_geometry.hpp"

namespace dvlnav {

enum class EstimateSource { LS, MOGPR, External };

/// DVL-frame velocity with its measurement covariance.
struct VelocityEstimate {
    Vec3 velocity_dvl = Vec3::Zero();
    Mat3 covariance = Mat3::Zero();
    EstimateSource source = EstimateSource::LS;
};

/// Beam noise figure quoted by the manufacturer, m/s.
constexpr double kDefaultBeamNoiseStd = 0.02;

/// Least-squares beam-to-velocity solver. Factorizes T once with QR.
class LsEstimator {
public:
    explicit LsEstimator(const TransformMatrix& t, double beam_noise_std = kDefaultBeamNoiseStd);

    VelocityEstimate solve(const Vec4& beams) const;

    /// sigma^2 (T^T T)^-1, the constant covariance of every solution.
    const Mat3& covariance() const { return covariance_; }
    const TransformMatrix& transform() const { return t_; }

private:
    TransformMatrix t_;
    Eigen::ColPivHouseholderQR<TransformMatrix> qr_;
    Mat3 covariance_;
};

/// One-shot convenience wrapper around LsEstimator.
VelocityEstimate solve_ls(const TransformMatrix& t, const Vec4& beams,
                          double beam_noise_std = kDefaultBeamNoiseStd);

}  // namespace dvlnav
