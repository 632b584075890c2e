#include "dvlnav/ls_estimator.hpp"

namespace dvlnav {

LsEstimator::LsEstimator(const TransformMatrix& t, double beam_noise_std) : t_(t), qr_(t) {
    if (qr_.rank() < 3) {
        throw NumericalError("beam transformation matrix is rank deficient (rank " +
                             std::to_string(qr_.rank()) + ")");
    }
    if (!(beam_noise_std >= 0.0)) {
        throw ArgumentError("beam noise std must be non-negative");
    }
    // (T^T T)^-1 = R^-1 R^-T with the column permutation applied.
    const Eigen::Matrix3d r = qr_.matrixR().topLeftCorner<3, 3>().triangularView<Eigen::Upper>();
    const Mat3 r_inv = r.inverse();
    const Mat3 perm = qr_.colsPermutation();
    Mat3 gram_inv = perm * (r_inv * r_inv.transpose()) * perm.transpose();
    gram_inv = 0.5 * (gram_inv + gram_inv.transpose()).eval();
    covariance_ = beam_noise_std * beam_noise_std * gram_inv;
}

VelocityEstimate LsEstimator::solve(const Vec4& beams) const {
    VelocityEstimate est;
    est.velocity_dvl = qr_.solve(beams);
    est.covariance = covariance_;
    est.source = EstimateSource::LS;
    return est;
}

VelocityEstimate solve_ls(const TransformMatrix& t, const Vec4& beams, double beam_noise_std) {
    return LsEstimator(t, beam_noise_std).solve(beams);
}

}  // namespace dvlnav
