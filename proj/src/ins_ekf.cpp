#include "dvlnav/ins_ekf.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dvlnav {
namespace {

const Vec3 kGravityN(0.0, 0.0, kGravity);

void symmetrize(Mat12& p) { p = 0.5 * (p + p.transpose()).eval(); }

bool is_psd(const Mat3& r) {
    if (!r.allFinite()) return false;
    if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, r.cwiseAbs().maxCoeff())) return false;
    Eigen::SelfAdjointEigenSolver<Mat3> es(r);
    return es.eigenvalues().minCoeff() >= -1e-15;
}

}  // namespace

Vec12 ErrorState::as_vector() const {
    Vec12 x;
    x << dv_n, epsilon_n, db_a, db_g;
    return x;
}

ErrorState ErrorState::from_vector(const Vec12& x) {
    ErrorState e;
    e.dv_n = x.segment<3>(kVel);
    e.epsilon_n = x.segment<3>(kAtt);
    e.db_a = x.segment<3>(kAccBias);
    e.db_g = x.segment<3>(kGyroBias);
    return e;
}

void EkfConfig::set_imu_noise(const ImuErrorSpec& imu, double rate_hz) {
    accel_noise_psd = imu.accel_noise_std * imu.accel_noise_std / rate_hz;
    gyro_noise_psd = imu.gyro_noise_std * imu.gyro_noise_std / rate_hz;
}

Mat12 EkfConfig::initial_covariance() const {
    Vec12 d;
    d.segment<3>(kVel).setConstant(init_velocity_std * init_velocity_std);
    d.segment<3>(kAtt).setConstant(init_attitude_std * init_attitude_std);
    d.segment<3>(kAccBias).setConstant(init_accel_bias_std * init_accel_bias_std);
    d.segment<3>(kGyroBias).setConstant(init_gyro_bias_std * init_gyro_bias_std);
    return d.asDiagonal();
}

Mat12 EkfConfig::continuous_noise() const {
    Vec12 d;
    d.segment<3>(0).setConstant(accel_noise_psd);
    d.segment<3>(3).setConstant(gyro_noise_psd);
    d.segment<3>(6).setConstant(accel_bias_walk_psd);
    d.segment<3>(9).setConstant(gyro_bias_walk_psd);
    return d.asDiagonal();
}

NavState strapdown_step(const NavState& nav, const ImuSample& imu, double dt) {
    if (!imu.accel.allFinite() || !imu.gyro.allFinite() || !std::isfinite(dt)) {
        std::ostringstream msg;
        msg << "non-finite IMU sample at t=" << imu.time;
        throw NumericalError(msg.str());
    }
    const Vec3 omega = imu.gyro - nav.gyro_bias_est;
    const Vec3 f_b = imu.accel - nav.accel_bias_est;
    const Quat q_mid = (nav.attitude * quat_exp(0.5 * dt * omega)).normalized();

    NavState out = nav;
    out.attitude = (nav.attitude * quat_exp(dt * omega)).normalized();
    out.velocity_n = nav.velocity_n + (q_mid * f_b + kGravityN) * dt;
    out.position = nav.position + 0.5 * (nav.velocity_n + out.velocity_n) * dt;
    out.time = nav.time + dt;
    return out;
}

SystemMatrices build_system_matrices(const NavState& nav, const Vec3& f_n) {
    const Mat3 c_bn = nav.attitude.toRotationMatrix();
    SystemMatrices m;
    m.F.block<3, 3>(kVel, kAtt) = skew(f_n);
    m.F.block<3, 3>(kVel, kAccBias) = c_bn;
    m.F.block<3, 3>(kAtt, kGyroBias) = -c_bn;

    m.G.block<3, 3>(kVel, 0) = c_bn;
    m.G.block<3, 3>(kAtt, 3) = -c_bn;
    m.G.block<3, 3>(kAccBias, 6) = Mat3::Identity();
    m.G.block<3, 3>(kGyroBias, 9) = Mat3::Identity();
    return m;
}

FilterState propagate_covariance(const FilterState& fs, const Mat12& F, const Mat12& G, const Mat12& Qc, double dt) {
    if (!(dt > 0.0)) throw ArgumentError("propagation interval must be positive");
    const Mat12 f_dt = F * dt;
    const Mat12 phi = Mat12::Identity() + f_dt + 0.5 * f_dt * f_dt;
    FilterState out = fs;
    out.Q = G * Qc * G.transpose() * dt;
    out.P = phi * fs.P * phi.transpose() + out.Q;
    symmetrize(out.P);
    return out;
}

UpdateResult dvl_update(const NavState& nav, const FilterState& fs, const VelocityEstimate& estimate, bool adaptive,
                        const EkfConfig& config, const Mat3& ls_covariance) {
    UpdateResult out{nav, fs, {}};
    UpdateDiagnostics& diag = out.diagnostics;

    const Mat3 c_bn = nav.attitude.toRotationMatrix();
    Mat3 r_dvl;
    if (adaptive) {
        r_dvl = estimate.covariance;
    } else if (config.constant_r_model == ConstantRModel::LsDerived) {
        r_dvl = ls_covariance;
    } else {
        r_dvl = config.constant_r_std * config.constant_r_std * Mat3::Identity();
    }
    diag.r_dvl = r_dvl;

    MeasurementModel& mm = diag.model;
    mm.H.block<3, 3>(0, kVel) = Mat3::Identity();
    mm.H.block<3, 3>(0, kAtt) = -skew(nav.velocity_n);
    mm.R = c_bn * r_dvl * c_bn.transpose();
    mm.innovation = nav.velocity_n - c_bn * estimate.velocity_dvl;

    if (!is_psd(r_dvl) || !estimate.velocity_dvl.allFinite()) {
        diag.fault = "measurement rejected: R is not symmetric positive semi-definite";
        return out;
    }

    const Mat3 s = mm.H * fs.P * mm.H.transpose() + mm.R;
    Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (s + s.transpose()));
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    diag.innovation_condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(lo > 0.0) || diag.innovation_condition > 1e14) {
        std::ostringstream msg;
        msg << "innovation covariance not invertible at t=" << nav.time
            << " (condition number " << diag.innovation_condition << ")";
        throw NumericalError(msg.str());
    }

    // K = P H^T S^-1, solved rather than inverted.
    const Mat12x3 pht = fs.P * mm.H.transpose();
    diag.gain = s.ldlt().solve(pht.transpose()).transpose();
    const Vec12 dx = diag.gain * mm.innovation;
    diag.correction = ErrorState::from_vector(dx);

    const Mat12 i_kh = Mat12::Identity() - diag.gain * mm.H;
    if (config.joseph_form) {
        out.filter.P = i_kh * fs.P * i_kh.transpose() + diag.gain * mm.R * diag.gain.transpose();
    } else {
        out.filter.P = i_kh * fs.P;
    }
    symmetrize(out.filter.P);
    out.filter.last_update_time = nav.time;

    // Closed-loop injection; the error state returns to zero afterwards.
    const ErrorState& e = diag.correction;
    out.nav.velocity_n = nav.velocity_n - e.dv_n;
    out.nav.attitude = (quat_exp(e.epsilon_n) * nav.attitude).normalized();
    out.nav.accel_bias_est = nav.accel_bias_est + e.db_a;
    out.nav.gyro_bias_est = nav.gyro_bias_est + e.db_g;
    diag.applied = true;
    return out;
}

std::vector<NavLogRow> run_fusion(const std::vector<ImuSample>& imu, const std::vector<TimedEstimate>& estimates,
                                  const NavState& initial, const FusionOptions& options, FusionObserver* observer) {
    if (imu.empty()) throw InputError("empty IMU stream");
    const double dt = options.dt;
    for (std::size_t k = 1; k < imu.size(); ++k) {
        if (!(imu[k].time > imu[k - 1].time)) {
            std::ostringstream msg;
            msg << "IMU time regression at row " << k << " (t=" << imu[k].time << ")";
            throw InputError(msg.str());
        }
    }

    // Map each estimate onto an IMU epoch.
    std::vector<int> update_at(imu.size(), -1);
    double prev_time = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < estimates.size(); ++j) {
        const double t = estimates[j].time;
        if (!(t > prev_time)) {
            std::ostringstream msg;
            msg << "velocity estimate time regression at row " << j << " (t=" << t << ")";
            throw InputError(msg.str());
        }
        prev_time = t;
        const double pos = (t - imu.front().time) / dt;
        const auto idx = static_cast<long long>(std::llround(pos));
        if (idx < 0 || idx >= static_cast<long long>(imu.size()) ||
            std::abs(imu[static_cast<std::size_t>(idx)].time - t) > 1e-6) {
            std::ostringstream msg;
            msg << "velocity estimate at t=" << t << " does not coincide with an IMU epoch";
            throw InputError(msg.str());
        }
        update_at[static_cast<std::size_t>(idx)] = static_cast<int>(j);
    }

    const Mat12 qc = options.ekf.continuous_noise();
    NavState nav = initial;
    nav.time = imu.front().time;
    FilterState fs;
    fs.P = options.ekf.initial_covariance();
    fs.last_update_time = nav.time;

    auto check = [&](const char* stage) {
        if (!options.check_covariance) return;
        const double asym = (fs.P - fs.P.transpose()).cwiseAbs().maxCoeff();
        const double min_eig = min_eigenvalue(fs.P);
        if (asym > 1e-9 || min_eig < -1e-10) {
            std::ostringstream msg;
            msg << "covariance lost symmetry/PSD after " << stage << " at t=" << nav.time << " (asym " << asym
                << ", min eig " << min_eig << ")";
            throw NumericalError(msg.str());
        }
    };

    std::vector<NavLogRow> log;
    log.reserve(imu.size());
    Vec3 last_r = Vec3::Zero();
    for (std::size_t k = 0; k < imu.size(); ++k) {
        NavLogRow row;
        if (update_at[k] >= 0) {
            const VelocityEstimate& est = estimates[static_cast<std::size_t>(update_at[k])].estimate;
            UpdateResult u = dvl_update(nav, fs, est, options.ekf.adaptive_r, options.ekf, options.ls_covariance);
            if (u.diagnostics.applied) {
                nav = u.nav;
                fs = u.filter;
                last_r = u.diagnostics.r_dvl.diagonal();
                row.innovation = u.diagnostics.model.innovation;
                row.updated = true;
                check("update");
                if (observer) observer->on_step(nav, fs, true);
            }
        }
        row.time = nav.time;
        row.nav = nav;
        row.p_diag = fs.P.diagonal();
        row.r_diag = last_r;
        log.push_back(row);

        if (k + 1 < imu.size()) {
            const double step = imu[k + 1].time - imu[k].time;
            const Vec3 omega = imu[k].gyro - nav.gyro_bias_est;
            const Quat q_mid = (nav.attitude * quat_exp(0.5 * step * omega)).normalized();
            const Vec3 f_n = q_mid * (imu[k].accel - nav.accel_bias_est);
            const SystemMatrices sys = build_system_matrices(nav, f_n);
            fs = propagate_covariance(fs, sys.F, sys.G, qc, step);
            nav = strapdown_step(nav, imu[k], step);
            nav.time = imu[k + 1].time;
            check("propagation");
            if (observer) observer->on_step(nav, fs, false);
        }
    }
    return log;
}

NavState initial_state_from_truth(const GroundTruthSample& truth, const Vec3& velocity_error,
                                  const Vec3& attitude_error) {
    NavState nav;
    nav.time = truth.time;
    nav.position = truth.position;
    nav.velocity_n = truth.velocity_n + velocity_error;
    // C_ins = (I - [eps x]) C_true  =>  q_ins = Exp(-eps) q_true.
    nav.attitude = (quat_exp(-attitude_error) * truth.attitude).normalized();
    return nav;
}

ErrorState true_error(const NavState& nav, const GroundTruthSample& truth, const ImuErrorSpec& imu) {
    ErrorState e;
    e.dv_n = nav.velocity_n - truth.velocity_n;
    e.epsilon_n = quat_log(truth.attitude * nav.attitude.conjugate());
    e.db_a = imu.accel_bias - nav.accel_bias_est;
    e.db_g = imu.gyro_bias - nav.gyro_bias_est;
    return e;
}

double min_eigenvalue(const Mat12& p) {
    Eigen::SelfAdjointEigenSolver<Mat12> es(p, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace dvlnav
