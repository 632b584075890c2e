#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dvlnav/ls_estimator.hpp"
#include "dvlnav/trajectory_sim.hpp"

namespace dvlnav {

constexpr int kErrorStateDim = 12;

using Mat12 = Eigen::Matrix<double, kErrorStateDim, kErrorStateDim>;
using Vec12 = Eigen::Matrix<double, kErrorStateDim, 1>;
using Mat3x12 = Eigen::Matrix<double, 3, kErrorStateDim>;
using Mat12x3 = Eigen::Matrix<double, kErrorStateDim, 3>;

// Error-state layout.
constexpr int kVel = 0;
constexpr int kAtt = 3;
constexpr int kAccBias = 6;
constexpr int kGyroBias = 9;

struct NavState {
    double time = 0.0;
    Vec3 velocity_n = Vec3::Zero();
    Quat attitude = Quat::Identity();  // body to navigation
    Vec3 accel_bias_est = Vec3::Zero();
    Vec3 gyro_bias_est = Vec3::Zero();
    Vec3 position = Vec3::Zero();  // dead-reckoned, reporting only
};

/// Conventions: dv = v_ins - v_true; C_ins = (I - [eps x]) C_true;
/// db = b_true - b_est.
struct ErrorState {
    Vec3 dv_n = Vec3::Zero();
    Vec3 epsilon_n = Vec3::Zero();
    Vec3 db_a = Vec3::Zero();
    Vec3 db_g = Vec3::Zero();

    Vec12 as_vector() const;
    static ErrorState from_vector(const Vec12& x);
};

struct FilterState {
    Mat12 P = Mat12::Zero();
    Mat12 Q = Mat12::Zero();  // discrete process noise of the last propagation
    double last_update_time = 0.0;
};

struct MeasurementModel {
    Mat3x12 H = Mat3x12::Zero();
    Mat3 R = Mat3::Zero();       // navigation frame
    Vec3 innovation = Vec3::Zero();
};

enum class ConstantRModel { Isotropic, LsDerived };

struct EkfConfig {
    bool adaptive_r = false;
    double constant_r_std = 0.02;  // m/s
    ConstantRModel constant_r_model = ConstantRModel::Isotropic;
    bool joseph_form = true;

    // Initial one-sigma uncertainties.
    double init_velocity_std = 0.1;              // m/s
    double init_attitude_std = 1.0 * kDegToRad;  // rad
    double init_accel_bias_std = 1e-3;           // m/s^2
    double init_gyro_bias_std = 1e-5;            // rad/s

    // Continuous-time process noise.
    double accel_noise_psd = 1e-8;      // (m/s^2)^2 s
    double gyro_noise_psd = 1e-10;      // (rad/s)^2 s
    double accel_bias_walk_psd = 1e-14;  // (m/s^2)^2 / s
    double gyro_bias_walk_psd = 1e-18;   // (rad/s)^2 / s

    /// Sets the white-noise PSDs from per-sample IMU noise stds at `rate_hz`.
    void set_imu_noise(const ImuErrorSpec& imu, double rate_hz = kImuRate);

    Mat12 initial_covariance() const;
    Mat12 continuous_noise() const;
};

/// One strapdown step over `dt` with bias-corrected IMU data held constant.
NavState strapdown_step(const NavState& nav, const ImuSample& imu, double dt);

struct SystemMatrices {
    Mat12 F = Mat12::Zero();
    Mat12 G = Mat12::Zero();
};

/// Error dynamics d(dx)/dt = F dx + G w, w = [accel noise, gyro noise, accel bias walk, gyro bias walk].
SystemMatrices build_system_matrices(const NavState& nav, const Vec3& f_n);

/// P <- Phi P Phi^T + G Qc G^T dt with Phi = I + F dt + (F dt)^2 / 2.
FilterState propagate_covariance(const FilterState& fs, const Mat12& F, const Mat12& G, const Mat12& Qc, double dt);

struct UpdateDiagnostics {
    MeasurementModel model;
    Mat3 r_dvl = Mat3::Zero();  // measurement covariance in the DVL frame
    Mat12x3 gain = Mat12x3::Zero();
    ErrorState correction;
    double innovation_condition = 1.0;
    bool applied = false;
    std::string fault;
};

struct UpdateResult {
    NavState nav;
    FilterState filter;
    UpdateDiagnostics diagnostics;
};

/// DVL velocity update. With `adaptive` the estimate's covariance is used as R,
/// otherwise the constant R of `config`. Corrections are injected and the error
/// state is reset to zero.
UpdateResult dvl_update(const NavState& nav, const FilterState& fs, const VelocityEstimate& estimate, bool adaptive,
                        const EkfConfig& config, const Mat3& ls_covariance = Mat3::Zero());

struct TimedEstimate {
    double time = 0.0;
    VelocityEstimate estimate;
};

struct NavLogRow {
    double time = 0.0;
    NavState nav;
    Vec12 p_diag = Vec12::Zero();
    Vec3 innovation = Vec3::Zero();
    Vec3 r_diag = Vec3::Zero();  // DVL-frame R of the most recent update
    bool updated = false;
};

struct FusionOptions {
    EkfConfig ekf;
    Mat3 ls_covariance = Mat3::Zero();  // used by ConstantRModel::LsDerived
    double dt = 1.0 / kImuRate;
    bool check_covariance = false;  // verify P symmetric PSD after every step
};

/// Observer invoked after each propagate (updated = false) and update (updated = true).
struct FusionObserver {
    virtual ~FusionObserver() = default;
    virtual void on_step(const NavState& nav, const FilterState& fs, bool updated) = 0;
};

/// 100 Hz propagation, DVL update at each estimate epoch. One log row per IMU epoch.
std::vector<NavLogRow> run_fusion(const std::vector<ImuSample>& imu, const std::vector<TimedEstimate>& estimates,
                                  const NavState& initial, const FusionOptions& options,
                                  FusionObserver* observer = nullptr);

/// Initial navigation state from truth plus a fixed perturbation.
NavState initial_state_from_truth(const GroundTruthSample& truth, const Vec3& velocity_error = Vec3::Zero(),
                                  const Vec3& attitude_error = Vec3::Zero());

/// True error state of `nav` against ground truth and the true IMU biases.
ErrorState true_error(const NavState& nav, const GroundTruthSample& truth, const ImuErrorSpec& imu);

double min_eigenvalue(const Mat12& p);

}  // namespace dvlnav
