#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dvlnav/config.hpp"
#include "dvlnav/csv_io.hpp"
#include "dvlnav/ins_ekf.hpp"
#include "dvlnav/mogpr.hpp"

namespace dvlnav {

struct GprSettings {
    Eigen::Index max_points = 2000;
    OptimizerConfig optimizer;
    double init_noise_std = 0.02;
    std::uint64_t seed = 7;
};

/// Everything one experiment needs; read from the sectioned config file.
struct ExperimentConfig {
    BeamGeometry geometry;
    TrajectorySpec sim;
    ImuErrorSpec imu_errors;
    DvlErrorSpec dvl_errors;
    GprSettings gpr;
    EkfConfig ekf;
    Vec3 init_velocity_error = Vec3::Zero();
    Vec3 init_attitude_error = Vec3::Zero();  // rad

    std::vector<double> sweep{0.001, 0.003, 0.005, 0.007, 0.009, 0.011};
    Vec4 bias_pattern = Vec4::Ones();  // per-beam multiplier of each sweep level
    int train_missions = 11;
    int test_missions = 2;
    double mission_duration = 600.0;
    std::vector<TrajectoryPattern> mission_patterns{TrajectoryPattern::Mixed, TrajectoryPattern::Lawnmower};
    double speed_min = 1.0;
    double speed_max = 2.0;
    double train_speed_margin = 0.25;  // training envelope extends this far beyond the test one
    bool train_at_sweep_levels = true;  // false: one training set per mission with the [dvl_errors] bias
    bool write_nav_logs = false;
    double skip_seconds = 0.0;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 42;

    /// Defaults for every key that `config` leaves out.
    static ExperimentConfig from_config(const Config& config);
    void validate() const;

    /// Overrides the master seed and the single-trajectory seed.
    void set_seed(std::uint64_t s);
};

/// Deterministic child seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// "_bias0.011" naming contract for per-level files.
std::string bias_suffix(double bias);
std::optional<double> parse_bias_suffix(const std::string& stem);

DvlErrorSpec dvl_errors_for_bias(const ExperimentConfig& cfg, double bias);

struct Mission {
    int index = 0;
    TrajectorySpec spec;
    bool is_test = false;
    std::string name() const;
};

/// Training missions first, then test missions. Training cruise speeds are evenly spaced over
/// [speed_min - margin, speed_max + margin]; test speeds and all headings are drawn at random.
std::vector<Mission> plan_missions(const ExperimentConfig& cfg);

struct MissionData {
    Mission mission;
    std::vector<GroundTruthSample> truth;     // 100 Hz
    std::vector<GroundTruthSample> truth_dvl;  // 1 Hz
    std::vector<ImuSample> imu;
};

MissionData simulate_mission(const ExperimentConfig& cfg, const Mission& mission);

/// Beams for one sweep level. Test missions reuse one noise seed across levels
/// so that level-to-level differences come from the bias alone.
std::vector<BeamSample> mission_beams(const ExperimentConfig& cfg, const MissionData& data, double bias,
                                      std::size_t level_index);

/// Inputs are beams, targets the true DVL-frame velocities.
Dataset build_dataset(const std::vector<std::vector<BeamSample>>& sets);

class VelocityFrontend {
public:
    virtual ~VelocityFrontend() = default;
    virtual VelocityEstimate estimate(const Vec4& beams) const = 0;
};

class LsFrontend final : public VelocityFrontend {
public:
    LsFrontend(const BeamGeometry& geometry, double beam_noise_std);
    VelocityEstimate estimate(const Vec4& beams) const override { return ls_.solve(beams); }
    const LsEstimator& estimator() const { return ls_; }

private:
    LsEstimator ls_;
};

class GpFrontend final : public VelocityFrontend {
public:
    explicit GpFrontend(const GpModel& model) : model_(model) {}
    VelocityEstimate estimate(const Vec4& beams) const override;

private:
    const GpModel& model_;
};

std::vector<TimedEstimate> estimate_velocities(const std::vector<BeamSample>& beams, const VelocityFrontend& frontend);

/// sqrt(mean ||v_est - v_true||^2) over samples matched by time.
double velocity_rmse(const std::vector<TimedEstimate>& estimates, const std::vector<BeamSample>& beams);

struct StateRmse {
    Vec3 velocity = Vec3::Zero();   // N, E, D in m/s
    Vec3 angle_deg = Vec3::Zero();  // roll, pitch, yaw
    double velocity_norm() const { return velocity.norm(); }
    double angle_norm() const { return angle_deg.norm(); }
};

/// Roll/pitch/yaw of the body-frame rotation between truth and estimate, degrees, wrapped to (-180, 180].
Vec3 attitude_error_deg(const Quat& estimate, const Quat& truth);

std::vector<NavLogRecord> to_records(const std::vector<NavLogRow>& log);

/// Per-state RMSE of a navigation log against 100 Hz truth. Rows before `skip_seconds` are ignored.
StateRmse state_rmse(const std::vector<NavLogRecord>& log, const std::vector<GroundTruthSample>& truth,
                     double skip_seconds = 0.0);

TrainResult train_from_beams(const ExperimentConfig& cfg, const std::vector<std::vector<BeamSample>>& sets);

/// Runs the EKF from truth plus the configured initial error.
std::vector<NavLogRow> fuse(const ExperimentConfig& cfg, const std::vector<ImuSample>& imu,
                            const GroundTruthSample& truth0, const std::vector<TimedEstimate>& estimates,
                            bool adaptive, FusionObserver* observer = nullptr);

struct VelocityRmseRow {
    double bias = 0.0;
    double rmse_ls = 0.0;
    double rmse_mogpr = 0.0;
    double improvement_pct() const { return 100.0 * (1.0 - rmse_mogpr / rmse_ls); }
};

struct ReportRow {
    std::string mission;
    double bias = 0.0;
    std::string method;
    double skip_seconds = 0.0;
    StateRmse rmse;
};

struct NoiseSeriesRow {
    std::string mission;
    double bias = 0.0;
    std::string method;
    double time = 0.0;
    Vec3 std_dev = Vec3::Zero();
};

void write_velocity_rmse_csv(const std::filesystem::path& path, const std::vector<VelocityRmseRow>& rows);
void write_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows);
void write_noise_series_csv(const std::filesystem::path& path, const std::vector<NoiseSeriesRow>& rows);

/// Measurement-noise std at each update epoch of a log.
std::vector<NoiseSeriesRow> noise_series(const std::vector<NavLogRecord>& log, const std::string& mission,
                                         double bias, const std::string& method);

struct SweepResult {
    std::vector<std::vector<VelocityRmseRow>> velocity;  // per test mission
    std::vector<ReportRow> report;
    std::vector<double> nll_trace;
    std::vector<std::filesystem::path> files;
};

/// Full protocol: simulate, train, evaluate velocities, fuse both front-ends per level, report.
SweepResult run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace dvlnav
