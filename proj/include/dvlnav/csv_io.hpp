#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dvlnav/ins_ekf.hpp"

namespace dvlnav {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Numeric CSV with a required header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Index of `name` in the header; IoError if absent.
    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

void write_truth_csv(const std::filesystem::path& path, const std::vector<GroundTruthSample>& truth);
std::vector<GroundTruthSample> read_truth_csv(const std::filesystem::path& path);

void write_imu_csv(const std::filesystem::path& path, const std::vector<ImuSample>& imu);
std::vector<ImuSample> read_imu_csv(const std::filesystem::path& path);

void write_beam_csv(const std::filesystem::path& path, const std::vector<BeamSample>& beams);
std::vector<BeamSample> read_beam_csv(const std::filesystem::path& path);

/// `t, vx, vy, vz, r11, r22, r33`; off-diagonal covariance terms are not stored.
void write_velocity_csv(const std::filesystem::path& path, const std::vector<TimedEstimate>& estimates);
std::vector<TimedEstimate> read_velocity_csv(const std::filesystem::path& path,
                                             EstimateSource source = EstimateSource::External);

void write_nav_log_csv(const std::filesystem::path& path, const std::vector<NavLogRow>& log);

/// Navigation log as read back: time, velocity, attitude, R diagonal and update flag.
struct NavLogRecord {
    double time = 0.0;
    Vec3 velocity_n = Vec3::Zero();
    Vec3 euler_deg = Vec3::Zero();  // roll, pitch, yaw
    Vec3 r_diag = Vec3::Zero();
    bool updated = false;
};
std::vector<NavLogRecord> read_nav_log_csv(const std::filesystem::path& path);

}  // namespace dvlnav
