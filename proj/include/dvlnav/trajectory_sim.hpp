#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dvlnav/dvl_geometry.hpp"

namespace dvlnav {

enum class TrajectoryPattern { Straight, Turn, Lawnmower, Mixed };

TrajectoryPattern parse_pattern(const std::string& name);
std::string pattern_name(TrajectoryPattern pattern);

struct DepthKnot {
    double time = 0.0;   // s
    double depth = 0.0;  // m, positive down
};

struct TrajectorySpec {
    TrajectoryPattern pattern = TrajectoryPattern::Straight;
    double duration = 600.0;           // s
    double cruise_speed = 1.5;         // m/s
    std::vector<DepthKnot> depth_profile;  // empty: constant depth
    double turn_rate = 3.0 * kDegToRad;    // rad/s
    double initial_heading = 0.0;          // rad
    std::uint64_t seed = 1;

    void validate() const;
};

struct GroundTruthSample {
    double time = 0.0;
    Vec3 position = Vec3::Zero();    // local NED
    Vec3 velocity_n = Vec3::Zero();
    Quat attitude = Quat::Identity();  // body to navigation
    Vec3 angular_rate_b = Vec3::Zero();
    Vec3 specific_force_b = Vec3::Zero();
};

struct ImuErrorSpec {
    Vec3 accel_bias = Vec3::Zero();  // m/s^2
    Vec3 gyro_bias = Vec3::Zero();   // rad/s
    double accel_noise_std = 0.0;    // m/s^2 per sample
    double gyro_noise_std = 0.0;     // rad/s per sample

    void validate() const;
};

struct ImuSample {
    double time = 0.0;
    Vec3 accel = Vec3::Zero();
    Vec3 gyro = Vec3::Zero();
};

struct DvlErrorSpec {
    Vec4 beam_bias = Vec4::Zero();    // m/s, beam space
    Vec3 scale_factor = Vec3::Zero(); // dimensionless, DVL-frame velocity space
    double noise_std = 0.0;           // m/s per beam

    void validate() const;
};

struct BeamSample {
    double time = 0.0;
    Vec4 beams = Vec4::Zero();
    Vec3 truth_velocity_dvl = Vec3::Zero();
};

constexpr double kImuRate = 100.0;
constexpr double kDvlRate = 1.0;

/// Ground truth at `rate_hz` (1 or 100). Attitude is integrated with the
/// quaternion exponential at 100 Hz; angular rate and specific force of
/// sample k are the constant values over [t_k, t_k + 0.01 s] that a perfect
/// strapdown mechanization needs to reproduce the truth exactly.
std::vector<GroundTruthSample> generate_trajectory(const TrajectorySpec& spec, double rate_hz);

/// Picks every sample whose time is an integer multiple of 1/rate_hz.
std::vector<GroundTruthSample> decimate(const std::vector<GroundTruthSample>& truth, double rate_hz);

std::vector<ImuSample> synthesize_imu(const std::vector<GroundTruthSample>& truth, const ImuErrorSpec& errors,
                                      std::uint64_t seed);

/// Corrupted four-beam measurements. The DVL frame coincides with the body frame.
std::vector<BeamSample> synthesize_beams(const std::vector<GroundTruthSample>& truth, const BeamGeometry& geometry,
                                         const DvlErrorSpec& errors, std::uint64_t seed);

}  // namespace dvlnav
