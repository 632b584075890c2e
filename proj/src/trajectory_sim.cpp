#include "dvlnav/trajectory_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dvlnav {
namespace {

constexpr double kImuPeriod = 1.0 / kImuRate;
constexpr double kTwoPi = 2.0 * kPi;

struct Sinusoid {
    double amplitude = 0.0;
    double period = 1.0;
    double phase = 0.0;

    double operator()(double t) const { return amplitude * std::sin(kTwoPi * t / period + phase); }
};

struct YawSegment {
    double start = 0.0;
    double end = 0.0;
    double rate = 0.0;
};

double smoothstep(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

// Continuous-time motion profile. The generator samples it and derives the
// inertial signals from the samples, so only smoothness matters here.
class MotionProfile {
public:
    explicit MotionProfile(const TrajectorySpec& spec) : spec_(spec) {
        std::mt19937_64 rng(spec.seed);
        auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

        knots_ = spec.depth_profile;
        switch (spec.pattern) {
            case TrajectoryPattern::Straight:
                break;
            case TrajectoryPattern::Turn:
                yaw_.push_back({0.0, spec.duration + 1.0, spec.turn_rate});
                break;
            case TrajectoryPattern::Lawnmower: {
                const double leg = 100.0;
                const double turn_time = kPi / std::max(spec.turn_rate, 1e-6);
                double t = leg;
                double sign = 1.0;
                while (t < spec.duration + 1.0) {
                    yaw_.push_back({t, t + turn_time, sign * spec.turn_rate});
                    t += turn_time + leg;
                    sign = -sign;
                }
                speed_ = {uniform(0.1, 0.2), uniform(60.0, 200.0), uniform(0.0, kTwoPi)};
                sway_ = {uniform(0.01, 0.04), uniform(20.0, 60.0), uniform(0.0, kTwoPi)};
                roll_ = {uniform(0.5, 1.5) * kDegToRad, uniform(8.0, 20.0), uniform(0.0, kTwoPi)};
                break;
            }
            case TrajectoryPattern::Mixed: {
                double t = 0.0;
                while (t < spec.duration + 1.0) {
                    const double len = uniform(30.0, 90.0);
                    const double pick = uniform(0.0, 1.0);
                    const double rate = pick < 0.4 ? 0.0 : uniform(-spec.turn_rate, spec.turn_rate);
                    yaw_.push_back({t, t + len, rate});
                    t += len;
                }
                speed_ = {uniform(0.1, 0.2), uniform(60.0, 200.0), uniform(0.0, kTwoPi)};
                sway_ = {uniform(0.01, 0.04), uniform(20.0, 60.0), uniform(0.0, kTwoPi)};
                heave_ = {uniform(0.005, 0.02), uniform(15.0, 45.0), uniform(0.0, kTwoPi)};
                roll_ = {uniform(1.0, 3.0) * kDegToRad, uniform(8.0, 30.0), uniform(0.0, kTwoPi)};
                pitch_ = {uniform(0.5, 2.0) * kDegToRad, uniform(8.0, 30.0), uniform(0.0, kTwoPi)};
                if (knots_.empty()) {
                    double kt = uniform(20.0, 60.0);
                    double depth = uniform(5.0, 30.0);
                    knots_.push_back({0.0, depth});
                    while (kt < spec.duration) {
                        depth += uniform(-8.0, 8.0);
                        knots_.push_back({kt, depth});
                        kt += uniform(100.0, 200.0);
                    }
                }
                break;
            }
        }
        std::sort(knots_.begin(), knots_.end(), [](const DepthKnot& a, const DepthKnot& b) { return a.time < b.time; });
    }

    double yaw(double t) const {
        double psi = spec_.initial_heading;
        for (const auto& seg : yaw_) {
            if (t <= seg.start) break;
            psi += seg.rate * (std::min(t, seg.end) - seg.start);
        }
        return psi;
    }

    double horizontal_speed(double t) const { return spec_.cruise_speed * (1.0 + speed_(t)); }

    double down_velocity(double t) const {
        // Piecewise-constant slope of the depth knots, blended over +/- 5 s at each knot.
        double vd = 0.0;
        double prev_slope = 0.0;
        for (std::size_t i = 0; i < knots_.size(); ++i) {
            double slope = 0.0;
            if (i + 1 < knots_.size()) {
                const double dt = knots_[i + 1].time - knots_[i].time;
                slope = dt > 0.0 ? (knots_[i + 1].depth - knots_[i].depth) / dt : 0.0;
            }
            const double w = 5.0;
            vd += (slope - prev_slope) * smoothstep((t - knots_[i].time + w) / (2.0 * w));
            prev_slope = slope;
        }
        return vd + heave_(t);
    }

    Vec3 velocity_n(double t) const {
        const double psi = yaw(t);
        const double u = horizontal_speed(t);
        const double s = sway_(t);
        return {u * std::cos(psi) - s * std::sin(psi), u * std::sin(psi) + s * std::cos(psi), down_velocity(t)};
    }

    Quat attitude(double t) const {
        const double glide = -0.8 * std::atan2(down_velocity(t), horizontal_speed(t));
        return quat_from_euler(roll_(t), glide + pitch_(t), yaw(t));
    }

private:
    TrajectorySpec spec_;
    std::vector<YawSegment> yaw_;
    std::vector<DepthKnot> knots_;
    Sinusoid speed_{};
    Sinusoid sway_{};
    Sinusoid heave_{};
    Sinusoid roll_{};
    Sinusoid pitch_{};
};

void check_rate(double rate_hz) {
    if (rate_hz != kImuRate && rate_hz != kDvlRate) {
        throw ArgumentError("unsupported sample rate " + std::to_string(rate_hz) + " Hz (use 1 or 100)");
    }
}

}  // namespace

TrajectoryPattern parse_pattern(const std::string& name) {
    if (name == "straight") return TrajectoryPattern::Straight;
    if (name == "turn") return TrajectoryPattern::Turn;
    if (name == "lawnmower") return TrajectoryPattern::Lawnmower;
    if (name == "mixed") return TrajectoryPattern::Mixed;
    throw ConfigError("unsupported trajectory pattern '" + name + "'");
}

std::string pattern_name(TrajectoryPattern pattern) {
    switch (pattern) {
        case TrajectoryPattern::Straight: return "straight";
        case TrajectoryPattern::Turn: return "turn";
        case TrajectoryPattern::Lawnmower: return "lawnmower";
        case TrajectoryPattern::Mixed: return "mixed";
    }
    return "unknown";
}

void TrajectorySpec::validate() const {
    if (!(duration > 0.0)) throw ConfigError("trajectory duration must be positive");
    if (!(cruise_speed > 0.0)) throw ConfigError("cruise speed must be positive");
    if (!std::isfinite(turn_rate)) throw ConfigError("turn rate must be finite");
}

void ImuErrorSpec::validate() const {
    if (!(accel_noise_std >= 0.0) || !(gyro_noise_std >= 0.0)) {
        throw ConfigError("IMU noise standard deviations must be non-negative");
    }
}

void DvlErrorSpec::validate() const {
    if (!(noise_std >= 0.0)) throw ConfigError("DVL noise standard deviation must be non-negative");
    if (!beam_bias.allFinite() || !scale_factor.allFinite()) throw ConfigError("DVL error terms must be finite");
}

std::vector<GroundTruthSample> generate_trajectory(const TrajectorySpec& spec, double rate_hz) {
    spec.validate();
    check_rate(rate_hz);
    const MotionProfile profile(spec);

    const auto steps = static_cast<std::size_t>(std::llround(spec.duration * kImuRate));
    const Vec3 gravity(0.0, 0.0, kGravity);

    // One extra profile point so the last sample also has a full interval.
    std::vector<Vec3> vel(steps + 2);
    for (std::size_t k = 0; k < vel.size(); ++k) {
        vel[k] = profile.velocity_n(static_cast<double>(k) * kImuPeriod);
    }

    std::vector<GroundTruthSample> out;
    out.reserve(steps + 1);
    Quat q = profile.attitude(0.0);
    Vec3 pos = Vec3::Zero();
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * kImuPeriod;
        const Quat q_target = profile.attitude(t + kImuPeriod);
        const Vec3 omega = quat_log(q.conjugate() * q_target) / kImuPeriod;
        const Quat q_mid = (q * quat_exp(0.5 * kImuPeriod * omega)).normalized();
        const Vec3 accel_n = (vel[k + 1] - vel[k]) / kImuPeriod;

        GroundTruthSample s;
        s.time = t;
        s.position = pos;
        s.velocity_n = vel[k];
        s.attitude = q;
        s.angular_rate_b = omega;
        s.specific_force_b = q_mid.conjugate() * (accel_n - gravity);
        out.push_back(s);

        pos += 0.5 * (vel[k] + vel[k + 1]) * kImuPeriod;
        q = (q * quat_exp(kImuPeriod * omega)).normalized();
    }
    return rate_hz == kImuRate ? out : decimate(out, rate_hz);
}

std::vector<GroundTruthSample> decimate(const std::vector<GroundTruthSample>& truth, double rate_hz) {
    std::vector<GroundTruthSample> out;
    for (const auto& s : truth) {
        const double scaled = s.time * rate_hz;
        if (std::abs(scaled - std::round(scaled)) < 1e-6) {
            out.push_back(s);
        }
    }
    return out;
}

std::vector<ImuSample> synthesize_imu(const std::vector<GroundTruthSample>& truth, const ImuErrorSpec& errors,
                                      std::uint64_t seed) {
    errors.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<ImuSample> out;
    out.reserve(truth.size());
    for (const auto& s : truth) {
        ImuSample m;
        m.time = s.time;
        Vec3 na, ng;
        for (int i = 0; i < 3; ++i) na[i] = normal(rng);
        for (int i = 0; i < 3; ++i) ng[i] = normal(rng);
        m.accel = s.specific_force_b + errors.accel_bias + errors.accel_noise_std * na;
        m.gyro = s.angular_rate_b + errors.gyro_bias + errors.gyro_noise_std * ng;
        out.push_back(m);
    }
    return out;
}

std::vector<BeamSample> synthesize_beams(const std::vector<GroundTruthSample>& truth, const BeamGeometry& geometry,
                                         const DvlErrorSpec& errors, std::uint64_t seed) {
    errors.validate();
    const TransformMatrix t = build_transform(geometry);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<BeamSample> out;
    out.reserve(truth.size());
    for (const auto& s : truth) {
        BeamSample b;
        b.time = s.time;
        b.truth_velocity_dvl = s.attitude.conjugate() * s.velocity_n;
        Vec4 noise;
        for (int i = 0; i < 4; ++i) noise[i] = normal(rng);
        const Vec3 scaled = b.truth_velocity_dvl.cwiseProduct(Vec3::Ones() + errors.scale_factor);
        b.beams = t * scaled + errors.beam_bias + errors.noise_std * noise;
        out.push_back(b);
    }
    return out;
}

}  // namespace dvlnav
