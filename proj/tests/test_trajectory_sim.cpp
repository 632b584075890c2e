#include <gtest/gtest.h>

#include <cmath>

#include "dvlnav/ls_estimator.hpp"
#include "dvlnav/trajectory_sim.hpp"

using namespace dvlnav;

namespace {
TrajectorySpec spec_of(TrajectoryPattern p, double duration = 600.0) {
    TrajectorySpec s;
    s.pattern = p;
    s.duration = duration;
    return s;
}
}  // namespace

TEST(Trajectory, StraightLevelRun) {
    const auto truth = generate_trajectory(spec_of(TrajectoryPattern::Straight), kImuRate);
    ASSERT_EQ(truth.size(), 60001u);
    for (const auto& s : truth) {
        EXPECT_LT((s.velocity_n - Vec3(1.5, 0.0, 0.0)).norm(), 1e-12);
        EXPECT_LT((s.specific_force_b - Vec3(0.0, 0.0, -kGravity)).norm(), 1e-9);
        EXPECT_LT(s.angular_rate_b.norm(), 1e-12);
    }
    EXPECT_NEAR(truth.back().position.x(), 900.0, 1e-6);
}

TEST(Trajectory, RateContractIncludesTimeZero) {
    const auto spec = spec_of(TrajectoryPattern::Mixed);
    const auto fast = generate_trajectory(spec, kImuRate);
    const auto slow = generate_trajectory(spec, kDvlRate);
    EXPECT_EQ(fast.size(), 60001u);
    ASSERT_EQ(slow.size(), 601u);
    const auto dec = decimate(fast, kDvlRate);
    ASSERT_EQ(dec.size(), slow.size());
    for (std::size_t i = 0; i < slow.size(); ++i) {
        EXPECT_EQ(slow[i].time, static_cast<double>(i));
        EXPECT_EQ(slow[i].velocity_n, dec[i].velocity_n);
    }
    EXPECT_THROW(generate_trajectory(spec, 10.0), ArgumentError);
}

TEST(Trajectory, ConstantSpeedTurn) {
    auto spec = spec_of(TrajectoryPattern::Turn, 120.0);
    spec.turn_rate = 2.0 * kDegToRad;
    const auto truth = generate_trajectory(spec, kImuRate);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        EXPECT_NEAR(truth[i].velocity_n.norm(), spec.cruise_speed, 1e-9);
    }
    const double heading0 = std::atan2(truth[1000].velocity_n.y(), truth[1000].velocity_n.x());
    const double heading1 = std::atan2(truth[2000].velocity_n.y(), truth[2000].velocity_n.x());
    EXPECT_NEAR(heading1 - heading0, spec.turn_rate * 10.0, 1e-9);
}

TEST(Trajectory, KinematicConsistency) {
    for (auto p : {TrajectoryPattern::Lawnmower, TrajectoryPattern::Mixed}) {
        const auto truth = generate_trajectory(spec_of(p, 300.0), kImuRate);
        for (std::size_t i = 0; i + 1 < truth.size(); ++i) {
            EXPECT_NEAR(truth[i].attitude.norm(), 1.0, 1e-9);
            const Vec3 mean_v = 0.5 * (truth[i].velocity_n + truth[i + 1].velocity_n);
            const Vec3 dp = (truth[i + 1].position - truth[i].position) / 0.01;
            ASSERT_LT((dp - mean_v).norm(), 1e-9) << "sample " << i;
        }
    }
}

TEST(Trajectory, SeedDeterminism) {
    auto spec = spec_of(TrajectoryPattern::Mixed, 200.0);
    spec.seed = 99;
    const auto a = generate_trajectory(spec, kImuRate);
    const auto b = generate_trajectory(spec, kImuRate);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].position, b[i].position);
        ASSERT_EQ(a[i].attitude.coeffs(), b[i].attitude.coeffs());
        ASSERT_EQ(a[i].specific_force_b, b[i].specific_force_b);
    }
    spec.seed = 100;
    const auto c = generate_trajectory(spec, kImuRate);
    EXPECT_NE(a.back().position, c.back().position);
}

TEST(Trajectory, InvalidSpec) {
    EXPECT_THROW(parse_pattern("zigzag"), ConfigError);
    EXPECT_EQ(parse_pattern("lawnmower"), TrajectoryPattern::Lawnmower);
    auto spec = spec_of(TrajectoryPattern::Straight);
    spec.duration = 0.0;
    EXPECT_THROW(generate_trajectory(spec, kImuRate), Error);
    spec = spec_of(TrajectoryPattern::Straight);
    spec.cruise_speed = -1.0;
    EXPECT_THROW(generate_trajectory(spec, kImuRate), Error);
}

TEST(ImuSynthesis, ZeroErrorsReproduceTruth) {
    const auto truth = generate_trajectory(spec_of(TrajectoryPattern::Mixed, 60.0), kImuRate);
    const auto imu = synthesize_imu(truth, ImuErrorSpec{}, 5);
    ASSERT_EQ(imu.size(), truth.size());
    for (std::size_t i = 0; i < imu.size(); ++i) {
        EXPECT_EQ(imu[i].accel, truth[i].specific_force_b);
        EXPECT_EQ(imu[i].gyro, truth[i].angular_rate_b);
        EXPECT_EQ(imu[i].time, truth[i].time);
    }
}

TEST(ImuSynthesis, BiasRecoveredFromSampleMean) {
    auto spec = spec_of(TrajectoryPattern::Straight, 1000.0);
    const auto truth = generate_trajectory(spec, kImuRate);
    ImuErrorSpec e;
    e.accel_bias = Vec3(1e-3, -2e-3, 5e-4);
    e.gyro_bias = Vec3(1e-5, 2e-5, -3e-5);
    e.accel_noise_std = 0.01;
    e.gyro_noise_std = 1e-4;
    const auto imu = synthesize_imu(truth, e, 17);
    const double n = static_cast<double>(imu.size());
    ASSERT_GE(imu.size(), 100000u);
    Vec3 ma = Vec3::Zero();
    Vec3 mg = Vec3::Zero();
    for (std::size_t i = 0; i < imu.size(); ++i) {
        ma += imu[i].accel - truth[i].specific_force_b;
        mg += imu[i].gyro - truth[i].angular_rate_b;
    }
    ma /= n;
    mg /= n;
    for (int k = 0; k < 3; ++k) {
        EXPECT_LT(std::abs(ma[k] - e.accel_bias[k]), 4.0 * e.accel_noise_std / std::sqrt(n));
        EXPECT_LT(std::abs(mg[k] - e.gyro_bias[k]), 4.0 * e.gyro_noise_std / std::sqrt(n));
    }
}

TEST(ImuSynthesis, SeedsChangeOnlyTheNoise) {
    const auto truth = generate_trajectory(spec_of(TrajectoryPattern::Straight, 10.0), kImuRate);
    ImuErrorSpec e;
    e.accel_noise_std = 0.01;
    const auto a = synthesize_imu(truth, e, 1);
    const auto b = synthesize_imu(truth, e, 2);
    const auto a2 = synthesize_imu(truth, e, 1);
    EXPECT_NE(a[10].accel, b[10].accel);
    EXPECT_EQ(a[10].accel, a2[10].accel);
    EXPECT_EQ(a[10].gyro, b[10].gyro);
}

TEST(BeamSynthesis, ForwardMotionGivesFirstColumn) {
    GroundTruthSample s;
    s.velocity_n = Vec3(1.0, 0.0, 0.0);
    const auto beams = synthesize_beams({s}, BeamGeometry(), DvlErrorSpec{}, 3);
    ASSERT_EQ(beams.size(), 1u);
    const Vec4 expected(0.241845, -0.241845, -0.241845, 0.241845);
    EXPECT_LT((beams[0].beams - expected).cwiseAbs().maxCoeff(), 1e-6);
    const TransformMatrix t = build_transform(BeamGeometry());
    EXPECT_LT((beams[0].beams - t.col(0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BeamSynthesis, BiasOnlyAtRest) {
    GroundTruthSample s;
    DvlErrorSpec e;
    e.beam_bias = Vec4::Constant(0.011);
    const auto beams = synthesize_beams({s}, BeamGeometry(), e, 3);
    EXPECT_LT((beams[0].beams - Vec4::Constant(0.011)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BeamSynthesis, ScaleFactorActsInVelocitySpace) {
    GroundTruthSample s;
    s.velocity_n = Vec3(2.0, 0.5, 0.1);
    DvlErrorSpec e;
    e.scale_factor = Vec3(0.01, -0.02, 0.0);
    const auto beams = synthesize_beams({s}, BeamGeometry(), e, 3);
    const TransformMatrix t = build_transform(BeamGeometry());
    const Vec3 scaled(2.0 * 1.01, 0.5 * 0.98, 0.1);
    EXPECT_LT((beams[0].beams - t * scaled).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BeamSynthesis, ZeroErrorRoundTripThroughLs) {
    const auto truth = generate_trajectory(spec_of(TrajectoryPattern::Mixed), kDvlRate);
    const BeamGeometry g;
    const auto beams = synthesize_beams(truth, g, DvlErrorSpec{}, 1);
    const TransformMatrix t = build_transform(g);
    for (std::size_t i = 0; i < beams.size(); ++i) {
        const Vec3 v_dvl = truth[i].attitude.conjugate() * truth[i].velocity_n;
        EXPECT_LT((beams[i].truth_velocity_dvl - v_dvl).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((solve_ls(t, beams[i].beams).velocity_dvl - v_dvl).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ErrorSpecs, Validation) {
    ImuErrorSpec imu;
    imu.gyro_noise_std = -1.0;
    EXPECT_THROW(imu.validate(), Error);
    DvlErrorSpec dvl;
    dvl.noise_std = -0.1;
    EXPECT_THROW(dvl.validate(), Error);
}
