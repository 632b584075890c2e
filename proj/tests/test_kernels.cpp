#include <gtest/gtest.h>

#include <random>

#include "dvlnav/kernels.hpp"
#include "oracles.hpp"

using namespace dvlnav;

namespace {
Hyperparams unit_hp() { return Hyperparams::uniform(1.0, InputVec::Ones(), 0.1); }

const KernelKind kAllKinds[] = {KernelKind::SquaredExponential, KernelKind::Matern32, KernelKind::RationalQuadratic};
}  // namespace

TEST(Hyperparams, LayoutAndAccessors) {
    Hyperparams hp = unit_hp();
    hp.set_signal_variance(KernelKind::Matern32, 2.5);
    hp.set_length_scale(KernelKind::RationalQuadratic, 3, 0.7);
    hp.set_noise_std(0.02);
    EXPECT_EQ(kHyperparamCount, 16);
    EXPECT_NEAR(std::exp(hp.log_values[5]), 2.5, 1e-14);
    EXPECT_NEAR(std::exp(hp.log_values[14]), 0.7, 1e-14);
    EXPECT_NEAR(std::exp(hp.log_values[15]), 0.02, 1e-15);
    EXPECT_NEAR(hp.noise_variance(), 0.0004, 1e-16);
    EXPECT_NEAR(hp.total_signal_variance(), 4.5, 1e-13);
}

TEST(Kernels, ZeroDistanceGivesSignalVariance) {
    Hyperparams hp = unit_hp();
    hp.set_signal_variance(KernelKind::SquaredExponential, 0.3);
    hp.set_signal_variance(KernelKind::Matern32, 1.7);
    hp.set_signal_variance(KernelKind::RationalQuadratic, 0.05);
    const InputVec x(0.1, -0.2, 0.3, 0.4);
    for (auto k : kAllKinds) EXPECT_NEAR(kernel_eval(k, x, x, hp), hp.signal_variance(k), 1e-15);
    EXPECT_NEAR(kernel_sum(x, x, unit_hp()), 3.0, 1e-15);
}

TEST(Kernels, ReferenceValues) {
    const Hyperparams hp = unit_hp();
    const InputVec x = InputVec::Zero();
    const InputVec z(1.0, 0.0, 0.0, 0.0);
    EXPECT_NEAR(kernel_eval(KernelKind::SquaredExponential, x, z, hp), 0.606531, 1e-6);
    EXPECT_NEAR(kernel_eval(KernelKind::SquaredExponential, x, z, hp), std::exp(-0.5), 1e-15);
    EXPECT_NEAR(kernel_eval(KernelKind::Matern32, x, z, hp), 0.483358, 1e-6);
    EXPECT_NEAR(kernel_eval(KernelKind::RationalQuadratic, x, z, hp), 1.0 / 1.5, 1e-15);
}

TEST(Kernels, ArdLengthScalesWeightDimensions) {
    Hyperparams hp = unit_hp();
    hp.set_length_scale(KernelKind::SquaredExponential, 2, 2.0);
    const InputVec x = InputVec::Zero();
    const InputVec z(0.0, 0.0, 2.0, 0.0);
    EXPECT_NEAR(kernel_eval(KernelKind::SquaredExponential, x, z, hp), std::exp(-0.5), 1e-15);
}

TEST(Kernels, MatchOracleAndSymmetry) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        Hyperparams hp;
        hp.log_values = oracle::random_hyperparams(rng);
        const InputVec x = oracle::random_matrix(rng, 4, 1);
        const InputVec z = oracle::random_matrix(rng, 4, 1);
        for (int k = 0; k < 3; ++k) {
            const double ref = oracle::kernel(k, x.data(), z.data(), hp.log_values);
            EXPECT_NEAR(kernel_eval(static_cast<KernelKind>(k), x, z, hp), ref, 1e-14 * (1.0 + ref));
        }
        EXPECT_EQ(kernel_sum(x, z, hp), kernel_sum(z, x, hp));
        const KernelSum ks(hp);
        EXPECT_NEAR(ks(x.data(), z.data()), kernel_sum(x, z, hp), 1e-14);
    }
}

TEST(Kernels, RadialDecay) {
    const Hyperparams hp = unit_hp();
    const InputVec x = InputVec::Zero();
    for (auto k : kAllKinds) {
        const double at1 = kernel_eval(k, x, InputVec(1.0, 0, 0, 0), hp);
        const double at2 = kernel_eval(k, x, InputVec(2.0, 0, 0, 0), hp);
        EXPECT_LT(at2, at1);
    }
    EXPECT_LT(kernel_sum(x, InputVec(0, 2.0, 0, 0), hp), kernel_sum(x, InputVec(0, 1.0, 0, 0), hp));
}

TEST(Kernels, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        Hyperparams hp;
        hp.log_values = oracle::random_hyperparams(rng);
        const InputVec x = oracle::random_matrix(rng, 4, 1, 0.7);
        const InputVec z = oracle::random_matrix(rng, 4, 1, 0.7);
        double grad[15];
        const double v = KernelSum(hp).value_and_gradient(x.data(), z.data(), grad);
        EXPECT_NEAR(v, kernel_sum(x, z, hp), 1e-14);
        for (int p = 0; p < 15; ++p) {
            const double h = 1e-6;
            Hyperparams a = hp;
            Hyperparams b = hp;
            a.log_values[p] += h;
            b.log_values[p] -= h;
            const double fd = (oracle::kernel_sum(x.data(), z.data(), a.log_values) -
                               oracle::kernel_sum(x.data(), z.data(), b.log_values)) /
                              (2 * h);
            EXPECT_NEAR(grad[p], fd, 1e-7 * (1.0 + std::abs(fd))) << "parameter " << p;
        }
    }
}

TEST(GramMatrix, SingleRowAndOracle) {
    Hyperparams hp = unit_hp();
    hp.set_signal_variance(KernelKind::Matern32, 0.4);
    MatrixXd one(1, 4);
    one << 0.3, 0.1, -0.2, 0.5;
    const MatrixXd g1 = gram_matrix(one, hp);
    ASSERT_EQ(g1.rows(), 1);
    EXPECT_NEAR(g1(0, 0), 2.4, 1e-14);

    std::mt19937_64 rng(3);
    hp.log_values = oracle::random_hyperparams(rng);
    const MatrixXd x = oracle::random_matrix(rng, 30, 4);
    const MatrixXd g = gram_matrix(x, hp);
    EXPECT_LT((g - oracle::gram(x, hp.log_values)).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_EQ((g - g.transpose()).cwiseAbs().maxCoeff(), 0.0);
    for (int k = 0; k < 3; ++k) {
        const MatrixXd gk = gram_matrix(static_cast<KernelKind>(k), x, hp);
        EXPECT_LT((gk - oracle::gram(x, hp.log_values, k)).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(GramMatrix, PositiveSemidefinite) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        Hyperparams hp;
        hp.log_values = oracle::random_hyperparams(rng);
        const MatrixXd x = oracle::random_matrix(rng, 50, 4);
        MatrixXd g = gram_matrix(x, hp);
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<MatrixXd>(g).eigenvalues().minCoeff(), -1e-8);
        g.diagonal().array() += 1e-6;
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<MatrixXd>(g).eigenvalues().minCoeff(), 0.0);
    }
}

TEST(GramMatrix, DuplicatedRowsAreSingular) {
    MatrixXd x(3, 4);
    x << 0.1, 0.2, 0.3, 0.4, 0.1, 0.2, 0.3, 0.4, -0.5, 0.0, 0.2, 0.1;
    const MatrixXd g = gram_matrix(x, unit_hp());
    EXPECT_NEAR(Eigen::SelfAdjointEigenSolver<MatrixXd>(g).eigenvalues().minCoeff(), 0.0, 1e-12);
}
