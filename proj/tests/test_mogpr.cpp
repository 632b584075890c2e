#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "dvlnav/mogpr.hpp"
#include "oracles.hpp"

using namespace dvlnav;

namespace {

Dataset random_dataset(std::mt19937_64& rng, Eigen::Index n) {
    Dataset d;
    d.inputs = oracle::random_matrix(rng, n, 4);
    d.targets.resize(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto x = d.inputs.row(i);
        d.targets(i, 0) = std::sin(x(0)) + 0.3 * x(1);
        d.targets(i, 1) = 0.5 * x(2) * x(3);
        d.targets(i, 2) = std::cos(x(1) - x(3));
    }
    d.targets += oracle::random_matrix(rng, n, 3, 0.05);
    return d;
}

Hyperparams random_hp(std::mt19937_64& rng) {
    Hyperparams hp;
    hp.log_values = oracle::random_hyperparams(rng);
    return hp;
}

}  // namespace

TEST(Dataset, Validation) {
    Dataset d;
    d.inputs = MatrixXd::Zero(3, 4);
    d.targets = MatrixXd::Zero(3, 3);
    EXPECT_NO_THROW(d.validate());
    d.inputs(1, 2) = std::nan("");
    EXPECT_THROW(d.validate(), Error);
    d.inputs = MatrixXd::Zero(3, 5);
    EXPECT_THROW(d.validate(), Error);
    Dataset one;
    one.inputs = MatrixXd::Zero(1, 4);
    one.targets = MatrixXd::Zero(1, 3);
    EXPECT_THROW(one.validate(), Error);
    EXPECT_NO_THROW(one.validate(1));
}

TEST(GpFit, SingleRowScalarSolve) {
    Dataset d;
    d.inputs = MatrixXd::Zero(1, 4);
    d.targets = MatrixXd(1, 3);
    d.targets << 0.9, -0.3, 0.05;
    Hyperparams hp = Hyperparams::uniform(0.5, InputVec::Ones(), 1e-8);
    const GpModel m = fit(d, hp);
    ASSERT_TRUE(m.ok());
    for (int o = 0; o < 3; ++o) EXPECT_NEAR(m.alpha()(0, o), d.targets(0, o) / 1.5, 1e-7);
}

TEST(GpFit, CholeskyReconstructsRegularizedGram) {
    std::mt19937_64 rng(4);
    const Dataset d = random_dataset(rng, 300);
    const GpModel m = fit(d, random_hp(rng));
    const MatrixXd k = m.regularized_gram();
    MatrixXd expected = oracle::gram(d.inputs, m.hyperparams().log_values);
    expected.diagonal().array() += m.hyperparams().noise_variance() + m.jitter();
    EXPECT_LT((k - expected).norm() / expected.norm(), 1e-13);
    const MatrixXd l = m.chol();
    EXPECT_LT((l * l.transpose() - k).norm() / k.norm(), 1e-10);
    EXPECT_LT((k * m.alpha() - d.targets).norm() / d.targets.norm(), 1e-9);
}

TEST(GpFit, DuplicatedRowsNeedRegularization) {
    std::mt19937_64 rng(9);
    Dataset d = random_dataset(rng, 10);
    d.inputs.row(3) = d.inputs.row(7);
    const Hyperparams hp = Hyperparams::uniform(1.0, InputVec::Ones(), 1e-6);
    const GpModel m = fit(d, hp);
    EXPECT_TRUE(m.ok());
    EXPECT_GT(m.jitter(), 0.0);
}

TEST(GpPredict, MatchesDenseInverse) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 5; ++trial) {
        const Dataset d = random_dataset(rng, 80);
        const GpModel m = fit(d, random_hp(rng));
        for (int j = 0; j < 20; ++j) {
            const InputVec xs = oracle::random_matrix(rng, 4, 1);
            const Prediction p = m.predict(xs);
            const auto ref = oracle::dense_predict(d.inputs, d.targets, m.hyperparams().log_values, m.jitter(), xs);
            EXPECT_LT((p.mean - ref.mean).norm(), 1e-8 * std::max(1.0, ref.mean.norm()));
            EXPECT_NEAR(p.latent_variance, std::max(ref.variance, 0.0), 1e-8 * std::max(1e-3, ref.variance));
            const double total = std::max(ref.variance, 0.0) + m.hyperparams().noise_variance();
            EXPECT_NEAR(p.covariance(0, 0), total, 1e-8 * total);
            EXPECT_EQ(p.covariance(0, 1), 0.0);
            EXPECT_EQ(p.covariance(1, 1), p.covariance(2, 2));
        }
    }
}

TEST(GpPredict, InterpolatesAtNegligibleNoise) {
    std::mt19937_64 rng(13);
    const Dataset d = random_dataset(rng, 25);
    Hyperparams hp = Hyperparams::uniform(1.0, InputVec::Constant(0.8), 1e-8);
    const GpModel m = fit(d, hp);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        const Prediction p = m.predict(d.inputs.row(i).transpose());
        EXPECT_LT((p.mean - d.targets.row(i).transpose()).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(GpPredict, RevertsToPriorFarAway) {
    std::mt19937_64 rng(14);
    const Dataset d = random_dataset(rng, 30);
    const Hyperparams hp = Hyperparams::uniform(0.7, InputVec::Constant(0.5), 0.1);
    const GpModel m = fit(d, hp);
    const Prediction p = m.predict(InputVec::Constant(1e8));
    EXPECT_LT(p.mean.norm(), 1e-10);
    EXPECT_NEAR(p.latent_variance, hp.total_signal_variance(), 1e-10);
    EXPECT_NEAR(p.covariance(2, 2), hp.total_signal_variance() + 0.01, 1e-10);
}

TEST(GpPredict, VarianceBoundedByPrior) {
    std::mt19937_64 rng(15);
    const Dataset d = random_dataset(rng, 60);
    const Hyperparams hp = random_hp(rng);
    const GpModel m = fit(d, hp);
    for (int j = 0; j < 200; ++j) {
        const InputVec xs = oracle::random_matrix(rng, 4, 1);
        const Prediction p = m.predict(xs);
        EXPECT_GE(p.latent_variance, 0.0);
        EXPECT_LE(p.latent_variance, kernel_sum(xs, xs, hp) + 1e-10);
    }
}

TEST(GpPredict, BlockDiagonalMatchesKronecker) {
    std::mt19937_64 rng(16);
    const Dataset d = random_dataset(rng, 40);
    const GpModel m = fit(d, random_hp(rng));
    for (int j = 0; j < 10; ++j) {
        const InputVec xs = oracle::random_matrix(rng, 4, 1);
        const auto ref = oracle::kronecker_predict(d.inputs, d.targets, m.hyperparams().log_values, m.jitter(), xs);
        const Prediction p = m.predict(xs);
        EXPECT_LT((p.mean - ref.mean).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_NEAR(p.latent_variance, std::max(ref.variance, 0.0), 1e-10);
    }
}

TEST(Nll, SingleZeroTarget) {
    Dataset d;
    d.inputs = MatrixXd::Zero(1, 4);
    d.targets = MatrixXd::Zero(1, 3);
    Hyperparams hp = Hyperparams::uniform(0.4, InputVec::Ones(), 0.1);
    const double expected = 1.5 * std::log(2.0 * M_PI * (1.2 + 0.01));
    EXPECT_NEAR(nll(d, hp), expected, 1e-7);
}

TEST(Nll, TargetScaling) {
    std::mt19937_64 rng(17);
    Dataset d = random_dataset(rng, 40);
    const Hyperparams hp = random_hp(rng);
    Dataset zero = d;
    zero.targets.setZero();
    Dataset twice = d;
    twice.targets *= 2.0;
    const double base = nll(zero, hp);
    EXPECT_NEAR(nll(twice, hp) - base, 4.0 * (nll(d, hp) - base), 1e-8 * std::abs(nll(twice, hp)));
}

TEST(Nll, MatchesDenseComputation) {
    std::mt19937_64 rng(18);
    for (int trial = 0; trial < 5; ++trial) {
        const Dataset d = random_dataset(rng, 100);
        const Hyperparams hp = random_hp(rng);
        const NllResult r = nll_with_gradient(d, hp);
        const double ref = oracle::dense_nll(d.inputs, d.targets, hp.log_values, r.jitter);
        EXPECT_NEAR(r.value, ref, 1e-8 * std::abs(ref));
        EXPECT_NEAR(nll(d, hp), r.value, 1e-10 * std::abs(ref));
    }
}

TEST(NllGrad, CentralDifferences) {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 5; ++trial) {
        const Dataset d = random_dataset(rng, 20);
        const Hyperparams hp = random_hp(rng);
        const HyperVector g = nll_grad(d, hp);
        const double h = 1e-5;
        HyperVector fd;
        for (int p = 0; p < kHyperparamCount; ++p) {
            Hyperparams a = hp;
            Hyperparams b = hp;
            a.log_values[p] += h;
            b.log_values[p] -= h;
            fd[p] = (oracle::dense_nll(d.inputs, d.targets, a.log_values, 0.0) -
                     oracle::dense_nll(d.inputs, d.targets, b.log_values, 0.0)) /
                    (2 * h);
        }
        const double floor = 1e-2 * fd.cwiseAbs().maxCoeff();
        for (int p = 0; p < kHyperparamCount; ++p) {
            EXPECT_LT(std::abs(g[p] - fd[p]) / std::max(std::abs(fd[p]), floor), 1e-4) << "parameter " << p;
        }
    }
}

TEST(NllGrad, NoiseGradientNegativeWhenUnderfit) {
    std::mt19937_64 rng(20);
    Dataset d = random_dataset(rng, 30);
    d.targets = oracle::random_matrix(rng, 30, 3, 10.0);
    const Hyperparams hp = Hyperparams::uniform(1e-4, InputVec::Ones(), 0.01);
    EXPECT_LT(nll_grad(d, hp)[Hyperparams::noise_index()], 0.0);
}

TEST(Train, DecreasesNllAndIsDeterministic) {
    std::mt19937_64 rng(22);
    const Dataset d = random_dataset(rng, 60);
    const Hyperparams init = initial_hyperparams(d);
    const TrainResult a = train(d, init);
    const TrainResult b = train(d, init);
    ASSERT_EQ(a.nll_trace.size(), 50u);
    for (double v : a.nll_trace) EXPECT_TRUE(std::isfinite(v));
    EXPECT_LE(a.final_nll, a.nll_trace.front());
    EXPECT_EQ(a.model.hyperparams().log_values, b.model.hyperparams().log_values);
    EXPECT_EQ(a.nll_trace, b.nll_trace);
    OptimizerConfig opt;
    opt.iterations = 7;
    EXPECT_EQ(train(d, init, opt).nll_trace.size(), 7u);
}

TEST(Train, ReachesStationaryPoint) {
    std::mt19937_64 rng(23);
    const Dataset d = random_dataset(rng, 20);
    Hyperparams hp = initial_hyperparams(d);
    for (double lr : {0.05, 0.01, 0.002, 0.0004}) {
        OptimizerConfig opt;
        opt.iterations = 1500;
        opt.learning_rate = lr;
        hp = train(d, hp, opt).model.hyperparams();
    }
    EXPECT_LE(nll_grad(d, hp).norm(), 1e-3);
}

TEST(Train, RejectsTooSmallDataset) {
    Dataset d;
    d.inputs = MatrixXd::Zero(1, 4);
    d.targets = MatrixXd::Zero(1, 3);
    EXPECT_THROW(train(d, Hyperparams::uniform(1.0, InputVec::Ones(), 0.1)), Error);
}

TEST(InitialHyperparams, FromDataStatistics) {
    std::mt19937_64 rng(24);
    const Dataset d = random_dataset(rng, 200);
    const Hyperparams hp = initial_hyperparams(d, 0.02);
    for (int m = 0; m < 4; ++m) {
        const VectorXd c = d.inputs.col(m);
        const double sd = std::sqrt((c.array() - c.mean()).square().sum() / (c.size() - 1));
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(hp.length_scale(static_cast<KernelKind>(k), m), sd, 1e-12);
    }
    EXPECT_NEAR(hp.noise_std(), 0.02, 1e-15);
}

TEST(Subsample, Contract) {
    std::mt19937_64 rng(25);
    const Dataset small = random_dataset(rng, 100);
    const Dataset same = subsample(small, 200, 1);
    EXPECT_EQ(same.inputs, small.inputs);
    const Dataset big = random_dataset(rng, 5000);
    const Dataset s1 = subsample(big, 2000, 7);
    const Dataset s2 = subsample(big, 2000, 7);
    const Dataset s3 = subsample(big, 2000, 8);
    ASSERT_EQ(s1.size(), 2000);
    EXPECT_EQ(s1.inputs, s2.inputs);
    EXPECT_NE(s1.inputs, s3.inputs);
    for (Eigen::Index i = 0; i < s1.size(); ++i) {
        bool found = false;
        for (Eigen::Index j = 0; j < big.size() && !found; ++j) {
            found = s1.inputs.row(i) == big.inputs.row(j) && s1.targets.row(i) == big.targets.row(j);
        }
        ASSERT_TRUE(found);
    }
    EXPECT_THROW(subsample(big, 1, 0), ArgumentError);
}

TEST(ModelFile, RoundTripIsExact) {
    std::mt19937_64 rng(26);
    const Dataset d = random_dataset(rng, 50);
    const GpModel m = fit(d, random_hp(rng));
    const auto path = std::filesystem::temp_directory_path() / "dvlnav_model_roundtrip.txt";
    save_model(m, path);
    const GpModel back = load_model(path);
    EXPECT_EQ(back.hyperparams().log_values, m.hyperparams().log_values);
    EXPECT_EQ(back.dataset().inputs, d.inputs);
    EXPECT_EQ(back.jitter(), m.jitter());
    const InputVec xs(0.1, 0.2, -0.3, 0.4);
    EXPECT_EQ(back.predict(xs).mean, m.predict(xs).mean);
    std::filesystem::remove(path);
    EXPECT_THROW(load_model(path), IoError);
}
