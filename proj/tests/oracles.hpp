// Independent reference computations for the test suites. Nothing in here
// calls into the library's kernel or GP code.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "dvlnav/kernels.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Kernel formulas written out term by term.
inline double kernel(int kind, const double* x, const double* z, const dvlnav::HyperVector& logp) {
    const int base = kind * 5;
    const double sig2 = std::exp(logp[base]);
    double d2 = 0.0;
    for (int m = 0; m < 4; ++m) {
        const double l = std::exp(logp[base + 1 + m]);
        d2 += (x[m] - z[m]) * (x[m] - z[m]) / (l * l);
    }
    if (kind == 0) return sig2 * std::exp(-0.5 * d2);
    if (kind == 1) {
        const double r = std::sqrt(d2);
        return sig2 * (1.0 + std::sqrt(3.0) * r) * std::exp(-std::sqrt(3.0) * r);
    }
    return sig2 / (1.0 + 0.5 * d2);
}

inline double kernel_sum(const double* x, const double* z, const dvlnav::HyperVector& logp) {
    return kernel(0, x, z, logp) + kernel(1, x, z, logp) + kernel(2, x, z, logp);
}

inline MatrixXd gram(const MatrixXd& X, const dvlnav::HyperVector& logp, int kind = -1) {
    const Eigen::Index n = X.rows();
    MatrixXd c(n, n);
    const Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor> xr = X;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double* a = xr.row(i).data();
            const double* b = xr.row(j).data();
            c(i, j) = kind < 0 ? kernel_sum(a, b, logp) : kernel(kind, a, b, logp);
        }
    }
    return c;
}

inline VectorXd cross(const MatrixXd& X, const Eigen::Vector4d& xs, const dvlnav::HyperVector& logp) {
    const Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor> xr = X;
    VectorXd c(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) c[i] = kernel_sum(xr.row(i).data(), xs.data(), logp);
    return c;
}

struct DensePrediction {
    Eigen::Vector3d mean;
    double variance;
};

// Explicit inverse of the regularized Gram matrix.
inline DensePrediction dense_predict(const MatrixXd& X, const MatrixXd& Y, const dvlnav::HyperVector& logp,
                                     double jitter, const Eigen::Vector4d& xs) {
    const double noise = std::exp(2.0 * logp[15]);
    MatrixXd k = gram(X, logp);
    k.diagonal().array() += noise + jitter;
    const MatrixXd kinv = k.inverse();
    const VectorXd c = cross(X, xs, logp);
    DensePrediction p;
    p.mean = (c.transpose() * kinv * Y).transpose();
    p.variance = kernel_sum(xs.data(), xs.data(), logp) - c.dot(kinv * c);
    return p;
}

// Materialized 3n x 3n system with B = I, targets stacked output by output.
inline DensePrediction kronecker_predict(const MatrixXd& X, const MatrixXd& Y, const dvlnav::HyperVector& logp,
                                         double jitter, const Eigen::Vector4d& xs) {
    const Eigen::Index n = X.rows();
    const double noise = std::exp(2.0 * logp[15]);
    const MatrixXd c = gram(X, logp);
    MatrixXd big = MatrixXd::Zero(3 * n, 3 * n);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            const double bab = a == b ? 1.0 : 0.0;
            big.block(a * n, b * n, n, n) = bab * c;
        }
    }
    big.diagonal().array() += noise + jitter;
    VectorXd y(3 * n);
    for (int a = 0; a < 3; ++a) y.segment(a * n, n) = Y.col(a);
    const VectorXd cs = cross(X, xs, logp);
    MatrixXd cbig = MatrixXd::Zero(3 * n, 3);
    for (int a = 0; a < 3; ++a) cbig.block(a * n, a, n, 1) = cs;
    const Eigen::PartialPivLU<MatrixXd> lu(big);
    const VectorXd sol = lu.solve(y);
    const MatrixXd w = lu.solve(cbig);
    DensePrediction p;
    p.mean = cbig.transpose() * sol;
    const Eigen::Matrix3d cov = kernel_sum(xs.data(), xs.data(), logp) * Eigen::Matrix3d::Identity() - cbig.transpose() * w;
    p.variance = cov(0, 0);
    return p;
}

// Explicit inverse and eigenvalue log-determinant.
inline double dense_nll(const MatrixXd& X, const MatrixXd& Y, const dvlnav::HyperVector& logp, double jitter) {
    const Eigen::Index n = X.rows();
    MatrixXd k = gram(X, logp);
    k.diagonal().array() += std::exp(2.0 * logp[15]) + jitter;
    const MatrixXd kinv = k.inverse();
    const Eigen::SelfAdjointEigenSolver<MatrixXd> es(k);
    const double logdet = es.eigenvalues().array().log().sum();
    double fit = 0.0;
    for (int o = 0; o < 3; ++o) fit += Y.col(o).dot(kinv * Y.col(o));
    return 0.5 * fit + 1.5 * logdet + 1.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

inline dvlnav::HyperVector random_hyperparams(std::mt19937_64& rng, double noise_lo = 0.05, double noise_hi = 0.3) {
    std::uniform_real_distribution<double> sig(-1.0, 0.5);
    std::uniform_real_distribution<double> len(-0.7, 0.7);
    std::uniform_real_distribution<double> noise(std::log(noise_lo), std::log(noise_hi));
    dvlnav::HyperVector h;
    for (int k = 0; k < 3; ++k) {
        h[5 * k] = sig(rng);
        for (int m = 1; m < 5; ++m) h[5 * k + m] = len(rng);
    }
    h[15] = noise(rng);
    return h;
}

inline MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = nd(rng);
    }
    return m;
}

}  // namespace oracle
