#pragma once

#include <array>
#include <string>

#include "dvlnav/types.hpp"

namespace dvlnav {

enum class KernelKind { SquaredExponential = 0, Matern32 = 1, RationalQuadratic = 2 };

constexpr int kInputDim = 4;
constexpr int kOutputDim = 3;
constexpr int kKernelCount = 3;
constexpr int kParamsPerKernel = 1 + kInputDim;
constexpr int kHyperparamCount = kKernelCount * kParamsPerKernel + 1;

using HyperVector = Eigen::Matrix<double, kHyperparamCount, 1>;
using InputVec = Eigen::Matrix<double, kInputDim, 1>;

std::string kernel_name(KernelKind kind);

/// Log-space hyperparameters of the SE + Matern-3/2 + RQ kernel sum.
///
/// Layout of `log_values`: kernel k occupies [5k, 5k+5) as
/// (log signal variance, log length scale 1..4); the final entry is the log of
/// the observation noise standard deviation.
struct Hyperparams {
    HyperVector log_values = HyperVector::Zero();

    static constexpr int signal_index(KernelKind kind) { return static_cast<int>(kind) * kParamsPerKernel; }
    static constexpr int length_index(KernelKind kind, int dim) { return signal_index(kind) + 1 + dim; }
    static constexpr int noise_index() { return kHyperparamCount - 1; }

    double signal_variance(KernelKind kind) const { return std::exp(log_values[signal_index(kind)]); }
    double length_scale(KernelKind kind, int dim) const { return std::exp(log_values[length_index(kind, dim)]); }
    double noise_std() const { return std::exp(log_values[noise_index()]); }
    double noise_variance() const { return std::exp(2.0 * log_values[noise_index()]); }

    void set_signal_variance(KernelKind kind, double value);
    void set_length_scale(KernelKind kind, int dim, double value);
    void set_noise_std(double value);

    /// Sum of the three signal variances, i.e. the kernel sum at zero distance.
    double total_signal_variance() const;

    /// All kernels sharing one signal variance and one length-scale vector.
    static Hyperparams uniform(double signal_variance, const InputVec& length_scales, double noise_std);
};

/// Single ARD kernel value.
double kernel_eval(KernelKind kind, const InputVec& x, const InputVec& z, const Hyperparams& hp);

/// SE + Matern-3/2 + RQ, each with its own signal variance and length scales.
double kernel_sum(const InputVec& x, const InputVec& z, const Hyperparams& hp);

/// Precomputed inverse squared length scales; the hot loops use this form.
class KernelSum {
public:
    explicit KernelSum(const Hyperparams& hp);

    double operator()(const double* x, const double* z) const;

    /// Kernel value and its derivatives with respect to the 15 kernel
    /// log-parameters (noise excluded), written to `grad`.
    double value_and_gradient(const double* x, const double* z, double* grad) const;

private:
    std::array<double, kKernelCount> signal_{};
    std::array<std::array<double, kInputDim>, kKernelCount> inv_len_sq_{};
};

/// Gram matrix of the kernel sum over the rows of `inputs` (n x 4). No noise or jitter.
MatrixXd gram_matrix(const MatrixXd& inputs, const Hyperparams& hp);

/// Gram matrix of a single kernel kind.
MatrixXd gram_matrix(KernelKind kind, const MatrixXd& inputs, const Hyperparams& hp);

}  // namespace dvlnav
