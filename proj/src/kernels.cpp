#include "dvlnav/kernels.hpp"

namespace dvlnav {
namespace {

const double kSqrt3 = std::sqrt(3.0);

double scaled_sq_distance(const double* x, const double* z, const std::array<double, kInputDim>& inv_len_sq) {
    double d2 = 0.0;
    for (int m = 0; m < kInputDim; ++m) {
        const double diff = x[m] - z[m];
        d2 += diff * diff * inv_len_sq[m];
    }
    return d2;
}

double kernel_of_distance(KernelKind kind, double signal, double d2) {
    switch (kind) {
        case KernelKind::SquaredExponential:
            return signal * std::exp(-0.5 * d2);
        case KernelKind::Matern32: {
            const double r = std::sqrt(d2);
            return signal * (1.0 + kSqrt3 * r) * std::exp(-kSqrt3 * r);
        }
        case KernelKind::RationalQuadratic:
            return signal / (1.0 + 0.5 * d2);
    }
    return 0.0;
}

std::array<double, kInputDim> inverse_sq_lengths(KernelKind kind, const Hyperparams& hp) {
    std::array<double, kInputDim> out{};
    for (int m = 0; m < kInputDim; ++m) {
        out[m] = std::exp(-2.0 * hp.log_values[Hyperparams::length_index(kind, m)]);
    }
    return out;
}

constexpr std::array<KernelKind, kKernelCount> kKinds{KernelKind::SquaredExponential, KernelKind::Matern32,
                                                       KernelKind::RationalQuadratic};

}  // namespace

std::string kernel_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::SquaredExponential: return "se";
        case KernelKind::Matern32: return "matern32";
        case KernelKind::RationalQuadratic: return "rq";
    }
    return "unknown";
}

void Hyperparams::set_signal_variance(KernelKind kind, double value) {
    log_values[signal_index(kind)] = std::log(value);
}

void Hyperparams::set_length_scale(KernelKind kind, int dim, double value) {
    log_values[length_index(kind, dim)] = std::log(value);
}

void Hyperparams::set_noise_std(double value) { log_values[noise_index()] = std::log(value); }

double Hyperparams::total_signal_variance() const {
    double total = 0.0;
    for (auto kind : kKinds) total += signal_variance(kind);
    return total;
}

Hyperparams Hyperparams::uniform(double signal_variance, const InputVec& length_scales, double noise_std) {
    Hyperparams hp;
    for (auto kind : kKinds) {
        hp.set_signal_variance(kind, signal_variance);
        for (int m = 0; m < kInputDim; ++m) hp.set_length_scale(kind, m, length_scales[m]);
    }
    hp.set_noise_std(noise_std);
    return hp;
}

double kernel_eval(KernelKind kind, const InputVec& x, const InputVec& z, const Hyperparams& hp) {
    const double d2 = scaled_sq_distance(x.data(), z.data(), inverse_sq_lengths(kind, hp));
    return kernel_of_distance(kind, hp.signal_variance(kind), d2);
}

double kernel_sum(const InputVec& x, const InputVec& z, const Hyperparams& hp) {
    return KernelSum(hp)(x.data(), z.data());
}

KernelSum::KernelSum(const Hyperparams& hp) {
    for (int k = 0; k < kKernelCount; ++k) {
        signal_[k] = hp.signal_variance(kKinds[k]);
        inv_len_sq_[k] = inverse_sq_lengths(kKinds[k], hp);
    }
}

double KernelSum::operator()(const double* x, const double* z) const {
    double total = 0.0;
    for (int k = 0; k < kKernelCount; ++k) {
        total += kernel_of_distance(kKinds[k], signal_[k], scaled_sq_distance(x, z, inv_len_sq_[k]));
    }
    return total;
}

double KernelSum::value_and_gradient(const double* x, const double* z, double* grad) const {
    std::array<double, kInputDim> diff_sq{};
    for (int m = 0; m < kInputDim; ++m) {
        const double d = x[m] - z[m];
        diff_sq[m] = d * d;
    }
    double total = 0.0;
    for (int k = 0; k < kKernelCount; ++k) {
        std::array<double, kInputDim> u{};  // (x_m - z_m)^2 / l_m^2
        double d2 = 0.0;
        for (int m = 0; m < kInputDim; ++m) {
            u[m] = diff_sq[m] * inv_len_sq_[k][m];
            d2 += u[m];
        }
        const double s = signal_[k];
        double value = 0.0;
        double length_factor = 0.0;  // d k / d log l_m = length_factor * u_m
        switch (kKinds[k]) {
            case KernelKind::SquaredExponential:
                value = s * std::exp(-0.5 * d2);
                length_factor = value;
                break;
            case KernelKind::Matern32: {
                const double r = std::sqrt(d2);
                const double e = std::exp(-kSqrt3 * r);
                value = s * (1.0 + kSqrt3 * r) * e;
                length_factor = 3.0 * s * e;
                break;
            }
            case KernelKind::RationalQuadratic: {
                const double base = 1.0 / (1.0 + 0.5 * d2);
                value = s * base;
                length_factor = s * base * base;
                break;
            }
        }
        double* g = grad + k * kParamsPerKernel;
        g[0] = value;
        for (int m = 0; m < kInputDim; ++m) g[1 + m] = length_factor * u[m];
        total += value;
    }
    return total;
}

MatrixXd gram_matrix(const MatrixXd& inputs, const Hyperparams& hp) {
    if (inputs.cols() != kInputDim) throw ArgumentError("gram_matrix expects 4 input columns");
    const Eigen::Index n = inputs.rows();
    const KernelSum k(hp);
    // Row-major copy keeps each input contiguous.
    const Eigen::Matrix<double, Eigen::Dynamic, kInputDim, Eigen::RowMajor> x = inputs;
    MatrixXd c(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            const double v = k(x.row(i).data(), x.row(j).data());
            c(i, j) = v;
            c(j, i) = v;
        }
    }
    return c;
}

MatrixXd gram_matrix(KernelKind kind, const MatrixXd& inputs, const Hyperparams& hp) {
    if (inputs.cols() != kInputDim) throw ArgumentError("gram_matrix expects 4 input columns");
    const Eigen::Index n = inputs.rows();
    MatrixXd c(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            const double v = kernel_eval(kind, inputs.row(i).transpose(), inputs.row(j).transpose(), hp);
            c(i, j) = v;
            c(j, i) = v;
        }
    }
    return c;
}

}  // namespace dvlnav
