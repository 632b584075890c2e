#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dvlnav/kernels.hpp"

namespace dvlnav {

/// Beam inputs (n x 4) paired with DVL-frame velocity targets (n x 3).
struct Dataset {
    MatrixXd inputs;
    MatrixXd targets;

    Eigen::Index size() const { return inputs.rows(); }
    /// Training needs n >= 2; fit/predict/nll also accept a single row.
    void validate(Eigen::Index min_rows = 2) const;
};

struct Prediction {
    Vec3 mean = Vec3::Zero();
    Mat3 covariance = Mat3::Zero();
    double latent_variance = 0.0;  // clamped variance of f*, before the noise floor
};

/// Jitter is expressed relative to the mean diagonal of the Gram matrix.
struct JitterSchedule {
    double initial = 1e-8;
    double maximum = 1e-4;
    double factor = 10.0;
};

/// Three-output GP with identity coregionalization and shared hyperparameters.
///
/// Under B = I the 3n x 3n covariance I3 (x) C is block diagonal, so one n x n
/// Cholesky factor serves all three outputs.
class GpModel {
public:
    GpModel(Dataset dataset, const Hyperparams& hp, double jitter);

    const Dataset& dataset() const { return dataset_; }
    const Hyperparams& hyperparams() const { return hp_; }
    double jitter() const { return jitter_; }
    const MatrixXd& chol() const { return chol_; }
    const MatrixXd& alpha() const { return alpha_; }

    /// Returns false when the factorization failed.
    bool ok() const { return ok_; }

    /// Mean per output and covariance (clamped latent variance + noise variance) * I3.
    Prediction predict(const InputVec& x) const;

    /// C + noise^2 I + jitter I.
    MatrixXd regularized_gram() const;

private:
    Dataset dataset_;
    Hyperparams hp_;
    double jitter_ = 0.0;
    bool ok_ = false;
    KernelSum kernel_;
    Eigen::Matrix<double, Eigen::Dynamic, kInputDim, Eigen::RowMajor> x_rows_;
    MatrixXd chol_;
    MatrixXd alpha_;
};

/// Factorizes with the escalating jitter schedule.
GpModel fit(const Dataset& dataset, const Hyperparams& hp, const JitterSchedule& schedule = {});

/// Negative log marginal likelihood summed over the three outputs.
double nll(const Dataset& dataset, const Hyperparams& hp);

/// Gradient of nll with respect to Hyperparams::log_values (jitter held fixed).
HyperVector nll_grad(const Dataset& dataset, const Hyperparams& hp);

struct NllResult {
    double value = 0.0;
    HyperVector gradient = HyperVector::Zero();
    double jitter = 0.0;
};

NllResult nll_with_gradient(const Dataset& dataset, const Hyperparams& hp, const JitterSchedule& schedule = {});

struct OptimizerConfig {
    int iterations = 50;
    double learning_rate = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainResult {
    GpModel model;
    std::vector<double> nll_trace;  // NLL at each iterate where a gradient step was taken
    double final_nll = 0.0;
};

/// Adam on the log-space hyperparameters.
TrainResult train(const Dataset& dataset, const Hyperparams& init, const OptimizerConfig& opt = {});

/// Length scales from per-input std, signal variances from the mean target variance / 3.
Hyperparams initial_hyperparams(const Dataset& dataset, double noise_std = 0.02);

/// Uniform sample without replacement (row order preserved); identity when n <= max_points.
Dataset subsample(const Dataset& dataset, Eigen::Index max_points, std::uint64_t seed);

constexpr int kModelFormatVersion = 1;

void save_model(const GpModel& model, const std::filesystem::path& path);
GpModel load_model(const std::filesystem::path& path);

}  // namespace dvlnav
