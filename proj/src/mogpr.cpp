#include "dvlnav/mogpr.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace dvlnav {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

using RowInputs = Eigen::Matrix<double, Eigen::Dynamic, kInputDim, Eigen::RowMajor>;

double mean_diagonal(const MatrixXd& c) { return c.rows() > 0 ? c.trace() / static_cast<double>(c.rows()) : 0.0; }

struct Factorization {
    Eigen::LLT<MatrixXd> llt;
    double jitter = 0.0;
};

// Escalates jitter until the regularized Gram matrix factorizes.
Factorization factorize(const MatrixXd& gram, double noise_variance, const JitterSchedule& schedule) {
    const double scale = mean_diagonal(gram);
    const Eigen::Index n = gram.rows();
    double relative = schedule.initial;
    for (;;) {
        const double jitter = relative * scale;
        MatrixXd k = gram;
        k.diagonal().array() += noise_variance + jitter;
        Factorization f;
        f.llt.compute(k);
        f.jitter = jitter;
        if (f.llt.info() == Eigen::Success) {
            return f;
        }
        if (relative >= schedule.maximum * (1.0 - 1e-12)) {
            std::ostringstream msg;
            msg << "Cholesky factorization failed for n=" << n << " with jitter " << jitter;
            throw NumericalError(msg.str());
        }
        relative = std::min(relative * schedule.factor, schedule.maximum);
    }
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
    double v = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw IoError("malformed number '" + token + "' in model file");
    }
    return v;
}

}  // namespace

void Dataset::validate(Eigen::Index min_rows) const {
    if (inputs.cols() != kInputDim) throw ArgumentError("dataset inputs must have 4 columns");
    if (targets.cols() != kOutputDim) throw ArgumentError("dataset targets must have 3 columns");
    if (inputs.rows() != targets.rows()) throw ArgumentError("dataset inputs and targets differ in row count");
    if (inputs.rows() < min_rows) throw ArgumentError("dataset needs at least " + std::to_string(min_rows) + " rows");
    if (!inputs.allFinite() || !targets.allFinite()) throw ArgumentError("dataset contains non-finite entries");
}

GpModel::GpModel(Dataset dataset, const Hyperparams& hp, double jitter)
    : dataset_(std::move(dataset)), hp_(hp), jitter_(jitter), kernel_(hp), x_rows_(dataset_.inputs) {
    MatrixXd k = gram_matrix(dataset_.inputs, hp_);
    k.diagonal().array() += hp_.noise_variance() + jitter_;
    Eigen::LLT<MatrixXd> llt(k);
    ok_ = llt.info() == Eigen::Success;
    if (ok_) {
        chol_ = llt.matrixL();
        alpha_ = llt.solve(dataset_.targets);
    }
}

MatrixXd GpModel::regularized_gram() const {
    MatrixXd k = gram_matrix(dataset_.inputs, hp_);
    k.diagonal().array() += hp_.noise_variance() + jitter_;
    return k;
}

Prediction GpModel::predict(const InputVec& x) const {
    const Eigen::Index n = x_rows_.rows();
    VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        c[i] = kernel_(x_rows_.row(i).data(), x.data());
    }
    Prediction p;
    p.mean = alpha_.transpose() * c;
    const VectorXd v = chol_.triangularView<Eigen::Lower>().solve(c);
    const double prior = kernel_(x.data(), x.data());
    p.latent_variance = std::max(prior - v.squaredNorm(), 0.0);
    p.covariance = (p.latent_variance + hp_.noise_variance()) * Mat3::Identity();
    return p;
}

GpModel fit(const Dataset& dataset, const Hyperparams& hp, const JitterSchedule& schedule) {
    dataset.validate(1);
    const MatrixXd gram = gram_matrix(dataset.inputs, hp);
    const Factorization f = factorize(gram, hp.noise_variance(), schedule);
    GpModel model(dataset, hp, f.jitter);
    if (!model.ok()) {
        throw NumericalError("Cholesky factorization failed with jitter " + format_double(f.jitter));
    }
    return model;
}

double nll(const Dataset& dataset, const Hyperparams& hp) {
    dataset.validate(1);
    const Eigen::Index n = dataset.size();
    const Factorization f = factorize(gram_matrix(dataset.inputs, hp), hp.noise_variance(), JitterSchedule{});
    const MatrixXd alpha = f.llt.solve(dataset.targets);
    const double log_det = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
    const double fit_term = (dataset.targets.array() * alpha.array()).sum();
    return 0.5 * fit_term + 0.5 * kOutputDim * log_det + 0.5 * kOutputDim * static_cast<double>(n) * kLog2Pi;
}

NllResult nll_with_gradient(const Dataset& dataset, const Hyperparams& hp, const JitterSchedule& schedule) {
    dataset.validate(1);
    const Eigen::Index n = dataset.size();
    const Factorization f = factorize(gram_matrix(dataset.inputs, hp), hp.noise_variance(), schedule);
    const MatrixXd alpha = f.llt.solve(dataset.targets);
    const double log_det = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
    const double fit_term = (dataset.targets.array() * alpha.array()).sum();

    NllResult out;
    out.jitter = f.jitter;
    out.value = 0.5 * fit_term + 0.5 * kOutputDim * log_det + 0.5 * kOutputDim * static_cast<double>(n) * kLog2Pi;

    // d nll / d theta = 1/2 sum_ij W_ij dK_ij with W = 3 K^-1 - alpha alpha^T.
    MatrixXd w = f.llt.solve(MatrixXd::Identity(n, n));
    w *= static_cast<double>(kOutputDim);
    w.noalias() -= alpha * alpha.transpose();

    const KernelSum kernel(hp);
    const RowInputs x = dataset.inputs;
    std::array<double, kHyperparamCount - 1> dk{};
    HyperVector grad = HyperVector::Zero();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            kernel.value_and_gradient(x.row(i).data(), x.row(j).data(), dk.data());
            const double weight = (i == j ? 1.0 : 2.0) * w(i, j);
            for (int p = 0; p < kHyperparamCount - 1; ++p) grad[p] += weight * dk[p];
        }
    }
    grad[Hyperparams::noise_index()] = 2.0 * hp.noise_variance() * w.trace();
    out.gradient = 0.5 * grad;
    return out;
}

HyperVector nll_grad(const Dataset& dataset, const Hyperparams& hp) { return nll_with_gradient(dataset, hp).gradient; }

TrainResult train(const Dataset& dataset, const Hyperparams& init, const OptimizerConfig& opt) {
    dataset.validate();
    if (opt.iterations < 0) throw ArgumentError("iteration count must be non-negative");
    Hyperparams hp = init;
    HyperVector m = HyperVector::Zero();
    HyperVector v = HyperVector::Zero();
    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(opt.iterations));
    for (int it = 0; it < opt.iterations; ++it) {
        const NllResult r = nll_with_gradient(dataset, hp);
        if (!std::isfinite(r.value) || !r.gradient.allFinite()) {
            throw NumericalError("non-finite NLL at Adam iteration " + std::to_string(it));
        }
        trace.push_back(r.value);
        m = opt.beta1 * m + (1.0 - opt.beta1) * r.gradient;
        v = opt.beta2 * v + (1.0 - opt.beta2) * r.gradient.cwiseProduct(r.gradient);
        const double t = static_cast<double>(it + 1);
        const HyperVector m_hat = m / (1.0 - std::pow(opt.beta1, t));
        const HyperVector v_hat = v / (1.0 - std::pow(opt.beta2, t));
        hp.log_values -= opt.learning_rate * m_hat.cwiseQuotient((v_hat.array().sqrt() + opt.epsilon).matrix());
    }
    const double final_nll = nll(dataset, hp);
    if (!std::isfinite(final_nll)) {
        throw NumericalError("non-finite NLL at Adam iteration " + std::to_string(opt.iterations));
    }
    return TrainResult{fit(dataset, hp), std::move(trace), final_nll};
}

Hyperparams initial_hyperparams(const Dataset& dataset, double noise_std) {
    dataset.validate();
    const double n = static_cast<double>(dataset.size());
    InputVec lengths;
    for (int m = 0; m < kInputDim; ++m) {
        const VectorXd col = dataset.inputs.col(m);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().sum() / (n - 1.0));
        lengths[m] = sd > 0.0 ? sd : 1.0;
    }
    double var_sum = 0.0;
    for (int o = 0; o < kOutputDim; ++o) {
        const VectorXd col = dataset.targets.col(o);
        const double mean = col.mean();
        var_sum += (col.array() - mean).square().sum() / (n - 1.0);
    }
    double signal = var_sum / kOutputDim / kKernelCount;
    if (!(signal > 0.0)) signal = 1.0;
    return Hyperparams::uniform(signal, lengths, noise_std);
}

Dataset subsample(const Dataset& dataset, Eigen::Index max_points, std::uint64_t seed) {
    if (max_points < 2) throw ArgumentError("max_points must be at least 2");
    const Eigen::Index n = dataset.size();
    if (n <= max_points) return dataset;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates; explicit so the draw sequence does not depend on the standard library.
    for (Eigen::Index i = 0; i < max_points; ++i) {
        const auto span = static_cast<std::uint64_t>(n - i);
        const auto j = i + static_cast<Eigen::Index>(rng() % span);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(max_points));
    std::sort(idx.begin(), idx.end());
    Dataset out;
    out.inputs.resize(max_points, kInputDim);
    out.targets.resize(max_points, kOutputDim);
    for (Eigen::Index r = 0; r < max_points; ++r) {
        out.inputs.row(r) = dataset.inputs.row(idx[static_cast<std::size_t>(r)]);
        out.targets.row(r) = dataset.targets.row(idx[static_cast<std::size_t>(r)]);
    }
    return out;
}

void save_model(const GpModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file " + path.string());
    const Dataset& d = model.dataset();
    out << "dvlnav-mogpr " << kModelFormatVersion << '\n';
    out << "rows " << d.size() << '\n';
    out << "jitter " << format_double(model.jitter()) << '\n';
    out << "log_hyperparams";
    for (int i = 0; i < kHyperparamCount; ++i) out << ' ' << format_double(model.hyperparams().log_values[i]);
    out << '\n';
    for (Eigen::Index r = 0; r < d.size(); ++r) {
        for (int c = 0; c < kInputDim; ++c) out << (c ? " " : "") << format_double(d.inputs(r, c));
        for (int c = 0; c < kOutputDim; ++c) out << ' ' << format_double(d.targets(r, c));
        out << '\n';
    }
    if (!out) throw IoError("failed writing model file " + path.string());
}

GpModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file " + path.string());
    std::string tag;
    int version = 0;
    if (!(in >> tag >> version) || tag != "dvlnav-mogpr") throw IoError("not a model file: " + path.string());
    if (version != kModelFormatVersion) {
        throw IoError("unsupported model format version " + std::to_string(version));
    }
    std::string key;
    Eigen::Index rows = 0;
    std::string token;
    if (!(in >> key >> rows) || key != "rows" || rows < 1) throw IoError("model file: bad row count");
    if (!(in >> key >> token) || key != "jitter") throw IoError("model file: missing jitter");
    const double jitter = parse_double(token);
    if (!(in >> key) || key != "log_hyperparams") throw IoError("model file: missing hyperparameters");
    Hyperparams hp;
    for (int i = 0; i < kHyperparamCount; ++i) {
        if (!(in >> token)) throw IoError("model file: truncated hyperparameters");
        hp.log_values[i] = parse_double(token);
    }
    Dataset d;
    d.inputs.resize(rows, kInputDim);
    d.targets.resize(rows, kOutputDim);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (int c = 0; c < kInputDim + kOutputDim; ++c) {
            if (!(in >> token)) throw IoError("model file: truncated data at row " + std::to_string(r));
            const double v = parse_double(token);
            if (c < kInputDim) {
                d.inputs(r, c) = v;
            } else {
                d.targets(r, c - kInputDim) = v;
            }
        }
    }
    d.validate(1);
    GpModel model(std::move(d), hp, jitter);
    if (!model.ok()) throw NumericalError("stored model does not factorize");
    return model;
}

}  // namespace dvlnav
