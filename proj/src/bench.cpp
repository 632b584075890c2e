#include "dvlnav/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace dvlnav {
namespace {

Vec3 read_vec3(const Config& c, const std::string& sec, const std::string& key, const Vec3& fallback) {
    const auto v = c.get_doubles(sec, key);
    if (!v) return fallback;
    if (v->size() == 1) return Vec3::Constant((*v)[0]);
    if (v->size() != 3) throw ConfigError("[" + sec + "] " + key + ": expected 3 values");
    return Vec3((*v)[0], (*v)[1], (*v)[2]);
}

Vec4 read_vec4(const Config& c, const std::string& sec, const std::string& key, const Vec4& fallback) {
    const auto v = c.get_doubles(sec, key);
    if (!v) return fallback;
    if (v->size() == 1) return Vec4::Constant((*v)[0]);
    if (v->size() != 4) throw ConfigError("[" + sec + "] " + key + ": expected 1 or 4 values");
    return Vec4((*v)[0], (*v)[1], (*v)[2], (*v)[3]);
}

int read_positive_int(const Config& c, const std::string& sec, const std::string& key, int fallback) {
    const auto v = c.get_int(sec, key, fallback);
    if (v < 1 || v > 1000000) throw ConfigError("[" + sec + "] " + key + ": must be a positive integer");
    return static_cast<int>(v);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

std::string join_csv(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out + '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const Config& c) {
    ExperimentConfig cfg;

    const double pitch = c.get_double("geometry", "pitch_deg", 20.0);
    std::optional<std::array<double, 4>> yaw;
    if (const auto y = c.get_doubles("geometry", "yaw_deg")) {
        if (y->size() != 4) throw ConfigError("[geometry] yaw_deg: expected 4 values");
        yaw = std::array<double, 4>{(*y)[0], (*y)[1], (*y)[2], (*y)[3]};
    }
    try {
        cfg.geometry = BeamGeometry::from_degrees(pitch, yaw);
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("[geometry] ") + e.what());
    }

    auto& sim = cfg.sim;
    try {
        sim.pattern = parse_pattern(c.get_string("sim", "pattern", "mixed"));
    } catch (const Error& e) {
        throw ConfigError(std::string("[sim] ") + e.what());
    }
    sim.duration = c.get_double("sim", "duration_s", 600.0);
    sim.cruise_speed = c.get_double("sim", "speed_mps", 1.5);
    sim.turn_rate = c.get_double("sim", "turn_rate_dps", 3.0) * kDegToRad;
    sim.initial_heading = c.get_double("sim", "initial_heading_deg", 0.0) * kDegToRad;
    sim.seed = c.get_u64("sim", "seed", 1);
    const auto dt = c.get_doubles("sim", "depth_times_s");
    const auto dd = c.get_doubles("sim", "depth_m");
    if (dt.has_value() != dd.has_value() || (dt && dt->size() != dd->size())) {
        throw ConfigError("[sim] depth_times_s and depth_m must be given together with equal lengths");
    }
    if (dt) {
        for (std::size_t i = 0; i < dt->size(); ++i) sim.depth_profile.push_back({(*dt)[i], (*dd)[i]});
    }

    auto& imu = cfg.imu_errors;
    imu.accel_bias = read_vec3(c, "imu_errors", "accel_bias_mps2", Vec3(5e-4, -4e-4, 3e-4));
    imu.gyro_bias = read_vec3(c, "imu_errors", "gyro_bias_dph", Vec3(1.0, -0.8, 0.6)) * (kDegToRad / 3600.0);
    imu.accel_noise_std = c.get_double("imu_errors", "accel_noise_std_mps2", 1e-3);
    imu.gyro_noise_std = c.get_double("imu_errors", "gyro_noise_std_dps", 1e-3) * kDegToRad;

    auto& dvl = cfg.dvl_errors;
    dvl.beam_bias = read_vec4(c, "dvl_errors", "bias_mps", Vec4::Zero());
    dvl.scale_factor = read_vec3(c, "dvl_errors", "scale", Vec3::Zero());
    dvl.noise_std = c.get_double("dvl_errors", "noise_std_mps", kDefaultBeamNoiseStd);

    auto& gpr = cfg.gpr;
    const auto max_points = c.get_int("gpr", "max_points", 2000);
    if (max_points < 2) throw ConfigError("[gpr] max_points: must be at least 2");
    gpr.max_points = static_cast<Eigen::Index>(max_points);
    gpr.optimizer.iterations = read_positive_int(c, "gpr", "iterations", 50);
    gpr.optimizer.learning_rate = c.get_double("gpr", "learning_rate", 0.1);
    gpr.optimizer.beta1 = c.get_double("gpr", "beta1", 0.9);
    gpr.optimizer.beta2 = c.get_double("gpr", "beta2", 0.999);
    gpr.init_noise_std = c.get_double("gpr", "init_noise_std", kDefaultBeamNoiseStd);
    gpr.seed = c.get_u64("gpr", "seed", 7);
    if (!(gpr.optimizer.learning_rate > 0.0) || !(gpr.optimizer.beta1 >= 0.0 && gpr.optimizer.beta1 < 1.0) ||
        !(gpr.optimizer.beta2 >= 0.0 && gpr.optimizer.beta2 < 1.0) || !(gpr.init_noise_std > 0.0)) {
        throw ConfigError("[gpr] optimizer settings out of range");
    }

    auto& ekf = cfg.ekf;
    ekf.adaptive_r = c.get_bool("ekf", "adaptive_r", false);
    ekf.constant_r_std = c.get_double("ekf", "constant_r_std_mps", 0.02);
    const std::string r_model = c.get_string("ekf", "constant_r_model", "isotropic");
    if (r_model == "isotropic") {
        ekf.constant_r_model = ConstantRModel::Isotropic;
    } else if (r_model == "ls") {
        ekf.constant_r_model = ConstantRModel::LsDerived;
    } else {
        throw ConfigError("[ekf] constant_r_model: expected 'isotropic' or 'ls', got '" + r_model + "'");
    }
    ekf.joseph_form = c.get_bool("ekf", "joseph_form", true);
    ekf.init_velocity_std = c.get_double("ekf", "init_velocity_std_mps", 0.1);
    ekf.init_attitude_std = c.get_double("ekf", "init_attitude_std_deg", 1.0) * kDegToRad;
    // Bias priors default to the magnitude of the simulated IMU biases.
    ekf.init_accel_bias_std =
        c.get_double("ekf", "init_accel_bias_std_mps2", std::max(imu.accel_bias.cwiseAbs().maxCoeff(), 1e-5));
    ekf.init_gyro_bias_std = c.get_double("ekf", "init_gyro_bias_std_dph",
                                          std::max(imu.gyro_bias.cwiseAbs().maxCoeff(), 1e-8) * 3600.0 * kRadToDeg) *
                             (kDegToRad / 3600.0);
    ekf.accel_bias_walk_psd = c.get_double("ekf", "accel_bias_walk_psd", ekf.accel_bias_walk_psd);
    ekf.gyro_bias_walk_psd = c.get_double("ekf", "gyro_bias_walk_psd", ekf.gyro_bias_walk_psd);
    ekf.set_imu_noise(imu);
    cfg.init_velocity_error = read_vec3(c, "ekf", "init_velocity_error_mps", Vec3::Zero());
    cfg.init_attitude_error = read_vec3(c, "ekf", "init_attitude_error_deg", Vec3::Zero()) * kDegToRad;

    if (const auto s = c.get_doubles("experiment", "sweep")) cfg.sweep = *s;
    cfg.bias_pattern = read_vec4(c, "experiment", "bias_pattern", Vec4::Ones());
    cfg.train_missions = read_positive_int(c, "experiment", "train_missions", 11);
    cfg.test_missions = read_positive_int(c, "experiment", "test_missions", 2);
    cfg.mission_duration = c.get_double("experiment", "mission_duration_s", 600.0);
    if (const auto p = c.get_strings("experiment", "patterns")) {
        cfg.mission_patterns.clear();
        for (const auto& name : *p) {
            try {
                cfg.mission_patterns.push_back(parse_pattern(name));
            } catch (const Error& e) {
                throw ConfigError(std::string("[experiment] patterns: ") + e.what());
            }
        }
    }
    cfg.speed_min = c.get_double("experiment", "speed_min_mps", 1.0);
    cfg.speed_max = c.get_double("experiment", "speed_max_mps", 2.0);
    cfg.train_speed_margin = c.get_double("experiment", "train_speed_margin_mps", 0.25);
    cfg.train_at_sweep_levels = c.get_bool("experiment", "train_at_sweep_levels", true);
    cfg.write_nav_logs = c.get_bool("experiment", "write_nav_logs", false);
    cfg.skip_seconds = c.get_double("experiment", "skip_seconds", 0.0);
    cfg.output_dir = c.get_string("experiment", "output_dir", "out");
    cfg.seed = c.get_u64("experiment", "seed", 42);

    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    try {
        sim.validate();
        imu_errors.validate();
        dvl_errors.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (sweep.empty()) throw ConfigError("[experiment] sweep: at least one bias level required");
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        if (!(sweep[i] >= 0.0) || !std::isfinite(sweep[i])) {
            throw ConfigError("[experiment] sweep: values must be finite and >= 0");
        }
        if (i > 0 && !(sweep[i] > sweep[i - 1])) {
            throw ConfigError("[experiment] sweep: values must be strictly increasing");
        }
    }
    if (!bias_pattern.allFinite()) throw ConfigError("[experiment] bias_pattern: non-finite value");
    if (mission_patterns.empty()) throw ConfigError("[experiment] patterns: at least one pattern required");
    if (!(mission_duration >= 10.0)) throw ConfigError("[experiment] mission_duration_s: must be >= 10");
    if (!(speed_min > 0.0) || !(speed_max >= speed_min)) {
        throw ConfigError("[experiment] speed range must satisfy 0 < speed_min_mps <= speed_max_mps");
    }
    if (!(train_speed_margin >= 0.0)) throw ConfigError("[experiment] train_speed_margin_mps: must be >= 0");
    if (!(skip_seconds >= 0.0)) throw ConfigError("[experiment] skip_seconds: must be >= 0");
    if (!(ekf.constant_r_std > 0.0)) throw ConfigError("[ekf] constant_r_std_mps: must be > 0");
    if (!(ekf.init_velocity_std > 0.0) || !(ekf.init_attitude_std > 0.0) || !(ekf.init_accel_bias_std > 0.0) ||
        !(ekf.init_gyro_bias_std > 0.0)) {
        throw ConfigError("[ekf] initial uncertainties must be > 0");
    }
}

void ExperimentConfig::set_seed(std::uint64_t s) {
    seed = s;
    sim.seed = s;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(base) ^ a) ^ (b * 0xD1B54A32D192ED03ULL));
}

std::string bias_suffix(double bias) { return "_bias" + format_number(bias); }

std::optional<double> parse_bias_suffix(const std::string& stem) {
    const auto pos = stem.rfind("_bias");
    if (pos == std::string::npos) return std::nullopt;
    try {
        return parse_double_strict(stem.substr(pos + 5), "bias suffix");
    } catch (const ConfigError&) {
        return std::nullopt;
    }
}

DvlErrorSpec dvl_errors_for_bias(const ExperimentConfig& cfg, double bias) {
    DvlErrorSpec e = cfg.dvl_errors;
    e.beam_bias = bias * cfg.bias_pattern;
    return e;
}

std::string Mission::name() const { return (is_test ? "test" : "train") + std::to_string(index); }

std::vector<Mission> plan_missions(const ExperimentConfig& cfg) {
    std::vector<Mission> out;
    const int total = cfg.train_missions + cfg.test_missions;
    for (int i = 0; i < total; ++i) {
        std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i), 1));
        Mission m;
        m.is_test = i >= cfg.train_missions;
        m.index = m.is_test ? i - cfg.train_missions : i;
        m.spec = cfg.sim;
        m.spec.pattern = cfg.mission_patterns[static_cast<std::size_t>(m.index) % cfg.mission_patterns.size()];
        m.spec.duration = cfg.mission_duration;
        // Training speeds are spread evenly over the test envelope widened by the margin.
        const double u = uniform01(rng);
        if (m.is_test) {
            m.spec.cruise_speed = cfg.speed_min + (cfg.speed_max - cfg.speed_min) * u;
        } else {
            const double lo = std::max(cfg.speed_min - cfg.train_speed_margin, 0.1);
            const double hi = cfg.speed_max + cfg.train_speed_margin;
            const double frac = cfg.train_missions > 1 ? static_cast<double>(i) / (cfg.train_missions - 1) : 0.5;
            m.spec.cruise_speed = lo + (hi - lo) * frac;
        }
        m.spec.initial_heading = (2.0 * uniform01(rng) - 1.0) * kPi;
        m.spec.depth_profile.clear();
        m.spec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i), 2);
        out.push_back(m);
    }
    return out;
}

namespace {
std::uint64_t mission_key(const Mission& m) {
    return static_cast<std::uint64_t>(m.index) + (m.is_test ? 1000000ULL : 0ULL);
}
}  // namespace

MissionData simulate_mission(const ExperimentConfig& cfg, const Mission& mission) {
    MissionData d;
    d.mission = mission;
    d.truth = generate_trajectory(mission.spec, kImuRate);
    d.truth_dvl = decimate(d.truth, kDvlRate);
    d.imu = synthesize_imu(d.truth, cfg.imu_errors, derive_seed(cfg.seed, mission_key(mission), 3));
    return d;
}

std::vector<BeamSample> mission_beams(const ExperimentConfig& cfg, const MissionData& data, double bias,
                                      std::size_t level_index) {
    const std::uint64_t stream = data.mission.is_test ? 100 : 100 + level_index;
    const auto source = data.truth_dvl.empty() ? decimate(data.truth, kDvlRate) : data.truth_dvl;
    return synthesize_beams(source, cfg.geometry, dvl_errors_for_bias(cfg, bias),
                            derive_seed(cfg.seed, mission_key(data.mission), stream));
}

Dataset build_dataset(const std::vector<std::vector<BeamSample>>& sets) {
    Eigen::Index n = 0;
    for (const auto& s : sets) n += static_cast<Eigen::Index>(s.size());
    Dataset d;
    d.inputs.resize(n, kInputDim);
    d.targets.resize(n, kOutputDim);
    Eigen::Index row = 0;
    for (const auto& s : sets) {
        for (const auto& b : s) {
            d.inputs.row(row) = b.beams.transpose();
            d.targets.row(row) = b.truth_velocity_dvl.transpose();
            ++row;
        }
    }
    if (n == 0) throw InputError("empty training dataset");
    return d;
}

LsFrontend::LsFrontend(const BeamGeometry& geometry, double beam_noise_std)
    : ls_(build_transform(geometry), beam_noise_std) {}

VelocityEstimate GpFrontend::estimate(const Vec4& beams) const {
    const Prediction p = model_.predict(beams);
    return {p.mean, p.covariance, EstimateSource::MOGPR};
}

std::vector<TimedEstimate> estimate_velocities(const std::vector<BeamSample>& beams,
                                               const VelocityFrontend& frontend) {
    std::vector<TimedEstimate> out;
    out.reserve(beams.size());
    for (const auto& b : beams) out.push_back({b.time, frontend.estimate(b.beams)});
    return out;
}

double velocity_rmse(const std::vector<TimedEstimate>& estimates, const std::vector<BeamSample>& beams) {
    if (estimates.size() != beams.size()) {
        throw InputError("velocity RMSE: " + std::to_string(estimates.size()) + " estimates vs " +
                         std::to_string(beams.size()) + " beam samples");
    }
    if (beams.empty()) throw InputError("velocity RMSE: no samples");
    double sum = 0.0;
    for (std::size_t i = 0; i < beams.size(); ++i) {
        if (std::abs(estimates[i].time - beams[i].time) > 1e-6) {
            throw InputError("velocity RMSE: time mismatch at row " + std::to_string(i));
        }
        sum += (estimates[i].estimate.velocity_dvl - beams[i].truth_velocity_dvl).squaredNorm();
    }
    return std::sqrt(sum / static_cast<double>(beams.size()));
}

Vec3 attitude_error_deg(const Quat& estimate, const Quat& truth) {
    const Quat dq = (truth.conjugate() * estimate).normalized();
    const Vec3 e = euler_from_quat(dq) * kRadToDeg;
    return {wrap_deg(e.x()), wrap_deg(e.y()), wrap_deg(e.z())};
}

std::vector<NavLogRecord> to_records(const std::vector<NavLogRow>& log) {
    std::vector<NavLogRecord> out;
    out.reserve(log.size());
    for (const auto& row : log) {
        NavLogRecord r;
        r.time = row.time;
        r.velocity_n = row.nav.velocity_n;
        r.euler_deg = euler_from_quat(row.nav.attitude) * kRadToDeg;
        r.r_diag = row.r_diag;
        r.updated = row.updated;
        out.push_back(r);
    }
    return out;
}

StateRmse state_rmse(const std::vector<NavLogRecord>& log, const std::vector<GroundTruthSample>& truth,
                     double skip_seconds) {
    if (truth.empty() || log.empty()) throw InputError("RMSE: empty log or truth");
    std::unordered_map<long long, std::size_t> index;
    index.reserve(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) index[std::llround(truth[i].time * kImuRate)] = i;

    Vec3 sv = Vec3::Zero();
    Vec3 sa = Vec3::Zero();
    std::size_t n = 0;
    for (const auto& r : log) {
        const auto it = index.find(std::llround(r.time * kImuRate));
        if (it == index.end() || std::abs(truth[it->second].time - r.time) > 1e-6) {
            throw InputError("RMSE: no truth sample at t = " + format_number(r.time));
        }
        if (r.time < skip_seconds - 1e-9) continue;
        const auto& t = truth[it->second];
        const Quat q = quat_from_euler(r.euler_deg.x() * kDegToRad, r.euler_deg.y() * kDegToRad,
                                       r.euler_deg.z() * kDegToRad);
        sv += (r.velocity_n - t.velocity_n).cwiseAbs2();
        sa += attitude_error_deg(q, t.attitude).cwiseAbs2();
        ++n;
    }
    if (n == 0) throw InputError("RMSE: no rows after the skip window");
    StateRmse out;
    out.velocity = (sv / static_cast<double>(n)).cwiseSqrt();
    out.angle_deg = (sa / static_cast<double>(n)).cwiseSqrt();
    return out;
}

TrainResult train_from_beams(const ExperimentConfig& cfg, const std::vector<std::vector<BeamSample>>& sets) {
    const Dataset full = build_dataset(sets);
    const Dataset data = subsample(full, cfg.gpr.max_points, cfg.gpr.seed);
    return train(data, initial_hyperparams(data, cfg.gpr.init_noise_std), cfg.gpr.optimizer);
}

std::vector<NavLogRow> fuse(const ExperimentConfig& cfg, const std::vector<ImuSample>& imu,
                            const GroundTruthSample& truth0, const std::vector<TimedEstimate>& estimates,
                            bool adaptive, FusionObserver* observer) {
    FusionOptions opts;
    opts.ekf = cfg.ekf;
    opts.ekf.adaptive_r = adaptive;
    opts.ls_covariance = LsEstimator(build_transform(cfg.geometry), cfg.dvl_errors.noise_std).covariance();
    const NavState init = initial_state_from_truth(truth0, cfg.init_velocity_error, cfg.init_attitude_error);
    return run_fusion(imu, estimates, init, opts, observer);
}

void write_velocity_rmse_csv(const std::filesystem::path& path, const std::vector<VelocityRmseRow>& rows) {
    CsvTable t{{"bias", "rmse_ls", "rmse_mogpr", "improvement_pct"}, {}};
    for (const auto& r : rows) t.rows.push_back({r.bias, r.rmse_ls, r.rmse_mogpr, r.improvement_pct()});
    write_csv(path, t);
}

void write_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
    std::string text = join_csv({"mission", "bias", "method", "skip_s", "vn", "ve", "vd", "roll_deg", "pitch_deg", "yaw_deg",
                                 "velocity_norm", "angle_norm"});
    for (const auto& r : rows) {
        const auto& v = r.rmse.velocity;
        const auto& a = r.rmse.angle_deg;
        text += join_csv({r.mission, format_number(r.bias), r.method, format_number(r.skip_seconds), format_number(v.x()), format_number(v.y()),
                          format_number(v.z()), format_number(a.x()), format_number(a.y()), format_number(a.z()),
                          format_number(r.rmse.velocity_norm()), format_number(r.rmse.angle_norm())});
    }
    write_text(path, text);
}

void write_noise_series_csv(const std::filesystem::path& path, const std::vector<NoiseSeriesRow>& rows) {
    std::string text = join_csv({"mission", "bias", "method", "t", "std_x", "std_y", "std_z"});
    for (const auto& r : rows) {
        text += join_csv({r.mission, format_number(r.bias), r.method, format_number(r.time),
                          format_number(r.std_dev.x()), format_number(r.std_dev.y()), format_number(r.std_dev.z())});
    }
    write_text(path, text);
}

std::vector<NoiseSeriesRow> noise_series(const std::vector<NavLogRecord>& log, const std::string& mission,
                                         double bias, const std::string& method) {
    std::vector<NoiseSeriesRow> out;
    for (const auto& r : log) {
        if (!r.updated) continue;
        out.push_back({mission, bias, method, r.time, r.r_diag.cwiseMax(0.0).cwiseSqrt()});
    }
    return out;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir.string());

    SweepResult result;
    const auto missions = plan_missions(cfg);

    std::vector<std::vector<BeamSample>> train_sets;
    for (const auto& m : missions) {
        if (m.is_test) continue;
        MissionData d;
        d.mission = m;
        d.truth_dvl = generate_trajectory(m.spec, kDvlRate);
        if (cfg.train_at_sweep_levels) {
            for (std::size_t k = 0; k < cfg.sweep.size(); ++k) train_sets.push_back(mission_beams(cfg, d, cfg.sweep[k], k));
        } else {
            train_sets.push_back(synthesize_beams(d.truth_dvl, cfg.geometry, cfg.dvl_errors,
                                                  derive_seed(cfg.seed, mission_key(m), 100)));
        }
    }
    const TrainResult trained = train_from_beams(cfg, train_sets);
    train_sets.clear();
    result.nll_trace = trained.nll_trace;

    const auto model_path = out_dir / "model.txt";
    save_model(trained.model, model_path);
    result.files.push_back(model_path);
    {
        CsvTable t{{"iteration", "nll"}, {}};
        for (std::size_t i = 0; i < trained.nll_trace.size(); ++i) {
            t.rows.push_back({static_cast<double>(i + 1), trained.nll_trace[i]});
        }
        const auto p = out_dir / "nll_trace.csv";
        write_csv(p, t);
        result.files.push_back(p);
    }

    const LsFrontend ls(cfg.geometry, cfg.dvl_errors.noise_std);
    const GpFrontend gp(trained.model);
    std::vector<NoiseSeriesRow> series;

    for (const auto& m : missions) {
        if (!m.is_test) continue;
        const MissionData d = simulate_mission(cfg, m);
        std::vector<VelocityRmseRow> vrows;
        for (std::size_t k = 0; k < cfg.sweep.size(); ++k) {
            const double bias = cfg.sweep[k];
            const auto beams = mission_beams(cfg, d, bias, k);
            const auto est_ls = estimate_velocities(beams, ls);
            const auto est_gp = estimate_velocities(beams, gp);
            vrows.push_back({bias, velocity_rmse(est_ls, beams), velocity_rmse(est_gp, beams)});

            const std::pair<const char*, const std::vector<TimedEstimate>*> runs[] = {{"ls", &est_ls},
                                                                                      {"mogpr", &est_gp}};
            for (const auto& [method, est] : runs) {
                const bool adaptive = std::string(method) == "mogpr";
                const auto log = fuse(cfg, d.imu, d.truth.front(), *est, adaptive);
                if (cfg.write_nav_logs) {
                    const auto p = out_dir / ("nav_" + std::string(method) + "_" + m.name() + bias_suffix(bias) + ".csv");
                    write_nav_log_csv(p, log);
                    result.files.push_back(p);
                }
                const auto records = to_records(log);
                result.report.push_back({m.name(), bias, method, 0.0, state_rmse(records, d.truth)});
                if (cfg.skip_seconds > 0.0) {
                    result.report.push_back(
                        {m.name(), bias, method, cfg.skip_seconds, state_rmse(records, d.truth, cfg.skip_seconds)});
                }
                const auto s = noise_series(records, m.name(), bias, method);
                series.insert(series.end(), s.begin(), s.end());
            }
        }
        const auto p = out_dir / ("velocity_rmse_" + m.name() + ".csv");
        write_velocity_rmse_csv(p, vrows);
        result.files.push_back(p);
        result.velocity.push_back(std::move(vrows));
    }

    const auto report_path = out_dir / "rmse_report.csv";
    write_report_csv(report_path, result.report);
    result.files.push_back(report_path);
    const auto series_path = out_dir / "noise_series.csv";
    write_noise_series_csv(series_path, series);
    result.files.push_back(series_path);
    return result;
}

}  // namespace dvlnav
