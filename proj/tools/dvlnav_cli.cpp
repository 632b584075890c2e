// dvlnav command-line harness: simulate, train, eval-velocity, fuse, report, sweep.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>

#include "dvlnav/bench.hpp"

namespace fs = std::filesystem;
using namespace dvlnav;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

ExperimentConfig load_experiment(const CommonOptions& o) {
    const Config c = o.config_path.empty() ? Config::parse("", "<defaults>") : Config::load(o.config_path);
    ExperimentConfig cfg = ExperimentConfig::from_config(c);
    if (o.seed) cfg.set_seed(*o.seed);
    if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
    return cfg;
}

fs::path prepare_out(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
    return dir;
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw InputError(what + " is required");
    if (!fs::is_regular_file(path)) throw InputError(what + " not found: " + path);
}

bool config_has_sweep(const std::string& path) {
    if (path.empty()) return false;
    return Config::load(path).has("experiment", "sweep");
}

int cmd_simulate(const CommonOptions& o) {
    const ExperimentConfig cfg = load_experiment(o);
    const fs::path out = prepare_out(cfg.output_dir);
    Mission m;
    m.index = 0;
    m.is_test = true;
    m.spec = cfg.sim;
    const MissionData d = simulate_mission(cfg, m);

    write_truth_csv(out / "truth.csv", d.truth);
    std::cout << (out / "truth.csv").string() << '\n';
    write_imu_csv(out / "imu.csv", d.imu);
    std::cout << (out / "imu.csv").string() << '\n';

    const std::uint64_t beam_seed = derive_seed(cfg.seed, 0, 100);
    if (config_has_sweep(o.config_path)) {
        for (const double bias : cfg.sweep) {
            const auto beams = synthesize_beams(d.truth_dvl, cfg.geometry, dvl_errors_for_bias(cfg, bias), beam_seed);
            const fs::path p = out / ("beams" + bias_suffix(bias) + ".csv");
            write_beam_csv(p, beams);
            std::cout << p.string() << '\n';
        }
    } else {
        const auto beams = synthesize_beams(d.truth_dvl, cfg.geometry, cfg.dvl_errors, beam_seed);
        write_beam_csv(out / "beams.csv", beams);
        std::cout << (out / "beams.csv").string() << '\n';
    }
    return 0;
}

int cmd_train(const CommonOptions& o, const std::vector<std::string>& inputs, const std::string& model_path) {
    const ExperimentConfig cfg = load_experiment(o);
    if (inputs.empty()) throw InputError("train: at least one beam CSV is required");
    std::vector<std::vector<BeamSample>> sets;
    for (const auto& p : inputs) {
        require_file(p, "training CSV");
        sets.push_back(read_beam_csv(p));
    }
    const TrainResult r = train_from_beams(cfg, sets);
    const fs::path out = prepare_out(cfg.output_dir);
    const fs::path model = model_path.empty() ? out / "model.txt" : fs::path(model_path);
    save_model(r.model, model);
    CsvTable trace{{"iteration", "nll"}, {}};
    for (std::size_t i = 0; i < r.nll_trace.size(); ++i) trace.rows.push_back({double(i + 1), r.nll_trace[i]});
    write_csv(out / "nll_trace.csv", trace);
    std::cout << model.string() << '\n' << (out / "nll_trace.csv").string() << '\n';
    std::cout << "final_nll " << format_number(r.final_nll) << '\n';
    return 0;
}

int cmd_eval_velocity(const CommonOptions& o, const std::vector<std::string>& inputs, const std::string& model_path) {
    const ExperimentConfig cfg = load_experiment(o);
    require_file(model_path, "--model");
    const GpModel model = load_model(model_path);
    const LsFrontend ls(cfg.geometry, cfg.dvl_errors.noise_std);
    const GpFrontend gp(model);

    std::map<double, std::vector<std::string>> by_level;
    for (const auto& p : inputs) {
        require_file(p, "test CSV");
        const auto bias = parse_bias_suffix(fs::path(p).stem().string());
        if (!bias) throw InputError("test CSV name lacks a _bias<value> suffix: " + p);
        by_level[*bias].push_back(p);
    }
    std::vector<VelocityRmseRow> rows;
    for (const double level : cfg.sweep) {
        const auto it = std::find_if(by_level.begin(), by_level.end(),
                                     [&](const auto& kv) { return std::abs(kv.first - level) <= 1e-12; });
        if (it == by_level.end()) throw InputError("missing test CSV for bias level " + format_number(level));
        double se_ls = 0.0;
        double se_gp = 0.0;
        std::size_t n = 0;
        for (const auto& p : it->second) {
            const auto beams = read_beam_csv(p);
            const double a = velocity_rmse(estimate_velocities(beams, ls), beams);
            const double b = velocity_rmse(estimate_velocities(beams, gp), beams);
            se_ls += a * a * double(beams.size());
            se_gp += b * b * double(beams.size());
            n += beams.size();
        }
        rows.push_back({level, std::sqrt(se_ls / double(n)), std::sqrt(se_gp / double(n))});
    }
    const fs::path out = prepare_out(cfg.output_dir) / "velocity_rmse.csv";
    write_velocity_rmse_csv(out, rows);
    std::cout << out.string() << '\n';
    return 0;
}

struct FuseOptions {
    std::string frontend = "ls";
    bool adaptive = false;
    std::string model;
    std::string external_csv;
    std::string imu;
    std::string truth;
    std::string beams;
};

int cmd_fuse(const CommonOptions& o, const FuseOptions& f) {
    const ExperimentConfig cfg = load_experiment(o);
    require_file(f.imu, "--imu");
    require_file(f.truth, "--truth");
    const auto imu = read_imu_csv(f.imu);
    const auto truth = read_truth_csv(f.truth);
    if (truth.empty()) throw InputError("truth CSV is empty");

    std::vector<TimedEstimate> estimates;
    std::string source_name;
    if (f.frontend == "external") {
        require_file(f.external_csv, "--external-csv");
        estimates = read_velocity_csv(f.external_csv, EstimateSource::External);
        source_name = f.external_csv;
    } else {
        require_file(f.beams, "--beams");
        const auto beams = read_beam_csv(f.beams);
        if (f.frontend == "ls") {
            estimates = estimate_velocities(beams, LsFrontend(cfg.geometry, cfg.dvl_errors.noise_std));
        } else {
            require_file(f.model, "--model");
            const GpModel model = load_model(f.model);
            estimates = estimate_velocities(beams, GpFrontend(model));
        }
        source_name = f.beams;
    }
    const bool adaptive = f.adaptive || cfg.ekf.adaptive_r;
    const auto log = fuse(cfg, imu, truth.front(), estimates, adaptive);

    std::string name = "nav_" + f.frontend;
    if (const auto bias = parse_bias_suffix(fs::path(source_name).stem().string())) name += bias_suffix(*bias);
    const fs::path out = prepare_out(cfg.output_dir) / (name + ".csv");
    write_nav_log_csv(out, log);
    std::cout << out.string() << '\n';
    return 0;
}

// nav_<method>[_bias<value>].csv
std::pair<std::string, double> parse_log_name(const fs::path& p) {
    std::string stem = p.stem().string();
    double bias = 0.0;
    if (const auto b = parse_bias_suffix(stem)) {
        bias = *b;
        stem = stem.substr(0, stem.rfind("_bias"));
    }
    if (stem.rfind("nav_", 0) == 0) stem = stem.substr(4);
    return {stem, bias};
}

int cmd_report(const CommonOptions& o, const std::vector<std::string>& logs, const std::string& truth_path,
               double skip_seconds) {
    const ExperimentConfig cfg = load_experiment(o);
    require_file(truth_path, "--truth");
    if (logs.empty()) throw InputError("report: at least one navigation log is required");
    const auto truth = read_truth_csv(truth_path);

    std::vector<ReportRow> rows;
    std::vector<NoiseSeriesRow> series;
    CsvTable trend{{"bias", "method_index", "velocity_norm", "angle_norm"}, {}};
    std::map<std::string, int> method_index;
    for (const auto& p : logs) {
        require_file(p, "navigation log");
        const auto log = read_nav_log_csv(p);
        if (!log.empty() && std::abs(log.back().time - truth.back().time) > 1e-6) {
            throw InputError(p + ": log length does not match truth");
        }
        const auto [method, bias] = parse_log_name(p);
        const std::string mission = fs::path(truth_path).stem().string();
        const StateRmse full = state_rmse(log, truth);
        rows.push_back({mission, bias, method, 0.0, full});
        if (skip_seconds > 0.0) rows.push_back({mission, bias, method, skip_seconds, state_rmse(log, truth, skip_seconds)});
        const auto s = noise_series(log, mission, bias, method);
        series.insert(series.end(), s.begin(), s.end());
        const int mi = method_index.emplace(method, int(method_index.size())).first->second;
        trend.rows.push_back({bias, double(mi), full.velocity_norm(), full.angle_norm()});
    }
    const fs::path out = prepare_out(cfg.output_dir);
    write_report_csv(out / "rmse_report.csv", rows);
    write_noise_series_csv(out / "noise_series.csv", series);
    write_csv(out / "state_rmse_vs_bias.csv", trend);
    for (const auto* n : {"rmse_report.csv", "noise_series.csv", "state_rmse_vs_bias.csv"}) {
        std::cout << (out / n).string() << '\n';
    }
    return 0;
}

int cmd_sweep(const CommonOptions& o) {
    const ExperimentConfig cfg = load_experiment(o);
    const SweepResult r = run_sweep(cfg, cfg.output_dir);
    for (const auto& p : r.files) std::cout << p.string() << '\n';
    for (std::size_t m = 0; m < r.velocity.size(); ++m) {
        for (const auto& row : r.velocity[m]) {
            std::cout << "test" << m << " bias " << format_number(row.bias) << " rmse_ls " << row.rmse_ls
                      << " rmse_mogpr " << row.rmse_mogpr << " improvement_pct " << row.improvement_pct() << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"INS/DVL fusion benchmark"};
    app.require_subcommand(1);

    CommonOptions common;
    auto add_common = [&common](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "Experiment config file");
        sub->add_option("--seed", common.seed, "Master seed (overrides the config)");
        sub->add_option("--out", common.out_dir, "Output directory");
    };

    auto* simulate = app.add_subcommand("simulate", "Write truth, IMU and beam CSVs");
    add_common(simulate);

    std::vector<std::string> inputs;
    std::string model_path;
    auto* train_cmd = app.add_subcommand("train", "Train the regressor from beam CSVs");
    add_common(train_cmd);
    train_cmd->add_option("inputs", inputs, "Training beam CSVs")->required();
    train_cmd->add_option("--model", model_path, "Model output path (default <out>/model.txt)");

    auto* eval = app.add_subcommand("eval-velocity", "Velocity RMSE of LS and the regressor per bias level");
    add_common(eval);
    eval->add_option("inputs", inputs, "Test beam CSVs named *_bias<value>.csv")->required();
    eval->add_option("--model", model_path, "Trained model file")->required();

    FuseOptions fo;
    auto* fuse_cmd = app.add_subcommand("fuse", "Run the EKF on one stream");
    add_common(fuse_cmd);
    fuse_cmd->add_option("--frontend", fo.frontend, "Velocity front-end")
        ->check(CLI::IsMember({"ls", "mogpr", "external"}));
    fuse_cmd->add_flag("--adaptive-r", fo.adaptive, "Use the front-end covariance as R");
    fuse_cmd->add_option("--model", fo.model, "Trained model (mogpr front-end)");
    fuse_cmd->add_option("--external-csv", fo.external_csv, "Velocity CSV (external front-end)");
    fuse_cmd->add_option("--imu", fo.imu, "IMU CSV");
    fuse_cmd->add_option("--truth", fo.truth, "Truth CSV (initial state)");
    fuse_cmd->add_option("--beams", fo.beams, "Beam CSV");

    std::string truth_path;
    double skip_seconds = 0.0;
    auto* report = app.add_subcommand("report", "Per-state RMSE and noise-series CSVs from navigation logs");
    add_common(report);
    report->add_option("logs", inputs, "Navigation logs named nav_<method>[_bias<value>].csv")->required();
    report->add_option("--truth", truth_path, "Truth CSV")->required();
    report->add_option("--skip-seconds", skip_seconds, "Also report RMSE excluding this initial window")
        ->check(CLI::NonNegativeNumber);

    auto* sweep = app.add_subcommand("sweep", "Full bias-sweep protocol");
    add_common(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*simulate) return cmd_simulate(common);
        if (*train_cmd) return cmd_train(common, inputs, model_path);
        if (*eval) return cmd_eval_velocity(common, inputs, model_path);
        if (*fuse_cmd) return cmd_fuse(common, fo);
        if (*report) return cmd_report(common, inputs, truth_path, skip_seconds);
        if (*sweep) return cmd_sweep(common);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ArgumentError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitIo;
    } catch (const NumericalError& e) {
        std::cerr << "numerical fault: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
