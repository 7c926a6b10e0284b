// aeromag command-line tool.
//
// Subcommands:
//   run-scenario      full pipeline: trajectories, platform field,
//                     sensor corruption, calibration fits, validation
//                     compensation, CSV/JSON artifacts
//   analyze-errors    closed-form calibration error table with exact
//                     geometric oracle columns
//   noise-bench       static-field sensor simulation with ASD/ADEV export
//   export-trajectory generated trajectory as CSV
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aeromag/aeromag.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aeromag;

namespace {

struct StageError {
    std::string stage;
    std::string message;
    int exit_code;
};

[[noreturn]] void fail(const std::string& stage, const std::string& message, int code) {
    throw StageError{stage, message, code};
}

double parse_angle(const std::string& text) {
    // Accepts "0.1", "0.1deg", "0.0017rad"; bare numbers are degrees.
    std::string t = text;
    bool radians = false;
    if (t.size() > 3 && t.compare(t.size() - 3, 3, "rad") == 0) {
        radians = true;
        t = t.substr(0, t.size() - 3);
    } else if (t.size() > 3 && t.compare(t.size() - 3, 3, "deg") == 0) {
        t = t.substr(0, t.size() - 3);
    }
    std::size_t used = 0;
    const double value = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument("cannot parse angle: " + text);
    return radians ? value : deg_to_rad(value);
}

// --- run-scenario --------------------------------------------------------

struct ScenarioConfig {
    std::uint64_t seed = 1;
    ScenarioKind scenario = ScenarioKind::random_platform;
    SensorSetup setup = SensorSetup::ideal;
    std::vector<AttitudeSource> sources;
    std::vector<ModelKind> models;
    std::string output_dir;
    FitOptions fit_options;
    double background_nt = 50000.0;
    double inclination_rad = deg_to_rad(70.0);
    double declination_rad = 0.0;
    GyroErrorParams gyro;
    TrajectoryConfig trajectory;
    SensorSuite sensors;
    std::optional<std::string> calibration_csv;
    std::optional<std::string> validation_csv;
    bool emit_spectra = true;
    bool export_signals = false;
};

ScenarioKind scenario_kind_from_name(const std::string& name) {
    if (name == "random") return ScenarioKind::random_platform;
    if (name == "perpendicular-stress") return ScenarioKind::perpendicular_stress;
    throw std::invalid_argument("scenario must be 'random' or 'perpendicular-stress', got '" +
                                name + "'");
}

const char* scenario_kind_name(ScenarioKind k) {
    return k == ScenarioKind::random_platform ? "random" : "perpendicular-stress";
}

ScenarioConfig parse_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("config", "cannot open config file: " + path, 1);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        fail("config", std::string("invalid JSON: ") + e.what(), 1);
    }

    ScenarioConfig cfg;
    try {
        const int version = j.at("version").get<int>();
        if (version != 1) throw std::invalid_argument("field 'version': expected 1");
        cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.scenario = scenario_kind_from_name(j.at("scenario").get<std::string>());
        cfg.setup = sensor_setup_from_name(j.at("sensor_setup").get<std::string>());
        for (const auto& s : j.at("sources")) {
            cfg.sources.push_back(attitude_source_from_name(s.get<std::string>()));
        }
        for (const auto& m : j.at("models")) {
            cfg.models.push_back(model_kind_from_name(m.get<std::string>()));
        }
        cfg.output_dir = j.at("output_dir").get<std::string>();
        if (cfg.sources.empty()) throw std::invalid_argument("field 'sources': must not be empty");
        if (cfg.models.empty()) throw std::invalid_argument("field 'models': must not be empty");

        if (j.contains("derivative_cutoff_hz")) {
            if (j["derivative_cutoff_hz"].is_null()) {
                cfg.fit_options.derivative_cutoff_hz.reset();
            } else {
                cfg.fit_options.derivative_cutoff_hz = j["derivative_cutoff_hz"].get<double>();
            }
        }
        if (j.contains("target_mode")) {
            const auto mode = j["target_mode"].get<std::string>();
            if (mode == "proxy-subtraction") {
                cfg.fit_options.target_mode = TargetMode::proxy_subtraction;
            } else if (mode == "bandpass") {
                cfg.fit_options.target_mode = TargetMode::bandpass_filtered;
            } else {
                throw std::invalid_argument("field 'target_mode': unknown value '" + mode + "'");
            }
        }
        if (j.contains("background")) {
            const auto& b = j["background"];
            if (b.contains("magnitude_nt")) cfg.background_nt = b["magnitude_nt"].get<double>();
            if (b.contains("inclination_deg")) {
                cfg.inclination_rad = deg_to_rad(b["inclination_deg"].get<double>());
            }
            if (b.contains("declination_deg")) {
                cfg.declination_rad = deg_to_rad(b["declination_deg"].get<double>());
            }
            if (cfg.background_nt <= 0.0) {
                throw std::invalid_argument("field 'background.magnitude_nt': must be positive");
            }
        }
        if (j.contains("gyro")) {
            const auto& g = j["gyro"];
            if (g.contains("arw_rad_per_sqrt_s")) cfg.gyro.arw_rad_per_sqrt_s = g["arw_rad_per_sqrt_s"];
            if (g.contains("bias_sigma_rad_per_s")) cfg.gyro.bias_sigma_rad_per_s = g["bias_sigma_rad_per_s"];
            if (g.contains("bias_tau_s")) cfg.gyro.bias_tau_s = g["bias_tau_s"];
        }
        if (j.contains("trajectory")) {
            const auto& t = j["trajectory"];
            auto get = [&](const char* key, double& target) {
                if (t.contains(key)) target = t[key].get<double>();
            };
            get("sample_rate_hz", cfg.trajectory.sample_rate_hz);
            get("speed_mps", cfg.trajectory.speed_mps);
            get("leg_duration_s", cfg.trajectory.leg_duration_s);
            get("turn_duration_s", cfg.trajectory.turn_duration_s);
            get("burst_duration_s", cfg.trajectory.burst_duration_s);
            get("base_altitude_m", cfg.trajectory.base_altitude_m);
            get("altitude_osc_amp_m", cfg.trajectory.altitude_osc_amp_m);
            get("altitude_osc_period_s", cfg.trajectory.altitude_osc_period_s);
            get("altitude_ramp_m", cfg.trajectory.altitude_ramp_m);
            get("validation_altitude_osc_amp_m", cfg.trajectory.validation_altitude_osc_amp_m);
            get("validation_duration_s", cfg.trajectory.validation_duration_s);
            if (t.contains("laps")) cfg.trajectory.laps = t["laps"].get<int>();
            if (t.contains("survey_lines")) cfg.trajectory.survey_lines = t["survey_lines"].get<int>();
            if (t.contains("start_with_roll")) cfg.trajectory.start_with_roll = t["start_with_roll"].get<bool>();
            if (t.contains("calibration_csv")) cfg.calibration_csv = t["calibration_csv"].get<std::string>();
            if (t.contains("validation_csv")) cfg.validation_csv = t["validation_csv"].get<std::string>();
        }
        if (j.contains("sensors")) {
            // Per-grade overrides of the built-in presets.
            for (const auto& [name, body] : j["sensors"].items()) {
                SensorParams& p = cfg.sensors.of(sensor_grade_from_name(name));
                if (body.contains("sigma_w_nt")) p.noise.sigma_w = body["sigma_w_nt"].get<double>();
                if (body.contains("f_knee_hz")) p.noise.f_knee = body["f_knee_hz"].get<double>();
                if (body.contains("nu")) p.noise.nu = body["nu"].get<double>();
                if (body.contains("f_bw_hz")) p.f_bw_hz = body["f_bw_hz"].get<double>();
                if (body.contains("lambda_t")) p.thermal_compensation = body["lambda_t"].get<double>();
                if (body.contains("noise_penalty_floor")) {
                    p.noise_penalty_floor = body["noise_penalty_floor"].get<double>();
                }
                if (body.contains("dead_zone_half_width_deg")) {
                    p.dead_zone_half_width_rad = deg_to_rad(body["dead_zone_half_width_deg"].get<double>());
                }
                if (body.contains("dead_zone_center_deg")) {
                    p.dead_zone_center_rad = deg_to_rad(body["dead_zone_center_deg"].get<double>());
                }
                if (body.contains("optical_axis")) {
                    const auto a = body["optical_axis"].get<std::vector<double>>();
                    if (a.size() != 3) throw std::invalid_argument("field 'optical_axis': need 3 components");
                    p.optical_axis = Vec3(a[0], a[1], a[2]).normalized();
                }
                if (p.noise.sigma_w < 0.0 || p.f_bw_hz <= 0.0) {
                    throw std::invalid_argument("field 'sensors." + name + "': invalid values");
                }
            }
        }
        if (j.contains("emit_spectra")) cfg.emit_spectra = j["emit_spectra"].get<bool>();
        if (j.contains("export_signals")) cfg.export_signals = j["export_signals"].get<bool>();
    } catch (const json::exception& e) {
        fail("config", std::string("schema error: ") + e.what(), 1);
    } catch (const std::invalid_argument& e) {
        fail("config", e.what(), 1);
    }

    if (const char* env_seed = std::getenv("AEROMAG_SEED")) {
        cfg.seed = std::strtoull(env_seed, nullptr, 10);
    }
    return cfg;
}

struct ComboResult {
    CalibrationResult fit;
    CompensationResult validation;
};

int run_scenario(const std::string& config_path) {
    const ScenarioConfig cfg = parse_scenario_config(config_path);

    Trajectory cal_traj, val_traj;
    try {
        cal_traj = cfg.calibration_csv ? import_trajectory_csv(*cfg.calibration_csv)
                                       : gen_calibration_trajectory(cfg.trajectory, seed_stream(cfg.seed, 1));
        val_traj = cfg.validation_csv ? import_trajectory_csv(*cfg.validation_csv)
                                      : gen_validation_trajectory(cfg.trajectory, seed_stream(cfg.seed, 2));
    } catch (const std::exception& e) {
        fail("trajectory", e.what(), 1);
    }

    const Vec3 be_e = background_field(cfg.background_nt, cfg.inclination_rad, cfg.declination_rad);
    TlCoefficients truth;
    PlatformFieldStats field_stats;
    try {
        const auto samples = background_samples(cal_traj, be_e);
        truth = generate_scenario_coefficients(cfg.scenario, seed_stream(cfg.seed, 3), samples);
        field_stats = platform_field_stats(truth, samples);
    } catch (const std::exception& e) {
        fail("scenario", e.what(), 1);
    }

    OnboardSignals cal, val;
    try {
        cal = simulate_onboard(cal_traj, be_e, truth, cfg.gyro, seed_stream(cfg.seed, 4));
        val = simulate_onboard(val_traj, be_e, truth, cfg.gyro, seed_stream(cfg.seed, 5));
        apply_sensor_setup(cal, cfg.setup, seed_stream(cfg.seed, 6), cfg.sensors);
        apply_sensor_setup(val, cfg.setup, seed_stream(cfg.seed, 7), cfg.sensors);
    } catch (const std::exception& e) {
        fail("simulate", e.what(), 1);
    }

    // Fit every requested model x source combination in parallel.
    std::vector<std::pair<ModelKind, AttitudeSource>> combos;
    for (auto m : cfg.models)
        for (auto s : cfg.sources) combos.emplace_back(m, s);

    std::vector<std::future<ComboResult>> futures;
    futures.reserve(combos.size());
    for (const auto& [model, source] : combos) {
        futures.push_back(std::async(std::launch::async, [&, model, source]() {
            ComboResult r;
            r.fit = model == ModelKind::scalar_1d ? fit_scalar(cal, source, cfg.fit_options)
                                                  : fit_vector(cal, source, cfg.fit_options);
            r.validation = compensate(val, r.fit);
            r.fit.validation = r.validation.stats;
            return r;
        }));
    }
    std::vector<ComboResult> results;
    results.reserve(combos.size());
    for (auto& f : futures) {
        try {
            results.push_back(f.get());
        } catch (const EstimationError& e) {
            fail("fit", e.what(), 2);
        } catch (const std::exception& e) {
            fail("fit", e.what(), 1);
        }
    }

    try {
        fs::create_directories(cfg.output_dir);
        json run;
        run["version"] = 1;
        run["seed"] = cfg.seed;
        run["scenario"] = scenario_kind_name(cfg.scenario);
        run["sensor_setup"] = sensor_setup_name(cfg.setup);
        run["background_nt"] = cfg.background_nt;
        run["ground_truth"] = to_json(truth);
        run["field_stats"] = {{"mean_nt", field_stats.mean_magnitude},
                              {"min_nt", field_stats.min_magnitude},
                              {"max_nt", field_stats.max_magnitude},
                              {"mean_cos_theta", field_stats.mean_cos_theta}};
        run["combos"] = json::array();
        for (std::size_t i = 0; i < combos.size(); ++i) {
            run["combos"].push_back(to_json(results[i].fit));
            const std::string name = std::string("residuals_") + model_kind_name(combos[i].first) +
                                     "_" + attitude_source_name(combos[i].second) + ".csv";
            write_csv((fs::path(cfg.output_dir) / name).string(), {"t", "residual_nt"},
                      {&val.t, &results[i].validation.residual_nt});
        }
        std::ofstream out(fs::path(cfg.output_dir) / "run.json");
        out << run.dump(2) << "\n";

        if (cfg.export_signals) {
            export_signals_csv((fs::path(cfg.output_dir) / "signals_calibration.csv").string(), cal);
            export_signals_csv((fs::path(cfg.output_dir) / "signals_validation.csv").string(), val);
        }

        if (cfg.emit_spectra && cfg.setup != SensorSetup::ideal) {
            // Spectral characterization of the calibration-flight
            // measurement channels.
            std::vector<std::pair<std::string, std::vector<double>>> channels;
            if (!cal.meas_scalar.empty() && cfg.setup != SensorSetup::ideal) {
                channels.emplace_back("scalar", cal.meas_scalar);
            }
            if (!cal.meas_vec.empty()) {
                std::vector<double> x(cal.size());
                for (std::size_t i = 0; i < cal.size(); ++i) x[i] = cal.meas_vec[i].x();
                channels.emplace_back("vector_x", std::move(x));
            }
            for (const auto& [label, series] : channels) {
                const auto asd = welch_asd(series, cal.f_s);
                write_spectral_csv((fs::path(cfg.output_dir) / ("asd_" + label + ".csv")).string(),
                                   asd, "frequency_hz", "asd_nt_per_sqrt_hz");
                const auto taus = default_tau_grid(series.size(), cal.f_s);
                const auto adev = allan_deviation(series, cal.f_s, taus);
                write_spectral_csv((fs::path(cfg.output_dir) / ("adev_" + label + ".csv")).string(),
                                   adev, "tau_s", "adev_nt");
            }
        }
    } catch (const std::exception& e) {
        fail("output", e.what(), 1);
    }

    std::cout << "run-scenario: wrote " << combos.size() << " combination(s) to " << cfg.output_dir
              << "\n";
    return 0;
}

// --- analyze-errors ------------------------------------------------------

int analyze_errors(double ba, double be, const std::string& alpha_text,
                   const std::string& deltab_text, const std::string& theta_grid) {
    double alpha = 0.0, delta_b = 0.0;
    std::vector<double> thetas;
    try {
        if (be <= 0.0) throw std::invalid_argument("--be must be positive");
        if (ba < 0.0) throw std::invalid_argument("--ba must be non-negative");
        alpha = parse_angle(alpha_text);
        delta_b = std::stod(deltab_text);
        std::stringstream ss(theta_grid);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) thetas.push_back(deg_to_rad(std::stod(tok)));
        }
        if (thetas.empty()) throw std::invalid_argument("--theta-grid must list angles in degrees");
    } catch (const std::exception& e) {
        fail("arguments", e.what(), 1);
    }

    std::cout << "theta_deg,taylor_nt,taylor_oracle_nt,proxy_scalar_nt,proxy_scalar_oracle_nt,"
                 "proxy_vector_nt,proxy_vector_oracle_nt,attitude_scalar_nt,"
                 "attitude_scalar_oracle_nt,vector_total_nt,vector_total_oracle_nt\n";
    for (double theta : thetas) {
        const ErrorScenario s{ba, be, theta, alpha, delta_b};
        const auto oracle = exact_vector_oracle(s);
        const double row[11] = {rad_to_deg(theta),
                                taylor_projection_error(s),
                                std::abs(oracle.taylor_projection),
                                proxy_direction_error_scalar(s),
                                oracle.proxy_scalar,
                                proxy_direction_error_vector(s),
                                oracle.proxy_vector,
                                std::abs(scalar_attitude_error(s)),
                                std::abs(oracle.scalar_attitude),
                                vector_error_magnitude(s),
                                oracle.vector_magnitude};
        for (int i = 0; i < 11; ++i) std::cout << format_number(row[i]) << (i < 10 ? "," : "\n");
    }
    return 0;
}

// --- noise-bench ---------------------------------------------------------

int noise_bench(const std::string& grade_name, double duration, double f_s, std::uint64_t seed,
                const std::string& out_dir) {
    SensorGrade grade{};
    try {
        grade = sensor_grade_from_name(grade_name);
        if (duration <= 0.0 || f_s <= 0.0) throw std::invalid_argument("duration and fs must be positive");
    } catch (const std::exception& e) {
        fail("arguments", e.what(), 1);
    }

    try {
        const auto n = static_cast<std::size_t>(duration * f_s);
        // Static background field observed at identity attitude.
        const Vec3 field = background_field(50000.0, deg_to_rad(70.0), 0.0);
        OnboardSignals sig;
        sig.f_s = f_s;
        sig.be_e = field;
        sig.t.resize(n);
        for (std::size_t i = 0; i < n; ++i) sig.t[i] = i / f_s;
        sig.be_b.assign(n, field);
        sig.dbe_b.assign(n, Vec3::Zero());
        sig.ba_b.assign(n, Vec3::Zero());
        sig.bt_b.assign(n, field);
        sig.bt.assign(n, field.norm());
        sig.sensor_temp_c.assign(n, 20.0);
        sig.r_eb.assign(n, Mat3::Identity());
        sig.r_hat_eb.assign(n, Mat3::Identity());
        sig.meas_scalar = sig.bt;
        sig.meas_vec = sig.bt_b;
        sig.meas_valid.assign(n, 1);

        const auto m = measure_series(grade, sig, seed);
        std::vector<double> series;
        if (!m.scalar.empty()) {
            series = m.scalar;
        } else {
            series.resize(n);
            for (std::size_t i = 0; i < n; ++i) series[i] = m.vector[i].x();
        }

        fs::create_directories(out_dir);
        write_csv((fs::path(out_dir) / ("series_" + grade_name + ".csv")).string(), {"t", "value_nt"},
                  {&sig.t, &series});
        const auto asd = welch_asd(series, f_s);
        write_spectral_csv((fs::path(out_dir) / ("asd_" + grade_name + ".csv")).string(), asd,
                           "frequency_hz", "asd_nt_per_sqrt_hz");
        const auto adev = allan_deviation(series, f_s, default_tau_grid(n, f_s));
        write_spectral_csv((fs::path(out_dir) / ("adev_" + grade_name + ".csv")).string(), adev,
                           "tau_s", "adev_nt");
    } catch (const std::exception& e) {
        fail("bench", e.what(), 1);
    }
    std::cout << "noise-bench: wrote series/asd/adev for " << grade_name << " to " << out_dir << "\n";
    return 0;
}

// --- export-trajectory ---------------------------------------------------

int export_trajectory(const std::string& kind, std::uint64_t seed, const std::string& out) {
    try {
        TrajectoryConfig cfg;
        Trajectory traj;
        if (kind == "calibration") {
            traj = gen_calibration_trajectory(cfg, seed);
        } else if (kind == "validation") {
            traj = gen_validation_trajectory(cfg, seed);
        } else {
            fail("arguments", "--kind must be 'calibration' or 'validation'", 1);
        }
        export_trajectory_csv(out, traj);
        std::cout << "export-trajectory: wrote " << traj.size() << " samples to " << out << "\n";
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        fail("trajectory", e.what(), 1);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Airborne magnetometer platform-calibration simulation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run-scenario", "Run a full calibration scenario from a config");
    run->add_option("config", config_path, "Scenario config JSON")->required();

    double ba = 500.0, be = 50000.0;
    std::string alpha = "0.1deg", deltab = "0", theta_grid = "90";
    auto* analyze = app.add_subcommand("analyze-errors", "Closed-form error table with oracle columns");
    analyze->add_option("--ba", ba, "Platform field magnitude [nT]");
    analyze->add_option("--be", be, "Background field magnitude [nT]");
    analyze->add_option("--alpha", alpha, "Attitude error (e.g. 0.1deg or 0.0017rad)");
    analyze->add_option("--deltab", deltab, "Background magnitude error [nT]");
    analyze->add_option("--theta-grid", theta_grid, "Comma-separated theta values [deg]");

    std::string grade = "opm", bench_out = ".";
    double duration = 1024.0, bench_fs = 256.0;
    std::uint64_t bench_seed = 1;
    auto* bench = app.add_subcommand("noise-bench", "Static-field sensor bench: series, ASD, ADEV");
    bench->add_option("--grade", grade, "Sensor grade: opm|fluxgate|nv-field|nv-lab");
    bench->add_option("--duration", duration, "Duration [s]");
    bench->add_option("--fs", bench_fs, "Sampling rate [Hz]");
    bench->add_option("--seed", bench_seed, "Noise seed");
    bench->add_option("--out", bench_out, "Output directory");

    std::string traj_kind = "calibration", traj_out = "trajectory.csv";
    std::uint64_t traj_seed = 1;
    auto* traj = app.add_subcommand("export-trajectory", "Write a generated trajectory as CSV");
    traj->add_option("--kind", traj_kind, "calibration|validation");
    traj->add_option("--seed", traj_seed, "Trajectory seed");
    traj->add_option("--out", traj_out, "Output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_scenario(config_path);
        if (analyze->parsed()) return analyze_errors(ba, be, alpha, deltab, theta_grid);
        if (bench->parsed()) return noise_bench(grade, duration, bench_fs, bench_seed, bench_out);
        if (traj->parsed()) return export_trajectory(traj_kind, traj_seed, traj_out);
    } catch (const StageError& e) {
        std::cerr << "error [stage=" << e.stage << "]: " << e.message << "\n";
        return e.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
