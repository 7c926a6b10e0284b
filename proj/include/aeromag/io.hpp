// CSV and JSON serialization for scenario artifacts. Numeric output is
// formatted deterministically so identical runs produce byte-identical
// files.
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aeromag/calibration.hpp"
#include "aeromag/flight.hpp"
#include "aeromag/spectral.hpp"
#include "aeromag/tl_model.hpp"

namespace aeromag {

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// Writes columns of equal length as CSV with '.' decimal separator and
/// a header row.
inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<const std::vector<double>*>& columns) {
    if (header.size() != columns.size()) {
        throw std::invalid_argument("write_csv: header/column count mismatch");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    for (std::size_t c = 0; c < header.size(); ++c) {
        out << header[c] << (c + 1 < header.size() ? "," : "\n");
    }
    const std::size_t rows = columns.empty() ? 0 : columns.front()->size();
    for (const auto* col : columns) {
        if (col->size() != rows) throw std::invalid_argument("write_csv: ragged columns");
    }
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            out << format_number((*columns[c])[r]) << (c + 1 < columns.size() ? "," : "\n");
        }
    }
}

inline void write_spectral_csv(const std::string& path, const SpectralEstimate& est,
                               const std::string& x_name, const std::string& y_name) {
    write_csv(path, {x_name, y_name}, {&est.grid, &est.value});
}

// --- Tolles-Lawson coefficients <-> flat JSON ---------------------------

inline nlohmann::json to_json(const TlCoefficients& c) {
    nlohmann::json j;
    j["p"] = {c.permanent.x(), c.permanent.y(), c.permanent.z()};
    std::vector<double> n_flat, e_flat;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            n_flat.push_back(c.induced(i, k));
            e_flat.push_back(c.eddy(i, k));
        }
    j["N"] = n_flat;
    j["E"] = e_flat;
    return j;
}

inline TlCoefficients tl_coefficients_from_json(const nlohmann::json& j) {
    TlCoefficients c;
    const auto p = j.at("p").get<std::vector<double>>();
    const auto n = j.at("N").get<std::vector<double>>();
    const auto e = j.at("E").get<std::vector<double>>();
    if (p.size() != 3 || n.size() != 9 || e.size() != 9) {
        throw std::invalid_argument("TlCoefficients: expected p[3], N[9], E[9]");
    }
    c.permanent = Vec3(p[0], p[1], p[2]);
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            c.induced(i, k) = n[3 * i + k];
            c.eddy(i, k) = e[3 * i + k];
        }
    return c;
}

inline nlohmann::json to_json(const ResidualStats& st) {
    return {{"mean", st.mean}, {"std", st.stddev}, {"max", st.max}, {"count", st.count}};
}

inline nlohmann::json to_json(const CalibrationResult& r) {
    nlohmann::json j;
    j["model"] = model_kind_name(r.model);
    j["source"] = attitude_source_name(r.source);
    j["coefficients"] = std::vector<double>(r.coefficients.data(),
                                            r.coefficients.data() + r.coefficients.size());
    j["condition_number"] = r.condition_number;
    j["ill_conditioned"] = r.ill_conditioned;
    j["dropped_samples"] = r.dropped_samples;
    j["calibration"] = to_json(r.calibration);
    if (r.validation) j["validation"] = to_json(*r.validation);
    return j;
}

// --- Trajectory CSV ------------------------------------------------------
// Columns: t [s], roll, pitch, yaw [deg], altitude [m].

inline void export_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::vector<double> roll(traj.size()), pitch(traj.size()), yaw(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        roll[i] = rad_to_deg(traj.attitude[i].roll);
        pitch[i] = rad_to_deg(traj.attitude[i].pitch);
        yaw[i] = rad_to_deg(traj.attitude[i].yaw);
    }
    write_csv(path, {"t", "roll", "pitch", "yaw", "altitude"},
              {&traj.t, &roll, &pitch, &yaw, &traj.altitude_m});
}

/// Reads a trajectory from CSV columns t, roll, pitch, yaw, altitude
/// (angles in degrees). Attitude rates are recovered by central
/// differences; the sample rate comes from the time column, which must
/// be uniform.
inline Trajectory import_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("import_trajectory_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("import_trajectory_csv: empty file");

    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(tok);
        return out;
    };
    const auto header = split(line);
    const std::vector<std::string> expected = {"t", "roll", "pitch", "yaw", "altitude"};
    if (header != expected) {
        throw std::runtime_error("import_trajectory_csv: header must be t,roll,pitch,yaw,altitude");
    }

    Trajectory traj;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != 5) throw std::runtime_error("import_trajectory_csv: malformed row");
        traj.t.push_back(std::stod(cells[0]));
        EulerAttitude att;
        att.roll = deg_to_rad(std::stod(cells[1]));
        att.pitch = deg_to_rad(std::stod(cells[2]));
        att.yaw = deg_to_rad(std::stod(cells[3]));
        traj.attitude.push_back(att);
        traj.altitude_m.push_back(std::stod(cells[4]));
    }
    const std::size_t n = traj.t.size();
    if (n < 3) throw std::runtime_error("import_trajectory_csv: need at least 3 samples");
    const double dt = traj.t[1] - traj.t[0];
    if (!(dt > 0.0)) throw std::runtime_error("import_trajectory_csv: non-increasing time");
    for (std::size_t i = 2; i < n; ++i) {
        if (std::abs((traj.t[i] - traj.t[i - 1]) - dt) > 1e-6 * dt + 1e-9) {
            throw std::runtime_error("import_trajectory_csv: non-uniform sampling");
        }
    }
    traj.f_s = 1.0 / dt;
    traj.r_eb.resize(n);
    traj.euler_rates.assign(n, Vec3::Zero());
    traj.position_ned.assign(n, Vec3::Zero());
    traj.excitation_roll.assign(n, 0.0);
    traj.excitation_pitch.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) traj.r_eb[i] = euler_to_rotation(traj.attitude[i]);
    auto central = [&](auto get, std::size_t i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 >= n ? n - 1 : i + 1;
        return (get(hi) - get(lo)) / (traj.t[hi] - traj.t[lo]);
    };
    for (std::size_t i = 0; i < n; ++i) {
        traj.euler_rates[i] =
            Vec3(central([&](std::size_t k) { return traj.attitude[k].roll; }, i),
                 central([&](std::size_t k) { return traj.attitude[k].pitch; }, i),
                 central([&](std::size_t k) { return traj.attitude[k].yaw; }, i));
    }
    return traj;
}

/// Onboard signal export: one row per sample with the clean and
/// measured channels plus the INS attitude-reference error (degrees,
/// body-frame roll/pitch/yaw of the error rotation).
inline void export_signals_csv(const std::string& path, const OnboardSignals& sig) {
    const std::size_t n = sig.size();
    std::vector<double> cols[16];
    for (auto& c : cols) c.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        cols[0][i] = sig.t[i];
        for (int a = 0; a < 3; ++a) {
            cols[1 + a][i] = sig.be_b[i](a);
            cols[4 + a][i] = sig.bt_b[i](a);
            cols[7 + a][i] = sig.meas_vec[i](a);
        }
        cols[10][i] = sig.bt[i];
        cols[11][i] = sig.meas_scalar[i];
        cols[12][i] = sig.sensor_temp_c[i];
        const EulerAttitude err = rotation_to_euler(sig.r_eb[i].transpose() * sig.r_hat_eb[i]);
        cols[13][i] = rad_to_deg(err.roll);
        cols[14][i] = rad_to_deg(err.pitch);
        cols[15][i] = rad_to_deg(err.yaw);
    }
    write_csv(path,
              {"t", "be_b_x", "be_b_y", "be_b_z", "bt_b_x", "bt_b_y", "bt_b_z", "meas_x", "meas_y",
               "meas_z", "bt", "meas_scalar", "sensor_temp_c", "ins_err_roll_deg",
               "ins_err_pitch_deg", "ins_err_yaw_deg"},
              {&cols[0], &cols[1], &cols[2], &cols[3], &cols[4], &cols[5], &cols[6], &cols[7],
               &cols[8], &cols[9], &cols[10], &cols[11], &cols[12], &cols[13], &cols[14],
               &cols[15]});
}

}  // namespace aeromag
