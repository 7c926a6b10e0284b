// Magnetometer error models for four instrument grades: a scalar
// optically pumped magnetometer (OPM), a fluxgate vector sensor, and
// field- and lab-grade nitrogen-vacancy (NV) vector sensors.
//
// All grades share one pipeline: deterministic sensor physics, added
// stochastic noise (geometrically penalized where the sensing principle
// is orientation-dependent), then a first-order bandwidth filter.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aeromag/flight.hpp"
#include "aeromag/frames.hpp"
#include "aeromag/noise.hpp"
#include "aeromag/random.hpp"

namespace aeromag {

enum class SensorGrade { opm, fluxgate, nv_field, nv_lab };

struct SensorParams {
    NoiseParams noise;
    double f_bw_hz = 0.0;

    // Geometric errors: coil/axis coupling and per-axis scale.
    Mat3 coupling = Mat3::Identity();
    Vec3 scale = Vec3::Ones();

    // Thermal model (fluxgate): per-axis gain (1/K) and offset (nT/K)
    // against the reference temperature.
    Vec3 thermal_gain_per_k = Vec3::Zero();
    Vec3 thermal_offset_nt_per_k = Vec3::Zero();
    double reference_temp_c = 20.0;

    // OPM heading error harmonics (nT) and dead-zone geometry.
    double heading_c1 = 0.0;
    double heading_c2 = 0.0;
    double heading_c4 = 0.0;
    Vec3 optical_axis = Vec3(1.0, 0.0, 1.0).normalized();
    double dead_zone_center_rad = kPi / 2.0;
    double dead_zone_half_width_rad = deg_to_rad(5.0);
    double lock_noise_gain = 100.0;  // loss-of-lock sigma = gain * sigma_w * sqrt(f_s/2)

    // Noise-penalty regularizer for orientation-dependent sensitivity.
    double noise_penalty_floor = 1.0;  // 1.0 disables the penalty

    // NV zero-field-splitting thermal term.
    double thermal_compensation = 1.0;          // lambda_t, 1 = fully compensated
    double zfs_shift_hz_per_k = -74.2e3;        // dD/dT
    double gyromagnetic_hz_per_nt = 28.024;     // electron gyromagnetic ratio, 28.024 GHz/T
    Vec3 nv_axis = Vec3(1.0, 1.0, 1.0).normalized();
};

/// Table of built-in grade parameters (white floor nT/sqrt(Hz), knee
/// Hz, slope, bandwidth Hz, NV thermal compensation).
inline SensorParams sensor_preset(SensorGrade grade) {
    SensorParams p;
    switch (grade) {
        case SensorGrade::opm:
            p.noise = {0.003, 0.5, 1.0, 1e-6};
            p.f_bw_hz = 400.0;
            p.heading_c1 = 0.2;
            p.heading_c2 = 2.5;
            p.heading_c4 = 0.5;
            p.noise_penalty_floor = 0.1;
            break;
        case SensorGrade::fluxgate: {
            p.noise = {0.022, 1.0, 1.0, 1e-6};
            p.f_bw_hz = 60.0;
            // Non-orthogonality ~0.05 deg and 50 ppm scale error;
            // static misalignment is absorbed by the calibration, so
            // these mostly exercise the model.
            const double c = std::sin(deg_to_rad(0.05));
            p.coupling << 1.0 + 50e-6, c, -c,
                          0.0, 1.0 - 50e-6, c,
                          0.0, 0.0, 1.0 + 50e-6;
            p.thermal_gain_per_k = Vec3(30e-6, 30e-6, 30e-6);
            p.thermal_offset_nt_per_k = Vec3(0.1, 0.1, 0.1);
            break;
        }
        case SensorGrade::nv_field:
            p.noise = {0.5, 10.0, 2.0, 1e-6};
            p.f_bw_hz = 200.0;
            p.thermal_compensation = 0.0;
            p.noise_penalty_floor = 0.15;
            break;
        case SensorGrade::nv_lab: {
            p.noise = {0.0009, 15.0, 1.5, 1e-6};
            p.f_bw_hz = 1000.0;
            p.thermal_compensation = 0.995;
            p.noise_penalty_floor = 0.15;
            const double c = std::sin(deg_to_rad(0.02));
            p.coupling << 1.0, c, -c,
                          0.0, 1.0, c,
                          0.0, 0.0, 1.0;
            p.scale = Vec3(1.0 + 20e-6, 1.0 - 20e-6, 1.0 + 20e-6);
            break;
        }
    }
    return p;
}

inline SensorGrade sensor_grade_from_name(std::string_view name) {
    if (name == "opm") return SensorGrade::opm;
    if (name == "fluxgate") return SensorGrade::fluxgate;
    if (name == "nv-field") return SensorGrade::nv_field;
    if (name == "nv-lab") return SensorGrade::nv_lab;
    throw std::invalid_argument("unknown sensor grade: " + std::string(name));
}

inline const char* sensor_grade_name(SensorGrade g) {
    switch (g) {
        case SensorGrade::opm: return "opm";
        case SensorGrade::fluxgate: return "fluxgate";
        case SensorGrade::nv_field: return "nv-field";
        case SensorGrade::nv_lab: return "nv-lab";
    }
    return "?";
}

struct OpmState {
    bool locked = true;
    Vec3 axis = Vec3(1.0, 0.0, 1.0).normalized();
};

struct ThermalState {
    double temperature_c = 20.0;
    double reference_c = 20.0;
    double delta() const { return temperature_c - reference_c; }
};

/// Deterministic OPM heading error, a multi-harmonic expansion in the
/// angle psi between the field and the optical axis:
/// c1*cos(psi) + c2*cos(2 psi) + c4*cos(4 psi).
inline double opm_heading_error(double psi, const SensorParams& p) {
    return p.heading_c1 * std::cos(psi) + p.heading_c2 * std::cos(2.0 * psi) +
           p.heading_c4 * std::cos(4.0 * psi);
}

struct OpmSample {
    double value = 0.0;
    bool valid = true;
};

/// One OPM measurement: |B| plus the heading error plus the noise
/// sample amplified by 1/max(|cos(psi)|, floor). Inside the dead zone
/// the sensor loses lock and returns high-variance noise around |B|
/// (lock_noise_unit is a standard normal draw); it re-locks outside.
inline OpmSample opm_measure(const Vec3& bt_b, OpmState& state, const SensorParams& p,
                             double noise_sample, double lock_noise_unit, double f_s) {
    const double mag = bt_b.norm();
    if (mag <= 0.0) throw std::domain_error("opm_measure: zero field");
    const double psi = angle_between(bt_b, state.axis);
    if (std::abs(psi - p.dead_zone_center_rad) <= p.dead_zone_half_width_rad) {
        state.locked = false;
        const double sigma = p.lock_noise_gain * p.noise.sigma_w * std::sqrt(f_s / 2.0);
        return {mag + sigma * lock_noise_unit, false};
    }
    state.locked = true;
    const double penalty = 1.0 / std::max(std::abs(std::cos(psi)), p.noise_penalty_floor);
    return {mag + opm_heading_error(psi, p) + noise_sample * penalty, true};
}

/// Fluxgate deterministic physics: coil coupling, thermal gain, and
/// thermal offset: (M*B) o (1 + k_s*dT) + k_o*dT.
inline Vec3 fluxgate_measure(const Vec3& bt_b, const ThermalState& th, const SensorParams& p) {
    const double dT = th.delta();
    const Vec3 gained = (p.coupling * bt_b).cwiseProduct(Vec3::Ones() + p.thermal_gain_per_k * dT);
    return gained + p.thermal_offset_nt_per_k * dT;
}

/// NV deterministic physics: coupling and scale plus the thermal
/// zero-field-splitting shift along the crystal axis:
/// (M*B) o s + ((1 - lambda_t)/gamma_e) * (dD/dT * dT) * n_nv.
inline Vec3 nv_measure(const Vec3& bt_b, const ThermalState& th, const SensorParams& p) {
    const Vec3 geo = (p.coupling * bt_b).cwiseProduct(p.scale);
    const double shift =
        (1.0 - p.thermal_compensation) / p.gyromagnetic_hz_per_nt * p.zfs_shift_hz_per_k * th.delta();
    return geo + shift * p.nv_axis;
}

/// Scalar channel of a vector sensor: the measured magnitude.
inline double nv_scalar(const Vec3& bv) { return bv.norm(); }

/// Corrupted measurement series of one sensor grade. Channels not
/// produced by the grade stay empty.
struct MeasuredSeries {
    std::vector<double> scalar;
    std::vector<Vec3> vector;
    std::vector<std::uint8_t> valid;
};

/// Runs the full error pipeline of one grade over clean onboard
/// signals: physics, penalized stochastic noise, bandwidth filter.
/// Deterministic in the seed. OPM produces the scalar channel only,
/// the fluxgate the vector channel only, NV grades both (the scalar is
/// the magnitude of the filtered vector).
inline MeasuredSeries measure_series(SensorGrade grade, const OnboardSignals& clean,
                                     std::uint64_t seed,
                                     const SensorParams* override_params = nullptr) {
    const SensorParams p = override_params ? *override_params : sensor_preset(grade);
    const std::size_t n = clean.size();
    if (n == 0) return {};
    const BandwidthParams bw{p.f_bw_hz, clean.f_s};

    MeasuredSeries out;
    out.valid.assign(n, 1);

    if (grade == SensorGrade::opm) {
        const auto noise = synth_noise(p.noise, n, clean.f_s, seed_stream(seed, 1));
        auto lock_rng = make_engine(seed, 2);
        std::normal_distribution<double> gauss(0.0, 1.0);
        OpmState state{true, p.optical_axis};
        std::vector<double> raw(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto s = opm_measure(clean.bt_b[i], state, p, noise[i], gauss(lock_rng), clean.f_s);
            raw[i] = s.value;
            out.valid[i] = s.valid ? 1 : 0;
        }
        out.scalar = bandwidth_filter(raw, bw);
        return out;
    }

    // Vector grades: per-axis noise streams.
    std::vector<std::vector<double>> noise(3);
    for (int axis = 0; axis < 3; ++axis) {
        noise[axis] = synth_noise(p.noise, n, clean.f_s, seed_stream(seed, 3 + axis));
    }
    std::vector<std::vector<double>> raw(3, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const ThermalState th{clean.sensor_temp_c[i], p.reference_temp_c};
        Vec3 phys;
        double penalty = 1.0;
        if (grade == SensorGrade::fluxgate) {
            phys = fluxgate_measure(clean.bt_b[i], th, p);
        } else {
            phys = nv_measure(clean.bt_b[i], th, p);
            const double psi = angle_between(clean.bt_b[i], p.nv_axis);
            penalty = 1.0 / std::max(std::abs(std::cos(psi)), p.noise_penalty_floor);
        }
        for (int axis = 0; axis < 3; ++axis) raw[axis][i] = phys(axis) + penalty * noise[axis][i];
    }
    std::vector<std::vector<double>> filtered(3);
    for (int axis = 0; axis < 3; ++axis) filtered[axis] = bandwidth_filter(raw[axis], bw);
    out.vector.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.vector[i] = Vec3(filtered[0][i], filtered[1][i], filtered[2][i]);
    }
    if (grade == SensorGrade::nv_field || grade == SensorGrade::nv_lab) {
        out.scalar.resize(n);
        for (std::size_t i = 0; i < n; ++i) out.scalar[i] = nv_scalar(out.vector[i]);
    }
    return out;
}

/// Sensor setups evaluated by the calibration study: ideal channels,
/// the classical fluxgate + OPM pair, or a single NV sensor providing
/// both channels.
enum class SensorSetup { ideal, fluxgate_opm, nv_field, nv_lab };

inline SensorSetup sensor_setup_from_name(std::string_view name) {
    if (name == "ideal") return SensorSetup::ideal;
    if (name == "fluxgate+opm") return SensorSetup::fluxgate_opm;
    if (name == "nv-field") return SensorSetup::nv_field;
    if (name == "nv-lab") return SensorSetup::nv_lab;
    throw std::invalid_argument("unknown sensor setup: " + std::string(name));
}

inline const char* sensor_setup_name(SensorSetup s) {
    switch (s) {
        case SensorSetup::ideal: return "ideal";
        case SensorSetup::fluxgate_opm: return "fluxgate+opm";
        case SensorSetup::nv_field: return "nv-field";
        case SensorSetup::nv_lab: return "nv-lab";
    }
    return "?";
}

/// Parameters for every grade a setup may use; defaults are the
/// built-in presets, individually overridable.
struct SensorSuite {
    SensorParams opm = sensor_preset(SensorGrade::opm);
    SensorParams fluxgate = sensor_preset(SensorGrade::fluxgate);
    SensorParams nv_field = sensor_preset(SensorGrade::nv_field);
    SensorParams nv_lab = sensor_preset(SensorGrade::nv_lab);

    const SensorParams& of(SensorGrade g) const {
        switch (g) {
            case SensorGrade::opm: return opm;
            case SensorGrade::fluxgate: return fluxgate;
            case SensorGrade::nv_field: return nv_field;
            case SensorGrade::nv_lab: return nv_lab;
        }
        return opm;
    }
    SensorParams& of(SensorGrade g) {
        return const_cast<SensorParams&>(static_cast<const SensorSuite*>(this)->of(g));
    }
};

/// Overwrites the measurement channels of `sig` with the corrupted
/// output of the chosen setup. The ideal setup leaves the clean copies.
inline void apply_sensor_setup(OnboardSignals& sig, SensorSetup setup, std::uint64_t seed,
                               const SensorSuite& suite = {}) {
    switch (setup) {
        case SensorSetup::ideal:
            return;
        case SensorSetup::fluxgate_opm: {
            auto scalar = measure_series(SensorGrade::opm, sig, seed_stream(seed, 0x09), &suite.opm);
            auto vec =
                measure_series(SensorGrade::fluxgate, sig, seed_stream(seed, 0x0A), &suite.fluxgate);
            sig.meas_scalar = std::move(scalar.scalar);
            sig.meas_vec = std::move(vec.vector);
            sig.meas_valid = std::move(scalar.valid);
            return;
        }
        case SensorSetup::nv_field:
        case SensorSetup::nv_lab: {
            const auto grade =
                setup == SensorSetup::nv_field ? SensorGrade::nv_field : SensorGrade::nv_lab;
            auto m = measure_series(grade, sig, seed_stream(seed, 0x0B), &suite.of(grade));
            sig.meas_scalar = std::move(m.scalar);
            sig.meas_vec = std::move(m.vector);
            sig.meas_valid = std::move(m.valid);
            return;
        }
    }
}

}  // namespace aeromag
