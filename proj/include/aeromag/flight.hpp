// Flight and onboard-signal simulation.
//
// Two deterministic trajectory generators (an attitude-excitation
// calibration square and a survey-style validation pattern), an
// altitude-driven sensor temperature model, tactical-grade INS attitude
// drift, and the clean body-frame magnetic signals produced by a
// Tolles-Lawson platform field in a uniform background.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aeromag/frames.hpp"
#include "aeromag/random.hpp"
#include "aeromag/tl_model.hpp"

namespace aeromag {

struct TrajectoryConfig {
    double sample_rate_hz = 20.0;
    double speed_mps = 60.0;

    // Calibration square: `laps` circuits of four straight legs joined
    // by coordinated left turns. Each leg carries one windowed
    // excitation burst, alternating roll and pitch between legs.
    int laps = 5;
    double leg_duration_s = 18.0;
    double turn_duration_s = 15.0;
    double burst_duration_s = 12.0;
    double roll_swing_up_min_deg = 8.0;    // positive roll extent of a burst
    double roll_swing_up_max_deg = 14.0;
    double roll_swing_down_min_deg = 25.0;  // negative roll extent
    double roll_swing_down_max_deg = 54.0;
    double pitch_swing_min_deg = 6.5;
    double pitch_swing_max_deg = 9.5;
    bool start_with_roll = true;

    // Attitude envelopes; generation fails if a draw could exceed them.
    double roll_min_deg = -55.0;
    double roll_max_deg = 15.0;
    double pitch_limit_deg = 10.0;

    // Validation survey: parallel lines joined by 180-degree turns.
    int survey_lines = 10;
    double validation_duration_s = 3480.0;
    double survey_turn_duration_s = 30.0;

    // Altitude profile: base + oscillation + optional linear ramp. The
    // calibration flight oscillates to exercise the thermal model; the
    // validation survey holds altitude by default.
    double base_altitude_m = 300.0;
    double altitude_osc_amp_m = 50.0;
    double altitude_osc_period_s = 150.0;
    double altitude_ramp_m = 0.0;
    double validation_altitude_osc_amp_m = 0.0;
};

struct Trajectory {
    double f_s = 20.0;
    std::vector<double> t;
    std::vector<double> altitude_m;
    std::vector<EulerAttitude> attitude;
    std::vector<Vec3> euler_rates;  // (roll, pitch, yaw) rates, rad/s
    std::vector<Vec3> position_ned;
    std::vector<Mat3> r_eb;
    // Excitation-burst components of roll/pitch (rad), zero elsewhere;
    // used to count maneuvers independently of turn banking.
    std::vector<double> excitation_roll;
    std::vector<double> excitation_pitch;
    // Time spans of bursts and turns, for analyses that need to
    // separate maneuvering from straight-and-level flight.
    std::vector<std::pair<double, double>> maneuver_windows;

    std::size_t size() const { return t.size(); }
};

/// Tactical-grade gyro error model: white angle random walk plus a
/// first-order Gauss-Markov bias (initialized at zero, i.e. the bias
/// estimated at INS alignment has been removed).
struct GyroErrorParams {
    double arw_rad_per_sqrt_s = 3.6e-5;
    double bias_sigma_rad_per_s = 4.8e-6;
    double bias_tau_s = 3600.0;
};

/// Clean and sensor-corrupted onboard series at a fixed sample rate.
/// The meas_* channels start as copies of the clean signals; sensor
/// models overwrite them.
struct OnboardSignals {
    double f_s = 20.0;
    Vec3 be_e = Vec3::Zero();  // uniform background field, Earth frame
    std::vector<double> t;
    std::vector<Vec3> be_b;    // true background field, body frame
    std::vector<Vec3> dbe_b;   // analytic rate of be_b
    std::vector<Vec3> ba_b;    // platform field
    std::vector<Vec3> bt_b;    // total field
    std::vector<double> bt;    // |bt_b|
    std::vector<double> sensor_temp_c;
    std::vector<Mat3> r_eb;      // true attitude
    std::vector<Mat3> r_hat_eb;  // INS-estimated attitude
    std::vector<double> meas_scalar;
    std::vector<Vec3> meas_vec;
    std::vector<std::uint8_t> meas_valid;

    std::size_t size() const { return t.size(); }
};

/// Background field vector in NED from inclination/declination.
inline Vec3 background_field(double magnitude_nt, double inclination_rad,
                             double declination_rad) {
    const double ch = std::cos(inclination_rad);
    return magnitude_nt * Vec3(ch * std::cos(declination_rad), ch * std::sin(declination_rad),
                               std::sin(inclination_rad));
}

namespace detail {

// Quintic smoothstep and derivatives for turn profiles. The second
// derivative vanishes at both ends, so the coordinated bank angle and
// its rate stay continuous at turn entry and exit.
inline double smoothstep(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }
inline double smoothstep_d(double s) { return 30.0 * s * s * (1.0 - s) * (1.0 - s); }
inline double smoothstep_dd(double s) { return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s); }

constexpr double kGravity = 9.80665;  // m/s^2

struct AttitudeSample {
    double value = 0.0;
    double rate = 0.0;
};

// One excitation burst: two smooth half-cycle lobes (sin^4 bumps) of
// opposite sign, realizing the drawn swing amplitudes exactly. The
// bump is C2 at the lobe boundaries, keeping angular rate and
// acceleration continuous. s in [0, duration].
inline AttitudeSample burst_profile(double s, double duration, double amp_pos, double amp_neg,
                                    bool positive_first) {
    const double half = 0.5 * duration;
    const bool in_first = s < half;
    const double local = in_first ? s : s - half;
    const double amp = (in_first == positive_first) ? amp_pos : -amp_neg;
    const double x = kPi * local / half;
    const double sn = std::sin(x);
    AttitudeSample out;
    out.value = amp * sn * sn * sn * sn;
    out.rate = amp * (kPi / half) * 4.0 * sn * sn * sn * std::cos(x);
    return out;
}

struct BurstSpec {
    double start = 0.0;
    double duration = 0.0;
    bool is_roll = true;
    bool positive_first = true;
    double amp_pos = 0.0;
    double amp_neg = 0.0;
};

struct TurnSpec {
    double start = 0.0;
    double duration = 0.0;
    double yaw_from = 0.0;
    double yaw_change = 0.0;  // signed
};

inline void check_calibration_config(const TrajectoryConfig& cfg) {
    if (cfg.laps < 1 || cfg.sample_rate_hz <= 0.0 || cfg.speed_mps <= 0.0) {
        throw std::invalid_argument("trajectory config: non-positive base parameter");
    }
    if (cfg.burst_duration_s + 2.0 > cfg.leg_duration_s) {
        throw std::invalid_argument("trajectory config: burst does not fit inside a leg");
    }
    if (cfg.roll_swing_down_max_deg > -cfg.roll_min_deg || cfg.roll_swing_up_max_deg > cfg.roll_max_deg) {
        throw std::invalid_argument("trajectory config: roll swings exceed the roll envelope");
    }
    if (cfg.pitch_swing_max_deg > cfg.pitch_limit_deg) {
        throw std::invalid_argument("trajectory config: pitch swings exceed the pitch envelope");
    }
    if (cfg.roll_swing_up_min_deg > cfg.roll_swing_up_max_deg ||
        cfg.roll_swing_down_min_deg > cfg.roll_swing_down_max_deg ||
        cfg.pitch_swing_min_deg > cfg.pitch_swing_max_deg) {
        throw std::invalid_argument("trajectory config: swing range inverted");
    }
}

inline double altitude_at(const TrajectoryConfig& cfg, double t, double total, double osc_amp) {
    double h = cfg.base_altitude_m;
    if (cfg.altitude_osc_period_s > 0.0) {
        h += osc_amp * std::sin(2.0 * kPi * t / cfg.altitude_osc_period_s);
    }
    if (total > 0.0) h += cfg.altitude_ramp_m * (t / total);
    return h;
}

}  // namespace detail

/// Calibration trajectory: `laps` square circuits at constant speed,
/// coordinated left turns between legs, and one roll or pitch
/// excitation burst per leg (alternating). Deterministic in the seed.
inline Trajectory gen_calibration_trajectory(const TrajectoryConfig& cfg, std::uint64_t seed) {
    detail::check_calibration_config(cfg);
    auto rng = make_engine(seed, 0xCA11ULL);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    const double lap = 4.0 * (cfg.leg_duration_s + cfg.turn_duration_s);
    const double total = cfg.laps * lap;
    const auto n = static_cast<std::size_t>(std::llround(total * cfg.sample_rate_hz));

    // Precompute the burst and turn schedule.
    std::vector<detail::BurstSpec> bursts;
    std::vector<detail::TurnSpec> turns;
    double yaw = 0.0;
    int leg_index = 0;
    for (int lap_i = 0; lap_i < cfg.laps; ++lap_i) {
        for (int leg_i = 0; leg_i < 4; ++leg_i) {
            const double leg_start = lap_i * lap + leg_i * (cfg.leg_duration_s + cfg.turn_duration_s);
            detail::BurstSpec b;
            b.duration = cfg.burst_duration_s;
            const double slack = cfg.leg_duration_s - b.duration - 2.0;
            b.start = leg_start + 1.0 + slack * u01(rng);
            b.is_roll = (leg_index % 2 == 0) == cfg.start_with_roll;
            b.positive_first = u01(rng) < 0.5;
            if (b.is_roll) {
                b.amp_pos = deg_to_rad(cfg.roll_swing_up_min_deg +
                                       (cfg.roll_swing_up_max_deg - cfg.roll_swing_up_min_deg) * u01(rng));
                b.amp_neg = deg_to_rad(cfg.roll_swing_down_min_deg +
                                       (cfg.roll_swing_down_max_deg - cfg.roll_swing_down_min_deg) * u01(rng));
            } else {
                const double a = deg_to_rad(cfg.pitch_swing_min_deg +
                                            (cfg.pitch_swing_max_deg - cfg.pitch_swing_min_deg) * u01(rng));
                b.amp_pos = a;
                b.amp_neg = a;
            }
            bursts.push_back(b);
            ++leg_index;

            detail::TurnSpec turn;
            turn.start = leg_start + cfg.leg_duration_s;
            turn.duration = cfg.turn_duration_s;
            turn.yaw_from = yaw;
            turn.yaw_change = -kPi / 2.0;  // left-hand square
            turns.push_back(turn);
            yaw += turn.yaw_change;
        }
    }

    Trajectory traj;
    traj.f_s = cfg.sample_rate_hz;
    traj.t.resize(n);
    traj.altitude_m.resize(n);
    traj.attitude.resize(n);
    traj.euler_rates.resize(n);
    traj.position_ned.resize(n);
    traj.r_eb.resize(n);
    traj.excitation_roll.assign(n, 0.0);
    traj.excitation_pitch.assign(n, 0.0);
    for (const auto& b : bursts) traj.maneuver_windows.emplace_back(b.start, b.start + b.duration);
    for (const auto& tr : turns) traj.maneuver_windows.emplace_back(tr.start, tr.start + tr.duration);

    std::size_t burst_i = 0, turn_i = 0;
    Vec3 pos = Vec3::Zero();
    const double dt = 1.0 / cfg.sample_rate_hz;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = i * dt;
        traj.t[i] = t;
        traj.altitude_m[i] = detail::altitude_at(cfg, t, total, cfg.altitude_osc_amp_m);

        while (burst_i + 1 < bursts.size() && t >= bursts[burst_i].start + bursts[burst_i].duration) ++burst_i;
        while (turn_i + 1 < turns.size() && t >= turns[turn_i].start + turns[turn_i].duration) ++turn_i;

        EulerAttitude att;
        Vec3 rates = Vec3::Zero();

        const auto& turn = turns[turn_i];
        if (t >= turn.start && t < turn.start + turn.duration) {
            const double s = (t - turn.start) / turn.duration;
            att.yaw = turn.yaw_from + turn.yaw_change * detail::smoothstep(s);
            const double yaw_rate = turn.yaw_change * detail::smoothstep_d(s) / turn.duration;
            const double yaw_acc = turn.yaw_change * detail::smoothstep_dd(s) / (turn.duration * turn.duration);
            rates.z() = yaw_rate;
            // Coordinated bank for the instantaneous turn rate.
            const double g = detail::kGravity;
            const double uu = cfg.speed_mps * yaw_rate / g;
            att.roll = std::atan(uu);
            rates.x() = (cfg.speed_mps * yaw_acc / g) / (1.0 + uu * uu);
        } else {
            // Straight leg: hold the heading reached after the last
            // completed turn.
            att.yaw = (t >= turn.start + turn.duration) ? turn.yaw_from + turn.yaw_change
                                                        : turn.yaw_from;
        }

        const auto& b = bursts[burst_i];
        if (t >= b.start && t < b.start + b.duration) {
            const auto prof = detail::burst_profile(t - b.start, b.duration, b.amp_pos, b.amp_neg,
                                                    b.positive_first);
            if (b.is_roll) {
                att.roll += prof.value;
                rates.x() += prof.rate;
                traj.excitation_roll[i] = prof.value;
            } else {
                att.pitch += prof.value;
                rates.y() += prof.rate;
                traj.excitation_pitch[i] = prof.value;
            }
        }

        traj.attitude[i] = att;
        traj.euler_rates[i] = rates;
        traj.r_eb[i] = euler_to_rotation(att);
        traj.position_ned[i] = pos;
        pos += dt * cfg.speed_mps * Vec3(std::cos(att.yaw), std::sin(att.yaw), 0.0);
    }
    return traj;
}

/// Survey-style validation trajectory: parallel lines at constant
/// speed joined by 180-degree coordinated turns, gentle roll/pitch
/// wander on the lines, and the configured altitude profile.
inline Trajectory gen_validation_trajectory(const TrajectoryConfig& cfg, std::uint64_t seed) {
    if (cfg.survey_lines < 1 || cfg.sample_rate_hz <= 0.0) {
        throw std::invalid_argument("trajectory config: non-positive base parameter");
    }
    const int n_turns = cfg.survey_lines - 1;
    const double line_s =
        (cfg.validation_duration_s - n_turns * cfg.survey_turn_duration_s) / cfg.survey_lines;
    if (line_s <= 0.0) {
        throw std::invalid_argument("trajectory config: turns exceed validation duration");
    }
    auto rng = make_engine(seed, 0x7A11ULL);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double wander_phase1 = 2.0 * kPi * u01(rng);
    const double wander_phase2 = 2.0 * kPi * u01(rng);

    std::vector<detail::TurnSpec> turns;
    double yaw = 0.0;
    for (int k = 0; k < n_turns; ++k) {
        detail::TurnSpec turn;
        turn.start = (k + 1) * line_s + k * cfg.survey_turn_duration_s;
        turn.duration = cfg.survey_turn_duration_s;
        turn.yaw_from = yaw;
        turn.yaw_change = (k % 2 == 0) ? kPi : -kPi;
        turns.push_back(turn);
        yaw += turn.yaw_change;
    }

    const double total = cfg.validation_duration_s;
    const auto n = static_cast<std::size_t>(std::llround(total * cfg.sample_rate_hz));
    Trajectory traj;
    traj.f_s = cfg.sample_rate_hz;
    traj.t.resize(n);
    traj.altitude_m.resize(n);
    traj.attitude.resize(n);
    traj.euler_rates.resize(n);
    traj.position_ned.resize(n);
    traj.r_eb.resize(n);
    traj.excitation_roll.assign(n, 0.0);
    traj.excitation_pitch.assign(n, 0.0);
    for (const auto& tr : turns) traj.maneuver_windows.emplace_back(tr.start, tr.start + tr.duration);

    const double wander_roll = deg_to_rad(0.8);
    const double wander_pitch = deg_to_rad(0.5);
    std::size_t turn_i = 0;
    Vec3 pos = Vec3::Zero();
    const double dt = 1.0 / cfg.sample_rate_hz;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = i * dt;
        traj.t[i] = t;
        traj.altitude_m[i] = detail::altitude_at(cfg, t, total, cfg.validation_altitude_osc_amp_m);

        EulerAttitude att;
        Vec3 rates = Vec3::Zero();
        if (!turns.empty()) {
            while (turn_i + 1 < turns.size() && t >= turns[turn_i].start + turns[turn_i].duration) ++turn_i;
            const auto& turn = turns[turn_i];
            if (t >= turn.start && t < turn.start + turn.duration) {
                const double s = (t - turn.start) / turn.duration;
                att.yaw = turn.yaw_from + turn.yaw_change * detail::smoothstep(s);
                const double yaw_rate = turn.yaw_change * detail::smoothstep_d(s) / turn.duration;
                const double yaw_acc =
                    turn.yaw_change * detail::smoothstep_dd(s) / (turn.duration * turn.duration);
                rates.z() = yaw_rate;
                const double g = detail::kGravity;
                const double uu = cfg.speed_mps * yaw_rate / g;
                att.roll = std::atan(uu);
                rates.x() = (cfg.speed_mps * yaw_acc / g) / (1.0 + uu * uu);
            } else {
                att.yaw = (t >= turn.start + turn.duration) ? turn.yaw_from + turn.yaw_change
                                                            : turn.yaw_from;
            }
        }

        // Gentle wander so straight lines are not perfectly rigid.
        const double w1 = 2.0 * kPi / 37.0;
        const double w2 = 2.0 * kPi / 53.0;
        att.roll += wander_roll * std::sin(w1 * t + wander_phase1);
        rates.x() += wander_roll * w1 * std::cos(w1 * t + wander_phase1);
        att.pitch += wander_pitch * std::sin(w2 * t + wander_phase2);
        rates.y() += wander_pitch * w2 * std::cos(w2 * t + wander_phase2);

        traj.attitude[i] = att;
        traj.euler_rates[i] = rates;
        traj.r_eb[i] = euler_to_rotation(att);
        traj.position_ned[i] = pos;
        pos += dt * cfg.speed_mps * Vec3(std::cos(att.yaw), std::sin(att.yaw), 0.0);
    }
    return traj;
}

/// Internal sensor temperature from altitude: standard-atmosphere
/// ambient (20 C at sea level, 6.5 K/km lapse) through a first-order
/// lag of time constant tau, discretized with an exact zero-order hold.
inline std::vector<double> sensor_temperature(const std::vector<double>& altitude_m, double f_s,
                                              double tau_s = 300.0) {
    if (altitude_m.empty()) return {};
    if (!(f_s > 0.0)) throw std::invalid_argument("sensor_temperature: sampling rate must be positive");
    auto ambient = [](double h) { return 20.0 - 0.0065 * h; };
    std::vector<double> temp(altitude_m.size());
    temp[0] = ambient(altitude_m[0]);
    const double dt = 1.0 / f_s;
    const double decay = (tau_s > 0.0) ? std::exp(-dt / tau_s) : 0.0;
    for (std::size_t i = 1; i < altitude_m.size(); ++i) {
        const double target = ambient(altitude_m[i - 1]);
        temp[i] = target + (temp[i - 1] - target) * decay;
    }
    return temp;
}

/// Integrated three-axis attitude error of the gyro model: white-noise
/// rate of PSD arw^2 plus a Gauss-Markov bias, integrated per axis.
/// Axes are independent; deterministic in the seed.
inline std::vector<Vec3> gyro_attitude_error(const GyroErrorParams& p, std::size_t n, double f_s,
                                             std::uint64_t seed) {
    if (n == 0) return {};
    if (!(f_s > 0.0)) throw std::invalid_argument("gyro_attitude_error: sampling rate must be positive");
    std::vector<Vec3> delta(n, Vec3::Zero());
    const double dt = 1.0 / f_s;
    const double phi = (p.bias_tau_s > 0.0) ? std::exp(-dt / p.bias_tau_s) : 0.0;
    const double bias_step = p.bias_sigma_rad_per_s * std::sqrt(1.0 - phi * phi);
    const double rate_sigma = p.arw_rad_per_sqrt_s * std::sqrt(f_s);
    for (int axis = 0; axis < 3; ++axis) {
        auto rng = make_engine(seed, 0x6720ULL + static_cast<std::uint64_t>(axis));
        std::normal_distribution<double> gauss(0.0, 1.0);
        double bias = 0.0;
        double angle = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            angle += (bias + rate_sigma * gauss(rng)) * dt;
            delta[i](axis) = angle;
            bias = phi * bias + bias_step * gauss(rng);
        }
    }
    return delta;
}

/// Body angular rates from Euler angles and their time derivatives
/// (Z-Y-X convention).
inline Vec3 body_rates(const EulerAttitude& att, const Vec3& euler_rates) {
    const double roll_d = euler_rates.x(), pitch_d = euler_rates.y(), yaw_d = euler_rates.z();
    const double sr = std::sin(att.roll), cr = std::cos(att.roll);
    const double sp = std::sin(att.pitch), cp = std::cos(att.pitch);
    return Vec3(roll_d - yaw_d * sp,
                pitch_d * cr + yaw_d * cp * sr,
                -pitch_d * sr + yaw_d * cp * cr);
}

/// Simulates the clean onboard magnetic signals along a trajectory in a
/// uniform background field, with the platform interference generated
/// from the given coefficients and an INS attitude estimate perturbed
/// by the gyro error model. The measurement channels are initialized to
/// the clean values (ideal sensors); sensor models overwrite them.
inline OnboardSignals simulate_onboard(const Trajectory& traj, const Vec3& be_e,
                                       const TlCoefficients& coeffs, const GyroErrorParams& gyro,
                                       std::uint64_t seed) {
    const std::size_t n = traj.size();
    OnboardSignals sig;
    sig.f_s = traj.f_s;
    sig.be_e = be_e;
    sig.t = traj.t;
    sig.be_b.resize(n);
    sig.dbe_b.resize(n);
    sig.ba_b.resize(n);
    sig.bt_b.resize(n);
    sig.bt.resize(n);
    sig.r_eb = traj.r_eb;
    sig.r_hat_eb.resize(n);
    sig.sensor_temp_c = sensor_temperature(traj.altitude_m, traj.f_s);
    const auto delta = gyro_attitude_error(gyro, n, traj.f_s, seed_stream(seed, 0x145EULL));
    for (std::size_t i = 0; i < n; ++i) {
        const Mat3& r = traj.r_eb[i];
        sig.be_b[i] = rotate_to_body(r, be_e);
        const Vec3 omega = body_rates(traj.attitude[i], traj.euler_rates[i]);
        sig.dbe_b[i] = sig.be_b[i].cross(omega);
        sig.ba_b[i] = platform_field(coeffs, sig.be_b[i], sig.dbe_b[i]);
        sig.bt_b[i] = total_field(sig.be_b[i], sig.ba_b[i]);
        sig.bt[i] = sig.bt_b[i].norm();
        sig.r_hat_eb[i] = r * small_angle_rotation(delta[i]);
    }
    sig.meas_scalar = sig.bt;
    sig.meas_vec = sig.bt_b;
    sig.meas_valid.assign(n, 1);
    return sig;
}

/// Background-field samples (field + analytic rate) for scenario
/// coefficient generation.
inline std::vector<FieldSample> background_samples(const Trajectory& traj, const Vec3& be_e) {
    std::vector<FieldSample> samples(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const Vec3 be_b = rotate_to_body(traj.r_eb[i], be_e);
        const Vec3 omega = body_rates(traj.attitude[i], traj.euler_rates[i]);
        samples[i] = FieldSample{be_b, be_b.cross(omega), traj.t[i]};
    }
    return samples;
}

/// Counts excitation swings: excursions of the burst roll/pitch
/// channels beyond a threshold, each sign counted once per crossing
/// pair. A full sinusoid cycle contributes two swings.
inline int count_excitations(const Trajectory& traj, double threshold_rad = deg_to_rad(2.0)) {
    int swings = 0;
    for (const auto* channel : {&traj.excitation_roll, &traj.excitation_pitch}) {
        int state = 0;  // -1, 0, +1: current excursion sign
        for (double v : *channel) {
            if (state <= 0 && v > threshold_rad) {
                ++swings;
                state = 1;
            } else if (state >= 0 && v < -threshold_rad) {
                ++swings;
                state = -1;
            } else if (std::abs(v) < 0.25 * threshold_rad) {
                state = 0;
            }
        }
    }
    return swings;
}

}  // namespace aeromag
