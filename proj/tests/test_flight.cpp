#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "aeromag/flight.hpp"

using namespace aeromag;

namespace {

const Vec3 kBackground = background_field(50000.0, deg_to_rad(70.0), 0.0);

bool inside_any_window(const Trajectory& traj, double t, double margin) {
    for (const auto& [lo, hi] : traj.maneuver_windows) {
        if (t >= lo - margin && t <= hi + margin) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("calibration trajectory matches the flight plan") {
    const TrajectoryConfig cfg;
    const auto traj = gen_calibration_trajectory(cfg, 1);

    const double duration = traj.t.back() + 1.0 / traj.f_s;
    REQUIRE(duration >= 640.0);
    REQUIRE(duration <= 680.0);
    REQUIRE(traj.size() == static_cast<std::size_t>(std::llround(duration * 20.0)));

    double roll_min = 0.0, roll_max = 0.0, pitch_max = 0.0;
    for (const auto& att : traj.attitude) {
        roll_min = std::min(roll_min, att.roll);
        roll_max = std::max(roll_max, att.roll);
        pitch_max = std::max(pitch_max, std::abs(att.pitch));
    }
    REQUIRE(rad_to_deg(roll_min) >= -55.0);
    REQUIRE(rad_to_deg(roll_max) <= 15.0);
    REQUIRE(rad_to_deg(pitch_max) <= 10.0);
    // Significant roll excursions actually happen.
    REQUIRE(rad_to_deg(roll_min) <= -24.0);
}

TEST_CASE("calibration trajectory carries about forty excitations") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 9ULL}) {
        const auto traj = gen_calibration_trajectory({}, seed);
        const int swings = count_excitations(traj);
        REQUIRE(swings >= 36);
        REQUIRE(swings <= 44);
    }
}

TEST_CASE("calibration trajectory is deterministic in the seed") {
    const auto a = gen_calibration_trajectory({}, 5);
    const auto b = gen_calibration_trajectory({}, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a.attitude[i].roll == b.attitude[i].roll);
        REQUIRE(a.attitude[i].pitch == b.attitude[i].pitch);
        REQUIRE(a.attitude[i].yaw == b.attitude[i].yaw);
    }
    const auto c = gen_calibration_trajectory({}, 6);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) differs |= (a.attitude[i].roll != c.attitude[i].roll);
    REQUIRE(differs);
}

TEST_CASE("envelope-violating configurations are rejected") {
    TrajectoryConfig cfg;
    cfg.roll_swing_down_max_deg = 70.0;
    REQUIRE_THROWS_AS(gen_calibration_trajectory(cfg, 1), std::invalid_argument);
    cfg = {};
    cfg.burst_duration_s = 30.0;
    REQUIRE_THROWS_AS(gen_calibration_trajectory(cfg, 1), std::invalid_argument);
    cfg = {};
    cfg.pitch_swing_max_deg = 12.0;
    REQUIRE_THROWS_AS(gen_calibration_trajectory(cfg, 1), std::invalid_argument);
}

TEST_CASE("validation trajectory is a survey with quiet lines") {
    const TrajectoryConfig cfg;
    const auto traj = gen_validation_trajectory(cfg, 3);
    const double duration = traj.t.back() + 1.0 / traj.f_s;
    REQUIRE(duration >= 3400.0);
    REQUIRE(duration <= 3560.0);

    // Roll deviation on straight lines stays small.
    double acc = 0.0, acc2 = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (inside_any_window(traj, traj.t[i], 1.0)) continue;
        acc += traj.attitude[i].roll;
        acc2 += traj.attitude[i].roll * traj.attitude[i].roll;
        ++count;
    }
    REQUIRE(count > traj.size() / 2);
    const double mean = acc / count;
    const double stddev = std::sqrt(std::max(acc2 / count - mean * mean, 0.0));
    REQUIRE(rad_to_deg(stddev) < 2.0);

    const auto again = gen_validation_trajectory(cfg, 3);
    REQUIRE(again.attitude[1234].yaw == traj.attitude[1234].yaw);
}

TEST_CASE("sensor temperature follows altitude through a first-order lag") {
    SECTION("constant altitude settles at ambient") {
        std::vector<double> alt(2000, 500.0);
        const auto temp = sensor_temperature(alt, 20.0);
        const double ambient = 20.0 - 0.0065 * 500.0;
        for (double v : temp) REQUIRE(v == Catch::Approx(ambient).margin(1e-9));
    }

    SECTION("altitude step responds exponentially with tau = 300 s") {
        const double f_s = 20.0, tau = 300.0;
        std::vector<double> alt(40000, 300.0);
        for (std::size_t i = 20000; i < alt.size(); ++i) alt[i] = 800.0;
        const auto temp = sensor_temperature(alt, f_s, tau);
        const double before = 20.0 - 0.0065 * 300.0;
        const double after = 20.0 - 0.0065 * 800.0;
        for (std::size_t k : {1000u, 4000u, 12000u}) {
            const double t = static_cast<double>(k) / f_s;
            const double expected = after + (before - after) * std::exp(-t / tau);
            // Zero-order-hold discretization reproduces the continuous
            // step response at the sample instants (one-sample offset).
            REQUIRE(temp[20000 + k] == Catch::Approx(expected).margin(2e-3));
        }
    }

    SECTION("vanishing lag tracks ambient exactly") {
        std::vector<double> alt{300.0, 400.0, 800.0, 200.0};
        const auto temp = sensor_temperature(alt, 1.0, 0.0);
        for (std::size_t i = 1; i < alt.size(); ++i) {
            REQUIRE(temp[i] == Catch::Approx(20.0 - 0.0065 * alt[i - 1]));
        }
    }
}

TEST_CASE("gyro error is zero without noise sources") {
    GyroErrorParams p;
    p.arw_rad_per_sqrt_s = 0.0;
    p.bias_sigma_rad_per_s = 0.0;
    const auto delta = gyro_attitude_error(p, 1000, 20.0, 4);
    for (const auto& d : delta) REQUIRE(d.norm() == 0.0);
}

TEST_CASE("angle random walk grows as arw * sqrt(t)") {
    GyroErrorParams p;
    p.arw_rad_per_sqrt_s = 3.6e-5;
    p.bias_sigma_rad_per_s = 0.0;
    const double f_s = 20.0, t_end = 600.0;
    const auto n = static_cast<std::size_t>(t_end * f_s);
    double acc = 0.0;
    const int runs = 1000;
    for (int run = 0; run < runs; ++run) {
        const auto delta = gyro_attitude_error(p, n, f_s, 1000 + run);
        acc += delta.back().x() * delta.back().x();
    }
    const double std_meas = std::sqrt(acc / runs);
    REQUIRE(std_meas == Catch::Approx(p.arw_rad_per_sqrt_s * std::sqrt(t_end)).epsilon(0.10));
}

TEST_CASE("tactical-grade drift stays within 0.3 degrees on the calibration flight") {
    const GyroErrorParams p;
    const double f_s = 20.0;
    const auto n = static_cast<std::size_t>(660.0 * f_s);
    int within = 0;
    const int runs = 200;
    for (int run = 0; run < runs; ++run) {
        const auto delta = gyro_attitude_error(p, n, f_s, 5000 + run);
        double max_angle = 0.0;
        for (const auto& d : delta) max_angle = std::max(max_angle, d.cwiseAbs().maxCoeff());
        if (rad_to_deg(max_angle) < 0.3) ++within;
    }
    REQUIRE(within >= static_cast<int>(0.95 * runs));
}

TEST_CASE("level flight with zero coefficients gives a constant total field") {
    TrajectoryConfig cfg;
    const auto traj = gen_validation_trajectory(cfg, 8);
    // Zero out the wander by simulating with constant attitude instead:
    // use the calibration generator's first straight segment.
    const auto sig = simulate_onboard(traj, kBackground, {}, GyroErrorParams{0, 0, 1}, 1);
    for (std::size_t i = 0; i < sig.size(); ++i) {
        REQUIRE(sig.bt[i] == Catch::Approx(50000.0).epsilon(1e-9));
        REQUIRE((sig.bt_b[i] - sig.be_b[i]).norm() == 0.0);
    }
}

TEST_CASE("onboard signals keep the background magnitude invariant") {
    const auto traj = gen_calibration_trajectory({}, 21);
    const auto sig = simulate_onboard(traj, kBackground, {}, {}, 2);
    for (std::size_t i = 0; i < sig.size(); i += 7) {
        REQUIRE(sig.be_b[i].norm() == Catch::Approx(50000.0).epsilon(1e-12));
        REQUIRE(is_rotation(sig.r_hat_eb[i], 1e-9));
    }
}

TEST_CASE("analytic field rate matches finite differences away from maneuver onsets") {
    const auto traj = gen_calibration_trajectory({}, 31);
    const auto sig = simulate_onboard(traj, kBackground, {}, {}, 3);
    const double dt = 1.0 / sig.f_s;

    auto near_window_edge = [&](double t) {
        for (const auto& [lo, hi] : traj.maneuver_windows) {
            if (std::abs(t - lo) <= 3.0 * dt || std::abs(t - hi) <= 3.0 * dt) return true;
        }
        return false;
    };

    double worst_quiet = 0.0, worst_rel_maneuver = 0.0;
    for (std::size_t i = 1; i + 1 < sig.size(); ++i) {
        // Profile joints carry commanded acceleration steps; skip the
        // onset samples where a central difference straddles them.
        if (near_window_edge(traj.t[i])) continue;
        const Vec3 fd = (sig.be_b[i + 1] - sig.be_b[i - 1]) / (2.0 * dt);
        const double err = (fd - sig.dbe_b[i]).norm();
        if (!inside_any_window(traj, traj.t[i], 0.5)) {
            worst_quiet = std::max(worst_quiet, err);
        } else {
            worst_rel_maneuver = std::max(worst_rel_maneuver, err / (sig.dbe_b[i].norm() + 1e3));
        }
    }
    REQUIRE(worst_quiet < 0.5);          // nT/s on straight-and-level segments
    REQUIRE(worst_rel_maneuver < 0.02);  // 2% of the local rate mid-maneuver
}

TEST_CASE("scaled-identity induced coefficients leave the total magnitude attitude-invariant") {
    TlCoefficients c;
    c.induced = 0.002 * Mat3::Identity();
    const auto traj = gen_calibration_trajectory({}, 41);
    const Vec3 down(0.0, 0.0, 50000.0);
    const auto sig = simulate_onboard(traj, down, c, {}, 4);
    for (std::size_t i = 0; i < sig.size(); i += 11) {
        REQUIRE(sig.bt[i] == Catch::Approx(50000.0 * 1.002).epsilon(1e-9));
    }
}

TEST_CASE("simulated platform field lands in the published magnitude band") {
    const auto traj = gen_calibration_trajectory({}, 51);
    const auto samples = background_samples(traj, kBackground);
    const auto coeffs = generate_scenario_coefficients(ScenarioKind::random_platform, 7, samples);
    const auto sig = simulate_onboard(traj, kBackground, coeffs, {}, 5);
    double mean = 0.0;
    for (std::size_t i = 0; i < sig.size(); ++i) mean += sig.ba_b[i].norm();
    mean /= static_cast<double>(sig.size());
    REQUIRE(mean >= 40.0);
    REQUIRE(mean <= 150.0);
}

TEST_CASE("onboard simulation is deterministic") {
    const auto traj = gen_calibration_trajectory({}, 61);
    const auto a = simulate_onboard(traj, kBackground, {}, {}, 6);
    const auto b = simulate_onboard(traj, kBackground, {}, {}, 6);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); i += 13) {
        REQUIRE(a.bt[i] == b.bt[i]);
        REQUIRE(a.r_hat_eb[i] == b.r_hat_eb[i]);
    }
}
