#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "aeromag/noise.hpp"
#include "aeromag/spectral.hpp"

using namespace aeromag;

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

// Geometric-mean ASD over a frequency band; averages out per-bin
// estimator noise before comparing against the target profile.
double band_log_mean(const SpectralEstimate& est, double f_lo, double f_hi) {
    double acc = 0.0;
    int count = 0;
    for (std::size_t k = 0; k < est.grid.size(); ++k) {
        if (est.grid[k] >= f_lo && est.grid[k] <= f_hi && est.value[k] > 0.0) {
            acc += std::log(est.value[k]);
            ++count;
        }
    }
    REQUIRE(count > 0);
    return std::exp(acc / count);
}

}  // namespace

TEST_CASE("target ASD limits and corner") {
    const NoiseParams opm{0.003, 0.5, 1.0, 1e-6};
    REQUIRE(target_asd(1e6, opm) == Catch::Approx(0.003).epsilon(1e-3));
    REQUIRE(target_asd(opm.f_knee, opm) == Catch::Approx(2.0 * 0.003));
    const NoiseParams steep{0.01, 2.0, 2.0, 1e-6};
    REQUIRE(target_asd(steep.f_knee, steep) == Catch::Approx(2.0 * 0.01));
    // At 5 mHz the 1/f rise dominates: 0.003 * ((0.5/0.005)^0.5 + 1).
    REQUIRE(target_asd(0.005, opm) == Catch::Approx(0.033).epsilon(1e-6));
}

TEST_CASE("smoothing beta values and limits") {
    REQUIRE(smoothing_beta({60.0, 20.0}) == Catch::Approx(0.9496).margin(5e-4));
    REQUIRE(smoothing_beta({400.0, 20.0}) == Catch::Approx(0.9921).margin(5e-4));
    REQUIRE(smoothing_beta({1e12, 20.0}) == Catch::Approx(1.0).margin(1e-9));
    REQUIRE_THROWS_AS(smoothing_beta({0.0, 20.0}), std::invalid_argument);
}

TEST_CASE("bandwidth filter basics") {
    const BandwidthParams bw{60.0, 20.0};
    const double beta = smoothing_beta(bw);

    std::vector<double> constant(50, 3.5);
    for (double y : bandwidth_filter(constant, bw)) REQUIRE(y == Catch::Approx(3.5));

    std::vector<double> step(20, 0.0);
    for (std::size_t i = 10; i < step.size(); ++i) step[i] = 1.0;
    const auto stepped = bandwidth_filter(step, bw);
    REQUIRE(stepped[9] == 0.0);
    REQUIRE(stepped[10] == Catch::Approx(beta));
    REQUIRE(stepped[11] == Catch::Approx(1.0));

    // Alternating input at Nyquist settles to amplitude |2 beta - 1|.
    std::vector<double> alt(64);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
    const auto filtered = bandwidth_filter(alt, bw);
    for (std::size_t i = 2; i < filtered.size(); ++i) {
        REQUIRE(std::abs(filtered[i]) == Catch::Approx(std::abs(2.0 * beta - 1.0)).margin(1e-12));
    }

    REQUIRE_THROWS_AS(bandwidth_filter(std::vector<double>{}, bw), std::invalid_argument);
}

TEST_CASE("bandwidth filter is linear and time-invariant") {
    const BandwidthParams bw{200.0, 20.0};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(128), y(128);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = u(rng);
        y[i] = u(rng);
    }
    std::vector<double> combo(128);
    for (std::size_t i = 0; i < x.size(); ++i) combo[i] = 2.5 * x[i] - 1.25 * y[i];
    const auto fc = bandwidth_filter(combo, bw);
    const auto fx = bandwidth_filter(x, bw);
    const auto fy = bandwidth_filter(y, bw);
    for (std::size_t i = 0; i < x.size(); ++i) {
        REQUIRE(fc[i] == Catch::Approx(2.5 * fx[i] - 1.25 * fy[i]).margin(1e-12));
    }
}

TEST_CASE("synthesized noise is deterministic in the seed") {
    const NoiseParams p{0.01, 1.0, 1.0, 1e-6};
    const auto a = synth_noise(p, 4096, 20.0, 99);
    const auto b = synth_noise(p, 4096, 20.0, 99);
    REQUIRE(a == b);
    const auto c = synth_noise(p, 4096, 20.0, 100);
    REQUIRE(a != c);
    REQUIRE_THROWS_AS(synth_noise(p, 1, 20.0, 1), std::invalid_argument);
}

TEST_CASE("white synthesis reproduces the variance identity") {
    const double sigma_w = 0.1, f_s = 20.0;
    const NoiseParams p{sigma_w, 0.0, 1.0, 1e-6};
    const auto series = synth_noise(p, 1 << 18, f_s, 7);
    const double expected_std = sigma_w * std::sqrt(f_s / 2.0);
    REQUIRE(stddev_of(series) == Catch::Approx(expected_std).epsilon(0.05));
    // DC bin is zeroed, so the sample mean vanishes well inside the
    // 3 sigma_w sqrt(f_s/2)/sqrt(n) statistical bound.
    const double bound = 3.0 * expected_std / std::sqrt(static_cast<double>(series.size()));
    REQUIRE(std::abs(mean_of(series)) < bound);
}

TEST_CASE("estimated ASD tracks the target profile within a 25% log band") {
    const double f_s = 64.0;
    const std::size_t n = 1 << 16;
    const NoiseParams p{0.02, 1.0, 1.0, 1e-6};
    const auto series = synth_noise(p, n, f_s, 21);
    const std::size_t seg = 8192;
    const auto est = welch_asd(series, f_s, seg);
    // Compare band-averaged estimates against the target on a log grid
    // between twice the segment fundamental and f_s/4.
    const double f_min = 2.0 * f_s / static_cast<double>(seg);
    const double f_max = f_s / 4.0;
    for (double lo = f_min; lo * 2.0 <= f_max; lo *= 2.0) {
        const double hi = lo * 2.0;
        const double measured = band_log_mean(est, lo, hi);
        const double target = target_asd(std::sqrt(lo * hi), p);
        REQUIRE(std::abs(std::log(measured / target)) < std::log(1.25));
    }
}

TEST_CASE("pink noise with the fluxgate profile shows the expected low-frequency slope") {
    const double f_s = 20.0;
    const std::size_t n = 1 << 18;
    const NoiseParams p{0.022, 1.0, 1.0, 1e-6};
    const auto series = synth_noise(p, n, f_s, 31);
    const auto est = welch_asd(series, f_s, 1 << 16);
    // Log-log regression of ASD between 1 mHz and 0.1 Hz. The white
    // floor flattens the pure -1/2 slope slightly.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t k = 0; k < est.grid.size(); ++k) {
        if (est.grid[k] >= 1e-3 && est.grid[k] <= 0.1 && est.value[k] > 0.0) {
            const double x = std::log(est.grid[k]);
            const double y = std::log(est.value[k]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++m;
        }
    }
    REQUIRE(m > 20);
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    REQUIRE(slope > -0.58);
    REQUIRE(slope < -0.38);
}
