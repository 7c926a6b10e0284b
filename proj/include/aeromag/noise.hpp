// Frequency-domain synthesis of sensor stochastic noise and the shared
// first-order bandwidth filter.
//
// The target one-sided amplitude spectral density is
//
//   S(f) = sigma_w * [ (f_knee / max(f, eps))^(nu/2) + 1 ]
//
// i.e. a white floor sigma_w with a 1/f^(nu/2) amplitude rise below
// f_knee. Time series are produced by shaping a Hermitian-symmetric
// complex Gaussian spectrum and inverse-transforming, so the estimated
// ASD of the output converges to S(f).
#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "aeromag/frames.hpp"
#include "aeromag/random.hpp"

namespace aeromag {

struct NoiseParams {
    double sigma_w = 0.0;     // white floor, nT/sqrt(Hz)
    double f_knee = 0.0;      // 1/f corner, Hz
    double nu = 1.0;          // spectral slope of the power profile
    double epsilon_f = 1e-6;  // low-frequency regularizer, Hz
};

struct BandwidthParams {
    double f_bw = 0.0;  // sensor bandwidth, Hz
    double f_s = 0.0;   // sampling rate, Hz
};

/// Target one-sided ASD at frequency f (nT/sqrt(Hz)).
inline double target_asd(double f, const NoiseParams& p) {
    const double reg = std::max(f, p.epsilon_f);
    return p.sigma_w * (std::pow(p.f_knee / reg, 0.5 * p.nu) + 1.0);
}

/// Synthesizes n samples of noise at rate f_s whose ASD follows
/// target_asd. Deterministic in the seed. The DC bin is zeroed (the
/// series has exactly zero mean); the regularizer is tied to half the
/// fundamental frequency of the window.
inline std::vector<double> synth_noise(const NoiseParams& p, std::size_t n, double f_s,
                                       std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("synth_noise: need at least 2 samples");
    if (!(f_s > 0.0)) throw std::invalid_argument("synth_noise: sampling rate must be positive");

    NoiseParams shaped = p;
    shaped.epsilon_f = 0.5 * f_s / static_cast<double>(n);

    auto rng = make_engine(seed, 0x403EULL);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // One-sided bin amplitude so that the one-sided periodogram of the
    // output estimates S(f): |X_k| ~ S(f_k) * sqrt(f_s * n / 2).
    std::vector<std::complex<double>> spectrum(n, {0.0, 0.0});
    const double amp_scale = std::sqrt(f_s * static_cast<double>(n) / 2.0);
    const std::size_t half = n / 2;
    for (std::size_t k = 1; k <= half; ++k) {
        const double f_k = static_cast<double>(k) * f_s / static_cast<double>(n);
        const double amp = target_asd(f_k, shaped) * amp_scale;
        if (2 * k == n) {
            spectrum[k] = {amp * gauss(rng), 0.0};  // Nyquist bin is real
        } else {
            const std::complex<double> z(gauss(rng) / std::sqrt(2.0), gauss(rng) / std::sqrt(2.0));
            spectrum[k] = amp * z;
            spectrum[n - k] = std::conj(spectrum[k]);
        }
    }

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> series_c(n);
    fft.inv(series_c, spectrum);
    std::vector<double> series(n);
    for (std::size_t i = 0; i < n; ++i) series[i] = series_c[i].real();
    return series;
}

/// Smoothing factor of the first-order bandwidth filter:
/// beta = 1 / (1 + f_s / (2 pi f_bw)).
inline double smoothing_beta(const BandwidthParams& b) {
    if (!(b.f_s > 0.0) || !(b.f_bw > 0.0)) {
        throw std::invalid_argument("smoothing_beta: rates must be positive");
    }
    return 1.0 / (1.0 + b.f_s / (2.0 * kPi * b.f_bw));
}

/// Two-tap FIR modeling the instrument response time:
/// y_t = beta*x_t + (1-beta)*x_{t-1}, with x_{-1} := x_0.
inline std::vector<double> bandwidth_filter(std::span<const double> x, const BandwidthParams& b) {
    if (x.empty()) throw std::invalid_argument("bandwidth_filter: empty series");
    const double beta = smoothing_beta(b);
    std::vector<double> y(x.size());
    y[0] = x[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        y[i] = beta * x[i] + (1.0 - beta) * x[i - 1];
    }
    return y;
}

}  // namespace aeromag
