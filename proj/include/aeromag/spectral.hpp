// Amplitude spectral density (Welch) and overlapping Allan deviation
// estimators used to characterize simulated sensor output.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "aeromag/frames.hpp"

namespace aeromag {

/// A one-sided spectral estimate: grid is frequency in Hz (ASD) or
/// averaging time tau in seconds (ADEV); value is nT/sqrt(Hz) or nT.
struct SpectralEstimate {
    std::vector<double> grid;
    std::vector<double> value;
};

namespace detail {
inline std::size_t floor_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p * 2 <= n) p *= 2;
    return p;
}
}  // namespace detail

/// Welch one-sided ASD with a periodic Hann window and per-segment mean
/// removal. Amplitude convention: white noise of ASD sigma_w estimates
/// to sigma_w. segment_length 0 picks a power of two giving ~8 segments
/// at the given overlap.
inline SpectralEstimate welch_asd(std::span<const double> series, double f_s,
                                  std::size_t segment_length = 0, double overlap = 0.5) {
    if (!(f_s > 0.0)) throw std::invalid_argument("welch_asd: sampling rate must be positive");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw std::invalid_argument("welch_asd: overlap in [0,1)");
    const std::size_t n = series.size();
    if (segment_length == 0) {
        segment_length = detail::floor_pow2(std::max<std::size_t>(2 * n / 9, 8));
    }
    if (n < 2 * segment_length) {
        throw std::invalid_argument("welch_asd: series shorter than two segments");
    }
    const std::size_t seg = segment_length;
    const std::size_t hop = std::max<std::size_t>(1, static_cast<std::size_t>(seg * (1.0 - overlap)));

    std::vector<double> window(seg);
    double wsq = 0.0;
    for (std::size_t j = 0; j < seg; ++j) {
        window[j] = 0.5 * (1.0 - std::cos(2.0 * kPi * j / static_cast<double>(seg)));
        wsq += window[j] * window[j];
    }

    const std::size_t n_bins = seg / 2 + 1;
    std::vector<double> psd(n_bins, 0.0);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> buf(seg), spec(seg);
    std::size_t segments = 0;
    for (std::size_t start = 0; start + seg <= n; start += hop) {
        double mean = 0.0;
        for (std::size_t j = 0; j < seg; ++j) mean += series[start + j];
        mean /= static_cast<double>(seg);
        for (std::size_t j = 0; j < seg; ++j) {
            buf[j] = {(series[start + j] - mean) * window[j], 0.0};
        }
        fft.fwd(spec, buf);
        for (std::size_t k = 0; k < n_bins; ++k) psd[k] += std::norm(spec[k]);
        ++segments;
    }

    SpectralEstimate out;
    out.grid.resize(n_bins);
    out.value.resize(n_bins);
    const double norm = f_s * wsq * static_cast<double>(segments);
    for (std::size_t k = 0; k < n_bins; ++k) {
        const bool interior = (k != 0) && (2 * k != seg);
        const double scale = interior ? 2.0 : 1.0;
        out.grid[k] = static_cast<double>(k) * f_s / static_cast<double>(seg);
        out.value[k] = std::sqrt(scale * psd[k] / norm);
    }
    return out;
}

/// Overlapping Allan deviation at the requested averaging times. Each
/// tau is rounded to an integer number of samples m; the estimator
/// requires m <= n/3.
inline SpectralEstimate allan_deviation(std::span<const double> series, double f_s,
                                        std::span<const double> taus) {
    if (!(f_s > 0.0)) throw std::invalid_argument("allan_deviation: sampling rate must be positive");
    const std::size_t n = series.size();
    if (n < 3) throw std::invalid_argument("allan_deviation: series too short");

    // Prefix sums: S[k] = sum of the first k samples.
    std::vector<double> s(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) s[i + 1] = s[i] + series[i];

    SpectralEstimate out;
    for (double tau : taus) {
        const auto m = static_cast<std::size_t>(std::llround(tau * f_s));
        if (m < 1 || 3 * m > n) {
            throw std::invalid_argument("allan_deviation: tau outside [1/f_s, n/(3 f_s)]");
        }
        const std::size_t terms = n - 2 * m + 1;
        double acc = 0.0;
        for (std::size_t j = 0; j < terms; ++j) {
            const double d = s[j + 2 * m] - 2.0 * s[j + m] + s[j];
            acc += d * d;
        }
        const double avar = acc / (2.0 * static_cast<double>(m) * static_cast<double>(m) *
                                   static_cast<double>(terms));
        out.grid.push_back(static_cast<double>(m) / f_s);
        out.value.push_back(std::sqrt(avar));
    }
    return out;
}

/// Log-spaced tau grid suitable for allan_deviation given a series
/// length, from 1/f_s up to n/(3 f_s).
inline std::vector<double> default_tau_grid(std::size_t n, double f_s, std::size_t points = 40) {
    const double tau_min = 1.0 / f_s;
    const double tau_max = static_cast<double>(n) / (3.0 * f_s);
    std::vector<double> taus;
    std::size_t last_m = 0;
    for (std::size_t i = 0; i < points; ++i) {
        const double frac = points <= 1 ? 0.0 : static_cast<double>(i) / (points - 1.0);
        const double tau = tau_min * std::pow(tau_max / tau_min, frac);
        const auto m = static_cast<std::size_t>(std::llround(tau * f_s));
        if (m >= 1 && m != last_m && 3 * m <= n) {
            taus.push_back(static_cast<double>(m) / f_s);
            last_m = m;
        }
    }
    return taus;
}

}  // namespace aeromag
