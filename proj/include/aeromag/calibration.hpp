// Least-squares Tolles-Lawson calibration.
//
// Builds regression targets and regressors for each combination of
// model (scalar 1D / vector 3D) and background-field attitude source
// (perfect / vector magnetometer / INS), solves by QR, and evaluates
// compensation residuals against the true background field.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "aeromag/flight.hpp"
#include "aeromag/frames.hpp"
#include "aeromag/tl_model.hpp"

namespace aeromag {

enum class AttitudeSource { perfect, vector_magnetometer, ins };
enum class ModelKind { scalar_1d, vector_3d };

/// How the 1D regression target is formed. The band-pass-filtered
/// variant of the classical pipeline is represented but not supported
/// here; selecting it raises an error.
enum class TargetMode { proxy_subtraction, bandpass_filtered };

/// Magnitude used to build regressor rows for the INS source: the
/// background-model magnitude (default) or the measured scalar field.
enum class InsRegressorMagnitude { model, measured };

struct FitOptions {
    // Low-pass cutoff applied before numerically differentiating proxy
    // fields; nullopt disables the filter.
    std::optional<double> derivative_cutoff_hz = 1.0;
    TargetMode target_mode = TargetMode::proxy_subtraction;
    InsRegressorMagnitude ins_regressor_magnitude = InsRegressorMagnitude::model;
    // Background-field model magnitude; <= 0 means use |be_e| of the
    // signals (the model is assumed error-free).
    double model_field_nt = 0.0;
    double ill_conditioned_threshold = 1e8;
};

struct ResidualStats {
    double mean = 0.0;
    double stddev = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

struct CalibrationResult {
    ModelKind model = ModelKind::scalar_1d;
    AttitudeSource source = AttitudeSource::perfect;
    Eigen::VectorXd coefficients;
    double condition_number = 0.0;
    bool ill_conditioned = false;
    std::size_t dropped_samples = 0;
    ResidualStats calibration;
    std::optional<ResidualStats> validation;
    FitOptions options;
};

/// Raised when the regression cannot be solved (too few usable samples
/// or a rank-deficient regressor). Carries the condition number when
/// one could be computed.
struct EstimationError : std::runtime_error {
    explicit EstimationError(const std::string& what, double cond = 0.0)
        : std::runtime_error(what), condition_number(cond) {}
    double condition_number;
};

inline const char* attitude_source_name(AttitudeSource s) {
    switch (s) {
        case AttitudeSource::perfect: return "perfect";
        case AttitudeSource::vector_magnetometer: return "vector-magnetometer";
        case AttitudeSource::ins: return "ins";
    }
    return "?";
}

inline AttitudeSource attitude_source_from_name(std::string_view name) {
    if (name == "perfect") return AttitudeSource::perfect;
    if (name == "vector-magnetometer") return AttitudeSource::vector_magnetometer;
    if (name == "ins") return AttitudeSource::ins;
    throw std::invalid_argument("unknown attitude source: " + std::string(name));
}

inline const char* model_kind_name(ModelKind m) {
    return m == ModelKind::scalar_1d ? "scalar-1d" : "vector-3d";
}

inline ModelKind model_kind_from_name(std::string_view name) {
    if (name == "scalar-1d") return ModelKind::scalar_1d;
    if (name == "vector-3d") return ModelKind::vector_3d;
    throw std::invalid_argument("unknown model: " + std::string(name));
}

/// First-order numerical derivative after an optional zero-phase
/// low-pass (one pole forward, one backward). cutoff = nullopt
/// disables the filter. The last sample repeats the previous slope.
inline std::vector<double> filtered_derivative(const std::vector<double>& series, double f_s,
                                               std::optional<double> cutoff_hz) {
    if (series.size() < 2) throw std::invalid_argument("filtered_derivative: need >= 2 samples");
    if (!(f_s > 0.0)) throw std::invalid_argument("filtered_derivative: sampling rate must be positive");

    std::vector<double> x = series;
    if (cutoff_hz && *cutoff_hz > 0.0 && std::isfinite(*cutoff_hz)) {
        const double dt = 1.0 / f_s;
        const double tau = 1.0 / (2.0 * kPi * *cutoff_hz);
        const double a = dt / (tau + dt);
        for (std::size_t i = 1; i < x.size(); ++i) x[i] = x[i - 1] + a * (x[i] - x[i - 1]);
        for (std::size_t i = x.size() - 1; i-- > 0;) x[i] = x[i + 1] + a * (x[i] - x[i + 1]);
    }
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i + 1 < x.size(); ++i) d[i] = (x[i + 1] - x[i]) * f_s;
    d[x.size() - 1] = d[x.size() - 2];
    return d;
}

/// Background-field proxy series: the body-frame field used in place of
/// the true B_e^b, its time derivative, and per-sample validity.
struct ProxySeries {
    std::vector<Vec3> field;
    std::vector<Vec3> derivative;
    std::vector<std::uint8_t> valid;
};

namespace detail {

inline std::vector<Vec3> derivative_series(const std::vector<Vec3>& v, double f_s,
                                           std::optional<double> cutoff_hz) {
    std::vector<double> axis(v.size());
    std::vector<Vec3> out(v.size(), Vec3::Zero());
    for (int a = 0; a < 3; ++a) {
        for (std::size_t i = 0; i < v.size(); ++i) axis[i] = v[i](a);
        const auto d = filtered_derivative(axis, f_s, cutoff_hz);
        for (std::size_t i = 0; i < v.size(); ++i) out[i](a) = d[i];
    }
    return out;
}

}  // namespace detail

/// Builds the background-field proxy for a source:
///   perfect:             the true body-frame field and analytic rate
///   vector-magnetometer: model magnitude along the measured direction
///   ins:                 model field rotated by the INS attitude
/// Samples whose measured vector has zero norm are flagged invalid.
inline ProxySeries build_be_proxy(const OnboardSignals& sig, AttitudeSource src,
                                  const FitOptions& opts = {}) {
    const std::size_t n = sig.size();
    const double model_mag = opts.model_field_nt > 0.0 ? opts.model_field_nt : sig.be_e.norm();
    ProxySeries proxy;
    proxy.field.resize(n);
    proxy.valid.assign(n, 1);

    switch (src) {
        case AttitudeSource::perfect:
            proxy.field = sig.be_b;
            proxy.derivative = sig.dbe_b;
            return proxy;
        case AttitudeSource::vector_magnetometer:
            for (std::size_t i = 0; i < n; ++i) {
                const double norm = sig.meas_vec[i].norm();
                if (norm <= 0.0) {
                    proxy.valid[i] = 0;
                    proxy.field[i] = Vec3::Zero();
                } else {
                    proxy.field[i] = model_mag * sig.meas_vec[i] / norm;
                }
            }
            break;
        case AttitudeSource::ins: {
            const Vec3 be_model = model_mag * sig.be_e.normalized();
            for (std::size_t i = 0; i < n; ++i) {
                proxy.field[i] = sig.r_hat_eb[i].transpose() * be_model;
            }
            if (opts.ins_regressor_magnitude == InsRegressorMagnitude::measured) {
                for (std::size_t i = 0; i < n; ++i) {
                    proxy.field[i] *= sig.meas_scalar[i] / model_mag;
                }
            }
            break;
        }
    }
    proxy.derivative = detail::derivative_series(proxy.field, sig.f_s, opts.derivative_cutoff_hz);
    return proxy;
}

namespace detail {

struct Design {
    Eigen::MatrixXd a;
    Eigen::VectorXd y;
    std::vector<std::size_t> sample_of_row;  // valid-sample indices
    std::size_t dropped = 0;
};

inline bool sample_usable(const OnboardSignals& sig, const ProxySeries& proxy, std::size_t i) {
    return sig.meas_valid[i] != 0 && proxy.valid[i] != 0 && proxy.field[i].norm() > 0.0;
}

inline Design build_design(const OnboardSignals& sig, const ProxySeries& proxy, ModelKind model,
                           double model_mag) {
    const std::size_t n = sig.size();
    std::vector<std::size_t> keep;
    keep.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (sample_usable(sig, proxy, i)) keep.push_back(i);
    }
    Design d;
    d.dropped = n - keep.size();
    d.sample_of_row = keep;
    if (model == ModelKind::scalar_1d) {
        d.a.resize(keep.size(), 18);
        d.y.resize(keep.size());
        for (std::size_t r = 0; r < keep.size(); ++r) {
            const std::size_t i = keep[r];
            d.a.row(r) = scalar_regressor_row({proxy.field[i], proxy.derivative[i], sig.t[i]});
            d.y(r) = sig.meas_scalar[i] - model_mag;
        }
    } else {
        d.a.resize(3 * keep.size(), 21);
        d.y.resize(3 * keep.size());
        for (std::size_t r = 0; r < keep.size(); ++r) {
            const std::size_t i = keep[r];
            d.a.middleRows<3>(3 * r) =
                vector_regressor_block({proxy.field[i], proxy.derivative[i], sig.t[i]});
            d.y.segment<3>(3 * r) = sig.meas_vec[i] - proxy.field[i];
        }
    }
    return d;
}

struct LsSolution {
    Eigen::VectorXd x;
    double condition_number = 0.0;
};

// Column-equilibrated minimum-norm least squares via thresholded SVD
// (normal equations avoided).
//
// structural_nulls is the number of exactly unobservable directions the
// model is allowed to carry. The scalar projection model has one: in a
// constant-magnitude background B . dB/dt = 0, so the three diagonal
// eddy columns sum to exactly zero and that coefficient combination has
// no response. The SVD solve zeroes such directions; more dead
// directions than allowed means genuinely insufficient excitation.
//
// The reported condition number is that of the solved (identifiable,
// equilibrated) subproblem.
inline LsSolution solve_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                      int structural_nulls = 0) {
    const auto cols = a.cols();
    if (a.rows() < cols) {
        throw EstimationError("least squares: fewer rows than parameters");
    }
    Eigen::VectorXd scale(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        const double norm = a.col(j).norm();
        if (norm <= 0.0 || !std::isfinite(norm)) {
            throw EstimationError("least squares: zero or non-finite regressor column",
                                  std::numeric_limits<double>::infinity());
        }
        scale(j) = norm;
    }
    const Eigen::MatrixXd a_eq = a * scale.cwiseInverse().asDiagonal();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(a_eq, Eigen::ComputeThinU | Eigen::ComputeThinV);
    constexpr double kNullThreshold = 1e-12;
    svd.setThreshold(kNullThreshold);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < cols && sv(rank) > kNullThreshold * sv(0)) ++rank;
    const double cond = rank > 0 ? sv(0) / sv(rank - 1) : std::numeric_limits<double>::infinity();
    if (rank + structural_nulls < cols) {
        throw EstimationError("least squares: rank-deficient regressor", cond);
    }
    LsSolution sol;
    sol.x = scale.cwiseInverse().asDiagonal() * svd.solve(y).eval();
    sol.condition_number = cond;
    return sol;
}

}  // namespace detail

/// Per-sample compensation output: the estimated background field
/// (scalar magnitude or vector norm stored per model) and the residual
/// against ground truth. Invalid samples carry NaN.
struct CompensationResult {
    std::vector<double> residual_nt;
    ResidualStats stats;
    std::size_t dropped_samples = 0;
};

namespace detail {

inline ResidualStats residual_stats(const std::vector<double>& residual) {
    ResidualStats st;
    double sum = 0.0, sum2 = 0.0;
    for (double r : residual) {
        if (!std::isfinite(r)) continue;
        sum += r;
        sum2 += r * r;
        st.max = std::max(st.max, r);
        ++st.count;
    }
    if (st.count > 0) {
        st.mean = sum / static_cast<double>(st.count);
        const double var = sum2 / static_cast<double>(st.count) - st.mean * st.mean;
        st.stddev = std::sqrt(std::max(var, 0.0));
    }
    return st;
}

}  // namespace detail

/// Applies fitted coefficients to signals and scores the estimated
/// background field against ground truth:
/// residual = | (measurement - A_TL x) - B_e,gt | per sample.
inline CompensationResult compensate(const OnboardSignals& sig, const CalibrationResult& fit) {
    const Eigen::Index expected = fit.model == ModelKind::scalar_1d ? 18 : 21;
    if (fit.coefficients.size() != expected) {
        throw std::invalid_argument("compensate: coefficient length does not match model");
    }
    const FitOptions& opts = fit.options;
    const auto proxy = build_be_proxy(sig, fit.source, opts);

    CompensationResult out;
    out.residual_nt.assign(sig.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < sig.size(); ++i) {
        if (!detail::sample_usable(sig, proxy, i)) {
            ++out.dropped_samples;
            continue;
        }
        const FieldSample fs{proxy.field[i], proxy.derivative[i], sig.t[i]};
        if (fit.model == ModelKind::scalar_1d) {
            const double predicted = scalar_regressor_row(fs) * fit.coefficients;
            const double estimate = sig.meas_scalar[i] - predicted;
            out.residual_nt[i] = std::abs(estimate - sig.be_b[i].norm());
        } else {
            const Vec3 predicted = vector_regressor_block(fs) * fit.coefficients;
            const Vec3 estimate = sig.meas_vec[i] - predicted;
            out.residual_nt[i] = (estimate - sig.be_b[i]).norm();
        }
    }
    out.stats = detail::residual_stats(out.residual_nt);
    return out;
}

namespace detail {

inline CalibrationResult fit_model(const OnboardSignals& sig, AttitudeSource src, ModelKind model,
                                   const FitOptions& opts) {
    if (opts.target_mode == TargetMode::bandpass_filtered) {
        throw std::invalid_argument(
            "fit: band-pass-filtered 1D target is out of scope; use proxy_subtraction");
    }
    const double model_mag = opts.model_field_nt > 0.0 ? opts.model_field_nt : sig.be_e.norm();
    const auto proxy = build_be_proxy(sig, src, opts);
    const auto design = build_design(sig, proxy, model, model_mag);
    const std::size_t min_samples = model == ModelKind::scalar_1d ? 18 : 7;
    if (design.sample_of_row.size() < min_samples) {
        throw EstimationError("fit: fewer usable samples than parameters");
    }
    const auto sol =
        solve_least_squares(design.a, design.y, model == ModelKind::scalar_1d ? 1 : 0);

    CalibrationResult result;
    result.model = model;
    result.source = src;
    result.coefficients = sol.x;
    result.condition_number = sol.condition_number;
    result.ill_conditioned = sol.condition_number > opts.ill_conditioned_threshold;
    result.dropped_samples = design.dropped;
    result.options = opts;
    result.calibration = compensate(sig, result).stats;
    return result;
}

}  // namespace detail

/// Scalar (1D) fit: target meas_scalar - B_e,model, 18-term regressor
/// on the chosen proxy field. Invalid samples (e.g. OPM loss-of-lock)
/// are dropped.
inline CalibrationResult fit_scalar(const OnboardSignals& sig, AttitudeSource src,
                                    const FitOptions& opts = {}) {
    return detail::fit_model(sig, src, ModelKind::scalar_1d, opts);
}

/// Vector (3D) fit: target meas_vec - proxy field, 21-term regressor,
/// three stacked rows per sample.
inline CalibrationResult fit_vector(const OnboardSignals& sig, AttitudeSource src,
                                    const FitOptions& opts = {}) {
    return detail::fit_model(sig, src, ModelKind::vector_3d, opts);
}

}  // namespace aeromag
