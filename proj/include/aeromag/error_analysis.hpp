// Closed-form calibration error bounds for the scalar and vector
// Tolles-Lawson models, plus an exact geometric oracle that verifies
// each approximation from explicitly constructed coplanar vectors.
//
// Scenario symbols: Ba and Be are the platform and background field
// magnitudes, theta the angle between them, alpha the attitude error of
// the background-field proxy, deltaB its magnitude error.
#pragma once

#include <cmath>
#include <stdexcept>

#include "aeromag/frames.hpp"

namespace aeromag {

struct ErrorScenario {
    double ba = 0.0;       // nT
    double be = 50000.0;   // nT
    double theta = 0.0;    // rad, in [0, pi]
    double alpha = 0.0;    // rad, in [0, pi/2)
    double delta_b = 0.0;  // nT
};

inline void validate(const ErrorScenario& s) {
    if (!(s.be > 0.0)) throw std::domain_error("ErrorScenario: Be must be positive");
    if (!(s.ba >= 0.0)) throw std::domain_error("ErrorScenario: Ba must be non-negative");
    if (!(s.theta >= 0.0 && s.theta <= kPi)) throw std::domain_error("ErrorScenario: theta outside [0, pi]");
    if (!(s.alpha >= 0.0 && s.alpha < kPi / 2.0)) throw std::domain_error("ErrorScenario: alpha outside [0, pi/2)");
}

/// Second-order projection error of the scalar model's truncated
/// magnitude expansion: Ba^2/(2 Be) * sin^2(theta).
inline double taylor_projection_error(const ErrorScenario& s) {
    validate(s);
    const double st = std::sin(s.theta);
    return s.ba * s.ba / (2.0 * s.be) * st * st;
}

/// Scalar-model error from substituting the total-field direction for
/// the background direction: (Ba^2/Be) * sin^2(theta).
inline double proxy_direction_error_scalar(const ErrorScenario& s) {
    validate(s);
    const double st = std::sin(s.theta);
    return s.ba * s.ba / s.be * st * st;
}

/// Vector-model error from the same substitution; the component of B_a
/// perpendicular to B_t is lost: Ba * sin(theta) to leading order.
inline double proxy_direction_error_vector(const ErrorScenario& s) {
    validate(s);
    return s.ba * std::sin(s.theta);
}

/// Scalar-model residual from an attitude error alpha rotating the
/// proxy direction in the (B_e, B_a) plane (worst case):
/// -Ba * (alpha*sin(theta) - alpha^2/2 * cos(theta)). Signed.
inline double scalar_attitude_error(const ErrorScenario& s) {
    validate(s);
    return -s.ba * (s.alpha * std::sin(s.theta) - 0.5 * s.alpha * s.alpha * std::cos(s.theta));
}

/// Vector-model residual magnitude from magnitude and attitude errors
/// of the background proxy: sqrt(deltaB^2 + (Be*alpha)^2).
inline double vector_error_magnitude(const ErrorScenario& s) {
    validate(s);
    return std::hypot(s.delta_b, s.be * s.alpha);
}

/// Exact error magnitudes from explicit worst-case coplanar geometry.
/// Each field corresponds to one closed form above and is computed from
/// constructed 3-vectors with no small-quantity expansion.
struct OracleErrors {
    double taylor_projection = 0.0;
    double proxy_scalar = 0.0;
    double proxy_vector = 0.0;
    double scalar_attitude = 0.0;  // signed, same convention as scalar_attitude_error
    double vector_magnitude = 0.0;
};

inline OracleErrors exact_vector_oracle(const ErrorScenario& s) {
    validate(s);
    const Vec3 e_hat(1.0, 0.0, 0.0);
    const Vec3 a_hat(std::cos(s.theta), std::sin(s.theta), 0.0);
    // Proxy direction tilted by alpha inside the (B_e, B_a) plane, the
    // worst case for the scalar projection. The tilt is toward B_a so
    // the exact difference Ba*(cos(theta) - cos(theta - alpha)) carries
    // the same sign convention as scalar_attitude_error.
    const Vec3 r_hat(std::cos(s.alpha), std::sin(s.alpha), 0.0);

    const Vec3 be = s.be * e_hat;
    const Vec3 ba = s.ba * a_hat;
    const Vec3 bt = be + ba;

    OracleErrors out;
    // |B_e + B_a| minus the two-term expansion Be + Ba cos(theta).
    out.taylor_projection = bt.norm() - (s.be + s.ba * std::cos(s.theta));
    if (bt.norm() > 0.0) {
        const Vec3 t_hat = bt.normalized();
        out.proxy_scalar = std::abs(ba.dot(e_hat) - ba.dot(t_hat));
        out.proxy_vector = (ba - ba.dot(t_hat) * t_hat).norm();
    }
    out.scalar_attitude = ba.dot(e_hat) - ba.dot(r_hat);
    out.vector_magnitude = (be - (s.be + s.delta_b) * r_hat).norm();
    return out;
}

}  // namespace aeromag
