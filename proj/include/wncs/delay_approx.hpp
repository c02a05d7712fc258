#pragma once

// Second-order rational approximants of the pure delay e^{-s tau} and their
// step-response integral-square-error scores.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string_view>

#include "wncs/lti.hpp"

namespace wncs {

enum class SeriesKind { Pade, Marshall, Product, Laguerre, Paynter, DFR };

inline constexpr std::array<SeriesKind, 6> kAllSeries{SeriesKind::Pade,     SeriesKind::Marshall,
                                                      SeriesKind::Product,  SeriesKind::Laguerre,
                                                      SeriesKind::Paynter,  SeriesKind::DFR};

constexpr std::string_view to_string(SeriesKind kind) {
    switch (kind) {
        case SeriesKind::Pade: return "Pade";
        case SeriesKind::Marshall: return "Marshall";
        case SeriesKind::Product: return "Product";
        case SeriesKind::Laguerre: return "Laguerre";
        case SeriesKind::Paynter: return "Paynter";
        case SeriesKind::DFR: return "DFR";
    }
    return "?";
}

inline SeriesKind parse_series(std::string_view name) {
    for (SeriesKind k : kAllSeries) {
        if (to_string(k) == name) {
            return k;
        }
    }
    if (name == "dfr") return SeriesKind::DFR;
    if (name == "pade") return SeriesKind::Pade;
    throw std::invalid_argument("unknown delay approximation series: " + std::string(name));
}

/// Numerator equals the denominator evaluated at -s, so |G(jw)| = 1. Marshall
/// flips the s^2 term instead and is not all-pass; Paynter has a unit numerator.
constexpr bool is_all_pass(SeriesKind kind) { return kind != SeriesKind::Paynter && kind != SeriesKind::Marshall; }

/// Coefficients of 1 + c1 (s tau) + c2 (s tau)^2 for the denominator.
struct SecondOrderShape {
    double c1;
    double c2;
};

constexpr SecondOrderShape shape_of(SeriesKind kind) {
    switch (kind) {
        // Exact (2,2) Pade constant; tabulated in print as 0.0833.
        case SeriesKind::Pade: return {0.5, 1.0 / 12.0};
        case SeriesKind::Marshall: return {0.0, 0.0625};
        case SeriesKind::Product: return {0.5, 0.125};
        case SeriesKind::Laguerre: return {0.5, 0.0625};
        case SeriesKind::Paynter: return {1.0, 0.405};
        case SeriesKind::DFR: return {0.49, 0.0954};
    }
    return {0.0, 0.0};
}

/// Continuous rational approximation of e^{-s tau}; unity for tau = 0.
inline RationalTF approximant(SeriesKind kind, double tau) {
    if (!(tau >= 0.0)) {
        throw std::invalid_argument("approximant: delay must be non-negative");
    }
    if (tau == 0.0) {
        return RationalTF::gain(1.0);
    }
    const auto [c1, c2] = shape_of(kind);
    const poly::Poly den{c2 * tau * tau, c1 * tau, 1.0};
    poly::Poly num{c2 * tau * tau, -c1 * tau, 1.0};
    if (kind == SeriesKind::Marshall) {
        num = {-c2 * tau * tau, 0.0, 1.0};
    } else if (kind == SeriesKind::Paynter) {
        num = {1.0};
    }
    return RationalTF::continuous(num, den);
}

struct ApproxScore {
    SeriesKind kind;
    double tau;      // s
    double ise;      // dimensionless
    double horizon;  // s
};

/**
 * ISE between the ideal delayed unit step and the approximant's step response,
 * sum over t_k = k dt < horizon of dt (step(t_k - tau) - y(t_k))^2. The
 * approximant is simulated with its Tustin equivalent at dt.
 */
inline ApproxScore ise_error(SeriesKind kind, double tau, double horizon, double dt) {
    if (!(tau >= 0.0)) {
        throw std::invalid_argument("ise_error: delay must be non-negative");
    }
    if (tau == 0.0) {
        return {kind, tau, 0.0, horizon};
    }
    if (!(horizon >= 10.0 * tau)) {
        throw std::invalid_argument("ise_error: horizon must be at least ten delays");
    }
    if (!(dt > 0.0) || dt > tau / 100.0) {
        throw std::invalid_argument("ise_error: step must be positive and at most tau/100");
    }
    const RationalTF model = bilinear(approximant(kind, tau), dt);
    DifferenceEqState state(model);
    const auto steps = static_cast<long>(std::llround(horizon / dt));
    double ise = 0.0;
    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double y = tf_step(model, state, 1.0);
        // Ideal step switches on at tau; guard against t = k*dt landing a hair below it.
        const double ideal = (t + 1e-9 * dt >= tau) ? 1.0 : 0.0;
        ise += dt * (ideal - y) * (ideal - y);
    }
    return {kind, tau, ise, horizon};
}

/// Defaults: horizon 10 tau, dt = tau/1000.
inline ApproxScore ise_error(SeriesKind kind, double tau) {
    if (tau == 0.0) {
        return {kind, 0.0, 0.0, 0.0};
    }
    return ise_error(kind, tau, 10.0 * tau, tau / 1000.0);
}

}  // namespace wncs
