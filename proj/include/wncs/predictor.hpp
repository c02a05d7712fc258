#pragma once

// Digital Smith predictor G_sp(z) = (1 - G_dm(z)) G_hat(z), where G_dm is the
// Tustin image of a second-order delay approximant and G_hat a first-order
// nominal plant. In negative powers of z:
//
//   G_sp(z) = (f z^-1 + g z^-3) / (1 + h z^-1 + i z^-2 + j z^-3)

#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <utility>

#include "wncs/delay_approx.hpp"
#include "wncs/lti.hpp"

namespace wncs {

using Millis = std::chrono::milliseconds;
using Seconds = std::chrono::duration<double>;

inline constexpr double kControlPeriod = 0.02;  // s

/// First-order nominal model 0.0831/(z - 0.92) at T = 20 ms.
inline RationalTF nominal_model() { return RationalTF::discrete({0.0831}, {1.0, -0.92}, kControlPeriod); }

struct AspCoefficients {
    double f = 0.0;
    double g = 0.0;
    double h = 0.0;
    double i = 0.0;
    double j = 0.0;
    SeriesKind series = SeriesKind::DFR;
    double t_m = 0.0;  // s

    /// 1 + h z^-1 + i z^-2 + j z^-3 in descending powers of z.
    poly::Poly denominator() const { return {1.0, h, i, j}; }
};

namespace detail {

inline void require_predictor_series(SeriesKind series) {
    if (series != SeriesKind::DFR && series != SeriesKind::Pade) {
        throw std::invalid_argument("Smith predictor supports only the DFR and Pade approximants");
    }
}

// (b, p) of b/(z - p).
inline std::pair<double, double> first_order_parts(const RationalTF& nominal, double period) {
    if (!nominal.is_discrete() || nominal.order() != 1 || poly::degree(nominal.num()) != 0) {
        throw std::invalid_argument("nominal model must be a discrete first-order b/(z - p)");
    }
    if (std::abs(*nominal.sample_period() - period) > 1e-12 * period) {
        throw std::invalid_argument("nominal model sample period differs from the predictor's");
    }
    return {nominal.num()[0], -nominal.den()[1]};
}

}  // namespace detail

/**
 * Monic Tustin image of the approximant at delay t_m, kept at full second
 * order even for t_m = 0 (where it is (z + 1)^2 / (z + 1)^2).
 * Returns {numerator, denominator}, both in descending powers of z.
 */
inline std::pair<poly::Poly, poly::Poly> discrete_delay_model(SeriesKind series, double t_m, double period) {
    detail::require_predictor_series(series);
    const auto [c1, c2] = shape_of(series);
    const poly::Poly den_s{c2 * t_m * t_m, c1 * t_m, 1.0};
    const poly::Poly num_s{c2 * t_m * t_m, -c1 * t_m, 1.0};
    const double w = 2.0 / period;
    const poly::Poly ratio_num{w, -w};
    const poly::Poly ratio_den{1.0, 1.0};
    poly::Poly num_z = wncs::detail::substitute(num_s, 2, ratio_num, ratio_den);
    poly::Poly den_z = wncs::detail::substitute(den_s, 2, ratio_num, ratio_den);
    const double lead = den_z.front();
    return {poly::scale(std::move(num_z), 1.0 / lead), poly::scale(std::move(den_z), 1.0 / lead)};
}

/// Expands (1 - G_dm(z)) G_hat(z) into the monic third-order form above.
inline AspCoefficients asp_coefficients(SeriesKind series, double t_m, const RationalTF& nominal,
                                        double period) {
    detail::require_predictor_series(series);
    if (!(t_m >= 0.0)) {
        throw std::invalid_argument("asp_coefficients: delay must be non-negative");
    }
    const auto [b, p] = detail::first_order_parts(nominal, period);
    const auto [num_z, den_z] = discrete_delay_model(series, t_m, period);

    // Numerator b (D - N) z^0..z^2 over D(z) (z - p); the z^1 term cancels for
    // mirrored approximants, leaving taps at z^-1 and z^-3.
    const double lead_gap = den_z[0] - num_z[0];
    const double tail_gap = den_z[2] - num_z[2];
    const poly::Poly den = poly::mul(den_z, {1.0, -p});

    AspCoefficients c;
    c.f = b * lead_gap;
    c.g = b * tail_gap;
    c.h = den[1];
    c.i = den[2];
    c.j = den[3];
    c.series = series;
    c.t_m = t_m;
    return c;
}

/// Coefficients for a fixed delay model; computed once and never retuned.
inline AspCoefficients csp_coefficients(double fixed_t_m, SeriesKind series, const RationalTF& nominal,
                                        double period) {
    return asp_coefficients(series, fixed_t_m, nominal, period);
}

/// Predictor coefficients plus its input/output windows (most recent first).
struct AspState {
    AspCoefficients coefficients;
    std::array<double, 3> x{};  // x[n-1], x[n-2], x[n-3]
    std::array<double, 3> y{};  // y[n-1], y[n-2], y[n-3]
};

inline AspState make_asp_state(SeriesKind series, double t_m, const RationalTF& nominal = nominal_model(),
                               double period = kControlPeriod) {
    return AspState{asp_coefficients(series, t_m, nominal, period), {}, {}};
}

/**
 * Records the drive just sent and evaluates
 *   y = f x[n-1] + g x[n-3] - h y[n-1] - i y[n-2] - j y[n-3]
 * with that drive as x[n-1]. The result is the predictor output for the next
 * controller sample, i.e. it already reflects x_n.
 */
inline double asp_step(AspState& state, double x_n) {
    const AspCoefficients& c = state.coefficients;
    state.x = {x_n, state.x[0], state.x[1]};
    const double out = c.f * state.x[0] + c.g * state.x[2] - c.h * state.y[0] - c.i * state.y[1] - c.j * state.y[2];
    state.y = {out, state.y[0], state.y[1]};
    return out;
}

/// Swaps coefficients for a new delay estimate; the windows carry over.
inline void asp_retune(AspState& state, SeriesKind series, Millis new_t_m, const RationalTF& nominal = nominal_model(),
                       double period = kControlPeriod) {
    const double t_m = std::chrono::duration_cast<Seconds>(new_t_m).count();
    if (!(t_m >= 0.0)) {
        throw std::invalid_argument("asp_retune: delay must be non-negative");
    }
    if (t_m == state.coefficients.t_m && series == state.coefficients.series) {
        return;
    }
    state.coefficients = asp_coefficients(series, t_m, nominal, period);
}

/// Delay-free error e2 = e1 - y.
constexpr double residual(double e1, double y_asp) { return e1 - y_asp; }

/**
 * Smith compensator with an exact k-sample delay model: y = G_hat x - z^-k G_hat x.
 * Output timing matches asp_step (already reflects the drive just recorded).
 */
class ExactDelayPredictor {
public:
    ExactDelayPredictor(RationalTF nominal, std::size_t delay_samples)
        : nominal_(std::move(nominal)), state_(nominal_), history_(delay_samples, 0.0) {
        if (!nominal_.is_discrete() || !nominal_.strictly_proper()) {
            throw std::invalid_argument("ExactDelayPredictor: nominal model must be discrete and strictly proper");
        }
    }

    double step(double x_n) {
        tf_step(nominal_, state_, x_n);
        const double undelayed = tf_free_response(nominal_, state_);
        if (history_.empty()) {
            return 0.0;
        }
        history_.push_back(undelayed);
        const double delayed = history_.front();
        history_.pop_front();
        return undelayed - delayed;
    }

private:
    RationalTF nominal_;
    DifferenceEqState state_;
    std::deque<double> history_;
};

}  // namespace wncs
