#pragma once

// Characteristic roots of the scalar retarded DDE
//
//   x'' + a1 x' + a0 x + b1 x'(t - td) + b0 x(t - td) = 0,
//   d(s) = s^2 + a1 s + a0 + (b1 s + b0) e^{-s td},
//
// by Chebyshev collocation of the solution operator's infinitesimal generator
// on [-td, 0], followed by Newton polishing on d(s) itself.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "wncs/control.hpp"
#include "wncs/error.hpp"

namespace wncs {

using cplx = std::complex<double>;

struct ScalarDde {
    double a1 = 0.0;  // s^1, undelayed
    double a0 = 0.0;  // s^0, undelayed
    double b1 = 0.0;  // s^1, delayed
    double b0 = 0.0;  // s^0, delayed
    double delay = 0.0;

    ScalarDde with_delay(double td) const {
        ScalarDde copy = *this;
        copy.delay = td;
        return copy;
    }

    cplx characteristic(cplx s) const { return s * s + a1 * s + a0 + (b1 * s + b0) * std::exp(-delay * s); }

    cplx characteristic_derivative(cplx s) const {
        const cplx e = std::exp(-delay * s);
        return 2.0 * s + a1 + b1 * e - delay * (b1 * s + b0) * e;
    }
};

/// PI speed loop around 4.159/(s + 3.888) with round-trip delay td:
/// a1 = 3.888, b1 = Kp 4.159, b0 = Ki 4.159.
inline ScalarDde speed_loop_dde(double td, double kp = kDefaultKp, double ki = kDefaultKi) {
    return ScalarDde{3.888, 0.0, kp * 4.159, ki * 4.159, td};
}

struct SpectrumResult {
    std::size_t order = 0;
    std::vector<cplx> roots;         // real part descending
    std::vector<double> residuals;   // |d(root)|
};

namespace detail {

// Chebyshev-Gauss-Lobatto differentiation matrix on x_j = cos(pi j / n).
inline Eigen::MatrixXd chebyshev_diff(std::size_t n, std::vector<double>& nodes) {
    nodes.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        nodes[j] = std::cos(std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
    }
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n + 1));
    auto weight = [n](std::size_t j) { return (j == 0 || j == n) ? 2.0 : 1.0; };
    for (std::size_t i = 0; i <= n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
            if (i == j) {
                continue;
            }
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            const double v = weight(i) / weight(j) * sign / (nodes[i] - nodes[j]);
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            row_sum += v;
        }
        d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -row_sum;
    }
    return d;
}

inline std::optional<cplx> newton_polish(const ScalarDde& dde, cplx s, int max_iter = 60) {
    for (int it = 0; it < max_iter; ++it) {
        const cplx f = dde.characteristic(s);
        const cplx df = dde.characteristic_derivative(s);
        if (std::abs(df) == 0.0) {
            return std::nullopt;
        }
        const cplx step = f / df;
        s -= step;
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
            return std::nullopt;
        }
        if (std::abs(step) <= 1e-14 * (1.0 + std::abs(s))) {
            break;
        }
    }
    const double tol = 1e-10 * std::max(1.0, std::norm(s));
    if (std::abs(dde.characteristic(s)) > tol) {
        return std::nullopt;
    }
    return s;
}

}  // namespace detail

/// Eigenvalues of the collocated generator, unpolished, real part descending.
inline std::vector<cplx> collocation_eigenvalues(const ScalarDde& dde, std::size_t n) {
    std::vector<double> nodes;
    const Eigen::MatrixXd cheb = detail::chebyshev_diff(n, nodes);
    const Eigen::Index m = 2;
    const Eigen::Index size = m * static_cast<Eigen::Index>(n + 1);
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(size, size);

    // Block row 0: phi'(0) = A0 phi(0) + A1 phi(-td), state (x, x').
    gen(0, 1) = 1.0;
    gen(1, 0) = -dde.a0;
    gen(1, 1) = -dde.a1;
    const Eigen::Index last = m * static_cast<Eigen::Index>(n);
    gen(1, last + 0) += -dde.b0;
    gen(1, last + 1) += -dde.b1;

    // Remaining rows: derivative of the interpolant, theta = (td/2)(x - 1).
    const double scale = 2.0 / dde.delay;
    for (Eigen::Index i = 1; i <= static_cast<Eigen::Index>(n); ++i) {
        for (Eigen::Index j = 0; j <= static_cast<Eigen::Index>(n); ++j) {
            const double v = scale * cheb(i, j);
            gen(m * i, m * j) = v;
            gen(m * i + 1, m * j + 1) = v;
        }
    }

    Eigen::EigenSolver<Eigen::MatrixXd> solver(gen, false);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("collocation eigenvalue solver failed");
    }
    std::vector<cplx> eig(solver.eigenvalues().begin(), solver.eigenvalues().end());
    std::sort(eig.begin(), eig.end(), [](cplx x, cplx y) { return x.real() > y.real(); });
    return eig;
}

/**
 * Roots of d(s) from an order-n collocation, each Newton-polished on d(s).
 * Only roots that polish to |d| < 1e-10 max(1, |s|^2) are reported; throws
 * ConvergenceError if the rightmost candidate does not.
 */
inline SpectrumResult characteristic_roots(const ScalarDde& dde, std::size_t n = 32) {
    if (n < 8) {
        throw std::invalid_argument("characteristic_roots: collocation order must be at least 8");
    }
    if (!(dde.delay > 0.0)) {
        throw std::invalid_argument("characteristic_roots: delay must be positive");
    }
    const std::vector<cplx> eig = collocation_eigenvalues(dde, n);

    SpectrumResult out;
    out.order = n;
    bool first = true;
    for (const cplx& lambda : eig) {
        const std::optional<cplx> polished = detail::newton_polish(dde, lambda);
        const bool drifted = polished && std::abs(*polished - lambda) > 0.1 * (1.0 + std::abs(lambda));
        if (!polished || drifted) {
            if (first) {
                throw ConvergenceError("rightmost root did not polish; increase the collocation order");
            }
            continue;
        }
        first = false;
        cplx s = *polished;
        if (std::abs(s.imag()) <= 1e-12 * (1.0 + std::abs(s.real()))) {
            s = {s.real(), 0.0};
        }
        const bool duplicate = std::any_of(out.roots.begin(), out.roots.end(), [&](cplx r) {
            return std::abs(r - s) <= 1e-8 * (1.0 + std::abs(s));
        });
        if (!duplicate) {
            out.roots.push_back(s);
        }
    }
    std::sort(out.roots.begin(), out.roots.end(), [](cplx x, cplx y) {
        return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag();
    });
    out.residuals.reserve(out.roots.size());
    for (const cplx& r : out.roots) {
        out.residuals.push_back(std::abs(dde.characteristic(r)));
    }
    return out;
}

struct RightmostRoot {
    cplx root;
    std::size_t order = 0;  // collocation order at which it settled
};

/// Doubles the order from `start` until the rightmost root moves by < tol.
inline RightmostRoot rightmost_root(const ScalarDde& dde, std::size_t start = 32, double tol = 1e-4,
                                    std::size_t max_order = 1024) {
    std::size_t n = start;
    cplx previous = characteristic_roots(dde, n).roots.front();
    while (n * 2 <= max_order) {
        n *= 2;
        const cplx current = characteristic_roots(dde, n).roots.front();
        if (std::abs(current - previous) < tol) {
            return {current, n};
        }
        previous = current;
    }
    throw ConvergenceError("rightmost root did not settle within the maximum collocation order");
}

/// Bisection on the rightmost real part; the sign must differ at the ends.
inline double critical_delay(const ScalarDde& dde, double t_lo, double t_hi, double tol = 1e-4) {
    if (!(t_lo > 0.0 && t_lo < t_hi)) {
        throw std::invalid_argument("critical_delay: need 0 < t_lo < t_hi");
    }
    auto growth = [&](double td) { return rightmost_root(dde.with_delay(td)).root.real(); };
    double f_lo = growth(t_lo);
    const double f_hi = growth(t_hi);
    if (!(f_lo < 0.0 && f_hi > 0.0) && !(f_lo > 0.0 && f_hi < 0.0)) {
        throw NoCrossing("critical_delay: rightmost real part does not change sign in range");
    }
    while (t_hi - t_lo > tol) {
        const double mid = 0.5 * (t_lo + t_hi);
        const double f_mid = growth(mid);
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            t_lo = mid;
            f_lo = f_mid;
        } else {
            t_hi = mid;
        }
    }
    return 0.5 * (t_lo + t_hi);
}

struct Crossing {
    double omega = 0.0;  // rad/s
    double delay = 0.0;  // s
};

/**
 * Smallest delay at which a root reaches s = j w. From |b1 j w + b0| =
 * |a0 - w^2 + a1 j w| (a quadratic in w^2) and the phase condition
 * td = (pi + arg(b1 j w + b0) - arg(a0 - w^2 + a1 j w)) / w mod 2 pi / w.
 */
inline Crossing crossing_oracle(const ScalarDde& dde) {
    const double p = dde.a1 * dde.a1 - dde.b1 * dde.b1 - 2.0 * dde.a0;
    const double q = dde.a0 * dde.a0 - dde.b0 * dde.b0;
    const double disc = p * p - 4.0 * q;
    if (disc < 0.0) {
        throw NoCrossing("crossing_oracle: no real crossing frequency");
    }
    std::optional<Crossing> best;
    for (double sign : {1.0, -1.0}) {
        const double w2 = 0.5 * (-p + sign * std::sqrt(disc));
        if (!(w2 > 0.0)) {
            continue;
        }
        const double w = std::sqrt(w2);
        const cplx delayed{dde.b0, dde.b1 * w};
        const cplx undelayed{dde.a0 - w2, dde.a1 * w};
        if (std::abs(delayed) == 0.0) {
            continue;
        }
        double phase = std::numbers::pi + std::arg(delayed) - std::arg(undelayed);
        const double two_pi = 2.0 * std::numbers::pi;
        phase = std::fmod(phase, two_pi);
        if (phase <= 0.0) {
            phase += two_pi;
        }
        const Crossing c{w, phase / w};
        if (!best || c.delay < best->delay) {
            best = c;
        }
    }
    if (!best) {
        throw NoCrossing("crossing_oracle: no positive crossing frequency");
    }
    return *best;
}

}  // namespace wncs
