#pragma once

// SISO rational transfer functions, their discretizations and the
// direct-form difference equation that evaluates a discrete one.

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wncs/error.hpp"
#include "wncs/polynomial.hpp"

namespace wncs {

enum class Domain { Continuous, Discrete };

/**
 * Ratio of two real polynomials in s (continuous) or z (discrete), both
 * stored in descending powers. Always proper; discrete forms are kept monic
 * in the denominator.
 */
class RationalTF {
public:
    static RationalTF continuous(poly::Poly num, poly::Poly den) {
        return RationalTF(std::move(num), std::move(den), Domain::Continuous, std::nullopt);
    }

    static RationalTF discrete(poly::Poly num, poly::Poly den, double sample_period) {
        if (!(sample_period > 0.0)) {
            throw std::invalid_argument("discrete transfer function needs a positive sample period");
        }
        return RationalTF(std::move(num), std::move(den), Domain::Discrete, sample_period);
    }

    static RationalTF gain(double k) { return continuous({k}, {1.0}); }

    const poly::Poly& num() const { return num_; }
    const poly::Poly& den() const { return den_; }
    Domain domain() const { return domain_; }
    bool is_discrete() const { return domain_ == Domain::Discrete; }
    std::optional<double> sample_period() const { return period_; }

    /// Degree of the denominator.
    std::size_t order() const { return poly::degree(den_); }

    bool strictly_proper() const { return poly::degree(num_) < order() || (num_.size() == 1 && num_[0] == 0.0); }

private:
    RationalTF(poly::Poly num, poly::Poly den, Domain domain, std::optional<double> period)
        : num_(poly::trim(std::move(num))), den_(poly::trim(std::move(den))), domain_(domain), period_(period) {
        if (den_.size() == 1 && den_[0] == 0.0) {
            throw std::invalid_argument("denominator must not be identically zero");
        }
        if (poly::degree(num_) > poly::degree(den_)) {
            throw std::invalid_argument("transfer function must be proper");
        }
        if (domain_ == Domain::Discrete) {
            const double lead = den_.front();
            num_ = poly::scale(std::move(num_), 1.0 / lead);
            den_ = poly::scale(std::move(den_), 1.0 / lead);
        }
    }

    poly::Poly num_;
    poly::Poly den_;
    Domain domain_;
    std::optional<double> period_;
};

namespace detail {

// Replaces s by ratio_num/ratio_den in p and clears the common factor
// ratio_den^n, where n is the (shared) order of the transfer function.
inline poly::Poly substitute(const poly::Poly& p, std::size_t n, const poly::Poly& ratio_num,
                             const poly::Poly& ratio_den) {
    poly::Poly out{0.0};
    const std::size_t deg = poly::degree(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const std::size_t k = deg - i;  // power of s carried by p[i]
        if (p[i] == 0.0) {
            continue;
        }
        const poly::Poly term = poly::mul(poly::pow(ratio_num, k), poly::pow(ratio_den, n - k));
        out = poly::add(out, poly::scale(term, p[i]));
    }
    return out;
}

inline void require_continuous(const RationalTF& tf, const char* op) {
    if (tf.is_discrete()) {
        throw std::invalid_argument(std::string(op) + ": input must be a continuous transfer function");
    }
}

inline void require_positive_period(double period, const char* op) {
    if (!(period > 0.0)) {
        throw std::invalid_argument(std::string(op) + ": sample period must be positive");
    }
}

}  // namespace detail

/// s -> (z - 1)/T.
inline RationalTF discretize_forward_euler(const RationalTF& tf, double period) {
    detail::require_continuous(tf, "discretize_forward_euler");
    detail::require_positive_period(period, "discretize_forward_euler");
    const std::size_t n = tf.order();
    const poly::Poly zm1{1.0, -1.0};
    const poly::Poly t{period};
    return RationalTF::discrete(detail::substitute(tf.num(), n, zm1, t), detail::substitute(tf.den(), n, zm1, t),
                                period);
}

/// Exact sampled equivalent of k/(s + a) under a zero-order hold.
inline RationalTF discretize_zoh(const RationalTF& tf, double period) {
    detail::require_continuous(tf, "discretize_zoh");
    detail::require_positive_period(period, "discretize_zoh");
    if (tf.order() != 1 || poly::degree(tf.num()) != 0) {
        throw std::invalid_argument("discretize_zoh: only strictly proper first-order k/(s + a) is supported");
    }
    const double lead = tf.den()[0];
    const double a = tf.den()[1] / lead;
    const double k = tf.num()[0] / lead;
    if (a == 0.0) {
        throw std::invalid_argument("discretize_zoh: pole at the origin is not supported");
    }
    const double pole = std::exp(-a * period);
    return RationalTF::discrete({(k / a) * (1.0 - pole)}, {1.0, -pole}, period);
}

/// Tustin map s -> (2/T)(z - 1)/(z + 1).
inline RationalTF bilinear(const RationalTF& tf, double period) {
    detail::require_continuous(tf, "bilinear");
    detail::require_positive_period(period, "bilinear");
    const std::size_t n = tf.order();
    const double w = 2.0 / period;
    const poly::Poly ratio_num{w, -w};
    const poly::Poly ratio_den{1.0, 1.0};
    return RationalTF::discrete(detail::substitute(tf.num(), n, ratio_num, ratio_den),
                                detail::substitute(tf.den(), n, ratio_num, ratio_den), period);
}

/// Cascade a*b. Both operands must live in the same domain (and period).
inline RationalTF series(const RationalTF& a, const RationalTF& b) {
    if (a.domain() != b.domain() || a.sample_period() != b.sample_period()) {
        throw std::invalid_argument("series: operands must share domain and sample period");
    }
    const poly::Poly num = poly::mul(a.num(), b.num());
    const poly::Poly den = poly::mul(a.den(), b.den());
    return a.is_discrete() ? RationalTF::discrete(num, den, *a.sample_period()) : RationalTF::continuous(num, den);
}

/// Rational evaluation. Throws EvaluationAtPole when the denominator vanishes.
inline std::complex<double> tf_eval(const RationalTF& tf, std::complex<double> point) {
    const std::complex<double> d = poly::eval(tf.den(), point);
    const double scale = poly::magnitude_bound(tf.den(), std::abs(point));
    if (std::abs(d) <= 1e-12 * scale) {
        throw EvaluationAtPole("tf_eval: point is a root of the denominator");
    }
    return poly::eval(tf.num(), point) / d;
}

/**
 * Input/output history of a discrete transfer function in direct form I.
 * Index 0 holds the most recent past sample (x[n-1], y[n-1]).
 */
class DifferenceEqState {
public:
    DifferenceEqState() = default;

    explicit DifferenceEqState(std::size_t order) : inputs_(order, 0.0), outputs_(order, 0.0) {}

    explicit DifferenceEqState(const RationalTF& tf) : DifferenceEqState(tf.order()) {}

    std::size_t order() const { return inputs_.size(); }
    const std::vector<double>& inputs() const { return inputs_; }
    const std::vector<double>& outputs() const { return outputs_; }

    void push(double x, double y) {
        if (inputs_.empty()) {
            return;
        }
        for (std::size_t k = inputs_.size() - 1; k > 0; --k) {
            inputs_[k] = inputs_[k - 1];
            outputs_[k] = outputs_[k - 1];
        }
        inputs_[0] = x;
        outputs_[0] = y;
    }

    void reset() {
        std::fill(inputs_.begin(), inputs_.end(), 0.0);
        std::fill(outputs_.begin(), outputs_.end(), 0.0);
    }

private:
    std::vector<double> inputs_;
    std::vector<double> outputs_;
};

namespace detail {

inline void require_matching(const RationalTF& tf, const DifferenceEqState& state) {
    if (!tf.is_discrete()) {
        throw std::invalid_argument("difference equation needs a discrete transfer function");
    }
    if (state.order() != tf.order()) {
        throw std::invalid_argument("difference equation state does not match transfer function order");
    }
}

}  // namespace detail

/// y[n] minus its direct feedthrough term: the part fixed by past samples.
inline double tf_free_response(const RationalTF& tf, const DifferenceEqState& state) {
    detail::require_matching(tf, state);
    const std::size_t n = tf.order();
    const poly::Poly b = poly::pad_to(tf.num(), n + 1);
    const poly::Poly& a = tf.den();
    double y = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        y += b[k] * state.inputs()[k - 1] - a[k] * state.outputs()[k - 1];
    }
    return y;
}

/// Computes y[n] for input u[n] and advances the state by one sample.
inline double tf_step(const RationalTF& tf, DifferenceEqState& state, double u) {
    const double free = tf_free_response(tf, state);
    const double feedthrough = poly::pad_to(tf.num(), tf.order() + 1)[0];
    const double y = feedthrough * u + free;
    state.push(u, y);
    return y;
}

}  // namespace wncs
