#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "wncs/delay_approx.hpp"
#include "wncs/lti.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using wncs::RationalTF;

namespace {

const RationalTF kMotor = RationalTF::continuous({4.159}, {1.0, 3.888});
const RationalTF kNominal = RationalTF::discrete({0.0831}, {1.0, -0.92}, 0.02);

// Impulse response of num/den by long division in z^-1.
std::vector<double> impulse_response(const RationalTF& tf, std::size_t n) {
    const std::size_t order = tf.order();
    const wncs::poly::Poly b = wncs::poly::pad_to(tf.num(), order + 1);
    const wncs::poly::Poly& a = tf.den();
    std::vector<double> h(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double v = k <= order ? b[k] : 0.0;
        for (std::size_t m = 1; m <= std::min(k, order); ++m) {
            v -= a[m] * h[k - m];
        }
        h[k] = v;
    }
    return h;
}

}  // namespace

TEST_CASE("forward Euler maps the motor onto the nominal model", "[lti]") {
    const RationalTF g = wncs::discretize_forward_euler(kMotor, 0.02);
    REQUIRE(g.is_discrete());
    REQUIRE(g.den().size() == 2);
    CHECK_THAT(g.num()[0], WithinAbs(0.08318, 1e-12));
    CHECK_THAT(-g.den()[1], WithinAbs(0.92224, 1e-12));
    // Printed model rounds to 0.0831/(z - 0.92).
    CHECK_THAT(g.num()[0], WithinAbs(0.0831, 1e-4));
    CHECK_THAT(-g.den()[1], WithinAbs(0.92, 3e-3));
}

TEST_CASE("forward Euler of an integrator and of a gain", "[lti]") {
    const RationalTF acc = wncs::discretize_forward_euler(RationalTF::continuous({1.0}, {1.0, 0.0}), 0.02);
    CHECK_THAT(acc.num()[0], WithinAbs(0.02, 1e-15));
    CHECK_THAT(acc.den()[1], WithinAbs(-1.0, 1e-15));

    const RationalTF k = wncs::discretize_forward_euler(RationalTF::gain(3.5), 0.02);
    CHECK(k.order() == 0);
    CHECK(k.num()[0] == 3.5);
}

TEST_CASE("forward Euler pole equals 1 - aT", "[lti]") {
    for (double t : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
        for (double a : {0.5, 3.888, 40.0}) {
            const RationalTF g = wncs::discretize_forward_euler(RationalTF::continuous({2.0}, {1.0, a}), t);
            CHECK_THAT(-g.den()[1], WithinAbs(1.0 - a * t, 1e-15));
        }
    }
}

TEST_CASE("zero-order hold of the motor at 1 ms and 20 ms", "[lti]") {
    const RationalTF fine = wncs::discretize_zoh(kMotor, 0.001);
    CHECK_THAT(-fine.den()[1], WithinAbs(0.996120, 1e-6));
    CHECK_THAT(fine.num()[0], WithinAbs(0.004151, 1e-6));

    const RationalTF coarse = wncs::discretize_zoh(kMotor, 0.02);
    CHECK_THAT(-coarse.den()[1], WithinAbs(0.92519, 1e-5));
    CHECK_THAT(coarse.num()[0], WithinAbs(0.0800, 1e-4));
}

TEST_CASE("zero-order hold approaches kT and a unit pole as T shrinks", "[lti]") {
    const double k = 4.159;
    const double t = 1e-7;
    const RationalTF g = wncs::discretize_zoh(kMotor, t);
    CHECK_THAT(g.num()[0] / t, WithinRel(k, 1e-6));
    CHECK_THAT(-g.den()[1], WithinAbs(1.0, 1e-6));
}

TEST_CASE("zero-order hold keeps stable poles inside the unit interval", "[lti]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> a_dist(1e-3, 1e3);
    std::uniform_real_distribution<double> t_dist(1e-4, 1.0);
    for (int n = 0; n < 1000; ++n) {
        const double a = a_dist(rng);
        const RationalTF g = wncs::discretize_zoh(RationalTF::continuous({1.0}, {1.0, a}), t_dist(rng));
        const double pole = -g.den()[1];
        CHECK(pole >= 0.0);
        CHECK(pole < 1.0);
    }
}

TEST_CASE("zero-order hold rejects what it cannot represent", "[lti]") {
    CHECK_THROWS_AS(wncs::discretize_zoh(RationalTF::continuous({1.0}, {1.0, 2.0, 1.0}), 0.02), std::invalid_argument);
    CHECK_THROWS_AS(wncs::discretize_zoh(RationalTF::continuous({1.0}, {1.0, 0.0}), 0.02), std::invalid_argument);
    CHECK_THROWS_AS(wncs::discretize_zoh(kMotor, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(wncs::discretize_zoh(wncs::discretize_zoh(kMotor, 0.02), 0.02), std::invalid_argument);
}

TEST_CASE("bilinear transform of the DFR approximant", "[lti]") {
    for (double tm : {0.04, 0.24, 1.0}) {
        const RationalTF g = wncs::bilinear(wncs::approximant(wncs::SeriesKind::DFR, tm), 0.02);
        const double c = 1.0 + 100.0 * tm * (9.54 * tm - 0.49);
        const double e = 1.0 + 100.0 * tm * (9.54 * tm + 0.49);
        const double d = 2.0 - 1908.0 * tm * tm;
        // Stored monic: divide the printed form by e.
        CHECK_THAT(g.num()[0], WithinAbs(c / e, 1e-9));
        CHECK_THAT(g.num()[1], WithinAbs(d / e, 1e-9));
        CHECK_THAT(g.num()[2], WithinAbs(e / e, 1e-9));
        CHECK_THAT(g.den()[1], WithinAbs(d / e, 1e-9));
        CHECK_THAT(g.den()[2], WithinAbs(c / e, 1e-9));
    }
}

TEST_CASE("bilinear transform preserves DC gain", "[lti]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_int_distribution<int> deg(0, 4);
    std::uniform_real_distribution<double> period(1e-3, 0.5);
    int checked = 0;
    while (checked < 1000) {
        const int n = deg(rng);
        wncs::poly::Poly den(static_cast<std::size_t>(n) + 1);
        wncs::poly::Poly num(static_cast<std::size_t>(n) + 1);
        for (double& c : den) c = coef(rng);
        for (double& c : num) c = coef(rng);
        den.front() = 1.0;
        if (std::abs(den.back()) < 0.05) {
            continue;  // DC gain undefined or ill-conditioned
        }
        const RationalTF tf = RationalTF::continuous(num, den);
        const double t = period(rng);
        RationalTF dz = wncs::bilinear(tf, t);
        if (std::abs(wncs::poly::eval(dz.den(), 1.0)) < 1e-9) {
            continue;
        }
        const std::complex<double> dc_s = wncs::tf_eval(tf, 0.0);
        const std::complex<double> dc_z = wncs::tf_eval(dz, 1.0);
        // Evaluating at z = 1 cancels heavily for small periods; bound the
        // rounding error by the coefficient magnitudes.
        double num_mass = 0.0;
        double den_mass = 0.0;
        for (double c : dz.num()) num_mass += std::abs(c);
        for (double c : dz.den()) den_mass += std::abs(c);
        const double bound = (num_mass + std::abs(dc_s) * den_mass) / std::abs(wncs::poly::eval(dz.den(), 1.0));
        CHECK(std::abs(dc_s - dc_z) < 1e-12 * bound);
        ++checked;
    }
}

TEST_CASE("bilinear transform of a gain and input checks", "[lti]") {
    const RationalTF k = wncs::bilinear(RationalTF::gain(-2.0), 0.02);
    CHECK(k.num()[0] == -2.0);
    CHECK_THROWS_AS(wncs::bilinear(kMotor, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(wncs::bilinear(wncs::bilinear(kMotor, 0.02), 0.02), std::invalid_argument);
    CHECK_THROWS_AS(RationalTF::continuous({1.0, 0.0, 0.0}, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("difference equation basics", "[lti]") {
    const RationalTF unity = RationalTF::discrete({1.0}, {1.0}, 0.02);
    wncs::DifferenceEqState s_unity(unity);
    for (double u : {0.0, 1.5, -3.0, 7.25}) {
        CHECK(wncs::tf_step(unity, s_unity, u) == u);
    }

    const RationalTF g = kNominal;
    wncs::DifferenceEqState zero(g);
    for (int n = 0; n < 50; ++n) {
        CHECK(wncs::tf_step(g, zero, 0.0) == 0.0);
    }

    wncs::DifferenceEqState st(g);
    CHECK_THAT(wncs::tf_step(g, st, 1.0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(wncs::tf_step(g, st, 1.0), WithinAbs(0.0831, 1e-15));
    CHECK_THAT(wncs::tf_step(g, st, 1.0), WithinAbs(0.159552, 1e-15));
}

TEST_CASE("difference equation matches convolution with the impulse response", "[lti]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> root(-0.9, 0.9);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_int_distribution<int> order(1, 4);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = order(rng);
        wncs::poly::Poly den{1.0};
        for (int k = 0; k < n; ++k) {
            den = wncs::poly::mul(den, {1.0, -root(rng)});
        }
        wncs::poly::Poly num(static_cast<std::size_t>(n) + 1);
        for (double& c : num) c = coef(rng);
        const RationalTF tf = RationalTF::discrete(num, den, 0.02);
        const std::vector<double> h = impulse_response(tf, 100);

        std::vector<double> u(100);
        for (double& v : u) v = coef(rng);
        wncs::DifferenceEqState st(tf);
        for (std::size_t k = 0; k < u.size(); ++k) {
            double expected = 0.0;
            for (std::size_t m = 0; m <= k; ++m) {
                expected += h[m] * u[k - m];
            }
            CHECK_THAT(wncs::tf_step(tf, st, u[k]), WithinAbs(expected, 1e-9));
        }
    }
}

TEST_CASE("difference equation rejects a mismatched state", "[lti]") {
    const RationalTF g = kNominal;
    wncs::DifferenceEqState wrong(3);
    CHECK_THROWS_AS(wncs::tf_step(g, wrong, 1.0), std::invalid_argument);
    wncs::DifferenceEqState cont(1);
    CHECK_THROWS_AS(wncs::tf_step(kMotor, cont, 1.0), std::invalid_argument);
}

TEST_CASE("rational evaluation", "[lti]") {
    const RationalTF g = kNominal;
    CHECK_THAT(wncs::tf_eval(g, 1.0).real(), WithinAbs(1.03875, 1e-12));
    CHECK_THROWS_AS(wncs::tf_eval(g, 0.92), wncs::EvaluationAtPole);
    CHECK_THROWS_AS(wncs::tf_eval(kMotor, -3.888), wncs::EvaluationAtPole);
    const RationalTF unity = RationalTF::gain(1.0);
    CHECK(wncs::tf_eval(unity, {2.0, -5.0}) == std::complex<double>(1.0, 0.0));
}
