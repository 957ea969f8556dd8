#include <cmath>

#include <doctest.h>

#include "mqmc/errors.hpp"
#include "mqmc/numerics.hpp"

using namespace mqmc;

namespace {

// Phi(x) = 1/2 + phi(x) * sum_n x^{2n+1} / (1*3*...*(2n+1)), fine for moderate |x|.
double cdf_series(double x) {
    double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= x * x / (2.0 * n + 1.0);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return 0.5 + std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi) * sum;
}

double inv_cdf_bisection(double p) {
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("normal cdf") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(std::abs(normal_cdf(1.959963985) - 0.975) < 1e-9);
    for (double x : {-3.0, -1.2, 0.3, 1.959963985, 2.5}) {
        CHECK(std::abs(normal_cdf(x) - cdf_series(x)) < 1e-13);
        CHECK(std::abs(normal_cdf(x) + normal_ccdf(x) - 1.0) < 1e-15);
    }
    CHECK(normal_cdf(-40.0) < 1e-300);
    CHECK(normal_cdf(-40.0) >= 0.0);
    CHECK(normal_ccdf(9.0) == doctest::Approx(normal_cdf(-9.0)).epsilon(1e-14));
}

TEST_CASE("log normal cdf in the far tail") {
    // log Phi(x) ~ log phi(x) - log|x| + log(1 - 1/x^2 + 3/x^4 - 15/x^6)
    for (double x : {-40.0, -60.0, -200.0}) {
        const double x2 = x * x;
        const double approx = -0.5 * x2 - std::log(std::sqrt(2.0 * kPi)) - std::log(-x) +
                              std::log(1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2));
        CHECK(std::isfinite(log_normal_cdf(x)));
        CHECK(log_normal_cdf(x) == doctest::Approx(approx).epsilon(1e-12));
    }
    CHECK(log_normal_cdf(0.5) == doctest::Approx(std::log(normal_cdf(0.5))).epsilon(1e-15));
}

TEST_CASE("inverse normal cdf") {
    CHECK(normal_inv_cdf(0.5) == 0.0);
    CHECK(std::abs(normal_inv_cdf(0.975) - 1.959964) < 1e-6);
    CHECK(std::abs(normal_inv_cdf(0.975) - inv_cdf_bisection(0.975)) < 1e-12);
    for (double x : {-5.0, -1.0, 0.0, 1.0, 5.0}) CHECK(std::abs(normal_inv_cdf(normal_cdf(x)) - x) < 1e-8);
    for (double p : {1e-300, 1e-20, 1e-8, 0.02425, 0.3, 0.97575, 1.0 - 1e-12}) {
        const double x = normal_inv_cdf(p);
        const double back = p < 0.5 ? normal_cdf(x) : normal_ccdf(x);
        const double target = p < 0.5 ? p : 1.0 - p;
        CHECK(back == doctest::Approx(target).epsilon(1e-12));
    }
    CHECK_THROWS_AS(normal_inv_cdf(0.0), DomainError);
    CHECK_THROWS_AS(normal_inv_cdf(1.0), DomainError);
    CHECK_THROWS_AS(normal_inv_cdf(std::nan("")), DomainError);
}

TEST_CASE("semi-infinite integrals") {
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(std::abs(integrate_semi_infinite([](double t) { return std::exp(-t); }, 0.0) - 1.0) < 1e-10);
    CHECK(std::abs(integrate_semi_infinite([](double t) { return normal_pdf(t); }, -inf) - 1.0) < 1e-10);
    CHECK(std::abs(integrate_semi_infinite([](double t) { return t * std::exp(-0.5 * t * t); }, 0.0) - 1.0) < 1e-10);
}

TEST_CASE("adaptive quadrature") {
    const auto r = integrate_adaptive([](double x) { return std::cos(x); }, 0.0, kPi / 2);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(r.error <= 1e-10);

    QuadratureSpec tight;
    tight.abs_tol = tight.rel_tol = 1e-15;
    tight.max_subdivisions = 4;
    CHECK_THROWS_AS(integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, tight), AccuracyError);

    QuadratureSpec bad;
    bad.abs_tol = -1.0;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("gauss-legendre rules") {
    for (std::size_t n : {1u, 2u, 5u, 20u}) {
        const auto rule = gauss_legendre(n);
        double w = 0.0;
        for (double v : rule.weights) w += v;
        CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
    }
    const auto two = gauss_legendre(2);
    CHECK(two.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));

    CHECK(composite_gauss_legendre([](double x) { return x; }, 0.0, 1.0, 100, 2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(composite_gauss_legendre([](double x) { return x * x * x; }, 0.0, 1.0, 1, 2) - 0.25) < 1e-14);
    CHECK(std::abs(composite_gauss_legendre([](double x) { return std::sin(2 * kPi * x); }, 0.0, 1.0, 100, 2)) < 1e-10);

    const auto rule = make_composite_rule(0.0, 2.0, 3, 4);
    CHECK(rule.nodes.size() == 12);
    CHECK(rule.apply([](double x) { return std::pow(x, 7); }) == doctest::Approx(32.0).epsilon(1e-13));
}

TEST_CASE("riemann zeta") {
    CHECK(riemann_zeta(2.0) == doctest::Approx(kPi * kPi / 6.0).epsilon(1e-13));
    CHECK(riemann_zeta(4.0) == doctest::Approx(std::pow(kPi, 4) / 90.0).epsilon(1e-13));
    // zeta(s) = 1/(s-1) + Euler-Mascheroni + O(s-1)
    CHECK(riemann_zeta(1.05) == doctest::Approx(1.0 / 0.05 + 0.5772156649 + 0.0728158454 * 0.05).epsilon(1e-5));
    CHECK_THROWS_AS(riemann_zeta(1.01), CapabilityError);
}
