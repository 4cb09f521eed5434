#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "multistage/numeric.hpp"

using namespace multistage;

TEST_CASE("integrate handles elementary integrands") {
    CHECK(integrate([](double) { return 1.0; }, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    // closed-form antiderivative: 1 - e^-10
    CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 10.0) ==
          doctest::Approx(1.0 - std::exp(-10.0)).epsilon(1e-11));
}

TEST_CASE("integrate degenerate and invalid ranges") {
    CHECK(integrate([](double x) { return x; }, 2.0, 2.0) == 0.0);
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("integrate reports non-convergence instead of returning junk") {
    QuadratureSpec tight;
    tight.abs_tol = 1e-14;
    tight.rel_tol = 1e-14;
    tight.max_subdivisions = 2;
    auto nasty = [](double x) { return std::sin(1.0 / (x + 1e-8)); };
    CHECK_THROWS_AS(integrate(nasty, 0.0, 1.0, tight), std::runtime_error);
}

TEST_CASE("integrate rejects bad specs") {
    QuadratureSpec spec;
    spec.abs_tol = 0.0;
    CHECK_THROWS_AS(integrate([](double) { return 1.0; }, 0.0, 1.0, spec),
                    std::invalid_argument);
    spec = {};
    spec.max_subdivisions = 0;
    CHECK_THROWS_AS(integrate([](double) { return 1.0; }, 0.0, 1.0, spec),
                    std::invalid_argument);
}

TEST_CASE("integrate is additive over subintervals") {
    std::mt19937_64 rng(7101);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_real_distribution<double> point(0.0, 3.0);
    for (int rep = 0; rep < 25; ++rep) {
        const double c0 = coef(rng), c1 = coef(rng), c2 = coef(rng), c3 = coef(rng);
        auto f = [=](double x) { return c0 + c1 * x + c2 * x * x + c3 * std::exp(-x); };
        double a = point(rng), b = point(rng), c = point(rng);
        if (a > b) std::swap(a, b);
        if (b > c) std::swap(b, c);
        if (a > b) std::swap(a, b);
        const double whole = integrate(f, a, c);
        const double split = integrate(f, a, b) + integrate(f, b, c);
        const double tol = 2.0 * std::max(1e-10, 1e-9 * std::abs(whole));
        CHECK(std::abs(whole - split) <= tol);
    }
}

TEST_CASE("log_gamma known values") {
    CHECK(log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-13));
    // Gamma(1/2) = sqrt(pi)
    CHECK(log_gamma(0.5) == doctest::Approx(0.5 * std::log(M_PI)).epsilon(1e-13));
}

TEST_CASE("log_gamma matches factorials") {
    double factorial = 1.0;
    for (int n = 1; n <= 15; ++n) {
        factorial *= n;
        CHECK(std::exp(log_gamma(n + 1.0)) ==
              doctest::Approx(factorial).epsilon(1e-10));
    }
}

TEST_CASE("log_gamma accuracy against libm across the range of interest") {
    for (double x : {0.5, 0.75, 1.3, 2.0, 3.7, 8.0, 12.5, 20.0, 33.3, 50.0}) {
        const double reference = std::lgamma(x);
        const double scale = std::max(1.0, std::abs(reference));
        CHECK(std::abs(log_gamma(x) - reference) / scale <= 1e-12);
    }
}

TEST_CASE("log_gamma domain") {
    CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
    CHECK_THROWS_AS(log_gamma(-1.5), std::domain_error);
}

TEST_CASE("expm1_over_x is stable through zero") {
    CHECK(expm1_over_x(0.0) == 1.0);
    CHECK(expm1_over_x(1.0) == doctest::Approx(std::expm1(1.0)).epsilon(1e-15));
    CHECK(expm1_over_x(1e-12) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(expm1_over_x(-1e-12) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(expm1_over_x(-2.0) == doctest::Approx((std::exp(-2.0) - 1.0) / -2.0).epsilon(1e-15));
}
