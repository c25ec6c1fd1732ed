#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ndwp/special.hpp"
#include "oracles.hpp"

using namespace ndwp;
using Catch::Approx;

TEST_CASE("bessel_j1 matches the series oracle", "[special]") {
    CHECK(specfun::bessel_j1(0.0) == 0.0);
    CHECK(specfun::bessel_j1(1.0) == Approx(0.4400505857).epsilon(1e-9));
    CHECK(specfun::bessel_j1(0.5) == Approx(0.2422684577).epsilon(1e-9));
    for (double x : {0.05, 0.3, 0.7, 1.0, 2.0, 5.0, 10.0}) {
        const double ref = static_cast<double>(oracle::j1_series(x));
        CHECK(std::abs(specfun::bessel_j1(x) - ref) < 1e-12);
        CHECK(std::abs(specfun::bessel_j1(-x) + ref) < 1e-12);  // odd
    }
    CHECK_THROWS_AS(specfun::bessel_j1(std::nan("")), std::domain_error);
    CHECK_THROWS_AS(specfun::bessel_j1(INFINITY), std::domain_error);
}

TEST_CASE("bessel_j1_prime values and identities", "[special]") {
    CHECK(specfun::bessel_j1_prime(0.0) == 0.5);
    CHECK(specfun::bessel_j1_prime(1.0) == Approx(0.3251471008).epsilon(1e-9));
    // frozen from the differentiated-series oracle; cross-checked against
    // J1'(x) = J0(x) - J1(x)/x
    CHECK(specfun::bessel_j1_prime(0.5) == Approx(0.4539328919).epsilon(1e-9));
    for (double x : {0.05, 0.2, 0.5, 0.9, 1.0}) {
        const double ref = static_cast<double>(oracle::j1_prime_series(x));
        CHECK(std::abs(specfun::bessel_j1_prime(x) - ref) < 1e-12);
        // centered finite difference of J1
        const double h = 1e-6;
        const double fd = (specfun::bessel_j1(x + h) - specfun::bessel_j1(x - h)) / (2.0 * h);
        CHECK(std::abs(specfun::bessel_j1_prime(x) - fd) < 1e-8);
    }
    CHECK_THROWS_AS(specfun::bessel_j1_prime(std::nan("")), std::domain_error);
}

TEST_CASE("series-in-w helpers agree with the direct functions", "[special]") {
    for (double e : {1e-8, 1e-3, 0.1, 0.5, 0.9, 1.0}) {
        const double w = e * e;
        CHECK(specfun::j1p_of_w(w) == Approx(specfun::bessel_j1_prime(e)).margin(1e-14));
        if (e > 1e-6)
            CHECK(specfun::j1_over_x_w(w) == Approx(specfun::bessel_j1(e) / e).margin(1e-14));
        const double h = 1e-7;
        CHECK(specfun::j1p_of_w_deriv(w) ==
              Approx((specfun::j1p_of_w(w + h) - specfun::j1p_of_w(std::max(0.0, w - h))) /
                     (w - h > 0 ? 2.0 * h : h)).margin(1e-6));
        CHECK(specfun::j1_over_x_w_deriv(w) ==
              Approx((specfun::j1_over_x_w(w + h) - specfun::j1_over_x_w(std::max(0.0, w - h))) /
                     (w - h > 0 ? 2.0 * h : h)).margin(1e-6));
    }
    CHECK(specfun::j1_over_x_w(0.0) == 0.5);
}

TEST_CASE("mathieu_a0 values", "[special]") {
    CHECK(specfun::mathieu_a0(0.0).a0 == Approx(0.0).margin(1e-14));
    CHECK(specfun::mathieu_a0(1.0).a0 == Approx(-0.4551386041).epsilon(1e-9));
    CHECK(specfun::mathieu_a0(1.0).a0 == Approx(oracle::mathieu_a0_dense(1.0)).margin(1e-10));
    // large-q cross-checks against the asymptote
    CHECK(std::abs(specfun::mathieu_a0(25.0).a0 - (-40.0)) < 0.02 * 50.0);
    CHECK(std::abs(specfun::mathieu_a0(36.0).a0 - (-60.0)) < 0.02 * 72.0);
    // sign convention
    for (double q : {0.3, 2.0, 17.0}) {
        CHECK(specfun::mathieu_a0(q).a0 == Approx(specfun::mathieu_a0(-q).a0).margin(1e-12));
    }
    CHECK_THROWS_AS(specfun::mathieu_a0(std::nan("")), std::domain_error);
}

TEST_CASE("mathieu_a0 convergence and monotonicity invariants", "[special]") {
    for (double q : {0.5, 4.0, 36.0, 80.0}) {
        const auto mc = specfun::mathieu_a0(q);
        const int bigger = mc.truncation_order + mc.truncation_order / 2;
        const double ref = oracle::mathieu_a0_dense(q, bigger);
        CHECK(std::abs(mc.a0 - ref) < 1e-9 * std::max(1.0, std::abs(ref)));
    }
    double prev = 1.0;
    for (double q = 0.0; q <= 50.0; q += 0.5) {
        const double a = specfun::mathieu_a0(q).a0;
        CHECK(a <= prev + 1e-12);  // non-increasing in |q|
        prev = a;
    }
}

TEST_CASE("mathieu asymptotes", "[special]") {
    CHECK(specfun::mathieu_a0_small_q(0.0) == 0.0);
    CHECK(specfun::mathieu_a0_small_q(0.1) == Approx(-0.005));
    CHECK(specfun::mathieu_a0_large_q(25.0) == Approx(-40.0));
    CHECK(specfun::mathieu_a0_large_q(36.0) == Approx(-60.0));

    // matrix method vs asymptotes on their domains of use
    for (double q = 0.005; q <= 0.1; q += 0.005) {
        const double exact = specfun::mathieu_a0(q).a0;
        CHECK(std::abs(exact - specfun::mathieu_a0_small_q(q)) <=
              0.01 * std::max(0.5 * q * q, 1e-12));
    }
    for (double q = 25.0; q <= 100.0; q += 7.5) {
        const double exact = specfun::mathieu_a0(q).a0;
        CHECK(std::abs(exact - specfun::mathieu_a0_large_q(q)) <= 0.02 * 2.0 * q);
    }
    CHECK(std::abs(specfun::mathieu_a0(0.1).a0 - specfun::mathieu_a0_small_q(0.1)) <
          0.01 * std::abs(specfun::mathieu_a0(0.1).a0));
    CHECK(std::abs(specfun::mathieu_a0(36.0).a0 - specfun::mathieu_a0_large_q(36.0)) <
          0.02 * std::abs(specfun::mathieu_a0(36.0).a0));
}

TEST_CASE("mathieu derivative via Hellmann-Feynman", "[special]") {
    for (double q : {0.05, 0.7, 3.0, 20.0, 50.0}) {
        const double h = 1e-5 * std::max(1.0, q);
        const double fd = (specfun::mathieu_a0(q + h).a0 - specfun::mathieu_a0(q - h).a0) / (2.0 * h);
        CHECK(specfun::mathieu_a0_derivative(q) == Approx(fd).margin(1e-6 * std::max(1.0, q)));
    }
}

TEST_CASE("mathieu table matches direct evaluation", "[special]") {
    const auto table = specfun::MathieuTable::build(40.0);
    for (double q = 0.0; q <= 40.0; q += 0.37) {
        CHECK(table.a0(q) == Approx(specfun::mathieu_a0(q).a0).margin(2e-11));
        if (q > 0.01)
            CHECK(table.da0_dq(q) == Approx(specfun::mathieu_a0_derivative(q)).margin(1e-8));
    }
    CHECK(table.da0_dq_over_q(1e-9) == Approx(-1.0).margin(1e-6));
}
