#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ndwp/secular.hpp"
#include "oracles.hpp"

using namespace ndwp;
using Catch::Approx;
using secular::SecularPoint;
using secular::SphereVec;

TEST_CASE("field config units and anchors", "[secular]") {
    FieldConfig cfg{60, 0.01, 0.0};
    cfg.validate();
    CHECK(cfg.omega() * 60.0 * 60.0 * 60.0 == Approx(1.0).epsilon(1e-15));
    // 0.01/60^4 a.u. is about 4 V/cm; resonant frequency about 30.5 GHz
    CHECK(cfg.microwave_field_v_per_cm() == Approx(4.0).epsilon(0.01));
    CHECK(cfg.microwave_frequency_ghz() == Approx(30.48).epsilon(0.002));
    CHECK(FieldConfig{60, 0.015, 0.0}.microwave_field_v_per_cm() == Approx(6.0).epsilon(0.01));

    // scaled <-> atomic round trip at machine precision
    for (double f0 : {1e-6, 0.0123, 0.04}) {
        const FieldConfig c{60, f0, f0 / 5.0};
        CHECK(scaled_from_atomic_field(c.microwave_field_au(), 60) == Approx(f0).epsilon(1e-15));
        CHECK(scaled_from_atomic_field(c.static_field_au(), 60) == Approx(f0 / 5.0).epsilon(1e-15));
    }

    CHECK_THROWS_AS((FieldConfig{1, 0.0, 0.0}.validate()), ConfigError);
    CHECK_THROWS_AS((FieldConfig{60, -0.1, 0.0}.validate()), ConfigError);
}

TEST_CASE("eccentricity", "[secular]") {
    CHECK(secular::eccentricity(0.0) == 1.0);
    CHECK(secular::eccentricity(1.0) == 0.0);
    CHECK(secular::eccentricity(0.6) == Approx(0.8).epsilon(1e-15));
    CHECK_THROWS_AS(secular::eccentricity(1.5), std::domain_error);
}

TEST_CASE("resonant dipoles", "[secular]") {
    const int n0 = 60;
    const double n2 = 3600.0;
    for (double s : {1.0, -1.0}) {
        const auto d = secular::resonant_dipoles(n0, s);
        CHECK(d.x1 == Approx(0.5 * n2).epsilon(1e-12));
        CHECK(d.y1 == Approx(s * 0.5 * n2).epsilon(1e-12));
    }
    const auto d0 = secular::resonant_dipoles(n0, 0.0);
    CHECK(d0.y1 == 0.0);
    CHECK(d0.x1 == Approx(static_cast<double>(oracle::j1_prime_series(1.0)) * n2).epsilon(1e-12));
    CHECK(d0.x1 == Approx(0.32515 * n2).epsilon(1e-4));

    const auto d6 = secular::resonant_dipoles(60, 0.6);
    CHECK(d6.x1 == Approx(static_cast<double>(oracle::j1_prime_series(0.8)) * 3600.0).epsilon(1e-12));
    CHECK(d6.y1 == Approx(0.6 / 0.8 * static_cast<double>(oracle::j1_series(0.8)) * 3600.0).epsilon(1e-12));
    CHECK_THROWS_AS(secular::resonant_dipoles(60, 1.2), std::domain_error);
}

TEST_CASE("gamma and beta", "[secular]") {
    const int n0 = 60;
    for (double psi : {0.0, 0.9, M_PI / 2, 2.5}) {
        const auto gb = secular::gamma_beta(n0, {1.0, psi});
        CHECK(gb.gamma == Approx(1800.0).epsilon(1e-12));  // n0^2/2, psi-independent
    }
    CHECK(secular::gamma_beta(n0, {0.0, M_PI / 2}).gamma == Approx(0.0).margin(1e-12));
    CHECK(secular::gamma_beta(n0, {0.0, 0.0}).gamma ==
          Approx(secular::resonant_dipoles(n0, 0.0).x1).epsilon(1e-12));
    CHECK(secular::gamma_beta(n0, {0.3, M_PI / 2}).gamma ==
          Approx(std::abs(secular::resonant_dipoles(n0, 0.3).y1)).epsilon(1e-12));

    // direct formula vs independent numeric evaluation at (0.6, pi/4)
    const auto d = secular::resonant_dipoles(n0, 0.6);
    const auto gb = secular::gamma_beta(n0, {0.6, M_PI / 4});
    CHECK(gb.gamma == Approx(std::sqrt(0.5 * (d.x1 * d.x1 + d.y1 * d.y1))).epsilon(1e-12));
    CHECK(gb.beta == Approx(std::atan2(d.y1, d.x1)).epsilon(1e-12));
}

TEST_CASE("pendulum parameter q", "[secular]") {
    CHECK(secular::q_parameter({60, 0.0, 0.0}, {0.4, 1.0}) == 0.0);
    CHECK(secular::q_parameter({60, 0.015, 0.0}, {1.0, 0.3}) == Approx(36.0).epsilon(1e-12));
    CHECK(secular::localization_q_ok(1.5));
    CHECK_FALSE(secular::localization_q_ok(0.8));
}

TEST_CASE("secular Hamiltonian rotating-frame basics", "[secular]") {
    const FieldConfig cfg{60, 0.0, 0.0};
    secular::ExtendedPhasePoint p{60.0, 0.3, 0.5, 1.1, 0.0};
    CHECK(secular::h_secular(p, cfg) == Approx(-1.5 / 3600.0).epsilon(1e-14));

    // with fields, parity under (psi, theta) -> (-psi, -theta)
    const FieldConfig cfg2{60, 0.012, 0.002};
    secular::ExtendedPhasePoint a{59.3, 0.7, 0.41, 2.2, 0.0};
    secular::ExtendedPhasePoint b{59.3, -0.7, 0.41, -2.2, 0.0};
    CHECK(secular::h_secular(a, cfg2) == Approx(secular::h_secular(b, cfg2)).epsilon(1e-14));

    CHECK_THROWS_AS(secular::h_secular({-1.0, 0, 0, 0, 0}, cfg), std::domain_error);

    // F = 0 reduces to Pt - 1/2I^2 - omega I exactly
    const FieldConfig cfg3{60, 0.0, 0.0};
    secular::ExtendedPhasePoint c{58.0, 0.2, 0.1, 0.4, 0.7};
    CHECK(secular::h_secular(c, cfg3) ==
          Approx(0.7 - 0.5 / (58.0 * 58.0) - cfg3.omega() * 58.0).epsilon(1e-14));
}

TEST_CASE("secular Hamiltonian matches its quadratic expansion near I = n0", "[secular]") {
    const int n0 = 60;
    const double n0d = 60.0;
    // field-free: the only residual is the cubic Kepler term 2 Itil^3 / n0^5
    {
        const FieldConfig cfg{n0, 0.0, 0.0};
        for (double itil : {0.06, 0.12}) {
            secular::ExtendedPhasePoint p{n0d + itil, 0.9, 0.35, 1.3, 0.0};
            const double diff = secular::h_secular(p, cfg) - secular::h_secular_expanded(p, cfg);
            const double cubic = 2.0 * itil * itil * itil / std::pow(n0d, 5);
            CHECK(std::abs(diff - cubic) < 0.15 * cubic);
        }
    }
    // with fields: residual bounded by the cubic term plus O(F Itil) force mismatch
    {
        const FieldConfig cfg{n0, 0.015, 0.003};
        const double itil = 0.06;
        secular::ExtendedPhasePoint p{n0d + itil, 0.9, 0.35, 1.3, 0.0};
        const double diff = std::abs(secular::h_secular(p, cfg) - secular::h_secular_expanded(p, cfg));
        const double bound = 2.2 * itil * itil * itil / std::pow(n0d, 5) +
                             2.2 * (cfg.microwave_field_au() + cfg.static_field_au()) * 2.0 * n0d * itil;
        CHECK(diff < bound);
    }
}

TEST_CASE("effective Hamiltonian limits", "[secular]") {
    // free limit: a0(0) = 0 so H = -3/(2 n0^2) everywhere
    const FieldConfig free_cfg{60, 0.0, 0.0};
    for (double l0 : {0.0, 0.5, 1.0}) {
        for (double psi : {0.0, 1.0, M_PI}) {
            CHECK(secular::h_effective({l0, psi}, free_cfg) == Approx(-1.5 / 3600.0).epsilon(1e-13));
        }
    }
    // photon index shifts by k omega
    CHECK(secular::h_effective({0.5, 1.0}, free_cfg, 3) ==
          Approx(-1.5 / 3600.0 + 3.0 * free_cfg.omega()).epsilon(1e-13));

    // pure static field: extrema at psi = 0, pi; strongest at L0 = 0
    const FieldConfig stark{60, 0.0, 0.003};
    const double shift = 1.5 * stark.static_field_au() * 3600.0;
    CHECK(secular::h_effective({0.0, M_PI}, stark) == Approx(-1.5 / 3600.0 + shift).epsilon(1e-12));
    CHECK(secular::h_effective({0.0, 0.0}, stark) == Approx(-1.5 / 3600.0 - shift).epsilon(1e-12));
    CHECK(secular::h_effective({0.0, M_PI}, stark) > secular::h_effective({0.6, M_PI}, stark));

    // even in L0 across a parameter grid
    const FieldConfig cfg{60, 0.011, 0.0017};
    for (double l0 : {0.15, 0.5, 0.85}) {
        for (double psi : {0.0, 0.8, 1.9, 3.0}) {
            CHECK(secular::h_effective({l0, psi}, cfg) ==
                  Approx(secular::h_effective({-l0, psi}, cfg)).epsilon(1e-13));
        }
    }
}

TEST_CASE("scaling invariance of the classical terms", "[secular]") {
    // terms 1 and 3 of H_eff * n0^2 depend only on (F0, Fs0, L0, psi)
    const SecularPoint p{0.42, 2.1};
    auto classical = [&](int n0) {
        const FieldConfig cfg{n0, 0.0, 0.0021};  // a0 term off
        return secular::h_effective(p, cfg) * cfg.n0d() * cfg.n0d();
    };
    CHECK(classical(20) == Approx(classical(60)).epsilon(1e-12));
    CHECK(classical(35) == Approx(classical(90)).epsilon(1e-12));
}

TEST_CASE("dH/dpsi vanishes on the symmetry axes", "[secular]") {
    const FieldConfig cfg{60, 0.013, 0.0024};
    for (double l0 : {0.1, 0.45, 0.8}) {
        for (double psi : {0.0, M_PI}) {
            const double h = 1e-6;
            const double d = (secular::h_effective({l0, psi + h}, cfg) -
                              secular::h_effective({l0, psi - h}, cfg)) / (2.0 * h);
            CHECK(std::abs(d) < 1e-9);
        }
    }
}

TEST_CASE("sphere evaluator agrees with the plain formula and its gradient", "[secular]") {
    const FieldConfig cfg{60, 0.015, 0.003};
    const secular::SecularHamiltonian ham(cfg);
    for (double l0 : {-0.9, -0.3, 0.0, 0.2, 0.7, 0.999}) {
        for (double psi : {0.0, 0.7, M_PI / 2, 2.8, M_PI}) {
            const auto p = SphereVec::from_l0_psi(l0, psi);
            CHECK(ham.value(p) == Approx(secular::h_effective({l0, psi}, cfg)).margin(2e-13));

            // finite-difference check of the tangent gradient
            const auto g = ham.gradient(p);
            SphereVec t1 = secular::cross(p, {0.3, -0.8, 0.52});
            if (secular::norm(t1) < 1e-3) t1 = secular::cross(p, {1.0, 0.0, 0.0});
            const double tn = secular::norm(t1);
            t1 = {t1.x / tn, t1.y / tn, t1.u / tn};
            const double h = 1e-6;
            const auto pp = secular::axpy(h, t1, p).normalized();
            const auto pm = secular::axpy(-h, t1, p).normalized();
            const double fd = (ham.value(pp) - ham.value(pm)) / (2.0 * h);
            CHECK(secular::dot(g, t1) == Approx(fd).margin(1e-12 + 5e-6 * std::abs(fd)));
        }
    }
    // smooth and correct through the poles
    CHECK(ham.value(SphereVec{0.0, 0.0, 1.0}) ==
          Approx(secular::h_effective({1.0, 0.0}, cfg)).margin(1e-13));
}
