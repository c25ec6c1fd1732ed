#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ndwp/quantizer.hpp"
#include "oracles.hpp"

using namespace ndwp;
using Catch::Approx;
using secular::SecularHamiltonian;
using secular::SphereVec;
namespace sc = semiclassics;

namespace {

// covering area of {H < E} by brute-force grid quadrature
double area_below_oracle(const SecularHamiltonian& ham, double e, int nu = 600, int npsi = 1200) {
    double area = 0.0;
    for (int i = 0; i < nu; ++i) {
        const double u = -1.0 + 2.0 * (i + 0.5) / nu;
        for (int j = 0; j < npsi; ++j) {
            const double psi = 2.0 * M_PI * (j + 0.5) / npsi;
            if (ham.value(SphereVec::from_l0_psi(u, psi)) < e) area += 1.0;
        }
    }
    return area * (2.0 / nu) * (2.0 * M_PI / npsi);
}

}  // namespace

TEST_CASE("traced level-set area reproduces the linear-Stark lune", "[quantizer]") {
    const FieldConfig cfg{20, 0.0, 0.003};
    const SecularHamiltonian ham(cfg);
    const double base = -1.5 / 400.0;
    const double cs = 1.5 * cfg.static_field_au() * 400.0;
    for (double c : {0.7, 0.2, -0.4}) {
        const double e = base - cs * c;  // level set is {x = c}; {H < E} = {x > c}
        const auto ls = sc::level_set_at(ham, e, 2.0 * cs);
        REQUIRE(ls.loops.size() == 1);
        CHECK(ls.area_below == Approx(2.0 * M_PI * (1.0 - c)).margin(1e-8));
        CHECK(ls.area_below == Approx(oracle::stark_region_area(c)).margin(2e-4));
    }
}

TEST_CASE("level-set inventory and area with both fields on", "[quantizer]") {
    const FieldConfig cfg{20, 0.015, 0.0015};
    const SecularHamiltonian ham(cfg);
    const auto st = sc::find_critical_points_full(ham);
    const double span = st.e_max - st.e_min;
    for (double frac : {0.15, 0.45, 0.85}) {
        const double e = st.e_min + frac * span;
        bool near_saddle = false;
        for (const auto& s : st.saddles) near_saddle |= std::abs(e - s.energy) < 0.02 * span;
        if (near_saddle) continue;
        const auto ls = sc::level_set_at(ham, e, span);
        CHECK((ls.loops.size() == 1 || ls.loops.size() == 2));
        CHECK(ls.area_below == Approx(area_below_oracle(ham, e)).margin(0.01));
    }
}

TEST_CASE("stark limit quantizes to the exact ladder", "[quantizer]") {
    const FieldConfig cfg{20, 0.0, 0.003};
    const auto m = sc::quantize_manifold(cfg);
    REQUIRE(m.levels.size() == 20);
    const double spacing = 3.0 * cfg.n0d() * cfg.static_field_au();
    const double base = -1.5 / 400.0;
    for (int p = 0; p < 20; ++p) {
        const double expected = base - 0.5 * spacing * (19.0 - 2.0 * p);
        CHECK(m.levels[p].energy == Approx(expected).margin(1e-10 * std::abs(base)));
        CHECK(m.levels[p].degeneracy == 1);
        // the stored covering loop encircles a cone point: integer action,
        // odd by the ladder structure (2p+1 counted from the nearer end)
        CHECK(m.levels[p].maslov == 0);
        const int expected_p = (p < 10) ? 2 * p + 1 : 2 * (19 - p) + 1;
        CHECK(m.levels[p].p == expected_p);
        CHECK(m.levels[p].action == Approx(expected_p).margin(1e-6));
    }
    // uniform spacing (matches first-order perturbation theory)
    for (int p = 0; p + 1 < 20; ++p) {
        CHECK(m.levels[p + 1].energy - m.levels[p].energy == Approx(spacing).epsilon(5e-7));
    }
    // extreme level carries the (3/2) n0 (n0-1) Fs first-order shift
    CHECK(m.levels[19].energy - base ==
          Approx(1.5 * cfg.n0d() * (cfg.n0d() - 1.0) * cfg.static_field_au()).epsilon(1e-9));
}

TEST_CASE("action integral in the stark limit matches the analytic lune action", "[quantizer]") {
    const FieldConfig cfg{20, 0.0, 0.003};
    const double base = -1.5 / 400.0;
    const double cs = 1.5 * cfg.static_field_au() * 400.0;
    for (double c : {0.6, 0.15}) {
        const double e = base - cs * c;
        const double act = sc::action_integral(e, cfg, {0.0, 0.2});
        CHECK(act == Approx(cfg.n0d() * (1.0 - c)).epsilon(1e-8));
    }

    // reparametrization invariance: refining the trace changes nothing
    const double e = base - cs * 0.35;
    sc::TraceOptions fine;
    fine.refine = 0.5;
    const double a1 = sc::action_integral(e, cfg, {0.0, 0.2});
    const double a2 = sc::action_integral(e, cfg, {0.0, 0.2}, fine);
    CHECK(std::abs(a1 - a2) < 1e-8);

    CHECK_THROWS_AS(sc::action_integral(base + 10.0 * cs, cfg, {0.0, 0.2}), std::domain_error);
}

TEST_CASE("action shrinks toward an elliptic point and grows monotonically", "[quantizer]") {
    const FieldConfig cfg{20, 0.015, 0.003};
    const SecularHamiltonian ham(cfg);
    const auto st = sc::find_critical_points_full(ham);
    // top of the manifold is above the pitchfork here: single maximum
    const double emax = st.e_max;
    const auto* top = &st.maxima.front();
    for (const auto& k : st.maxima)
        if (k.energy > top->energy) top = &k;
    double prev = 0.0;
    const secular::SecularPoint seed{top->pos.u, top->pos.psi()};
    for (double f : {1e-4, 1e-3, 1e-2, 0.05}) {
        const double e = emax - f * (st.e_max - st.e_min);
        const double act = sc::action_integral(e, cfg, seed);
        CHECK(act > prev);
        prev = act;
    }
    CHECK(sc::action_integral(emax - 1e-6 * (st.e_max - st.e_min), cfg, seed) < 0.05 * cfg.n0d());
}

TEST_CASE("traced contours lie on the level set and close exactly", "[quantizer]") {
    const FieldConfig cfg{20, 0.012, 0.001};
    const SecularHamiltonian ham(cfg);
    const auto st = sc::find_critical_points_full(ham);
    const double e = st.e_min + 0.4 * (st.e_max - st.e_min);
    const auto ls = sc::level_set_at(ham, e, st.e_max - st.e_min);
    REQUIRE_FALSE(ls.loops.empty());
    for (const auto& loop : ls.loops) {
        const auto& a = loop.pts.front();
        const auto& b = loop.pts.back();
        CHECK(secular::norm({a.x - b.x, a.y - b.y, a.u - b.u}) < 1e-9);
        for (std::size_t i = 0; i < loop.pts.size(); i += 7) {
            CHECK(std::abs(ham.value(loop.pts[i]) - e) < 1e-9 * (st.e_max - st.e_min));
        }
    }
}

TEST_CASE("fixed points: microwave only puts the maximum on the circular orbit", "[quantizer]") {
    const auto fps = sc::find_fixed_points({60, 0.015, 0.0});
    REQUIRE_FALSE(fps.empty());
    const auto& top = fps.front();  // sorted by energy, descending
    CHECK(top.l0 == Approx(1.0).margin(1e-6));
    CHECK(top.stability == sc::Stability::elliptic);
}

TEST_CASE("fixed points: strong static field moves the maximum to the linear orbit", "[quantizer]") {
    const auto fps = sc::find_fixed_points({60, 0.015, 0.003});
    const auto& top = fps.front();
    CHECK(std::abs(top.l0) < 1e-6);
    CHECK(top.psi == Approx(M_PI));
    CHECK(top.stability == sc::Stability::elliptic);
}

TEST_CASE("psi=pi fixed point walks from circular to linear as F0 decreases", "[quantizer]") {
    // fixed weak static field; the elliptic point slides down in L0 and
    // reaches the linear orbit once the static field dominates
    double prev = 1.0 + 1e-9;
    for (double f0 : {1e-4, 3e-5, 5e-6}) {
        const auto fps = sc::find_fixed_points({60, f0, 1e-6});
        double l0_star = -1.0;
        for (const auto& fp : fps) {
            if (fp.branch == "psi=pi" && fp.stability == sc::Stability::elliptic)
                l0_star = std::max(l0_star, fp.l0);
        }
        REQUIRE(l0_star >= 0.0);
        CHECK(l0_star <= prev);
        prev = l0_star;
    }
    CHECK(prev < 1e-6);  // fully linear at F0 = 5e-6
}

TEST_CASE("pitchfork location and scaling rule", "[quantizer]") {
    const double crit = sc::find_pitchfork({60, 0.015, 0.0});
    CHECK(crit == Approx(0.0028).epsilon(0.10));
    CHECK(crit == Approx(0.2 * 0.015).epsilon(0.15));

    double prev = 1.0;
    for (double f0 : {0.015, 0.01, 0.005}) {
        const double c = sc::find_pitchfork({60, f0, 0.0});
        CHECK(c < prev);
        prev = c;
    }
    CHECK(prev < 0.0011);  // tends to zero with F0
}

TEST_CASE("counting function matches quadrature with mixed fields", "[quantizer]") {
    const FieldConfig cfg{12, 0.015, 0.0015};
    const SecularHamiltonian ham(cfg);
    const auto st = sc::find_critical_points_full(ham);
    const double span = st.e_max - st.e_min;
    const double e = st.e_min + 0.37 * span;
    const auto ls = sc::level_set_at(ham, e, span);
    CHECK(cfg.n0d() * ls.area_below / (4.0 * M_PI) ==
          Approx(cfg.n0d() * area_below_oracle(ham, e) / (4.0 * M_PI)).margin(0.02));
}

TEST_CASE("manifold count is n0 across regimes", "[quantizer]") {
    for (auto [f0, fs0] : std::vector<std::pair<double, double>>{
             {0.015, 0.0}, {0.015, 0.0015}, {0.015, 0.003}, {0.0, 0.003}, {1e-4, 1e-6}}) {
        const FieldConfig cfg{12, f0, fs0};
        const auto m = sc::quantize_manifold(cfg);
        CHECK(m.levels.size() == 12);
        for (std::size_t i = 0; i + 1 < m.levels.size(); ++i)
            CHECK(m.levels[i].energy < m.levels[i + 1].energy);
        // stored contours satisfy the WKB rule
        for (const auto& l : m.levels) {
            const double target = l.p + 0.25 * l.maslov;
            CHECK(std::abs(l.action - target) < 1e-6 * cfg.n0d());
        }
    }
    CHECK_THROWS_AS(sc::quantize_manifold({12, 0.0, 0.0}), ConfigError);
}

TEST_CASE("top level sits on the maximal elliptic fixed point", "[quantizer]") {
    const FieldConfig cfg{12, 0.015, 0.0015};
    const auto m = sc::quantize_manifold(cfg);
    const auto fps = sc::find_fixed_points(cfg);
    const auto& top_fp = fps.front();
    const auto& top = m.levels.back();
    CHECK(top.energy > m.levels[m.levels.size() - 2].energy);
    CHECK(top.energy < top_fp.energy);
    // the stored loop hugs the fixed point
    double dmin = 1e30;
    for (const auto& [l0, psi] : top.contour) {
        dmin = std::min(dmin, std::hypot(std::abs(l0) - top_fp.l0, 0.3 * (psi - top_fp.psi)));
    }
    CHECK(dmin < 0.4);
    // fast path agrees
    const auto fast = sc::quantize_top_level(cfg);
    CHECK(fast.energy == Approx(top.energy).margin(1e-13));
}

TEST_CASE("degenerate scan equals a single manifold call; bad grids rejected", "[quantizer]") {
    const FieldConfig base{12, 0.015, 0.0};
    const auto scan = sc::level_dynamics_scan(base, "fs0", {0.001});
    const auto single = sc::quantize_manifold(base.with_fs0(0.001));
    REQUIRE(scan.points.size() == 1);
    for (int p = 0; p < 12; ++p)
        CHECK(scan.points[0].levels[p].energy == Approx(single.levels[p].energy).margin(1e-14));

    CHECK_THROWS_AS(sc::level_dynamics_scan(base, "fs0", {}), ConfigError);
    CHECK_THROWS_AS(sc::level_dynamics_scan(base, "fs0", {0.2, 0.1}), ConfigError);
    CHECK_THROWS_AS(sc::level_dynamics_scan(base, "psi", {0.1}), ConfigError);
}

TEST_CASE("parallel scan is deterministic", "[quantizer]") {
    const FieldConfig base{12, 0.015, 0.0};
    const std::vector<double> grid{0.0005, 0.001, 0.0015, 0.002};
    const auto s1 = sc::level_dynamics_scan(base, "fs0", grid, 1);
    const auto s2 = sc::level_dynamics_scan(base, "fs0", grid, 2);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (int p = 0; p < 12; ++p)
            CHECK(s1.points[i].levels[p].energy == s2.points[i].levels[p].energy);
}

TEST_CASE("contour export includes levels and separatrix branches", "[quantizer]") {
    // static field below the bifurcation, so both separatrices exist
    const FieldConfig cfg{12, 0.015, 0.0008};
    const auto m = sc::quantize_manifold(cfg);
    REQUIRE_FALSE(m.saddle_energies.empty());
    const auto cs = sc::export_contours(m, {0, 11});
    bool has_level = false, has_separatrix = false;
    for (const auto& [id, poly] : cs.polylines) {
        if (id >= 0) {
            has_level = true;
            CHECK(poly.size() > 10);
        } else {
            has_separatrix = true;
        }
    }
    CHECK(has_level);
    CHECK(has_separatrix);
}
