#pragma once

// Semiclassical quantization of the slow (L, psi) motion.
//
// The shape sphere (x, y, u) = (e cos psi, e sin psi, L0) double-covers the
// reduced phase space of the Lz = 0 manifold: configurations at (L0, psi) and
// (-L0, -psi) are the same physical ellipse (an azimuthal rotation by pi maps
// one onto the other), so the reduced space is the quotient of the sphere by
// sigma: (x, y, u) -> (x, -y, -u), an orbifold of symplectic area 2 pi n0 with
// cone points at the linear-orbit configurations (L0 = 0, psi = 0 or pi).
// Each quantized level is one reduced torus; with the counting function
//   N(E) = n0 * Area({H < E on the covering sphere}) / (4 pi)
// the levels solve N(E_p) = p + 1/2 for p = 0 .. n0-1. This reproduces the
// linear-Stark ladder exactly (spacing 3 n0 Fs, n0 levels) and gives exactly
// n0 states for every field combination, which is what fixes the Maslov and
// doublet bookkeeping below.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ndwp/secular.hpp"

namespace ndwp::semiclassics {

using secular::SecularHamiltonian;
using secular::SphereVec;

inline SphereVec sigma_image(const SphereVec& p) { return {p.x, -p.y, -p.u}; }

// ---------------------------------------------------------------------------
// Critical points
// ---------------------------------------------------------------------------

enum class Stability { elliptic, hyperbolic };

struct FixedPoint {
    double l0 = 0.0;
    double psi = 0.0;
    double energy = 0.0;
    Stability stability = Stability::elliptic;
    std::string branch;   // "psi=0", "psi=pi", "pole", "equator"
    bool boundary = false;  // |L0| in {0,1} endpoint rather than interior root
};

namespace detail {

struct Critical {
    SphereVec pos;
    double energy = 0.0;
    int kind = 0;  // 0 max, 1 min, 2 saddle
    bool sigma_fixed = false;
};

inline SphereVec meridian_point(double tau) { return {std::cos(tau), 0.0, std::sin(tau)}; }
inline SphereVec meridian_tangent(double tau) { return {-std::sin(tau), 0.0, std::cos(tau)}; }

inline double along(const SecularHamiltonian& ham, const SphereVec& p, const SphereVec& t) {
    return secular::dot(ham.gradient(p), t);
}

// orthonormal tangent frame at p
inline void tangent_frame(const SphereVec& p, SphereVec& e1, SphereVec& e2) {
    SphereVec a = std::abs(p.u) < 0.9 ? SphereVec{0, 0, 1} : SphereVec{1, 0, 0};
    e1 = secular::cross(p, a);
    const double n1 = secular::norm(e1);
    e1 = {e1.x / n1, e1.y / n1, e1.u / n1};
    e2 = secular::cross(p, e1);
}

inline void hessian2(const SecularHamiltonian& ham, const SphereVec& p, double h,
                     double& h11, double& h12, double& h22) {
    SphereVec e1, e2;
    tangent_frame(p, e1, e2);
    auto gdir = [&](const SphereVec& d, const SphereVec& probe) {
        const SphereVec q = secular::axpy(1.0, probe, SphereVec{0, 0, 0}).normalized();
        return secular::dot(ham.gradient(q), d);
    };
    const SphereVec p1p = secular::axpy(h, e1, p), p1m = secular::axpy(-h, e1, p);
    const SphereVec p2p = secular::axpy(h, e2, p), p2m = secular::axpy(-h, e2, p);
    h11 = (gdir(e1, p1p) - gdir(e1, p1m)) / (2 * h);
    h22 = (gdir(e2, p2p) - gdir(e2, p2m)) / (2 * h);
    h12 = 0.5 * ((gdir(e2, p1p) - gdir(e2, p1m)) / (2 * h) +
                 (gdir(e1, p2p) - gdir(e1, p2m)) / (2 * h));
}

inline int classify(const SecularHamiltonian& ham, const SphereVec& p) {
    double h11, h12, h22;
    hessian2(ham, p, 1e-5, h11, h12, h22);
    const double tr = h11 + h22;
    const double det = h11 * h22 - h12 * h12;
    if (det < 0.0) return 2;
    return tr < 0.0 ? 0 : 1;
}

inline bool near(const SphereVec& a, const SphereVec& b, double tol) {
    return secular::norm({a.x - b.x, a.y - b.y, a.u - b.u}) < tol;
}

}  // namespace detail

struct ManifoldStructure {
    std::vector<detail::Critical> criticals;
    std::vector<detail::Critical> maxima, minima, saddles;
    double e_min = 0.0, e_max = 0.0;
};

// gradient magnitude scale used for "is this really critical" thresholds
inline double grad_scale(const SecularHamiltonian& ham) {
    double s = 0.0;
    for (int i = 0; i < 16; ++i) {
        const double l0 = -0.93 + 0.124 * i;
        const SphereVec p = SphereVec::from_l0_psi(l0, 0.39 + 0.37 * i);
        s = std::max(s, secular::norm(ham.gradient(p)));
    }
    return s;
}

/// All critical points of the effective Hamiltonian on the shape sphere.
/// Symmetry confines them to the meridian y = 0 and the equator u = 0
/// (a coarse global scan guards against surprises).
inline ManifoldStructure find_critical_points_full(const SecularHamiltonian& ham) {
    ManifoldStructure st;
    std::vector<SphereVec> cands;

    auto scan_line = [&](auto point_of, auto tangent_of) {
        const int n = 8192;
        std::vector<double> d(n);
        for (int i = 0; i < n; ++i) {
            const double t = 2.0 * M_PI * i / n;
            d[i] = detail::along(ham, point_of(t), tangent_of(t));
        }
        for (int i = 0; i < n; ++i) {
            const int j = (i + 1) % n;
            if (d[i] == 0.0) {
                cands.push_back(point_of(2.0 * M_PI * i / n));
                continue;
            }
            if (d[i] * d[j] < 0.0) {
                double lo = 2.0 * M_PI * i / n, hi = 2.0 * M_PI * (i + 1) / n;
                double flo = d[i];
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = detail::along(ham, point_of(mid), tangent_of(mid));
                    if (flo * fm <= 0.0) hi = mid; else { lo = mid; flo = fm; }
                }
                cands.push_back(point_of(0.5 * (lo + hi)));
            }
        }
    };

    scan_line([](double t) { return detail::meridian_point(t); },
              [](double t) { return detail::meridian_tangent(t); });
    scan_line([](double t) { return SphereVec{std::cos(t), std::sin(t), 0.0}; },
              [](double t) { return SphereVec{-std::sin(t), std::cos(t), 0.0}; });

    // the linear-orbit cone points are always critical by symmetry
    cands.push_back({1.0, 0.0, 0.0});
    cands.push_back({-1.0, 0.0, 0.0});
    if (ham.config().fs0 == 0.0) {
        cands.push_back({0.0, 0.0, 1.0});
        cands.push_back({0.0, 0.0, -1.0});
    }

    const double gscale = std::max(1e-12, grad_scale(ham));

    // coarse global sweep: symmetry puts every critical point on the two
    // scan lines; anything found elsewhere means the structure assumptions
    // are broken and quantization must not proceed silently
    for (int i = 1; i < 60; ++i) {
        for (int j = 0; j < 120; ++j) {
            const double l0 = -1.0 + 2.0 * i / 60.0;
            const double psi = 2.0 * M_PI * j / 120.0;
            const SphereVec p = SphereVec::from_l0_psi(l0, psi);
            if (std::abs(p.y) < 0.05 || std::abs(p.u) < 0.05) continue;
            if (secular::norm(ham.gradient(p)) < 1e-7 * gscale)
                throw NumericalError("critical point off the symmetry lines");
        }
    }

    for (const SphereVec& c : cands) {
        bool dup = false;
        for (const auto& k : st.criticals) dup = dup || detail::near(k.pos, c, 1e-7);
        if (dup) continue;
        // keep only genuine critical points (line scans can emit endpoints of
        // flat stretches; the poles are regular whenever Fs > 0)
        if (secular::norm(ham.gradient(c)) > 1e-8 * gscale) continue;
        detail::Critical k;
        k.pos = c;
        k.energy = ham.value(c);
        k.kind = detail::classify(ham, c);
        k.sigma_fixed = std::abs(c.y) < 1e-7 && std::abs(c.u) < 1e-7;
        st.criticals.push_back(k);
    }

    for (const auto& k : st.criticals) {
        if (k.kind == 0) st.maxima.push_back(k);
        else if (k.kind == 1) st.minima.push_back(k);
        else st.saddles.push_back(k);
    }
    if (st.maxima.empty() || st.minima.empty())
        throw NumericalError("critical-point analysis found no extrema");
    st.e_max = st.maxima.front().energy;
    for (const auto& k : st.maxima) st.e_max = std::max(st.e_max, k.energy);
    st.e_min = st.minima.front().energy;
    for (const auto& k : st.minima) st.e_min = std::min(st.e_min, k.energy);
    return st;
}

// ---------------------------------------------------------------------------
// Contour tracing
// ---------------------------------------------------------------------------

struct TracedContour {
    std::vector<SphereVec> pts;  // closed: pts.front() repeated at back
    double sum_u_dpsi = 0.0;     // loop integral of u d(psi), {H < E} on the left
    int winding = 0;             // net winding around the polar axis
    double length = 0.0;
};

namespace detail {

inline double wrap_pi(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a < -M_PI) a += 2.0 * M_PI;
    return a;
}

// Newton correction onto {H = E} along the tangent gradient. Accepts the
// best reachable residual when tol sits at the roundoff floor of H.
inline bool project_onto_level(const SecularHamiltonian& ham, double e, SphereVec& p, double tol) {
    SphereVec best = p;
    double best_r = std::abs(ham.value(p) - e);
    for (int it = 0; it < 16; ++it) {
        const double r = ham.value(p) - e;
        if (std::abs(r) < best_r) { best_r = std::abs(r); best = p; }
        if (std::abs(r) < tol) return true;
        const SphereVec g = ham.gradient(p);
        const double g2 = secular::dot(g, g);
        if (g2 < 1e-280) return false;
        p = secular::axpy(-r / g2, g, p).normalized();
    }
    p = best;
    return best_r < 32.0 * tol;
}

// quadratic through f(0)=f0, f(a)=fm, f(1)=f1 -> coefficients of f0 + b t + c t^2
inline void quad_coeffs(double f0, double fm, double f1, double a, double& b, double& c) {
    const double dm = fm - f0, d1 = f1 - f0;
    b = (dm - a * a * d1) / (a * (1.0 - a));
    c = d1 - b;
}

// exact integral of (u0 + bu t + cu t^2) d/dt(psi0 + bp t + cp t^2) over [0,1]
inline double poly_segment_integral(double u0, double bu, double cu, double bp, double cp) {
    return u0 * bp + u0 * cp + 0.5 * bu * bp + (2.0 / 3.0) * bu * cp + (1.0 / 3.0) * cu * bp +
           0.5 * cu * cp;
}

}  // namespace detail

struct TraceOptions {
    double angle_step = 0.06;   // max tangent turn per step (radians)
    double max_step = 0.02;
    double min_step = 1e-9;
    double level_tol_rel = 1e-12;
    std::size_t max_steps = 400000;
    double refine = 1.0;        // < 1 refines all step controls (for convergence checks)
    // hyperbolic points to slow down near; keeps the predictor from hopping
    // across a separatrix pinch onto the mirror branch
    std::vector<SphereVec> guards;
};

/// Trace the closed level-set component of {H = E} through `seed`, oriented
/// with the {H < E} side on the left. The loop integral of u d(psi) is
/// accumulated with a per-segment quadratic fit through corrected midpoints
/// (O(h^4) overall), which is what makes the action reparametrization-stable.
inline TracedContour trace_contour(const SecularHamiltonian& ham, double e, SphereVec seed,
                                   double e_scale, const TraceOptions& opt = {}) {
    TracedContour out;
    // the floor keeps the residual target above the roundoff of H itself,
    // which matters when the manifold span is many orders below |H|
    const double tol = std::max(opt.level_tol_rel * e_scale, 2e-15 * std::abs(e));
    if (!detail::project_onto_level(ham, e, seed, tol))
        throw NumericalError("trace_contour: seed projection failed");

    auto tangent_at = [&](const SphereVec& p) {
        const SphereVec g = ham.gradient(p);
        const SphereVec n = p.normalized();
        SphereVec t = secular::cross(n, g);
        const double tn = secular::norm(t);
        if (tn < 1e-28) throw NumericalError("trace_contour: vanishing gradient on contour");
        return SphereVec{t.x / tn, t.y / tn, t.u / tn};
    };

    const double angle_step = opt.angle_step * opt.refine;
    const double max_step = opt.max_step * opt.refine;

    SphereVec p = seed;
    SphereVec t = tangent_at(p);
    out.pts.push_back(p);
    double h = max_step * 0.1;
    double psi_prev = p.psi();
    double total_turn = 0.0;

    for (std::size_t step = 0; step < opt.max_steps; ++step) {
        double h_cap = max_step;
        for (const SphereVec& g : opt.guards) {
            const double d = secular::norm({p.x - g.x, p.y - g.y, p.u - g.u});
            h_cap = std::min(h_cap, std::max(0.25 * d, 16.0 * opt.min_step));
        }
        h = std::min(h, h_cap);
        bool accepted = false;
        SphereVec pn, tn;
        for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
            pn = secular::axpy(h, t, p).normalized();
            if (!detail::project_onto_level(ham, e, pn, tol)) { h *= 0.5; continue; }
            tn = tangent_at(pn);
            const double turn = std::acos(std::clamp(secular::dot(t, tn), -1.0, 1.0));
            const double dpsi = std::abs(detail::wrap_pi(pn.psi() - psi_prev));
            if ((turn > 2.0 * angle_step || dpsi > 0.5) && h > opt.min_step) { h *= 0.5; continue; }
            accepted = true;
            // segment contribution: quadratic fits through a corrected
            // midpoint, with the fit parameter placed by chord length
            SphereVec pm = secular::axpy(0.5 * h, t, p).normalized();
            detail::project_onto_level(ham, e, pm, tol);
            const double la = secular::norm({pm.x - p.x, pm.y - p.y, pm.u - p.u});
            const double lb = secular::norm({pn.x - pm.x, pn.y - pm.y, pn.u - pm.u});
            const double a = std::clamp(la / std::max(1e-300, la + lb), 0.1, 0.9);
            const double psi0 = psi_prev;
            const double psim = psi0 + detail::wrap_pi(pm.psi() - psi0);
            const double psi1 = psim + detail::wrap_pi(pn.psi() - pm.psi());
            double bu, cu, bp, cp;
            detail::quad_coeffs(p.u, pm.u, pn.u, a, bu, cu);
            detail::quad_coeffs(psi0, psim, psi1, a, bp, cp);
            out.sum_u_dpsi += detail::poly_segment_integral(p.u, bu, cu, bp, cp);
            out.length += secular::norm({pn.x - p.x, pn.y - p.y, pn.u - p.u});
            total_turn += turn;
            psi_prev = psi1;
            // grow the step if the turn was comfortably small
            if (turn < 0.5 * angle_step) h = std::min(h * 1.4, max_step);
        }
        if (!accepted) throw NumericalError("trace_contour: step control failed");
        p = pn;
        t = tn;
        out.pts.push_back(p);

        // closure test against the seed
        const double dist = secular::norm({p.x - seed.x, p.y - seed.y, p.u - seed.u});
        if (out.length > 4.0 * h && dist < 1.2 * h && secular::dot(t, tangent_at(seed)) > 0.0) {
            // final partial segment to the exact start, same quadrature rule
            SphereVec pm{0.5 * (p.x + seed.x), 0.5 * (p.y + seed.y), 0.5 * (p.u + seed.u)};
            pm = pm.normalized();
            detail::project_onto_level(ham, e, pm, tol);
            const double la = secular::norm({pm.x - p.x, pm.y - p.y, pm.u - p.u});
            const double lb = secular::norm({seed.x - pm.x, seed.y - pm.y, seed.u - pm.u});
            if (la + lb > 1e-13) {
                const double a = std::clamp(la / (la + lb), 0.1, 0.9);
                const double psim = psi_prev + detail::wrap_pi(pm.psi() - psi_prev);
                const double psi1 = psim + detail::wrap_pi(seed.psi() - pm.psi());
                double bu, cu, bp, cp;
                detail::quad_coeffs(p.u, pm.u, seed.u, a, bu, cu);
                detail::quad_coeffs(psi_prev, psim, psi1, a, bp, cp);
                out.sum_u_dpsi += detail::poly_segment_integral(p.u, bu, cu, bp, cp);
                psi_prev = psi1;
            } else {
                const double dpsi_end = detail::wrap_pi(seed.psi() - psi_prev);
                out.sum_u_dpsi += 0.5 * (p.u + seed.u) * dpsi_end;
                psi_prev += dpsi_end;
            }
            out.pts.push_back(seed);
            out.winding = static_cast<int>(std::lround((psi_prev - out.pts.front().psi()) / (2.0 * M_PI)));
            return out;
        }
    }
    throw NumericalError("trace_contour: did not close within the step budget");
}

// ---------------------------------------------------------------------------
// Level-set inventory and the counting function
// ---------------------------------------------------------------------------

namespace detail {

inline double dist_point_segment(const SphereVec& q, const SphereVec& a, const SphereVec& b) {
    const SphereVec ab{b.x - a.x, b.y - a.y, b.u - a.u};
    const SphereVec aq{q.x - a.x, q.y - a.y, q.u - a.u};
    const double t = std::clamp(secular::dot(aq, ab) / std::max(1e-30, secular::dot(ab, ab)), 0.0, 1.0);
    return secular::norm({q.x - (a.x + t * ab.x), q.y - (a.y + t * ab.y), q.u - (a.u + t * ab.u)});
}

inline double dist_to_contour(const SphereVec& q, const TracedContour& c) {
    double d = 1e30;
    for (std::size_t i = 0; i + 1 < c.pts.size(); ++i)
        d = std::min(d, dist_point_segment(q, c.pts[i], c.pts[i + 1]));
    return d;
}

}  // namespace detail

struct LevelSet {
    std::vector<TracedContour> loops;
    double area_below = 0.0;  // covering area of {H < E}
};

/// All components of {H = E}, found from the crossings with the symmetry
/// lines (every component encloses a critical point, and all critical points
/// sit on those lines, so no component can hide). Assembles the covering
/// area of {H < E} from the loop integrals plus the pole bookkeeping.
inline LevelSet level_set_at(const SecularHamiltonian& ham, double e, double e_scale,
                             const TraceOptions& opt = {}) {
    LevelSet ls;
    std::vector<SphereVec> crossings;

    auto scan = [&](auto point_of) {
        const int n = 8192;
        double prev = ham.value(point_of(0.0)) - e;
        for (int i = 1; i <= n; ++i) {
            const double t = 2.0 * M_PI * i / n;
            const double cur = ham.value(point_of(t)) - e;
            if (prev * cur < 0.0) {
                double lo = 2.0 * M_PI * (i - 1) / n, hi = t, flo = prev;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = ham.value(point_of(mid)) - e;
                    if (flo * fm <= 0.0) hi = mid; else { lo = mid; flo = fm; }
                }
                crossings.push_back(point_of(0.5 * (lo + hi)));
            }
            prev = cur;
        }
    };
    scan([](double t) { return detail::meridian_point(t); });
    scan([](double t) { return SphereVec{std::cos(t), std::sin(t), 0.0}; });

    // Claiming uses a tight tolerance; near a separatrix distinct mirror
    // loops can pass arbitrarily close to each other, so identity is decided
    // on the full traced geometry, not on crossing proximity.
    std::vector<bool> claimed(crossings.size(), false);
    for (std::size_t i = 0; i < crossings.size(); ++i) {
        if (claimed[i]) continue;
        TracedContour c = trace_contour(ham, e, crossings[i], e_scale, opt);
        for (std::size_t j = i; j < crossings.size(); ++j) {
            if (!claimed[j] && detail::dist_to_contour(crossings[j], c) < 1e-7) claimed[j] = true;
        }
        bool dup = false;
        for (const auto& prev : ls.loops) {
            if (std::abs(prev.length - c.length) > 0.05 * std::max(1e-6, prev.length)) continue;
            bool all_close = true;
            const std::size_t stride_c = std::max<std::size_t>(1, c.pts.size() / 8);
            for (std::size_t k = 0; k < c.pts.size() && all_close; k += stride_c)
                all_close = detail::dist_to_contour(c.pts[k], prev) < 5e-4;
            const std::size_t stride_p = std::max<std::size_t>(1, prev.pts.size() / 8);
            for (std::size_t k = 0; k < prev.pts.size() && all_close; k += stride_p)
                all_close = detail::dist_to_contour(prev.pts[k], c) < 5e-4;
            dup = dup || all_close;
        }
        if (!dup) ls.loops.push_back(std::move(c));
    }

    int poles_below = 0;
    if (ham.value({0, 0, 1}) < e) ++poles_below;
    if (ham.value({0, 0, -1}) < e) ++poles_below;
    double area = 2.0 * M_PI * poles_below;
    for (const auto& c : ls.loops) area -= c.sum_u_dpsi;
    ls.area_below = area;
    return ls;
}

// ---------------------------------------------------------------------------
// Quantization
// ---------------------------------------------------------------------------

enum class Motion { libration, rotation };

struct QuantizedLevel {
    int index = 0;            // global level index, 0 = manifold bottom
    int p = 0;                // WKB integer of the stored contour
    int maslov = 0;           // 0 or 2, consistent with the stored contour
    double energy = 0.0;      // a.u.
    Motion motion = Motion::libration;
    int degeneracy = 1;       // 2 when the covering level set is a mirror pair
    bool near_separatrix = false;
    double action = 0.0;      // (1/2pi) loop integral of L d(psi) of the stored contour
    std::vector<std::pair<double, double>> contour;  // (L0, psi) polyline
};

struct ManifoldLevels {
    FieldConfig config;
    std::vector<QuantizedLevel> levels;  // strictly increasing energy, size n0
    double e_min = 0.0, e_max = 0.0;
    std::vector<double> saddle_energies;
};

namespace detail {

inline double counting(const SecularHamiltonian& ham, double e, double e_scale,
                       const TraceOptions& opt = {}) {
    const LevelSet ls = level_set_at(ham, e, e_scale, opt);
    return ham.config().n0d() * ls.area_below / (4.0 * M_PI);
}

}  // namespace detail

/// Quantize selected levels (p in [0, n0)) of the resonant manifold;
/// quantize_manifold takes all of them. Levels solve N(E) = p + 1/2 with N
/// strictly increasing, so existence and count are structural.
inline std::vector<QuantizedLevel> quantize_levels(const FieldConfig& cfg,
                                                   const std::vector<int>& ps,
                                                   const TraceOptions& opt = {}) {
    cfg.validate();
    if (cfg.f0 == 0.0 && cfg.fs0 == 0.0)
        throw ConfigError("quantization needs at least one nonzero field");
    const SecularHamiltonian ham(cfg);
    const ManifoldStructure st = find_critical_points_full(ham);
    const double span = st.e_max - st.e_min;
    if (!(span > 0.0)) throw NumericalError("degenerate effective Hamiltonian");
    const double delta = 1e-6 * span;
    TraceOptions topt = opt;
    for (const auto& s : st.saddles) topt.guards.push_back(s.pos);

    // the counting law needs the extrema to form single sigma-orbits and the
    // saddles to sit at the cone points
    auto sigma_pair = [](const detail::Critical& a, const detail::Critical& b) {
        return detail::near(sigma_image(a.pos), b.pos, 1e-6);
    };
    if (st.maxima.size() > 2 || st.minima.size() > 2 || st.saddles.size() > 2)
        throw NumericalError("unexpected critical-point multiplicity");
    if (st.maxima.size() == 2 && !sigma_pair(st.maxima[0], st.maxima[1]))
        throw NumericalError("maxima are not a mirror pair");
    if (st.minima.size() == 2 && !sigma_pair(st.minima[0], st.minima[1]))
        throw NumericalError("minima are not a mirror pair");
    for (const auto& s : st.saddles)
        if (!s.sigma_fixed) throw NumericalError("saddle away from the linear-orbit points");

    std::vector<double> saddle_e;
    for (const auto& s : st.saddles) saddle_e.push_back(s.energy);
    std::sort(saddle_e.begin(), saddle_e.end());

    // counting-function values just off the critical energies bracket each level
    std::vector<double> knots{st.e_min + delta};
    for (double s : saddle_e) {
        knots.push_back(s - delta);
        knots.push_back(s + delta);
    }
    knots.push_back(st.e_max - delta);
    std::sort(knots.begin(), knots.end());
    std::vector<double> knot_n(knots.size());
    for (std::size_t i = 0; i < knots.size(); ++i)
        knot_n[i] = detail::counting(ham, knots[i], span, topt);

    // counting values flanking each separatrix, for the WKB-validity flag
    std::vector<double> saddle_n;
    for (double s : saddle_e) {
        saddle_n.push_back(detail::counting(ham, s - delta, span, topt));
        saddle_n.push_back(detail::counting(ham, s + delta, span, topt));
    }

    std::vector<QuantizedLevel> out;
    for (int p : ps) {
        if (p < 0 || p >= cfg.n0) throw ConfigError("level index outside [0, n0)");
        const double target = p + 0.5;
        double lo = knots.front(), hi = knots.back();
        double flo = knot_n.front() - target, fhi = knot_n.back() - target;
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            if (knot_n[i] <= target && target <= knot_n[i + 1]) {
                lo = knots[i];
                hi = knots[i + 1];
                flo = knot_n[i] - target;
                fhi = knot_n[i + 1] - target;
                break;
            }
        }
        if (flo > 0.0 || fhi < 0.0)
            throw NumericalError("level " + std::to_string(p) + " not bracketed; region counts inconsistent");

        // bisection with secant acceleration on the monotone counting function
        double e_mid = 0.5 * (lo + hi);
        for (int it = 0; it < 60; ++it) {
            const bool use_secant = (it % 3) != 2 && fhi != flo;
            e_mid = use_secant ? (lo * fhi - hi * flo) / (fhi - flo) : 0.5 * (lo + hi);
            e_mid = std::clamp(e_mid, lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo));
            const double fm = detail::counting(ham, e_mid, span, topt) - target;
            if (std::abs(fm) < 5e-9 || (hi - lo) < 1e-11 * span) break;
            if (fm < 0.0) { lo = e_mid; flo = fm; } else { hi = e_mid; fhi = fm; }
        }

        const LevelSet ls = level_set_at(ham, e_mid, span, topt);
        if (ls.loops.empty() || ls.loops.size() > 2)
            throw NumericalError("unexpected level-set component count");

        QuantizedLevel lvl;
        lvl.index = p;
        lvl.energy = e_mid;
        lvl.degeneracy = static_cast<int>(ls.loops.size());
        const TracedContour& c = ls.loops.front();
        lvl.motion = (c.winding != 0) ? Motion::rotation : Motion::libration;
        lvl.action = cfg.n0d() * std::abs(c.sum_u_dpsi) / (2.0 * M_PI);
        const double nearest_int = std::lround(lvl.action);
        if (std::abs(lvl.action - nearest_int) < 0.25) {
            lvl.maslov = 0;
            lvl.p = static_cast<int>(nearest_int);
        } else {
            lvl.maslov = 2;
            lvl.p = static_cast<int>(std::lround(lvl.action - 0.5));
        }
        for (double a_s : saddle_n)
            if (std::abs(target - a_s) < 1e-3) lvl.near_separatrix = true;
        lvl.contour.reserve(c.pts.size());
        for (const auto& q : c.pts) lvl.contour.emplace_back(q.l0(), q.psi());
        out.push_back(std::move(lvl));
    }
    return out;
}

inline ManifoldLevels quantize_manifold(const FieldConfig& cfg, const TraceOptions& opt = {}) {
    std::vector<int> ps(cfg.n0);
    for (int p = 0; p < cfg.n0; ++p) ps[p] = p;
    ManifoldLevels m;
    m.config = cfg;
    m.levels = quantize_levels(cfg, ps, opt);
    for (std::size_t i = 0; i + 1 < m.levels.size(); ++i) {
        if (!(m.levels[i].energy < m.levels[i + 1].energy))
            throw NumericalError("level energies not strictly ordered");
    }
    const SecularHamiltonian ham(cfg);
    const ManifoldStructure st = find_critical_points_full(ham);
    m.e_min = st.e_min;
    m.e_max = st.e_max;
    for (const auto& s : st.saddles) m.saddle_energies.push_back(s.energy);
    return m;
}

inline QuantizedLevel quantize_top_level(const FieldConfig& cfg, const TraceOptions& opt = {}) {
    return quantize_levels(cfg, {cfg.n0 - 1}, opt).front();
}

namespace detail {

// March along a great circle from `start` until H - e changes sign, then
// bisect. Robust even when `start` is a critical point of H.
inline SphereVec walk_to_level(const SecularHamiltonian& ham, double e, const SphereVec& start) {
    SphereVec e1, e2;
    tangent_frame(start.normalized(), e1, e2);
    const double f0 = ham.value(start) - e;
    for (const SphereVec& dir : {e1, e2, SphereVec{-e1.x, -e1.y, -e1.u}}) {
        auto at = [&](double t) {
            return secular::axpy(std::sin(t), dir, {start.x * std::cos(t), start.y * std::cos(t),
                                                    start.u * std::cos(t)}).normalized();
        };
        double prev = f0, tprev = 0.0;
        for (int i = 1; i <= 720; ++i) {
            const double t = M_PI * i / 720.0;
            const double f = ham.value(at(t)) - e;
            if (prev * f <= 0.0 && prev != f) {
                double lo = tprev, hi = t, flo = prev;
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = ham.value(at(mid)) - e;
                    if (flo * fm <= 0.0) hi = mid; else { lo = mid; flo = fm; }
                }
                return at(0.5 * (lo + hi));
            }
            prev = f;
            tprev = t;
        }
    }
    throw std::domain_error("no level crossing reachable from the seed point");
}

}  // namespace detail

/// Loop action (1/2pi) \oint L dpsi of the level-set component through `seed`,
/// in units of hbar (L = n0 L0). Mirror partners carry the same action; the
/// component reached from the seed is the one traced (the seed may also be a
/// fixed point, in which case the surrounding contour is used).
inline double action_integral(double e, const FieldConfig& cfg, const secular::SecularPoint& seed,
                              const TraceOptions& opt = {}) {
    cfg.validate();
    const SecularHamiltonian ham(cfg);
    const ManifoldStructure st = find_critical_points_full(ham);
    if (e <= st.e_min || e >= st.e_max)
        throw std::domain_error("action_integral: energy outside the manifold range");
    for (const auto& s : st.saddles) {
        if (std::abs(e - s.energy) < 1e-12 * (st.e_max - st.e_min))
            throw NumericalError("action_integral: energy too close to a separatrix");
    }
    TraceOptions topt = opt;
    for (const auto& s : st.saddles) topt.guards.push_back(s.pos);
    const SphereVec p = detail::walk_to_level(ham, e, SphereVec::from_l0_psi(seed.l0, seed.psi));
    const TracedContour c = trace_contour(ham, e, p, st.e_max - st.e_min, topt);
    return cfg.n0d() * std::abs(c.sum_u_dpsi) / (2.0 * M_PI);
}

// ---------------------------------------------------------------------------
// Fixed-point API, pitchfork, scans, contour export
// ---------------------------------------------------------------------------

/// Critical points on the symmetry axes psi in {0, pi} with L0 in [0, 1],
/// plus the boundary points L0 in {0, 1} classified by restricted second
/// derivatives.
inline std::vector<FixedPoint> find_fixed_points(const FieldConfig& cfg) {
    cfg.validate();
    const SecularHamiltonian ham(cfg);
    const ManifoldStructure st = find_critical_points_full(ham);
    std::vector<FixedPoint> out;
    for (const auto& k : st.criticals) {
        if (std::abs(k.pos.y) > 1e-6) continue;   // keep the meridian set
        if (k.pos.u < -1e-9) continue;            // report the L0 >= 0 representative
        FixedPoint fp;
        fp.l0 = std::max(0.0, k.pos.u);
        fp.psi = (k.pos.x >= 0.0 && std::abs(k.pos.u) < 1.0 - 1e-12) ? 0.0 : (k.pos.x < 0.0 ? M_PI : 0.0);
        fp.energy = k.energy;
        fp.stability = (k.kind == 2) ? Stability::hyperbolic : Stability::elliptic;
        fp.boundary = std::abs(k.pos.u) > 1.0 - 1e-9 || std::abs(k.pos.u) < 1e-9;
        fp.branch = std::abs(k.pos.u) > 1.0 - 1e-9 ? "pole" : (k.pos.x < 0.0 ? "psi=pi" : "psi=0");
        out.push_back(fp);
    }
    // at Fs > 0 the poles are regular; still report the L0 = 1 boundary point,
    // classified by the second derivative restricted to the meridian
    if (cfg.fs0 > 0.0) {
        const double h = 1e-5;
        auto d1 = [&](double tau) {
            return detail::along(ham, detail::meridian_point(tau), detail::meridian_tangent(tau));
        };
        const double curv = (d1(M_PI / 2 + h) - d1(M_PI / 2 - h)) / (2.0 * h);
        FixedPoint fp;
        fp.l0 = 1.0;
        fp.psi = 0.0;
        fp.energy = ham.value({0, 0, 1});
        fp.stability = (curv < 0.0) ? Stability::elliptic : Stability::hyperbolic;
        fp.boundary = true;
        fp.branch = "pole";
        out.push_back(fp);
    }
    std::sort(out.begin(), out.end(), [](const FixedPoint& a, const FixedPoint& b) {
        return a.energy > b.energy;
    });
    return out;
}

namespace detail {

// curvature of H along the meridian at the linear-orbit point (0, psi=pi);
// its sign change is the stabilization of the linear trajectory
inline double linear_orbit_meridian_curvature(const FieldConfig& cfg) {
    const SecularHamiltonian ham(cfg);
    const double h = 1e-5;
    auto d1 = [&](double tau) {
        return along(ham, meridian_point(tau), meridian_tangent(tau));
    };
    return (d1(M_PI + h) - d1(M_PI - h)) / (2.0 * h);
}

}  // namespace detail

/// Critical scaled static field of the inverse pitchfork at fixed F0, located
/// by bisection on the stability of the linear orbit.
inline double find_pitchfork(const FieldConfig& cfg, double fs0_hi = -1.0) {
    if (!(cfg.f0 > 0.0)) throw ConfigError("find_pitchfork: F0 must be positive");
    if (fs0_hi <= 0.0) fs0_hi = 0.5 * cfg.f0;
    double lo = 0.0, hi = fs0_hi;
    double slo = detail::linear_orbit_meridian_curvature(cfg.with_fs0(lo));
    double shi = detail::linear_orbit_meridian_curvature(cfg.with_fs0(hi));
    if (slo * shi > 0.0)
        throw NumericalError("find_pitchfork: no stability change in the search interval");
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double sm = detail::linear_orbit_meridian_curvature(cfg.with_fs0(mid));
        if (sm * slo <= 0.0) { hi = mid; shi = sm; } else { lo = mid; slo = sm; }
        if (hi - lo < 1e-8 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

struct LevelScan {
    std::string axis;            // "fs0" or "f0"
    std::vector<double> grid;
    FieldConfig base;
    std::vector<ManifoldLevels> points;  // one per grid value, k = 0 branch
};

inline LevelScan level_dynamics_scan(const FieldConfig& base, const std::string& axis,
                                     const std::vector<double>& grid, int jobs = 1,
                                     const TraceOptions& opt = {}) {
    if (grid.empty()) throw ConfigError("scan grid is empty");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1])) throw ConfigError("scan grid must be strictly increasing");
    if (axis != "fs0" && axis != "f0") throw ConfigError("scan axis must be fs0 or f0");

    LevelScan scan;
    scan.axis = axis;
    scan.grid = grid;
    scan.base = base;
    scan.points.resize(grid.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            try {
                const FieldConfig cfg = (axis == "fs0") ? base.with_fs0(grid[i]) : base.with_f0(grid[i]);
                scan.points[i] = quantize_manifold(cfg, opt);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mutex);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
    return scan;
}

struct ContourSet {
    // id >= 0: quantized level index; id < 0: separatrix branch
    std::vector<std::pair<int, std::vector<std::pair<double, double>>>> polylines;
};

inline ContourSet export_contours(const ManifoldLevels& m, const std::vector<int>& selection = {}) {
    ContourSet cs;
    std::vector<int> sel = selection;
    if (sel.empty())
        for (const auto& l : m.levels) sel.push_back(l.index);
    for (int idx : sel) {
        for (const auto& l : m.levels)
            if (l.index == idx) cs.polylines.emplace_back(idx, l.contour);
    }
    // separatrix traces just off each saddle energy
    const SecularHamiltonian ham(m.config);
    const ManifoldStructure st = find_critical_points_full(ham);
    TraceOptions topt;
    for (const auto& s : st.saddles) topt.guards.push_back(s.pos);
    const double span = m.e_max - m.e_min;
    int sid = -1;
    for (double es : m.saddle_energies) {
        for (double side : {-1.0, 1.0}) {
            const LevelSet ls = level_set_at(ham, es + side * 2e-6 * span, span, topt);
            for (const auto& loop : ls.loops) {
                std::vector<std::pair<double, double>> poly;
                poly.reserve(loop.pts.size());
                for (const auto& q : loop.pts) poly.emplace_back(q.l0(), q.psi());
                cs.polylines.emplace_back(sid, std::move(poly));
            }
            --sid;
        }
    }
    return cs;
}

}  // namespace ndwp::semiclassics
