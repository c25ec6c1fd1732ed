#pragma once

#include <cmath>
#include <stdexcept>

#include "ndwp/special.hpp"
#include "ndwp/units.hpp"

namespace ndwp::secular {

/// Point of the slow (L, psi) phase space: scaled angular momentum
/// L0 = L/n0 in [-1,1] and the angle psi between the Kepler ellipse's major
/// axis and the field axis.
struct SecularPoint {
    double l0 = 0.0;
    double psi = 0.0;
};

/// Rotating-frame extended phase-space point. I is the total action (a.u.),
/// theta_hat the slow orbital phase, pt_hat the momentum conjugate to time.
struct ExtendedPhasePoint {
    double action_i = 0.0;
    double theta_hat = 0.0;
    double l0 = 0.0;
    double psi = 0.0;
    double pt_hat = 0.0;
};

inline double eccentricity(double l0) {
    if (!(std::abs(l0) <= 1.0)) throw std::domain_error("eccentricity: |L0| must be <= 1");
    return std::sqrt(std::max(0.0, 1.0 - l0 * l0));
}

struct ResonantDipoles {
    double x1 = 0.0;  // along the major axis
    double y1 = 0.0;  // along the minor axis, odd in L0
};

/// Fourier components of the atomic dipole in resonance with the drive:
/// X1 = J1'(e) n0^2, Y1 = (L0/e) J1(e) n0^2. Both tend to n0^2/2 on the
/// circular orbit (Y1 with the sign of L0); Y1 vanishes on the linear orbit.
inline ResonantDipoles resonant_dipoles(int n0, double l0) {
    if (!(std::abs(l0) <= 1.0)) throw std::domain_error("resonant_dipoles: |L0| must be <= 1");
    const double n2 = static_cast<double>(n0) * n0;
    const double w = 1.0 - l0 * l0;  // e^2
    return {specfun::j1p_of_w(w) * n2, l0 * specfun::j1_over_x_w(w) * n2};
}

struct GammaBeta {
    double gamma = 0.0;
    double beta = 0.0;
};

/// Amplitude and phase of the resonant force term,
///   Gamma = sqrt(X1^2 cos^2 psi + Y1^2 sin^2 psi),
/// with beta resolved to the quadrant of psi via atan2.
inline GammaBeta gamma_beta(int n0, const SecularPoint& p) {
    const ResonantDipoles d = resonant_dipoles(n0, p.l0);
    const double cx = d.x1 * std::cos(p.psi);
    const double cy = d.y1 * std::sin(p.psi);
    return {std::hypot(cx, cy), std::atan2(cy, cx)};
}

/// Pendulum parameter q = (4/3) n0^4 F Gamma = (4/3) F0 Gamma (Gamma carries
/// the n0^2). q > 1 is the rule-of-thumb threshold for a resonance island
/// large enough to localize a state.
inline double q_parameter(const FieldConfig& cfg, const SecularPoint& p) {
    return (4.0 / 3.0) * cfg.f0 * gamma_beta(cfg.n0, p).gamma;
}

inline constexpr double kLocalizationQThreshold = 1.0;
inline bool localization_q_ok(double q) { return q > kLocalizationQThreshold; }

/// Secular Hamiltonian in the rotating frame (energy in a.u.):
///   Pt_hat - 1/(2I^2) - omega I - (3 e Fs I^2 / 2) cos psi
///   + F I^2 { -J1'(e) cos psi cos theta_hat + (sqrt(1-e^2) J1(e)/e) sin psi sin theta_hat }.
inline double h_secular(const ExtendedPhasePoint& p, const FieldConfig& cfg) {
    if (!(p.action_i > 0.0)) throw std::domain_error("h_secular: action I must be > 0");
    const double ell = p.l0 * cfg.n0d();  // L in a.u.
    if (std::abs(ell) > p.action_i * (1.0 + 1e-12))
        throw std::domain_error("h_secular: |L| must be <= I");
    const double i2 = p.action_i * p.action_i;
    const double w = std::max(0.0, 1.0 - (ell * ell) / i2);  // e^2
    const double e = std::sqrt(w);
    const double root = std::abs(ell) / p.action_i;          // sqrt(1 - e^2)
    const double f = cfg.microwave_field_au();
    const double fs = cfg.static_field_au();
    double h = p.pt_hat - 0.5 / i2 - cfg.omega() * p.action_i;
    h += -1.5 * e * fs * i2 * std::cos(p.psi);
    h += f * i2 * (-specfun::j1p_of_w(w) * std::cos(p.psi) * std::cos(p.theta_hat) +
                   root * specfun::j1_over_x_w(w) * std::sin(p.psi) * std::sin(p.theta_hat));
    return h;
}

/// Expansion of h_secular to second order in I - n0, with the resonant force
/// written as F Gamma cos(theta_hat - beta); the (Gamma, beta) pair here is
/// built from the same force coefficients as h_secular so the two agree to
/// O((I-n0)^3) by construction.
inline double h_secular_expanded(const ExtendedPhasePoint& p, const FieldConfig& cfg) {
    const double n0 = cfg.n0d();
    const double itil = p.action_i - n0;
    const double w = std::max(0.0, 1.0 - p.l0 * p.l0);
    const double e = std::sqrt(w);
    const double n2 = n0 * n0;
    const double cx = -specfun::j1p_of_w(w) * std::cos(p.psi) * n2;
    const double cy = std::abs(p.l0) * specfun::j1_over_x_w(w) * std::sin(p.psi) * n2;
    const double gamma = std::hypot(cx, cy);
    const double beta = std::atan2(cy, cx);
    double h = p.pt_hat - 1.5 / n2 - 1.5 * itil * itil / (n2 * n2);
    h += -1.5 * cfg.static_field_au() * n2 * e * std::cos(p.psi);
    h += cfg.microwave_field_au() * gamma * std::cos(p.theta_hat - beta);
    return h;
}

/// Effective Born-Oppenheimer energy of the island ground state:
///   -3/(2 n0^2) - (3/(8 n0^4)) a0(q) - (3 Fs n0^2/2) sqrt(1-L0^2) cos psi + k omega.
inline double h_effective(const SecularPoint& p, const FieldConfig& cfg, int k_photon = 0) {
    const double n0 = cfg.n0d();
    const double n2 = n0 * n0;
    const double q = q_parameter(cfg, p);
    const double a0 = (q == 0.0) ? 0.0 : specfun::mathieu_a0(q).a0;
    double h = -1.5 / n2 - (3.0 / (8.0 * n2 * n2)) * a0;
    h += -1.5 * cfg.static_field_au() * n2 * eccentricity(p.l0) * std::cos(p.psi);
    h += k_photon * cfg.omega();
    return h;
}

// ---------------------------------------------------------------------------
// Smooth evaluation on the shape sphere.
//
// The (L0, psi) phase space compactifies to the unit sphere
//   (x, y, u) = (e cos psi, e sin psi, L0),
// on which the effective Hamiltonian is smooth, including the circular-orbit
// poles u = +-1 where the chart angle psi degenerates. Contour tracing and
// fixed-point hunting work in these embedded coordinates.
// ---------------------------------------------------------------------------

struct SphereVec {
    double x = 0.0, y = 0.0, u = 0.0;

    static SphereVec from_l0_psi(double l0, double psi) {
        const double e = eccentricity(l0);
        return {e * std::cos(psi), e * std::sin(psi), l0};
    }
    double l0() const { return u; }
    double psi() const {
        double a = std::atan2(y, x);
        return a < 0.0 ? a + 2.0 * M_PI : a;
    }
    SphereVec normalized() const {
        const double r = std::sqrt(x * x + y * y + u * u);
        return {x / r, y / r, u / r};
    }
};

inline SphereVec cross(const SphereVec& a, const SphereVec& b) {
    return {a.y * b.u - a.u * b.y, a.u * b.x - a.x * b.u, a.x * b.y - a.y * b.x};
}
inline double dot(const SphereVec& a, const SphereVec& b) { return a.x * b.x + a.y * b.y + a.u * b.u; }
inline SphereVec axpy(double s, const SphereVec& a, const SphereVec& b) {
    return {s * a.x + b.x, s * a.y + b.y, s * a.u + b.u};
}
inline double norm(const SphereVec& a) { return std::sqrt(dot(a, a)); }

/// Effective Hamiltonian with cached Mathieu table, evaluable (with tangent
/// gradient) anywhere on the shape sphere.
class SecularHamiltonian {
  public:
    SecularHamiltonian() = default;
    explicit SecularHamiltonian(const FieldConfig& cfg, int k_photon = 0)
        : cfg_(cfg), k_(k_photon) {
        cfg_.validate();
        const double n0 = cfg_.n0d();
        cq_ = (4.0 / 3.0) * cfg_.f0 * n0 * n0;      // q = cq * gamma_scaled
        ca_ = 3.0 / (8.0 * n0 * n0 * n0 * n0);      // a0 prefactor
        cs_ = 1.5 * cfg_.static_field_au() * n0 * n0;
        base_ = -1.5 / (n0 * n0) + k_ * cfg_.omega();
        if (cfg_.f0 > 0.0) table_ = specfun::MathieuTable::build(0.5 * cq_ * 1.0000001 + 1e-9);
    }

    const FieldConfig& config() const { return cfg_; }

    // gamma_scaled^2 = Gamma^2 / n0^4 as a smooth function of (x, y, u);
    // w = x^2 + y^2 plays the role of e^2.
    double gamma_sq(const SphereVec& p) const {
        const double w = p.x * p.x + p.y * p.y;
        if (w < 1e-28) {
            const double a = specfun::j1p_of_w(w);
            return a * a;
        }
        const double a = specfun::j1p_of_w(w);
        const double b = specfun::j1_over_x_w(w);
        return (a * a * p.x * p.x + p.u * p.u * b * b * p.y * p.y) / w;
    }

    double value(const SphereVec& p) const {
        double h = base_ - cs_ * p.x;
        if (cq_ > 0.0) {
            const double q = cq_ * std::sqrt(std::max(0.0, gamma_sq(p)));
            h -= ca_ * table_.a0(q);
        }
        return h;
    }

    double value_l0_psi(double l0, double psi) const { return value(SphereVec::from_l0_psi(l0, psi)); }

    /// Tangent-projected gradient. The a0 chain rule is routed through
    /// gamma^2 so the linear-orbit line gamma -> 0 stays regular.
    SphereVec gradient(const SphereVec& p) const {
        SphereVec g{-cs_, 0.0, 0.0};
        if (cq_ > 0.0) {
            const double w = p.x * p.x + p.y * p.y;
            SphereVec dg{0.0, 0.0, 0.0};
            if (w >= 1e-28) {
                const double a = specfun::j1p_of_w(w);
                const double b = specfun::j1_over_x_w(w);
                const double ap = specfun::j1p_of_w_deriv(w);
                const double bp = specfun::j1_over_x_w_deriv(w);
                const double P = a * a, Q = b * b;
                const double Pp = 2.0 * a * ap, Qp = 2.0 * b * bp;
                const double s = p.x * p.x, t = p.y * p.y, uu = p.u * p.u;
                const double gval = (P * s + uu * Q * t) / w;
                const double dgds = (Pp * s + P + uu * Qp * t - gval) / w;
                const double dgdt = (Pp * s + uu * (Q + Qp * t) - gval) / w;
                dg = {2.0 * p.x * dgds, 2.0 * p.y * dgdt, 2.0 * p.u * Q * t / w};
                const double q = cq_ * std::sqrt(std::max(0.0, gval));
                const double slope = table_.da0_dq_over_q(q);  // a0'(q)/q
                const double fac = -ca_ * slope * 0.5 * cq_ * cq_;
                g = axpy(fac, dg, g);
            }
            // at the poles the gamma part is critical; only the static term survives
        }
        // project out the radial component
        const SphereVec n = p.normalized();
        return axpy(-dot(g, n), n, g);
    }

    double q_at(const SphereVec& p) const { return cq_ * std::sqrt(std::max(0.0, gamma_sq(p))); }
    double q_max() const { return 0.5 * cq_; }

  private:
    FieldConfig cfg_{};
    int k_ = 0;
    double cq_ = 0.0, ca_ = 0.0, cs_ = 0.0, base_ = 0.0;
    specfun::MathieuTable table_;
};

}  // namespace ndwp::secular
