#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ndwp/units.hpp"

namespace ndwp::specfun {

namespace detail {
inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw std::domain_error(std::string(what) + ": non-finite argument");
}
}  // namespace detail

// Ascending power series for J1 and J1'. The physical argument is the orbit
// eccentricity e in [0,1], where a handful of terms already reach 1e-16;
// the series stays accurate to ~1e-13 absolute up to |x| = 10.
inline double bessel_j1(double x) {
    detail::require_finite(x, "bessel_j1");
    const double h = 0.5 * x;
    double term = h;           // k = 0: (x/2) / (0! 1!)
    double sum = term;
    const double h2 = h * h;
    for (int k = 1; k < 64; ++k) {
        term *= -h2 / (static_cast<double>(k) * (k + 1));
        sum += term;
        if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) break;
    }
    return sum;
}

inline double bessel_j1_prime(double x) {
    detail::require_finite(x, "bessel_j1_prime");
    const double h = 0.5 * x;
    const double h2 = h * h;
    double term = 0.5;         // k = 0: (2k+1)/2 * (x/2)^{2k} / (k!(k+1)!)
    double sum = term;
    double pow = 1.0;
    double fact = 1.0;         // k!(k+1)!
    for (int k = 1; k < 64; ++k) {
        pow *= h2;
        fact *= static_cast<double>(k) * (k + 1);
        term = ((k % 2) ? -1.0 : 1.0) * (2.0 * k + 1.0) * 0.5 * pow / fact;
        sum += term;
        if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) break;
    }
    return sum;
}

// Series helpers in w = e^2. These are entire functions, used to keep the
// secular Hamiltonian smooth through the circular-orbit limit e -> 0:
//   j1_over_x(w)  = J1(sqrt(w))/sqrt(w)   -> 1/2 at w = 0
//   j1p_of_w(w)   = J1'(sqrt(w))
// plus their w-derivatives.
inline double j1_over_x_w(double w) {
    double term = 0.5, sum = term;
    for (int k = 1; k < 64; ++k) {
        term *= -w / (4.0 * k * (k + 1));
        sum += term;
        if (std::abs(term) < 1e-18) break;
    }
    return sum;
}

inline double j1_over_x_w_deriv(double w) {
    // d/dw sum c_k w^k with c_k = (-1)^k / (2^{2k+1} k! (k+1)!)
    double r = -0.5 / 8.0;  // c_1 w^0
    double sum = r;
    for (int k = 2; k < 64; ++k) {
        r *= -w / (4.0 * k * (k + 1));
        const double term = r * k;
        sum += term;
        if (std::abs(term) < 1e-18) break;
    }
    return sum;
}

inline double j1p_of_w(double w) {
    double r = 0.5;  // c_k w^k
    double sum = 0.5;
    for (int k = 1; k < 64; ++k) {
        r *= -w / (4.0 * k * (k + 1));
        const double term = r * (2.0 * k + 1.0);
        sum += term;
        if (std::abs(term) < 1e-18) break;
    }
    return sum;
}

inline double j1p_of_w_deriv(double w) {
    double r = -0.5 / 8.0;  // c_k w^{k-1}
    double sum = 3.0 * r;
    for (int k = 2; k < 64; ++k) {
        r *= -w / (4.0 * k * (k + 1));
        const double term = r * (2.0 * k + 1.0) * k;
        sum += term;
        if (std::abs(term) < 1e-18) break;
    }
    return sum;
}

enum class MathieuMethod { matrix, small_q_asymptote, large_q_asymptote };

struct MathieuCharacteristic {
    double q = 0.0;
    double a0 = 0.0;
    int truncation_order = 0;
    MathieuMethod method = MathieuMethod::matrix;
};

inline double mathieu_a0_small_q(double q) { return -0.5 * q * q; }
inline double mathieu_a0_large_q(double q) { return -2.0 * std::abs(q) + 2.0 * std::sqrt(std::abs(q)); }

namespace detail {

// Lowest eigenvalue of the even pi-periodic Mathieu problem
//   y'' + (a - 2q cos 2v) y = 0
// in the cosine-harmonic basis {1/sqrt(2), cos 2v, cos 4v, ...}:
// symmetric tridiagonal with diagonal (2m)^2 and off-diagonals
// (sqrt(2) q, q, q, ...).
inline double mathieu_a0_matrix_fixed(double q, int order, Eigen::VectorXd* ground = nullptr) {
    Eigen::VectorXd diag(order), sub(order - 1);
    for (int m = 0; m < order; ++m) diag[m] = 4.0 * static_cast<double>(m) * m;
    sub[0] = std::sqrt(2.0) * q;
    for (int m = 1; m < order - 1; ++m) sub[m] = q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, ground ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("mathieu_a0: tridiagonal eigensolve failed");
    if (ground) *ground = es.eigenvectors().col(0);
    return es.eigenvalues()[0];
}

}  // namespace detail

/// Ground characteristic value a0(q), computed from the truncated cosine-harmonic
/// matrix. The truncation starts at 2 ceil(sqrt(|q|)) + 25 and doubles until a
/// 50% larger matrix moves a0 by less than 1e-10 (relative to max(1,|a0|)).
/// The sign of q is irrelevant for the ground value.
inline MathieuCharacteristic mathieu_a0(double q) {
    detail::require_finite(q, "mathieu_a0");
    const double qa = std::abs(q);
    MathieuCharacteristic out;
    out.q = q;
    int order = 2 * static_cast<int>(std::ceil(std::sqrt(qa))) + 25;
    for (int iter = 0; iter < 12; ++iter) {
        const double a = detail::mathieu_a0_matrix_fixed(qa, order);
        const int bigger = order + (order + 1) / 2;
        const double a_ref = detail::mathieu_a0_matrix_fixed(qa, bigger);
        if (std::abs(a - a_ref) < 1e-10 * std::max(1.0, std::abs(a_ref))) {
            out.a0 = a_ref;
            out.truncation_order = bigger;
            out.method = MathieuMethod::matrix;
            return out;
        }
        order *= 2;
    }
    throw NumericalError("mathieu_a0: truncation did not converge");
}

/// da0/dq by Hellmann-Feynman on the converged ground vector.
inline double mathieu_a0_derivative(double q) {
    detail::require_finite(q, "mathieu_a0_derivative");
    const double qa = std::abs(q);
    if (qa < 1e-8) return -qa;  // a0 = -q^2/2 + O(q^4)
    int order = 2 * static_cast<int>(std::ceil(std::sqrt(qa))) + 40;
    Eigen::VectorXd v;
    detail::mathieu_a0_matrix_fixed(qa, order, &v);
    double d = std::sqrt(2.0) * v[0] * v[1];
    for (int m = 1; m < order - 1; ++m) d += v[m] * v[m + 1];
    return 2.0 * d;  // symmetric off-diagonal contributes twice
}

/// Piecewise-Chebyshev tabulation of a0 and da0/dq on [0, qmax]. The contour
/// machinery evaluates a0 inside inner loops; the table keeps that at a few
/// hundred flops while matching the matrix result to ~1e-12.
class MathieuTable {
  public:
    MathieuTable() = default;

    static MathieuTable build(double qmax, double tol = 1e-12) {
        MathieuTable t;
        t.qmax_ = std::max(qmax, 1e-6);
        t.subdivide(0.0, t.qmax_, tol, 0);
        return t;
    }

    double qmax() const { return qmax_; }

    double a0(double q) const { return eval(std::abs(q), /*deriv=*/false); }
    double da0_dq(double q) const {
        const double qa = std::abs(q);
        const double d = eval(qa, /*deriv=*/true);
        return q < 0.0 ? -d : d;  // a0 even in q
    }
    // (da0/dq)/q, finite at q = 0; used where q -> 0 with direction-free slope.
    double da0_dq_over_q(double q) const {
        const double qa = std::abs(q);
        if (qa < 1e-6) return -1.0 + 7.0 * qa * qa / 32.0;
        return eval(qa, true) / qa;
    }

  private:
    struct Panel {
        double lo, hi;
        std::vector<double> ca;   // Chebyshev coefficients of a0
        std::vector<double> cd;   // Chebyshev coefficients of da0/dq
    };

    static constexpr int kDeg = 40;

    void subdivide(double lo, double hi, double tol, int depth) {
        Panel p = fit(lo, hi);
        // validate against the matrix routine off the nodes
        bool ok = true;
        for (int i = 1; i <= 3 && ok; ++i) {
            const double q = lo + (hi - lo) * i / 4.0 + (hi - lo) * 0.031;
            if (q > hi) continue;
            const double ref = mathieu_a0(q).a0;
            if (std::abs(cheb_eval(p.ca, lo, hi, q) - ref) > tol * std::max(1.0, std::abs(ref))) ok = false;
        }
        if (ok || depth >= 10 || (hi - lo) < 1e-4) {
            panels_.push_back(std::move(p));
            return;
        }
        const double mid = 0.5 * (lo + hi);
        subdivide(lo, mid, tol, depth + 1);
        subdivide(mid, hi, tol, depth + 1);
    }

    static Panel fit(double lo, double hi) {
        Panel p;
        p.lo = lo;
        p.hi = hi;
        const int n = kDeg + 1;
        std::vector<double> fa(n), fd(n);
        for (int i = 0; i < n; ++i) {
            const double x = std::cos(M_PI * (i + 0.5) / n);
            const double q = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
            fa[i] = mathieu_a0(q).a0;
            fd[i] = mathieu_a0_derivative(q);
        }
        p.ca = cheb_coeffs(fa);
        p.cd = cheb_coeffs(fd);
        return p;
    }

    static std::vector<double> cheb_coeffs(const std::vector<double>& f) {
        const int n = static_cast<int>(f.size());
        std::vector<double> c(n);
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += f[i] * std::cos(M_PI * j * (i + 0.5) / n);
            c[j] = 2.0 * s / n;
        }
        c[0] *= 0.5;
        return c;
    }

    static double cheb_eval(const std::vector<double>& c, double lo, double hi, double q) {
        const double x = (2.0 * q - lo - hi) / (hi - lo);
        double b1 = 0.0, b2 = 0.0;
        for (int j = static_cast<int>(c.size()) - 1; j >= 1; --j) {
            const double b0 = 2.0 * x * b1 - b2 + c[j];
            b2 = b1;
            b1 = b0;
        }
        return x * b1 - b2 + c[0];
    }

    double eval(double q, bool deriv) const {
        if (panels_.empty()) throw NumericalError("MathieuTable: not built");
        if (q > qmax_ * (1.0 + 1e-12)) throw NumericalError("MathieuTable: q beyond tabulated range");
        q = std::min(q, qmax_);
        for (const Panel& p : panels_) {
            if (q <= p.hi || &p == &panels_.back())
                return cheb_eval(deriv ? p.cd : p.ca, p.lo, p.hi, q);
        }
        return 0.0;  // unreachable
    }

    double qmax_ = 0.0;
    std::vector<Panel> panels_;
};

}  // namespace ndwp::specfun
