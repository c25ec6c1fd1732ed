#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ndwp/units.hpp"

namespace ndwp::quantum {

/// Truncated bound hydrogenic basis |n l, m=0> times photon blocks k in [-K, K].
/// States are ordered n ascending, l ascending within n; the photon index is
/// the slow axis, so global index = (k + K) * block_dim + state.
struct BasisDescriptor {
    int n0 = 0;
    int n_min = 1;
    int n_max = 1;
    int k_photons = 0;  // K
    std::vector<std::pair<int, int>> states;  // (n, l)
    std::vector<int> n_offset;                // index of (n, 0) for n in [n_min, n_max]

    int block_dim() const { return static_cast<int>(states.size()); }
    int blocks() const { return 2 * k_photons + 1; }
    long dim() const { return static_cast<long>(block_dim()) * blocks(); }

    int state_index(int n, int l) const { return n_offset[n - n_min] + l; }
    long global_index(int n, int l, int k) const {
        return static_cast<long>(k + k_photons) * block_dim() + state_index(n, l);
    }
};

inline BasisDescriptor build_basis(const FieldConfig& cfg, int n_window, int k_photons,
                                   long dim_cap = 2000000) {
    cfg.validate();
    if (n_window < 3) throw ConfigError("n_window must be >= 3");
    if (k_photons < 0) throw ConfigError("photon range must be >= 0");
    BasisDescriptor b;
    b.n0 = cfg.n0;
    b.n_min = std::max(1, cfg.n0 - n_window);
    b.n_max = cfg.n0 + n_window;
    b.k_photons = k_photons;
    for (int n = b.n_min; n <= b.n_max; ++n) {
        b.n_offset.push_back(static_cast<int>(b.states.size()));
        for (int l = 0; l < n; ++l) b.states.emplace_back(n, l);
    }
    if (b.dim() > dim_cap) {
        throw ConfigError("basis dimension " + std::to_string(b.dim()) + " exceeds cap " +
                          std::to_string(dim_cap) + "; reduce n_window or the photon range");
    }
    return b;
}

// ---------------------------------------------------------------------------
// Radial functions and matrix elements
//
// R_nl(r) = (2/n^2) phi_k^(2l+1)(2r/n) / sqrt(2r/n)  with k = n-l-1, where
// phi are orthonormal Laguerre functions evaluated by the symmetric
// three-term recurrence. Everything stays O(1), so n up to a few hundred is
// safe in doubles.
// ---------------------------------------------------------------------------

namespace detail {

// phi_k for k = 0..kmax at fixed alpha and x; phi_k = sqrt(k!/Gamma(k+a+1)) e^{-x/2} x^{a/2} L_k^a(x)
inline void laguerre_orthonormal(double x, double alpha, int kmax, std::vector<double>& out) {
    out.resize(kmax + 1);
    const double logphi0 = 0.5 * (alpha * std::log(x) - x) - 0.5 * std::lgamma(alpha + 1.0);
    double prev = 0.0;
    double cur = (logphi0 < -700.0) ? 0.0 : std::exp(logphi0);
    out[0] = cur;
    for (int k = 0; k < kmax; ++k) {
        const double next = ((2.0 * k + alpha + 1.0 - x) * cur - std::sqrt(k * (k + alpha)) * prev) /
                            std::sqrt((k + 1.0) * (k + 1.0 + alpha));
        prev = cur;
        cur = next;
        out[k + 1] = cur;
    }
}

}  // namespace detail

inline double radial_wavefunction(int n, int l, double r) {
    if (n < 1 || l < 0 || l >= n) throw ConfigError("radial_wavefunction: bad quantum numbers");
    if (r <= 0.0) return 0.0;
    const double x = 2.0 * r / n;
    std::vector<double> phi;
    detail::laguerre_orthonormal(x, 2.0 * l + 1.0, n - l - 1, phi);
    return (2.0 / (static_cast<double>(n) * n)) * phi[n - l - 1] / std::sqrt(x);
}

/// Composite Gauss-Legendre grid on an exponentially mapped radial axis.
struct RadialGrid {
    std::vector<double> r, w;  // nodes and weights for integrals in dr

    static RadialGrid build(int n_max, int panels_per_unit_t = 0) {
        // 12-point Gauss-Legendre nodes on [-1, 1]
        static const double gx[6] = {0.1252334085114689, 0.3678314989981802, 0.5873179542866175,
                                     0.7699026741943047, 0.9041172563704749, 0.9815606342467192};
        static const double gw[6] = {0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                                     0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
        RadialGrid g;
        const double rmin = 1e-5;
        const double rmax = 3.2 * static_cast<double>(n_max) * n_max + 60.0;
        const double t0 = std::log(rmin), t1 = std::log(rmax);
        // resolve the fastest radial oscillations: ~ sqrt(2 r)/pi per unit t
        const double density = panels_per_unit_t > 0
                                   ? panels_per_unit_t
                                   : std::max(6.0, 0.6 * std::sqrt(2.0 * rmax) / M_PI);
        const int panels = std::max(60, static_cast<int>((t1 - t0) * density));
        for (int p = 0; p < panels; ++p) {
            const double a = t0 + (t1 - t0) * p / panels;
            const double b = t0 + (t1 - t0) * (p + 1) / panels;
            for (int i = 0; i < 12; ++i) {
                const double xi = (i < 6) ? -gx[5 - i] : gx[i - 6];
                const double wi = (i < 6) ? gw[5 - i] : gw[i - 6];
                const double t = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                const double rr = std::exp(t);
                g.r.push_back(rr);
                g.w.push_back(0.5 * (b - a) * wi * rr);  // dr = r dt
            }
        }
        return g;
    }
};

/// <n l | r | n' l'> radial integral by quadrature.
inline double radial_integral_r(int n, int l, int np, int lp, const RadialGrid& grid) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.r.size(); ++i) {
        const double rr = grid.r[i];
        sum += grid.w[i] * radial_wavefunction(n, l, rr) * radial_wavefunction(np, lp, rr) * rr * rr * rr;
    }
    return sum;
}

inline double angular_cos_factor(int l, int lp) {
    if (std::abs(l - lp) != 1) return 0.0;
    const int lg = std::max(l, lp);
    return lg / std::sqrt((2.0 * lg - 1.0) * (2.0 * lg + 1.0));
}

/// Single matrix element <n l 0| z |n' l' 0>. Selection rule |l-l'| = 1.
inline double dipole_z(int n, int l, int np, int lp, const RadialGrid& grid) {
    if (std::abs(l - lp) != 1) return 0.0;
    return angular_cos_factor(l, lp) * radial_integral_r(n, l, np, lp, grid);
}

/// Full z-operator over one photon-free block, assembled per (l, l+1) pair so
/// the Laguerre recurrence at each node is shared across the n ladder.
inline Eigen::SparseMatrix<double> z_block_matrix(const BasisDescriptor& basis,
                                                  const RadialGrid& grid) {
    const int d = basis.block_dim();
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<std::vector<double>> rl, rl1;  // [n-index][node]
    for (int l = 0; l + 1 < basis.n_max; ++l) {
        const int lp = l + 1;
        const int n_lo = std::max(basis.n_min, l + 1);
        const int np_lo = std::max(basis.n_min, lp + 1);
        if (n_lo > basis.n_max || np_lo > basis.n_max) continue;
        const int nn = basis.n_max - n_lo + 1;
        const int nnp = basis.n_max - np_lo + 1;
        rl.assign(nn, std::vector<double>(grid.r.size()));
        rl1.assign(nnp, std::vector<double>(grid.r.size()));
        std::vector<double> phi;
        for (std::size_t i = 0; i < grid.r.size(); ++i) {
            const double rr = grid.r[i];
            for (int a = 0; a < nn; ++a) {
                const int n = n_lo + a;
                const double x = 2.0 * rr / n;
                detail::laguerre_orthonormal(x, 2.0 * l + 1.0, n - l - 1, phi);
                rl[a][i] = (2.0 / (static_cast<double>(n) * n)) * phi[n - l - 1] / std::sqrt(x);
            }
            for (int a = 0; a < nnp; ++a) {
                const int n = np_lo + a;
                const double x = 2.0 * rr / n;
                detail::laguerre_orthonormal(x, 2.0 * lp + 1.0, n - lp - 1, phi);
                rl1[a][i] = (2.0 / (static_cast<double>(n) * n)) * phi[n - lp - 1] / std::sqrt(x);
            }
        }
        const double ang = angular_cos_factor(l, lp);
        for (int a = 0; a < nn; ++a) {
            for (int b = 0; b < nnp; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < grid.r.size(); ++i)
                    s += grid.w[i] * rl[a][i] * rl1[b][i] * grid.r[i] * grid.r[i] * grid.r[i];
                const double v = ang * s;
                if (v != 0.0) {
                    const int ia = basis.state_index(n_lo + a, l);
                    const int ib = basis.state_index(np_lo + b, lp);
                    trips.emplace_back(ia, ib, v);
                    trips.emplace_back(ib, ia, v);
                }
            }
        }
    }
    Eigen::SparseMatrix<double> z(d, d);
    z.setFromTriplets(trips.begin(), trips.end());
    return z;
}

inline Eigen::VectorXd h0_diagonal(const BasisDescriptor& basis) {
    Eigen::VectorXd h(basis.block_dim());
    for (int i = 0; i < basis.block_dim(); ++i) {
        const double n = basis.states[i].first;
        h[i] = -0.5 / (n * n);
    }
    return h;
}

}  // namespace ndwp::quantum
