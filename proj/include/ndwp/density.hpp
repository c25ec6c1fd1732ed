#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "ndwp/basis.hpp"

namespace ndwp::quantum {

/// rho |Psi|^2 on the meridian (rho, z) plane at a fixed microwave phase.
struct DensityGrid {
    int n_rho = 0, n_z = 0;
    double rho_max = 0.0, z_max = 0.0;  // grid spans [0, rho_max] x [-z_max, z_max]
    double phi = 0.0;
    std::vector<double> values;  // row-major, iz * n_rho + irho

    double rho_at(int i) const { return rho_max * (i + 0.5) / n_rho; }
    double z_at(int j) const { return -z_max + 2.0 * z_max * (j + 0.5) / n_z; }
    double& at(int irho, int iz) { return values[static_cast<std::size_t>(iz) * n_rho + irho]; }
    double at(int irho, int iz) const { return values[static_cast<std::size_t>(iz) * n_rho + irho]; }
};

namespace detail {

// sqrt((2l+1)/4pi) P_l(c) for l = 0..lmax
inline void y_l0(double c, int lmax, std::vector<double>& out) {
    out.resize(lmax + 1);
    double pm1 = 1.0, p = c;
    out[0] = std::sqrt(1.0 / (4.0 * M_PI));
    if (lmax >= 1) out[1] = std::sqrt(3.0 / (4.0 * M_PI)) * c;
    for (int l = 1; l < lmax; ++l) {
        const double pn = ((2.0 * l + 1.0) * c * p - l * pm1) / (l + 1.0);
        pm1 = p;
        p = pn;
        out[l + 1] = std::sqrt((2.0 * l + 3.0) / (4.0 * M_PI)) * pn;
    }
}

}  // namespace detail

/// Psi(rho, 0, z; phi) = sum c_{nlk} R_nl(r) Y_l0(theta) e^{-i k phi} from an
/// extended-space eigenvector.
inline std::complex<double> wavefunction_at(const Eigen::VectorXd& vec, const BasisDescriptor& b,
                                            double rho, double z, double phi) {
    const double r = std::hypot(rho, z);
    if (r < 1e-12) return 0.0;
    const double c = z / r;
    std::vector<double> yl;
    detail::y_l0(c, b.n_max - 1, yl);
    // radial functions for every (n, l) at this r
    std::vector<double> phi_k;
    std::complex<double> psi = 0.0;
    const int d = b.block_dim();
    for (int n = b.n_min; n <= b.n_max; ++n) {
        for (int l = 0; l < n; ++l) {
            // accumulate the photon sum for this state first
            std::complex<double> coeff = 0.0;
            for (int kb = 0; kb < b.blocks(); ++kb) {
                const double cv = vec[static_cast<long>(kb) * d + b.state_index(n, l)];
                if (cv == 0.0) continue;
                const int k = kb - b.k_photons;
                coeff += cv * std::exp(std::complex<double>(0.0, -k * phi));
            }
            if (std::abs(coeff) < 1e-14) continue;
            psi += coeff * radial_wavefunction(n, l, r) * yl[l];
        }
    }
    return psi;
}

/// Same evaluation for a lab-frame (photon-free) complex state vector.
inline std::complex<double> wavefunction_at_lab(const Eigen::VectorXcd& c, const BasisDescriptor& b,
                                                double rho, double z) {
    const double r = std::hypot(rho, z);
    if (r < 1e-12) return 0.0;
    std::vector<double> yl;
    detail::y_l0(z / r, b.n_max - 1, yl);
    std::complex<double> psi = 0.0;
    for (int n = b.n_min; n <= b.n_max; ++n) {
        for (int l = 0; l < n; ++l) {
            const std::complex<double> cv = c[b.state_index(n, l)];
            if (std::abs(cv) < 1e-14) continue;
            psi += cv * radial_wavefunction(n, l, r) * yl[l];
        }
    }
    return psi;
}

struct DensityGridSpec {
    int n_rho = 120;
    int n_z = 240;
    double extent_scale = 2.5;  // grid reaches extent_scale * n0^2
};

inline DensityGrid density_snapshot(const Eigen::VectorXd& vec, const BasisDescriptor& b,
                                    double phi, const DensityGridSpec& spec = {}) {
    DensityGrid g;
    const double n0sq = static_cast<double>(b.n0) * b.n0;
    g.n_rho = spec.n_rho;
    g.n_z = spec.n_z;
    g.rho_max = spec.extent_scale * n0sq;
    g.z_max = spec.extent_scale * n0sq;
    g.phi = phi;
    g.values.assign(static_cast<std::size_t>(g.n_rho) * g.n_z, 0.0);
    for (int iz = 0; iz < g.n_z; ++iz) {
        for (int ir = 0; ir < g.n_rho; ++ir) {
            const double rho = g.rho_at(ir);
            const double z = g.z_at(iz);
            const double a = std::abs(wavefunction_at(vec, b, rho, z, phi));
            g.at(ir, iz) = rho * a * a;
        }
    }
    return g;
}

inline DensityGrid density_snapshot_lab(const Eigen::VectorXcd& c, const BasisDescriptor& b,
                                        const DensityGridSpec& spec = {}) {
    DensityGrid g;
    const double n0sq = static_cast<double>(b.n0) * b.n0;
    g.n_rho = spec.n_rho;
    g.n_z = spec.n_z;
    g.rho_max = spec.extent_scale * n0sq;
    g.z_max = spec.extent_scale * n0sq;
    g.values.assign(static_cast<std::size_t>(g.n_rho) * g.n_z, 0.0);
    for (int iz = 0; iz < g.n_z; ++iz) {
        for (int ir = 0; ir < g.n_rho; ++ir) {
            const double rho = g.rho_at(ir);
            const double a = std::abs(wavefunction_at_lab(c, b, rho, g.z_at(iz)));
            g.at(ir, iz) = rho * a * a;
        }
    }
    return g;
}

/// Integral of |Psi|^2 over all space from the meridian grid (azimuthal
/// symmetry): 2 pi * sum rho |Psi|^2 drho dz. Should be ~1 for a converged grid.
inline double grid_norm(const DensityGrid& g) {
    const double drho = g.rho_max / g.n_rho;
    const double dz = 2.0 * g.z_max / g.n_z;
    double s = 0.0;
    for (double v : g.values) s += v;
    return 2.0 * M_PI * s * drho * dz;
}

/// <z> over the grid measure (for the centroid-oscillation diagnostics).
inline double grid_centroid_z(const DensityGrid& g) {
    const double drho = g.rho_max / g.n_rho;
    const double dz = 2.0 * g.z_max / g.n_z;
    double s = 0.0, sz = 0.0;
    for (int iz = 0; iz < g.n_z; ++iz) {
        for (int ir = 0; ir < g.n_rho; ++ir) {
            s += g.at(ir, iz);
            sz += g.at(ir, iz) * g.z_at(iz);
        }
    }
    (void)drho;
    (void)dz;
    return sz / std::max(s, 1e-300);
}

struct DensityPeak {
    double rho = 0.0, z = 0.0, value = 0.0;
    double radius() const { return std::hypot(rho, z); }
    double theta() const { return std::atan2(rho, z); }  // 0 at +z pole, pi at -z
};

inline DensityPeak grid_peak(const DensityGrid& g) {
    DensityPeak p;
    for (int iz = 0; iz < g.n_z; ++iz) {
        for (int ir = 0; ir < g.n_rho; ++ir) {
            if (g.at(ir, iz) > p.value) {
                p.value = g.at(ir, iz);
                p.rho = g.rho_at(ir);
                p.z = g.z_at(iz);
            }
        }
    }
    return p;
}

}  // namespace ndwp::quantum
