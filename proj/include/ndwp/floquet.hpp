#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ndwp/basis.hpp"
#include "ndwp/units.hpp"

namespace ndwp::quantum {

/// Floquet operator of the cosine-driven atom over the truncated basis:
/// diagonal blocks H0 + Fs z + k omega, off-diagonal blocks (F/2) z between
/// adjacent photon indices. Real symmetric by construction.
inline Eigen::SparseMatrix<double> assemble_floquet(const FieldConfig& cfg,
                                                    const BasisDescriptor& basis,
                                                    const Eigen::SparseMatrix<double>& z_block) {
    const int d = basis.block_dim();
    const int nb = basis.blocks();
    const double omega = cfg.omega();
    const double f = cfg.microwave_field_au();
    const double fs = cfg.static_field_au();
    const Eigen::VectorXd h0 = h0_diagonal(basis);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(nb) * (z_block.nonZeros() * 2 + d));
    for (int kb = 0; kb < nb; ++kb) {
        const int k = kb - basis.k_photons;
        const long off = static_cast<long>(kb) * d;
        for (int i = 0; i < d; ++i) trips.emplace_back(off + i, off + i, h0[i] + k * omega);
        for (int c = 0; c < z_block.outerSize(); ++c) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(z_block, c); it; ++it) {
                if (fs != 0.0) trips.emplace_back(off + it.row(), off + it.col(), fs * it.value());
                if (f != 0.0 && kb + 1 < nb) {
                    trips.emplace_back(off + it.row(), off + d + it.col(), 0.5 * f * it.value());
                    trips.emplace_back(off + d + it.col(), off + it.row(), 0.5 * f * it.value());
                }
            }
        }
    }
    Eigen::SparseMatrix<double> h(basis.dim(), basis.dim());
    h.setFromTriplets(trips.begin(), trips.end());
    return h;
}

struct FloquetSpectrum {
    BasisDescriptor basis;
    double target = 0.0;
    Eigen::VectorXd quasienergies;  // sorted by |eps - target|
    Eigen::MatrixXd vectors;        // columns matching quasienergies
    Eigen::VectorXd residuals;      // ||H v - eps v||
};

inline double fold_to_zone(double eps, double center, double omega) {
    return eps - omega * std::round((eps - center) / omega);
}

/// Map a rotating-frame effective energy into the quasienergy zone around the
/// physical n0-manifold energy -1/(2 n0^2). The two frames differ by n0 omega,
/// an exact multiple of the drive, so only the zone placement changes.
inline double quantum_zone_target(const FieldConfig& cfg, double e_semiclassical) {
    const double center = -0.5 / (cfg.n0d() * cfg.n0d());
    return center + std::remainder(e_semiclassical - center, cfg.omega());
}

namespace detail {

inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    int imax = 0;
    double amax = 0.0;
    for (int i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > amax) { amax = std::abs(v[i]); imax = i; }
    }
    if (v[imax] < 0.0) v = -v;
}

inline FloquetSpectrum dense_window(const Eigen::SparseMatrix<double>& h, double target, int count,
                                    const BasisDescriptor& basis) {
    Eigen::MatrixXd hd(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hd);
    if (es.info() != Eigen::Success) throw NumericalError("dense Floquet eigensolve failed");
    const long n = hd.rows();
    std::vector<long> order(n);
    for (long i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](long a, long b) {
        return std::abs(es.eigenvalues()[a] - target) < std::abs(es.eigenvalues()[b] - target);
    });
    count = std::min<long>(count, n);
    FloquetSpectrum out;
    out.basis = basis;
    out.target = target;
    out.quasienergies.resize(count);
    out.vectors.resize(n, count);
    out.residuals.resize(count);
    for (int j = 0; j < count; ++j) {
        out.quasienergies[j] = es.eigenvalues()[order[j]];
        out.vectors.col(j) = es.eigenvectors().col(order[j]);
        fix_sign(out.vectors.col(j));
        out.residuals[j] = (h * out.vectors.col(j) - out.quasienergies[j] * out.vectors.col(j)).norm();
    }
    return out;
}

// Shift-invert Lanczos with full reorthogonalization. The start vector is a
// fixed function of the basis, so results are bit-reproducible.
inline FloquetSpectrum lanczos_shift_invert(const Eigen::SparseMatrix<double>& h, double sigma,
                                            int count, const BasisDescriptor& basis,
                                            int max_iter) {
    const long n = h.rows();
    Eigen::SparseMatrix<double> shifted = h;
    for (long i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
    shifted.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(shifted);
    lu.factorize(shifted);
    if (lu.info() != Eigen::Success)
        throw NumericalError("shift-invert factorization failed (shift too close to an eigenvalue?)");

    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(n);
    for (int l = 0; l < basis.n0 && basis.n0 >= basis.n_min && basis.n0 <= basis.n_max; ++l)
        v0[basis.global_index(basis.n0, l, 0)] = 1.0 + 0.1 * std::sin(0.7 * (l + 1));
    if (v0.norm() == 0.0) v0.setOnes();
    v0.normalize();

    const int m = std::min<long>(max_iter, n);
    Eigen::MatrixXd q(n, m);
    Eigen::VectorXd alpha(m), beta(m);
    q.col(0) = v0;
    Eigen::VectorXd w;
    int built = 0;
    for (int j = 0; j < m; ++j) {
        w = lu.solve(q.col(j));
        if (j > 0) w -= beta[j - 1] * q.col(j - 1);
        alpha[j] = q.col(j).dot(w);
        w -= alpha[j] * q.col(j);
        // full reorthogonalization, twice
        for (int pass = 0; pass < 2; ++pass)
            w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
        beta[j] = w.norm();
        built = j + 1;
        if (beta[j] < 1e-14) break;
        if (j + 1 < m) q.col(j + 1) = w / beta[j];
    }

    Eigen::VectorXd diag = alpha.head(built);
    Eigen::VectorXd sub = beta.head(std::max(0, built - 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub);
    if (tri.info() != Eigen::Success) throw NumericalError("Lanczos tridiagonal solve failed");

    // Ritz values theta of (H - sigma)^-1 -> eigenvalues sigma + 1/theta
    std::vector<int> order(built);
    for (int i = 0; i < built; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(tri.eigenvalues()[a]) > std::abs(tri.eigenvalues()[b]);
    });

    count = std::min(count, built);
    FloquetSpectrum out;
    out.basis = basis;
    out.target = sigma;
    out.quasienergies.resize(count);
    out.vectors.resize(n, count);
    out.residuals.resize(count);
    for (int j = 0; j < count; ++j) {
        const int i = order[j];
        const double theta = tri.eigenvalues()[i];
        out.quasienergies[j] = sigma + 1.0 / theta;
        out.vectors.col(j) = q.leftCols(built) * tri.eigenvectors().col(i);
        out.vectors.col(j).normalize();
        fix_sign(out.vectors.col(j));
        out.residuals[j] = (h * out.vectors.col(j) - out.quasienergies[j] * out.vectors.col(j)).norm();
    }
    return out;
}

}  // namespace detail

struct DiagonalizeOptions {
    long dense_threshold = 2000;
    int lanczos_iter = 0;        // 0: automatic
    double residual_tol = 1e-8;  // scaled by the spectral width of the window
};

/// `count` eigenpairs nearest `target`, dense below the size threshold and
/// shift-invert Lanczos above it.
inline FloquetSpectrum diagonalize_window(const Eigen::SparseMatrix<double>& h, double target,
                                          int count, const BasisDescriptor& basis,
                                          const DiagonalizeOptions& opt = {}) {
    if (count < 1) throw ConfigError("diagonalize_window: count must be >= 1");
    if (h.rows() <= opt.dense_threshold) {
        return detail::dense_window(h, target, count, basis);
    }
    int m = opt.lanczos_iter > 0 ? opt.lanczos_iter : std::max(2 * count + 80, 140);
    for (int attempt = 0; attempt < 3; ++attempt) {
        FloquetSpectrum s = detail::lanczos_shift_invert(h, target, count, basis, m);
        double scale = 0.0;
        for (int j = 0; j < s.quasienergies.size(); ++j)
            scale = std::max(scale, std::abs(s.quasienergies[j] - target));
        const double tol = opt.residual_tol * std::max(scale, 1e-12);
        if (s.residuals.maxCoeff() < tol) return s;
        m = m * 3 / 2;
    }
    FloquetSpectrum s = detail::lanczos_shift_invert(h, target, count, basis, m);
    double scale = 0.0;
    for (int j = 0; j < s.quasienergies.size(); ++j)
        scale = std::max(scale, std::abs(s.quasienergies[j] - target));
    if (s.residuals.maxCoeff() >= opt.residual_tol * std::max(scale, 1e-12))
        throw NumericalError("shift-invert Lanczos did not converge; max residual " +
                             std::to_string(s.residuals.maxCoeff()));
    return s;
}

/// Weight of an extended-space eigenvector on shells |n - n0| <= 1, summed
/// over photon blocks.
inline double manifold_weight(const Eigen::VectorXd& vec, const BasisDescriptor& basis) {
    double w = 0.0;
    const int d = basis.block_dim();
    for (int kb = 0; kb < basis.blocks(); ++kb) {
        for (int n = std::max(basis.n_min, basis.n0 - 1); n <= std::min(basis.n_max, basis.n0 + 1); ++n) {
            for (int l = 0; l < n; ++l) {
                const double c = vec[static_cast<long>(kb) * d + basis.state_index(n, l)];
                w += c * c;
            }
        }
    }
    return w;
}

/// |eps - e| reduced to the zone, in units of the mean level spacing 2/n0^4.
inline double semiclassical_delta(double eps_quantum, double e_semiclassical, int n0) {
    const double n = static_cast<double>(n0);
    const double omega = 1.0 / (n * n * n);
    const double d = std::abs(std::remainder(eps_quantum - e_semiclassical, omega));
    return d / (2.0 / (n * n * n * n));
}

struct WavepacketId {
    int index = -1;
    double score = 0.0;
    double delta = 0.0;       // zone-reduced distance to the prediction, in spacings
    double weight = 0.0;      // manifold weight
    bool ambiguous = false;
    int runner_up = -1;
    double runner_up_score = 0.0;
};

/// Shell with the largest population, summed over photon blocks.
inline int dominant_shell(const Eigen::VectorXd& vec, const BasisDescriptor& basis) {
    const int d = basis.block_dim();
    int best_n = basis.n_min;
    double best_w = -1.0;
    for (int n = basis.n_min; n <= basis.n_max; ++n) {
        double w = 0.0;
        for (int kb = 0; kb < basis.blocks(); ++kb) {
            for (int l = 0; l < n; ++l) {
                const double c = vec[static_cast<long>(kb) * d + basis.state_index(n, l)];
                w += c * c;
            }
        }
        if (w > best_w) { best_w = w; best_n = n; }
    }
    return best_n;
}

/// Pick the eigenstate matching the semiclassical wavepacket level: the state
/// must live on the n0 shell (neighboring-n manifolds also score high on a
/// |n - n0| <= 1 weight, so the dominant shell is the discriminator), and the
/// quasienergy must sit near the prediction mod omega. The distance window is
/// a small fraction of the mean spacing because that is the accuracy the
/// semiclassical model actually delivers; a runner-up within 5% marks an
/// avoided crossing.
inline WavepacketId identify_wavepacket(const FloquetSpectrum& spec, const FieldConfig& cfg,
                                        double e_semiclassical) {
    WavepacketId id;
    for (int j = 0; j < spec.quasienergies.size(); ++j) {
        if (dominant_shell(spec.vectors.col(j), spec.basis) != cfg.n0) continue;
        const double d = semiclassical_delta(spec.quasienergies[j], e_semiclassical, cfg.n0);
        const double w = manifold_weight(spec.vectors.col(j), spec.basis);
        const double score = w * std::exp(-(d / 0.1) * (d / 0.1));
        if (score > id.score) {
            id.runner_up = id.index;
            id.runner_up_score = id.score;
            id.index = j;
            id.score = score;
            id.delta = d;
            id.weight = w;
        } else if (score > id.runner_up_score) {
            id.runner_up = j;
            id.runner_up_score = score;
        }
    }
    if (id.index < 0) throw NumericalError("identify_wavepacket: no state is dominated by the n0 shell");
    id.ambiguous = id.runner_up >= 0 && id.runner_up_score > 0.95 * id.score;
    return id;
}

/// Squared z-dipole from a reference bound state into the k = 0 photon
/// component of each Floquet state (weak-probe excitation picture).
struct DipoleLine {
    double quasienergy = 0.0;
    double strength = 0.0;
};

inline std::vector<DipoleLine> dipole_spectrum(const FloquetSpectrum& spec,
                                               const Eigen::SparseMatrix<double>& z_block,
                                               int ref_state_index) {
    const BasisDescriptor& b = spec.basis;
    const int d = b.block_dim();
    Eigen::VectorXd zref = Eigen::VectorXd::Zero(d);
    for (int c = 0; c < z_block.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(z_block, c); it; ++it) {
            if (it.col() == ref_state_index) zref[it.row()] = it.value();
            if (it.row() == ref_state_index) zref[it.col()] = it.value();
        }
    }
    std::vector<DipoleLine> lines;
    lines.reserve(spec.quasienergies.size());
    for (int j = 0; j < spec.quasienergies.size(); ++j) {
        const auto k0 = spec.vectors.col(j).segment(static_cast<long>(b.k_photons) * d, d);
        const double amp = zref.dot(k0);
        lines.push_back({spec.quasienergies[j], amp * amp});
    }
    return lines;
}

}  // namespace ndwp::quantum
