#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "ndwp/floquet.hpp"
#include "ndwp/quantizer.hpp"
#include "ndwp/ramp.hpp"

namespace ndwp::dynamics {

using quantum::BasisDescriptor;

/// Lab-frame state over the photon-free bound basis.
struct EvolvingState {
    Eigen::VectorXcd c;
    double t = 0.0;  // a.u.

    double norm() const { return c.norm(); }
};

/// Collapse an extended Floquet eigenvector onto the lab basis at drive phase
/// phi: u = sum_k e^{-i k phi} c^(k). Normalized on return.
inline Eigen::VectorXcd collapse_floquet_state(const Eigen::VectorXd& vec,
                                               const BasisDescriptor& basis, double phi) {
    const int d = basis.block_dim();
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(d);
    for (int kb = 0; kb < basis.blocks(); ++kb) {
        const int k = kb - basis.k_photons;
        const std::complex<double> ph = std::exp(std::complex<double>(0.0, -k * phi));
        u += ph * vec.segment(static_cast<long>(kb) * d, d).cast<std::complex<double>>();
    }
    const double n = u.norm();
    if (n < 1e-12) throw NumericalError("collapsed Floquet state has negligible norm");
    return u / n;
}

/// Squared overlap |<u(phi)|state>|^2 with the phase-matched Floquet state;
/// invariant under global phases of either argument.
inline double overlap_with_floquet(const Eigen::VectorXcd& state, const Eigen::VectorXd& floquet_vec,
                                   const BasisDescriptor& basis, double phi) {
    const Eigen::VectorXcd u = collapse_floquet_state(floquet_vec, basis, phi);
    const std::complex<double> ov = u.dot(state);
    return std::norm(ov) / std::max(1e-300, state.squaredNorm());
}

/// Extreme blue-shifted Stark state of the n0 manifold at F = 0: the highest
/// eigenstate of H0 + Fs z whose dominant shell is n0.
inline EvolvingState prepare_initial_state(const FieldConfig& cfg, const BasisDescriptor& basis,
                                           const Eigen::SparseMatrix<double>& z_block) {
    cfg.validate();
    if (!(cfg.fs0 > 0.0)) throw ConfigError("initial Stark state needs Fs0 > 0");
    Eigen::MatrixXd h(z_block);
    h *= cfg.static_field_au();
    const Eigen::VectorXd h0 = quantum::h0_diagonal(basis);
    for (int i = 0; i < basis.block_dim(); ++i) h(i, i) += h0[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("static diagonalization failed");

    int pick = -1;
    for (int j = basis.block_dim() - 1; j >= 0; --j) {
        // per-shell weights of eigenstate j
        double wbest = 0.0, wn0 = 0.0;
        for (int n = basis.n_min; n <= basis.n_max; ++n) {
            double w = 0.0;
            for (int l = 0; l < n; ++l) {
                const double cv = es.eigenvectors()(basis.state_index(n, l), j);
                w += cv * cv;
            }
            wbest = std::max(wbest, w);
            if (n == basis.n0) wn0 = w;
        }
        if (wn0 == wbest && wn0 > 0.5) { pick = j; break; }
    }
    if (pick < 0)
        throw NumericalError("no eigenstate dominated by the n0 shell; manifolds too mixed");
    EvolvingState s;
    s.c = es.eigenvectors().col(pick).cast<std::complex<double>>();
    s.t = 0.0;
    return s;
}

/// Landau-Zener ramp-rate bound: the |dFs0/dt| (scaled units per a.u. time)
/// at which the diabatic transition probability exp(-2 pi (gap/2)^2 /
/// (|slope_diff| rate)) equals `p_threshold`. Small thresholds give the
/// adiabatic-passage limit, thresholds near 1 the intended-diabatic limit.
inline double lz_max_ramp_rate(double gap, double slope_diff, double p_threshold = 0.01) {
    if (!(gap > 0.0)) return 0.0;
    if (slope_diff == 0.0) throw ConfigError("Landau-Zener estimate needs distinct level slopes");
    if (!(p_threshold > 0.0 && p_threshold < 1.0))
        throw ConfigError("threshold probability must be in (0, 1)");
    return 2.0 * M_PI * 0.25 * gap * gap / (std::abs(slope_diff) * (-std::log(p_threshold)));
}

// ---------------------------------------------------------------------------
// Split-operator propagation
// ---------------------------------------------------------------------------

struct PropagateOptions {
    int steps_per_period = 256;     // >= 200 per the convergence contract
    double overlap_cadence = 50.0;  // periods between Floquet overlap checks; <= 0 disables
    int floquet_count = 40;         // eigenpairs per overlap check
    bool track_overlap = true;
};

struct TrajectoryRecord {
    double t_periods = 0.0;
    double f0 = 0.0;
    double fs0 = 0.0;
    double norm = 0.0;
    double loss_proxy = 0.0;        // population of the two outermost shells
    double overlap = -1.0;          // -1 when not evaluated at this record
    bool overlap_ambiguous = false;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    EvolvingState final_state;
    double max_norm_drift_per_period = 0.0;
    double final_overlap = -1.0;
};

/// Unitary split-operator propagator for i dc/dt = [H0 + f(t) z] c, with both
/// factors applied exactly (H0 is diagonal; z through its eigenbasis). A
/// triple-Strang composition gives fourth-order accuracy in the step.
class Propagator {
  public:
    Propagator(const FieldConfig& cfg, const BasisDescriptor& basis,
               const Eigen::SparseMatrix<double>& z_block)
        : cfg_(cfg), basis_(basis), z_block_(z_block), h0_(quantum::h0_diagonal(basis)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((Eigen::MatrixXd(z_block)));
        if (es.info() != Eigen::Success) throw NumericalError("z eigendecomposition failed");
        zval_ = es.eigenvalues();
        zvec_ = es.eigenvectors();
    }

    const BasisDescriptor& basis() const { return basis_; }
    const Eigen::SparseMatrix<double>& z_block() const { return z_block_; }

    /// one fourth-order step from time t (a.u.) over dt (a.u.)
    void step(Eigen::VectorXcd& c, double t, double dt, const RampSchedule& sched) const {
        // Yoshida composition of the symmetric second-order splitting
        static const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
        static const double w0 = 1.0 - 2.0 * w1;
        double tau = t;
        for (double w : {w1, w0, w1}) {
            strang(c, tau, w * dt, sched);
            tau += w * dt;
        }
    }

    double field_at(double t, const RampSchedule& sched) const {
        const double tp = t / cfg_.period_au();
        const double f = sched.f0_at(tp) / cfg_.n0_pow4();
        const double fs = sched.fs0_at(tp) / cfg_.n0_pow4();
        return f * std::cos(cfg_.omega() * t) + fs;
    }

  private:
    void strang(Eigen::VectorXcd& c, double t, double dt, const RampSchedule& sched) const {
        apply_diag_phase(c, 0.5 * dt);
        const double f = field_at(t + 0.5 * dt, sched);
        apply_field_phase(c, f, dt);
        apply_diag_phase(c, 0.5 * dt);
    }

    void apply_diag_phase(Eigen::VectorXcd& c, double dt) const {
        for (int i = 0; i < c.size(); ++i)
            c[i] *= std::exp(std::complex<double>(0.0, -h0_[i] * dt));
    }

    void apply_field_phase(Eigen::VectorXcd& c, double f, double dt) const {
        if (f == 0.0) return;
        Eigen::VectorXd re = zvec_.transpose() * c.real();
        Eigen::VectorXd im = zvec_.transpose() * c.imag();
        for (int i = 0; i < re.size(); ++i) {
            const std::complex<double> ph = std::exp(std::complex<double>(0.0, -f * zval_[i] * dt));
            const std::complex<double> v = ph * std::complex<double>(re[i], im[i]);
            re[i] = v.real();
            im[i] = v.imag();
        }
        c.real() = zvec_ * re;
        c.imag() = zvec_ * im;
    }

    FieldConfig cfg_;
    BasisDescriptor basis_;
    Eigen::SparseMatrix<double> z_block_;
    Eigen::VectorXd h0_;
    Eigen::VectorXd zval_;
    Eigen::MatrixXd zvec_;
};

namespace detail {

inline double loss_proxy(const Eigen::VectorXcd& c, const BasisDescriptor& b) {
    double w = 0.0;
    for (int n = std::max(b.n_min, b.n_max - 1); n <= b.n_max; ++n) {
        for (int l = 0; l < n; ++l) w += std::norm(c[b.state_index(n, l)]);
    }
    return w;
}

struct OverlapCheck {
    double overlap = -1.0;
    bool ambiguous = false;
};

inline OverlapCheck floquet_overlap_now(const Propagator& prop, const FieldConfig& base,
                                        const Eigen::VectorXcd& c, double t_au,
                                        const RampSchedule& sched, int count) {
    const double periods = t_au / base.period_au();
    const FieldConfig cfg = base.with_f0(sched.f0_at(periods)).with_fs0(sched.fs0_at(periods));
    if (cfg.f0 == 0.0 && cfg.fs0 == 0.0) return {};
    const auto top = semiclassics::quantize_top_level(cfg);
    const auto h = quantum::assemble_floquet(cfg, prop.basis(), prop.z_block());
    const double target = quantum::quantum_zone_target(cfg, top.energy);
    const auto spec = quantum::diagonalize_window(h, target, count, prop.basis());
    const auto id = quantum::identify_wavepacket(spec, cfg, top.energy);
    const double phi = std::fmod(cfg.omega() * t_au, 2.0 * M_PI);
    OverlapCheck oc;
    oc.overlap = overlap_with_floquet(c, spec.vectors.col(id.index), prop.basis(), phi);
    oc.ambiguous = id.ambiguous;
    return oc;
}

}  // namespace detail

/// Integrate the state through the schedule. Records one row per period
/// (norm, fields, loss proxy) and the Floquet overlap at the configured
/// cadence and at the final time.
inline Trajectory propagate(const EvolvingState& initial, const RampSchedule& sched,
                            const FieldConfig& base, const Propagator& prop,
                            const PropagateOptions& opt = {}) {
    sched.validate();
    base.validate();
    if (opt.steps_per_period < 200)
        throw ConfigError("steps_per_period must be at least 200");
    const double f0max_over_schedule = [&] {
        double m = 0.0;
        for (const auto& s : sched.segments)
            if (s.field == RampField::f0) m = std::max({m, s.v_start, s.v_end});
        return m;
    }();
    if (f0max_over_schedule > 0.04)
        throw ConfigError("scaled microwave amplitudes above 0.04 ionize too fast for a bound basis");

    Trajectory out;
    Eigen::VectorXcd c = initial.c;
    const double period = base.period_au();
    const double dt = period / opt.steps_per_period;
    const double total_periods = sched.duration();
    const long total_steps = static_cast<long>(std::llround(total_periods * opt.steps_per_period));

    double prev_norm = c.norm();
    double next_overlap_at = opt.track_overlap && opt.overlap_cadence > 0.0 ? 0.0 : 1e300;

    auto record = [&](long step_index) {
        const double t_au = step_index * dt;
        const double tp = t_au / period;
        TrajectoryRecord r;
        r.t_periods = tp;
        r.f0 = sched.f0_at(tp);
        r.fs0 = sched.fs0_at(tp);
        r.norm = c.norm();
        r.loss_proxy = detail::loss_proxy(c, prop.basis());
        if (tp >= next_overlap_at - 1e-9) {
            const auto oc = detail::floquet_overlap_now(prop, base, c, t_au, sched, opt.floquet_count);
            r.overlap = oc.overlap;
            r.overlap_ambiguous = oc.ambiguous;
            next_overlap_at += opt.overlap_cadence;
        }
        out.records.push_back(r);
    };

    record(0);
    for (long s = 0; s < total_steps; ++s) {
        prop.step(c, s * dt, dt, sched);
        if ((s + 1) % opt.steps_per_period == 0) {
            const double n = c.norm();
            out.max_norm_drift_per_period =
                std::max(out.max_norm_drift_per_period, std::abs(n - prev_norm));
            prev_norm = n;
            record(s + 1);
        }
    }

    out.final_state.c = c;
    out.final_state.t = total_steps * dt;
    if (opt.track_overlap) {
        const auto oc = detail::floquet_overlap_now(prop, base, c, out.final_state.t, sched,
                                                    opt.floquet_count);
        out.final_overlap = oc.overlap;
        if (!out.records.empty()) {
            out.records.back().overlap = oc.overlap;
            out.records.back().overlap_ambiguous = oc.ambiguous;
        }
    }
    return out;
}

}  // namespace ndwp::dynamics
