#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace ndwp {

// Atomic-unit conversion factors.
inline constexpr double kFieldAuInVPerCm = 5.14220675e9;  // 1 a.u. electric field
inline constexpr double kFreqAuInGHz = 6.5796839e6;       // 1 a.u. (E/h) frequency

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Resonant driving setup in scaled units. The principal action n0 fixes the
/// microwave frequency to the Kepler frequency 1/n0^3; scaled field amplitudes
/// F0 = F n0^4 and Fs0 = Fs n0^4 remove the trivial n0 dependence of the
/// classical dynamics. Everything downstream derives fields from this struct,
/// so there is a single source of truth for units.
struct FieldConfig {
    int n0 = 60;        // resonant principal action (integer)
    double f0 = 0.0;    // scaled microwave amplitude F n0^4
    double fs0 = 0.0;   // scaled static amplitude Fs n0^4
    int lz = 0;         // fixed to 0

    void validate() const {
        if (n0 < 2) throw ConfigError("n0 must be an integer >= 2");
        if (!(f0 >= 0.0) || !std::isfinite(f0)) throw ConfigError("f0 must be finite and >= 0");
        if (!(fs0 >= 0.0) || !std::isfinite(fs0)) throw ConfigError("fs0 must be finite and >= 0");
        if (lz != 0) throw ConfigError("only lz = 0 is supported");
    }

    double n0d() const { return static_cast<double>(n0); }
    double n0_pow4() const { double n = n0d(); return n * n * n * n; }

    // Resonance condition: omega n0^3 = 1.
    double omega() const { double n = n0d(); return 1.0 / (n * n * n); }
    double period_au() const { return 2.0 * M_PI / omega(); }

    double microwave_field_au() const { return f0 / n0_pow4(); }
    double static_field_au() const { return fs0 / n0_pow4(); }

    double microwave_field_v_per_cm() const { return microwave_field_au() * kFieldAuInVPerCm; }
    double static_field_v_per_cm() const { return static_field_au() * kFieldAuInVPerCm; }
    // omega is an energy in hartree (hbar = 1); nu = E/h with 1 hartree/h = kFreqAuInGHz.
    double microwave_frequency_ghz() const { return omega() * kFreqAuInGHz; }

    FieldConfig with_f0(double v) const { FieldConfig c = *this; c.f0 = v; return c; }
    FieldConfig with_fs0(double v) const { FieldConfig c = *this; c.fs0 = v; return c; }
};

inline double scaled_from_atomic_field(double field_au, int n0) {
    double n = static_cast<double>(n0);
    return field_au * (n * n * n * n);
}

}  // namespace ndwp
