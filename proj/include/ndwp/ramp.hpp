#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ndwp/units.hpp"

namespace ndwp::dynamics {

enum class SegmentKind { sin2, linear, hold };
enum class RampField { f0, fs0 };

struct RampSegment {
    SegmentKind kind = SegmentKind::hold;
    RampField field = RampField::f0;
    double t_start = 0.0;  // in microwave periods
    double t_end = 0.0;
    double v_start = 0.0;
    double v_end = 0.0;
};

/// Time profiles of the scaled field amplitudes, built from named segments.
/// Times are in microwave periods; values before the first segment hold the
/// first value, values after the last hold the last.
struct RampSchedule {
    std::vector<RampSegment> segments;

    double duration() const {
        double t = 0.0;
        for (const auto& s : segments) t = std::max(t, s.t_end);
        return t;
    }

    void validate() const {
        double prev_end_f0 = -1.0, prev_end_fs0 = -1.0;
        double prev_val_f0 = -1.0, prev_val_fs0 = -1.0;
        for (const auto& s : segments) {
            if (!(s.t_end > s.t_start)) throw ConfigError("ramp segment must have t_end > t_start");
            if (s.v_start < 0.0 || s.v_end < 0.0) throw ConfigError("field amplitudes must be >= 0");
            double& prev_end = (s.field == RampField::f0) ? prev_end_f0 : prev_end_fs0;
            double& prev_val = (s.field == RampField::f0) ? prev_val_f0 : prev_val_fs0;
            if (prev_end >= 0.0) {
                if (s.t_start < prev_end - 1e-12) throw ConfigError("ramp segments overlap");
                if (std::abs(s.t_start - prev_end) < 1e-12 &&
                    std::abs(s.v_start - prev_val) > 1e-12)
                    throw ConfigError("field value jumps across a segment boundary");
            }
            prev_end = s.t_end;
            prev_val = s.v_end;
        }
        if (segments.empty()) throw ConfigError("ramp schedule is empty");
    }

    double value(RampField field, double t_periods) const {
        double v = 0.0;
        bool seen = false;
        for (const auto& s : segments) {
            if (s.field != field) continue;
            if (!seen && t_periods <= s.t_start) return s.v_start;
            seen = true;
            if (t_periods >= s.t_end) {
                v = s.v_end;
                continue;
            }
            if (t_periods >= s.t_start) {
                const double x = (t_periods - s.t_start) / (s.t_end - s.t_start);
                switch (s.kind) {
                    case SegmentKind::hold: return s.v_start;
                    case SegmentKind::linear: return s.v_start + (s.v_end - s.v_start) * x;
                    case SegmentKind::sin2: {
                        const double w = std::sin(0.5 * M_PI * x);
                        return s.v_start + (s.v_end - s.v_start) * w * w;
                    }
                }
            }
        }
        return v;
    }

    double f0_at(double t_periods) const { return value(RampField::f0, t_periods); }
    double fs0_at(double t_periods) const { return value(RampField::fs0, t_periods); }
};

/// Microwave turn-on F0(t) = F0max sin^2(pi t / 2 T1): quadratic start,
/// full strength at t = T1, held afterwards. The static field is held fixed.
inline RampSchedule schedule_sin2_turn_on(double f0_max, double t1_periods, double fs0_hold,
                                          double tail_periods = 0.0) {
    if (!(t1_periods > 0.0)) throw ConfigError("turn-on time must be positive");
    RampSchedule s;
    s.segments.push_back({SegmentKind::sin2, RampField::f0, 0.0, t1_periods, 0.0, f0_max});
    const double t_end = t1_periods + std::max(tail_periods, 0.0);
    if (tail_periods > 0.0)
        s.segments.push_back({SegmentKind::hold, RampField::f0, t1_periods, t_end, f0_max, f0_max});
    s.segments.push_back({SegmentKind::hold, RampField::fs0, 0.0, t_end, fs0_hold, fs0_hold});
    s.validate();
    return s;
}

/// Piecewise-linear static turn-off from breakpoints (t in periods, Fs0).
inline RampSchedule schedule_static_turn_off(const std::vector<std::pair<double, double>>& breakpoints,
                                             double f0_hold) {
    if (breakpoints.size() < 2) throw ConfigError("turn-off needs at least two breakpoints");
    RampSchedule s;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i + 1].first > breakpoints[i].first))
            throw ConfigError("turn-off breakpoints must increase in time");
        s.segments.push_back({SegmentKind::linear, RampField::fs0, breakpoints[i].first,
                              breakpoints[i + 1].first, breakpoints[i].second,
                              breakpoints[i + 1].second});
    }
    const double t_end = breakpoints.back().first;
    s.segments.push_back({SegmentKind::hold, RampField::f0, breakpoints.front().first, t_end,
                          f0_hold, f0_hold});
    s.validate();
    return s;
}

/// The circularization profile: slow descent through the bifurcation
/// (0.003 -> 0.0024 over 2400 periods), then fast to zero over 600 periods.
inline RampSchedule schedule_circularize(double f0_hold = 0.015, double tail_periods = 0.0) {
    auto s = schedule_static_turn_off({{0.0, 0.003}, {2400.0, 0.0024}, {3000.0, 0.0}}, f0_hold);
    if (tail_periods > 0.0) {
        s.segments.push_back({SegmentKind::hold, RampField::fs0, 3000.0, 3000.0 + tail_periods, 0.0, 0.0});
        s.segments.push_back({SegmentKind::hold, RampField::f0, 3000.0, 3000.0 + tail_periods,
                              f0_hold, f0_hold});
        s.validate();
    }
    return s;
}

}  // namespace ndwp::dynamics
