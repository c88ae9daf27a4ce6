#pragma once

// Piecewise-constant drive schedules: a classical field amplitude and
// per-atom coupling strengths over consecutive time segments, plus the
// cavity/atom frequencies.  All coupling coefficients are derived from these.

#include <complex>
#include <vector>

#include "nilcav/errors.hpp"

namespace nilcav {

struct ScheduleSegment {
    double duration = 0.0;
    double amplitude = 0.0;              // classical field envelope
    std::vector<double> couplings;       // per-atom coupling, size = num atoms
};

struct ControlSchedule {
    double omega_cavity = 0.0;
    std::vector<double> omega_atoms;
    std::vector<ScheduleSegment> segments;

    int num_atoms() const { return static_cast<int>(omega_atoms.size()); }
    double total_duration() const;
    void validate() const;  // throws DimensionMismatch on inconsistent sizes
};

}  // namespace nilcav
