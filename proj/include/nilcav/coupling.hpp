#pragma once

// First- and second-order drive integrals for a piecewise-constant schedule.
//
// For atom n with a_n = omega_cavity + omega_n and b_n = omega_cavity - omega_n,
// drive u_n(t) = coupling_n(t) * amplitude(t):
//
//   linear(n)      = i * exp(-i a_n T) * Int_0^T u_n(tau) exp(i a_n tau) dtau
//   bilinear(n,m)  = exp(-i T (omega_n + omega_m)) *
//                    Int_0^T dtau u_m(tau) exp(-i b_m tau) *
//                      Int_0^tau dtheta u_n(theta) exp(i a_n theta)
//
// All segment integrals are evaluated in closed form with small-argument
// series so that near-resonant and far-detuned segments are equally accurate.

#include <complex>
#include <vector>

#include "nilcav/schedule.hpp"

namespace nilcav {

using Cx = std::complex<double>;

// An atom counts as resonant when |omega_cavity + omega_atom| * T <= 0.1.
inline constexpr double kResonancePhaseThreshold = 0.1;

// Default guard on the excitation proxy sum(|linear|^2) + sum(|bilinear|^2).
inline constexpr double kDefaultExcitationBound = 0.2;

struct CouplingCoefficients {
    int num_atoms = 0;
    std::vector<Cx> linear;                 // size N
    std::vector<std::vector<Cx>> bilinear;  // N x N, ordered (inner, outer)
    double excitation_proxy = 0.0;          // sum |linear|^2 + sum_{n<m} |pair|^2
    bool within_weak_excitation = true;

    // Symmetric combination that actually enters a joint state on the
    // pair (n, m); the antisymmetric remainder never contributes.
    Cx pair_sum(int n, int m) const;
    double antisymmetric_norm() const;  // Frobenius norm of (B - B^T)/2
};

// Evaluate every coefficient for the schedule.  `excitation_bound` controls
// the within_weak_excitation flag only; no error is thrown for strong drives.
CouplingCoefficients integrate_coefficients(
    const ControlSchedule& schedule,
    double excitation_bound = kDefaultExcitationBound);

// Oracle-facing helper: the physically evolved state carries the opposite
// sign on both exponent blocks relative to the raw integrals above, i.e. the
// generator applied to the vacuum is  -adag*sum_n linear_n sigma_n^+
// - sum_{n<m} pair_sum(n,m) sigma_n^+ sigma_m^+.  This returns a copy with
// every entry negated so analytic states can be compared against dense
// time evolution directly.
CouplingCoefficients negated(const CouplingCoefficients& c);

struct AtomResonance {
    double phase_turn = 0.0;   // |omega_cavity + omega_atom| * total duration
    bool resonant = false;
    double mean_drive = 0.0;   // time-averaged |coupling * amplitude|
};

struct ResonanceReport {
    std::vector<AtomResonance> atoms;
    // Predicted |bilinear(n,m)| / (|linear(n)| * T * mean drive) scale: the
    // outer-atom oscillation at omega_cavity - omega_m suppresses the pair
    // integral by roughly mean_drive_m / |omega_cavity - omega_m|.
    std::vector<std::vector<double>> pair_suppression;
};

ResonanceReport resonance_report(const ControlSchedule& schedule);

// --- Schedule inversion -----------------------------------------------------

// A window exposes one adjustable real amplitude; the atoms listed are driven
// with unit coupling during the window, everything else is off.
struct ScheduleWindow {
    double duration = 0.0;
    std::vector<int> atoms;  // 0-based atom indices active in this window
};

struct SolveOptions {
    int max_iterations = 200;
    double tolerance = 1e-12;          // relative residual target
    double condition_limit = 1e12;     // beyond this -> SingularSystem
};

struct SolveResult {
    ControlSchedule schedule;
    double residual_norm = 0.0;
    int iterations = 0;
};

// Finds window amplitudes so that integrate_coefficients(schedule) matches
// `target` in every linear entry and every symmetrized pair sum.  Throws
// InfeasibleProtocol when there are fewer windows than targeted coefficients
// and SingularSystem when the local linearization becomes numerically rank
// deficient (condition number above options.condition_limit).
SolveResult solve_schedule(const CouplingCoefficients& target,
                           double omega_cavity,
                           const std::vector<double>& omega_atoms,
                           const std::vector<ScheduleWindow>& windows,
                           const SolveOptions& options = {});

}  // namespace nilcav
