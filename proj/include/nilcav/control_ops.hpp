#pragma once

// Field-manipulation + detection primitives on a joint state.  Each one ends
// in a projective photon measurement and returns the post-selected atomic
// state with its success probability.  Closed forms are used for the atomic
// state; probabilities for the displacement/squeezing paths are defined by
// the exact dense field operators (the literature bookkeeping prefactors are
// not normalized), with the closed-form value reported alongside.

#include <limits>
#include <string>

#include "nilcav/joint_state.hpp"
#include "nilcav/oracle.hpp"

namespace nilcav {

struct PostSelectedState {
    NilpotentPolynomial polynomial;  // photon-free, normalized
    double success_probability = 0.0;
    // Closed-form probability where one exists (exact for measure/displace/
    // squeeze via the vacuum-projection kernels); NaN when not applicable.
    double success_probability_formula =
        std::numeric_limits<double>::quiet_NaN();
    std::string primitive;
};

// log(polynomial / vacuum coefficient); throws BadVacuumAmplitude when the
// vacuum amplitude is below 1e-12.
NilpotentPolynomial nilpotential_of(const PostSelectedState& s);

PostSelectedState measure_photon_number(const JointState& s, int d);

PostSelectedState displace_then_vacuum(const JointState& s, Cx lambda);

struct SqueezeParams {
    double g = 0.0;  // real squeezing rate
    double t = 0.0;  // duration

    double eta() const { return g * t; }
    // Bookkeeping prefactor sqrt(2*pi)/sqrt(1 + exp(2gt)); not a probability
    // amplitude (it is sqrt(pi) at t = 0).
    double r() const;
    // Vacuum-projection kernel 2*tanh(gt) - gt; valid to O((gt)^3).
    double zeta() const;
    // Exact kernel tanh(2gt)/2 from <0|exp[(g a^2 - g adag^2)t] exp(adag O)|0>
    // = sech(2gt)^{1/2} exp[ (tanh(2gt)/2) O^2 ].
    double zeta_exact() const;
};

PostSelectedState squeeze_then_vacuum(const JointState& s,
                                      const SqueezeParams& p);
// Same operation with the exact kernel zeta_exact (reference for validation).
PostSelectedState squeeze_then_vacuum_exact(const JointState& s,
                                            const SqueezeParams& p);

struct KerrParams {
    double kappa = 0.0;            // nonlinearity
    double laser_amplitude = 0.0;  // classical drive amplitude
    double omega_laser = 0.0;
    int photon_gap = 0;            // N: the targeted |0> <-> |N> transition
    double omega_cavity = 0.0;     // derived: omega_laser - kappa * photon_gap

    // Enforces the multiphoton resonance (omega_cavity - omega_laser) * N
    // + kappa * N^2 = 0 by construction.
    KerrParams(double kappa, double laser_amplitude, double omega_laser,
               int photon_gap);

    double detuning() const { return omega_cavity - omega_laser; }
    double drive_cubed() const;  // laser_amplitude^3

    // Effective |0> -> |N> matrix element from N-th order degenerate
    // perturbation theory through the equally spaced Kerr ladder:
    //   kappa * amplitude^{3N} * sqrt(N!) / ((N-1)!)^2.
    // Throws InfeasibleProtocol when omega_laser/kappa collides with an
    // integer in 1..N (intermediate level becomes resonant).
    double v0n() const;
    // The formula as printed in the source derivation,
    // amplitude^{3N} / (sqrt(N!) prod_{n=1..N} (n - omega_laser/kappa));
    // emitted in the validation report for comparison (NaN at poles).
    double v0n_printed() const;
};

// Projects onto the field state B|0> + C|N> (normalized internally); the
// atomic result is  conj(B) * shell_0 + conj(C) * sqrt(N!) * shell_N.
PostSelectedState kerr_project(const JointState& s, const KerrParams& k,
                               Cx b_coeff, Cx c_coeff);

struct KerrTiming {
    double v0n = 0.0;
    double t_kerr = 0.0;
};

// Solves tan(t * V0N) = target_ratio on the principal branch with the
// smallest nonnegative t.
KerrTiming kerr_dynamics_params(const KerrParams& k, double target_ratio);

}  // namespace nilcav
