#pragma once

// Dense ground-truth simulator on (truncated Fock) x (2^N atomic) space:
// full Schroedinger propagation of the counter-rotating drive Hamiltonian
//   H = w_c adag a + sum_n (w_n/2) sigma_n^z
//       + sum_n u_n(t) (sigma_n^+ + sigma_n^-)(adag + a)
// by per-segment Hermitian eigendecomposition (exact for piecewise-constant
// drives), plus exact displacement / squeezing / Kerr field operators.
// Every closed form in the library is cross-checked against this module.

#include <Eigen/Dense>
#include <cstdint>

#include "nilcav/polynomial.hpp"
#include "nilcav/schedule.hpp"

namespace nilcav {

struct DenseState {
    int num_atoms = 0;
    int fock_cutoff = 0;            // Fock dimension (levels 0 .. cutoff-1)
    Eigen::VectorXcd amplitudes;    // index = fock * 2^num_atoms + atom_mask

    Eigen::Index index(int fock, uint64_t mask) const {
        return static_cast<Eigen::Index>(fock) *
                   (Eigen::Index{1} << num_atoms) +
               static_cast<Eigen::Index>(mask);
    }
    Cx amplitude(int fock, uint64_t mask) const {
        return amplitudes[index(fock, mask)];
    }
    double norm() const { return amplitudes.norm(); }
    double fock_population(int fock) const;
};

struct PropagationSettings {
    int fock_cutoff = 0;                    // 0 -> num_atoms + 6
    double unitarity_tolerance = 1e-9;      // norm drift guard
    double top_population_tolerance = 1e-8; // cutoff adequacy guard
    bool split_segments = false;            // halve every segment (step check)
};

DenseState vacuum_state(int num_atoms, int fock_cutoff);

// Exact propagation under the schedule; throws CutoffInadequate when the top
// Fock level accumulates population and Error on unitarity drift.
DenseState propagate(const ControlSchedule& schedule,
                     const PropagationSettings& settings = {});

// Multiply by exp(+i H0 T) with H0 = w_c adag a + sum_n (w_n/2) sigma_n^z,
// stripping the free rotation accumulated over the schedule.  Note the
// weak-drive coefficients (integrate_coefficients) describe the lab-frame
// state directly: their exp(-i a_n T) / exp(-i T (w_n + w_m)) prefactors are
// exactly the vacuum-relative free-rotation phases, so closed forms are
// compared against `propagate` output without this transformation.
DenseState to_interaction_picture(const DenseState& s,
                                  const ControlSchedule& schedule);

// Normalized dense vector for an expanded polynomial state: a monomial with
// photon power k contributes coeff * sqrt(k!) at Fock level k.
DenseState dense_from_polynomial(const NilpotentPolynomial& p, int fock_cutoff);

// Independent brute-force expansion: applies the operator series
// exp(adag*O + G) term by term to the dense vacuum vector (the generator is
// nilpotent, so the series terminates after num_atoms applications).
// Normalized.  Cross-validates both build_joint_state and exact_norm.
DenseState dense_exponential_apply(const std::vector<Cx>& linear,
                                   const std::vector<std::vector<Cx>>& pair_sums,
                                   int fock_cutoff);

// |<a|b>| / (|a| |b|); states may differ in cutoff (missing levels are zero).
double fidelity(const DenseState& a, const DenseState& b);

// --- exact field operators (identity on the atoms) -------------------------

DenseState displace(const DenseState& s, Cx lambda);
DenseState squeeze(const DenseState& s, double g, double t);
DenseState phase_rotate(const DenseState& s, double theta);  // exp(i theta n)

// Kerr-medium evolution in the laser rotating frame:
//   H = detuning * adag a + kappa * ((adag a)^2 + (adag + a) * eps_cubed)
// where detuning = omega_cavity - omega_laser and eps_cubed is the classical
// drive amplitude cubed.
DenseState kerr_evolve(const DenseState& s, double detuning, double kappa,
                       double eps_cubed, double t);

// Field-only Kerr propagator column entries <fock_out| U |fock_in>.
Eigen::MatrixXcd kerr_field_unitary(int fock_cutoff, double detuning,
                                    double kappa, double eps_cubed, double t);

// --- projection and comparison ---------------------------------------------

struct FockProjection {
    Eigen::VectorXcd atomic;  // normalized 2^N vector
    double probability = 0.0;
};

// Born projection onto Fock level d; probability below 1e-300 throws Error
// (impossible outcome).
FockProjection project_fock(const DenseState& s, int d);

// |<p|v>| for a photon-free polynomial against a normalized atomic vector.
double atomic_fidelity(const Eigen::VectorXcd& atomic,
                       const NilpotentPolynomial& p);

struct ProjectionComparison {
    double probability_dense = 0.0;
    double probability_analytic = 0.0;
    double probability_delta = 0.0;
    double fidelity = 0.0;
};

ProjectionComparison project_and_compare(const DenseState& dense, int d,
                                         const NilpotentPolynomial& analytic,
                                         double analytic_probability);

}  // namespace nilcav
