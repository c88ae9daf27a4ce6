#pragma once

// Joint atoms+field state produced by a weak drive: the expanded polynomial
// exp[adag*O + G]|vacuum> with O = sum_n linear_n sigma_n^+ and
// G = sum_{n<m} pair_sum(n,m) sigma_n^+ sigma_m^+, its exact norm, per-atom
// excitation probabilities, and the Gaussian determinant-ratio estimate of
// the squared norm.

#include <string>

#include "nilcav/coupling.hpp"
#include "nilcav/polynomial.hpp"

namespace nilcav {

struct JointState {
    NilpotentPolynomial polynomial;  // expanded, vacuum coefficient 1
    double norm = 1.0;               // exact_norm of `polynomial`
    CouplingCoefficients provenance;

    int num_atoms() const { return polynomial.num_atoms(); }
};

JointState build_joint_state(const CouplingCoefficients& c);

// sqrt( sum over monomials |coeff|^2 * (photon_power)! ); exact because
// distinct monomials address orthogonal atomic/Fock basis states and
// (adag)^k |0> has squared norm k!.
double exact_norm(const NilpotentPolynomial& p);

// Probability that `atom` is excited, computed exactly from the expansion.
double excitation_probability(const JointState& s, int atom);

// Expected fraction of excited atoms (mean excitation per atom).
double mean_excitation_fraction(const JointState& s);

// Determinant-ratio estimate |det M^-1 / det B| of the squared norm, using
// the Hermitian matrix M = [[v v*/2, G], [G*, conj(v v*)/2]] built from the
// coefficients, V = [[0, 1], [1, 0]] in N-blocks and B = [[V, V], [V, V - M^-1]].
// Diagnostic only: never used for downstream normalization.
double gaussian_norm(const CouplingCoefficients& c);

struct GaussianNormDiagnostic {
    double value = 0.0;         // |det M^-1 / det B|
    double signed_ratio = 0.0;  // real part of det M^-1 / det B
    double condition = 0.0;     // condition number of M
    double det_m_abs = 0.0;
    double det_b_abs = 0.0;
};

// Same computation with the intermediate quantities exposed for reports.
// Throws SingularSystem when cond(M) > 1e12 (notably the all-zero limit).
GaussianNormDiagnostic gaussian_norm_diagnostic(const CouplingCoefficients& c);

// Deterministic JSON summary: norm, excitation probabilities, proxy flags.
std::string state_summary_json(const JointState& s);

}  // namespace nilcav
