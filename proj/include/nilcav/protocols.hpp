#pragma once

// End-to-end preparation protocols: Dicke states by photon counting with
// success-probability sweeps, GHZ via the two-component field projection
// (symbolic and Kerr-dynamics paths), W as the single-excitation Dicke case,
// and two-ensemble entanglement via squeezed-vacuum detection.

#include <string>
#include <utility>
#include <vector>

#include "nilcav/control_ops.hpp"

namespace nilcav {

enum class TargetKind { ghz, w, dicke, custom };

struct TargetState {
    TargetKind kind = TargetKind::custom;
    int num_atoms = 0;
    int excitations = 0;         // Dicke M (W is M = 1)
    NilpotentPolynomial custom;  // used when kind == custom

    static TargetState ghz(int n);
    static TargetState w(int n);
    static TargetState dicke(int n, int m);
    static TargetState custom_state(NilpotentPolynomial p);
};

// Normalized photon-free polynomial with positive real amplitudes.
NilpotentPolynomial target_polynomial(const TargetState& t);

// |<a|b>| for photon-free polynomials, each normalized internally.
double polynomial_fidelity(const NilpotentPolynomial& a,
                           const NilpotentPolynomial& b);

double fidelity_to(const PostSelectedState& s, const TargetState& t);

// --- Dicke ------------------------------------------------------------------

enum class ProbabilityFormula { paper, exact };

// Probability of detecting d = M photons from the symmetric resonant state
// exp[c adag sum_n sigma_n^+]|O>.  `exact` is the first-principles value
//   [N!/(N-M)!] x^M / sum_{i=0..N} [N!/(N-i)!] x^i ,  x = |c|^2;
// `paper` evaluates the printed variant (weights i! N!/(N-i)!, sum from 1),
// which disagrees with the expansion and is kept for the errata report.
double dicke_success_probability(int n, int m, Cx c, ProbabilityFormula f);

// Symmetric resonant state post-selected on d = m photons.
PostSelectedState dicke_via_measurement(int n, int m, Cx c);

struct DickeSweepRow {
    int num_atoms = 0;
    int excitations = 0;
    double c_abs = 0.0;
    double p_paper = 0.0;
    double p_exact = 0.0;
};

struct DickeMaximum {
    int excitations = 0;
    double c_at_max = 0.0;
    double p_max = 0.0;
    bool interior = false;  // argmax away from both grid ends
};

struct DickeSweep {
    std::vector<DickeSweepRow> rows;      // ordered by (m, grid index)
    std::vector<DickeMaximum> maxima;     // per requested m, exact formula
};

DickeSweep dicke_sweep(int n, const std::vector<int>& excitations,
                       const std::vector<double>& c_grid, int threads = 1);

// --- reports ----------------------------------------------------------------

struct ProtocolReport {
    std::string protocol;
    double success_probability = 0.0;
    double fidelity = 0.0;
    std::vector<std::pair<std::string, double>> metrics;  // ordered

    void add(const std::string& name, double value) {
        metrics.emplace_back(name, value);
    }
    double metric(const std::string& name) const;  // throws if absent
};

// --- GHZ ---------------------------------------------------------------------

// Symbolic path only: choose B, C so conj(B) = conj(C) sqrt(N!) prod I_n and
// project.  Works for arbitrary nonzero complex I_n.
ProtocolReport ghz_symbolic(const std::vector<Cx>& linear);

struct GhzOptions {
    bool run_dynamic = true;
    int fock_cutoff = 0;  // 0 -> photon_gap + 6 for the field propagation
};

// Full protocol: symbolic projection plus the Kerr-dynamics realization
// (timing from kerr_dynamics_params, phase pre-rotation, dense propagation,
// vacuum detection).  The dynamic path requires all I_n equal.
ProtocolReport ghz_protocol(const std::vector<Cx>& linear,
                            const KerrParams& kerr,
                            const GhzOptions& options = {});

// --- two ensembles -----------------------------------------------------------

struct TwoEnsembleReport {
    ProtocolReport report;
    CollectivePolynomial collective_nilpotential;
    bool entangled = false;
};

// Ensembles A and B of n_per atoms each, every atom coupled with amplitude mu
// (pair coefficients zero: resonant regime), squeezed then vacuum-detected.
TwoEnsembleReport two_ensemble_protocol(int n_per, Cx mu,
                                        const SqueezeParams& p);

}  // namespace nilcav
