#pragma once

// Canonical form of a photon-free atomic state under local (per-atom) SU(2)
// rotations: coordinate ascent on the vacuum amplitude with random restarts.
// The canonical state maximizes |<vacuum|state>|; its log is the tanglemeter,
// the local-unitary entanglement classifier of the state.

#include <array>
#include <cstdint>
#include <vector>

#include "nilcav/polynomial.hpp"

namespace nilcav {

// Row-major 2x2 complex matrix acting on one atom's (|0>, |1>) amplitudes.
using LocalUnitary = std::array<Cx, 4>;

struct CanonicalizeOptions {
    int restarts = 8;
    int max_sweeps = 500;
    // Stop when every per-atom update in a sweep mixes less than this into
    // the vacuum amplitude (rotations are identity to this precision).
    double tolerance = 1e-13;
    std::uint64_t seed = 1;
};

struct CanonicalForm {
    NilpotentPolynomial tanglemeter;        // log of the vacuum-normalized state
    std::vector<LocalUnitary> local_unitaries;  // input -> canonical, per atom
    double vacuum_probability = 0.0;        // |<O|canonical>|^2, state normalized
    bool converged = false;
    int sweeps = 0;
};

// Rotate atom `n` of a photon-free state polynomial by U (amplitude
// convention: (a0', a1') = U (a0, a1)).
NilpotentPolynomial apply_local_unitary(const NilpotentPolynomial& p, int n,
                                        const LocalUnitary& u);

CanonicalForm canonicalize(const NilpotentPolynomial& state,
                           const CanonicalizeOptions& opts = {});

}  // namespace nilcav
