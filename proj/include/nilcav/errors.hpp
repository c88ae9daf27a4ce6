#pragma once

#include <stdexcept>
#include <string>

namespace nilcav {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two polynomials with incompatible atom counts / photon caps were combined.
struct DimensionMismatch : Error {
    using Error::Error;
};

// A product produced a photon power above the cap and truncation was not enabled.
struct PhotonCapOverflow : Error {
    using Error::Error;
};

// Operation required a particular constant/vacuum coefficient (e.g. log of a
// polynomial whose vacuum amplitude is zero).
struct BadVacuumAmplitude : Error {
    using Error::Error;
};

// A linear system or matrix inversion was singular / numerically degenerate.
struct SingularSystem : Error {
    double condition_number;
    explicit SingularSystem(const std::string& what, double cond)
        : Error(what), condition_number(cond) {}
};

// Requested protocol target cannot be realized (rank deficiency, bad ratios, ...).
struct InfeasibleProtocol : Error {
    using Error::Error;
};

// Fock-space cutoff too small for the requested operation.
struct CutoffInadequate : Error {
    using Error::Error;
};

// Configuration file problems (unknown keys, schema violations, bad values).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace nilcav
