#pragma once

// Sparse polynomials in N commuting nilpotent raising variables (one per
// two-level atom, s_n^2 = 0) and one photon raising variable with a hard
// power cap.  This is the workhorse representation for weak-excitation
// cavity states: a state is F({s_n}, p)|vacuum> and the "nilpotential"
// f = log F classifies its entanglement.

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nilcav/errors.hpp"

namespace nilcav {

using Cx = std::complex<double>;

// Coefficients below this magnitude are dropped on store.
inline constexpr double kPruneEpsilon = 1e-300;
// Zero tolerance used by the separability test on nilpotential coefficients.
inline constexpr double kSeparabilityTolerance = 1e-12;

// One product term: a set of distinct atom indices (bit n = atom n, 0-based)
// and a photon power.
struct Monomial {
    std::uint64_t atoms = 0;
    int photon_power = 0;

    int atom_degree() const;
    std::vector<int> atom_list() const;  // ascending indices

    bool operator==(const Monomial& o) const {
        return atoms == o.atoms && photon_power == o.photon_power;
    }
};

// Canonical order: ascending atom-index lists compared lexicographically,
// then photon power.  Used for serialization and deterministic iteration.
struct MonomialLess {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

class NilpotentPolynomial {
  public:
    using TermMap = std::map<Monomial, Cx, MonomialLess>;

    NilpotentPolynomial() = default;  // empty polynomial over zero atoms
    NilpotentPolynomial(int num_atoms, int photon_cap);

    int num_atoms() const { return num_atoms_; }
    int photon_cap() const { return photon_cap_; }

    // Coefficient access; set_coeff prunes magnitudes below kPruneEpsilon.
    Cx coeff(const Monomial& m) const;
    void set_coeff(const Monomial& m, Cx value);
    void add_coeff(const Monomial& m, Cx value);

    const TermMap& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }

    Cx vacuum_coeff() const { return coeff(Monomial{}); }

    // Largest photon power / atom degree present (0 for the empty polynomial).
    int max_photon_power() const;
    int max_atom_degree() const;

    NilpotentPolynomial& operator*=(Cx scale);

    bool same_shape(const NilpotentPolynomial& o) const {
        return num_atoms_ == o.num_atoms_ && photon_cap_ == o.photon_cap_;
    }

  private:
    int num_atoms_ = 0;
    int photon_cap_ = 0;
    TermMap terms_;

    void check_monomial(const Monomial& m) const;
};

enum class CombineMode { add, mul };

// Sum or product of two polynomials over the same variables.  Products drop
// any term with a repeated atom (nilpotency).  A product term whose photon
// power exceeds the cap throws PhotonCapOverflow unless `truncate` is set,
// in which case it is discarded; because all variables only raise, dropped
// terms can never feed back into retained ones, so truncation is exact for
// every monomial within the cap.
NilpotentPolynomial poly_combine(const NilpotentPolynomial& a,
                                 const NilpotentPolynomial& b,
                                 CombineMode mode, bool truncate = false);

// exp(f) as a terminating series; requires f to have no constant term.
NilpotentPolynomial poly_exp(const NilpotentPolynomial& f);

// log(F) as a terminating series (principal branch for the constant part);
// requires a nonzero vacuum coefficient.
NilpotentPolynomial poly_log(const NilpotentPolynomial& F);

// Bipartition of the atom set: part A as a bit mask; part B is the rest.
struct Bipartition {
    std::uint64_t part_a = 0;
    static Bipartition first_k(int k);  // atoms 0..k-1
};

// True iff no monomial of `f` with |coeff| > kSeparabilityTolerance touches
// both sides of the cut.  `f` must be photon-free (a nilpotential).
bool is_separable(const NilpotentPolynomial& f, const Bipartition& cut);

// ---------------------------------------------------------------------------
// Collective (permutation-symmetric) form over a two-ensemble split.

// beta_{k,l} coefficients of (S_A)^k (S_B)^l where S_X is the collective
// raising operator of ensemble X and (S_X)^k = k! * sum over k-subsets.
struct CollectivePolynomial {
    int n_a = 0;
    int n_b = 0;
    std::map<std::pair<int, int>, Cx> beta;

    Cx coeff(int k, int l) const;
};

// Requires `p` photon-free and symmetric under atom permutations within
// each part (atoms 0..n_a-1 form part A).  Symmetry is checked to 1e-12.
CollectivePolynomial to_collective(const NilpotentPolynomial& p, int n_a);

// Exact inverse of to_collective.
NilpotentPolynomial expand_collective(const CollectivePolynomial& cp);

// ---------------------------------------------------------------------------
// Deterministic text serialization.
//
//   # atoms=<N> photon_cap=<K>
//   <coeff_re> <coeff_im> <photon_power> <atom indices, 1-based, ascending>
//
// Terms appear in canonical monomial order; floats use 17 significant digits.
std::string poly_to_text(const NilpotentPolynomial& p);
NilpotentPolynomial poly_from_text(const std::string& text);

// 17-significant-digit float formatting used by every text/CSV emitter.
std::string format_double(double v);

}  // namespace nilcav
