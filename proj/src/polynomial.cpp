#include "nilcav/polynomial.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace nilcav {

int Monomial::atom_degree() const { return std::popcount(atoms); }

std::vector<int> Monomial::atom_list() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(atom_degree()));
    std::uint64_t m = atoms;
    while (m) {
        int b = std::countr_zero(m);
        out.push_back(b);
        m &= m - 1;
    }
    return out;
}

bool MonomialLess::operator()(const Monomial& a, const Monomial& b) const {
    std::uint64_t ma = a.atoms, mb = b.atoms;
    while (ma && mb) {
        int la = std::countr_zero(ma);
        int lb = std::countr_zero(mb);
        if (la != lb) return la < lb;
        ma &= ma - 1;
        mb &= mb - 1;
    }
    if (ma != mb) return ma == 0 ? mb != 0 : false;  // shorter list first
    return a.photon_power < b.photon_power;
}

NilpotentPolynomial::NilpotentPolynomial(int num_atoms, int photon_cap)
    : num_atoms_(num_atoms), photon_cap_(photon_cap) {
    if (num_atoms < 0 || num_atoms > 63)
        throw DimensionMismatch("atom count must be in [0, 63]");
    if (photon_cap < 0) throw DimensionMismatch("photon cap must be >= 0");
}

void NilpotentPolynomial::check_monomial(const Monomial& m) const {
    if (num_atoms_ < 64 && (m.atoms >> num_atoms_) != 0)
        throw DimensionMismatch("monomial uses atom index beyond num_atoms");
    if (m.photon_power < 0 || m.photon_power > photon_cap_)
        throw PhotonCapOverflow("monomial photon power outside [0, cap]");
}

Cx NilpotentPolynomial::coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Cx{0.0, 0.0} : it->second;
}

void NilpotentPolynomial::set_coeff(const Monomial& m, Cx value) {
    check_monomial(m);
    if (std::abs(value) < kPruneEpsilon) {
        terms_.erase(m);
    } else {
        terms_[m] = value;
    }
}

void NilpotentPolynomial::add_coeff(const Monomial& m, Cx value) {
    check_monomial(m);
    auto it = terms_.find(m);
    Cx next = (it == terms_.end() ? Cx{} : it->second) + value;
    if (std::abs(next) < kPruneEpsilon) {
        if (it != terms_.end()) terms_.erase(it);
    } else {
        terms_[m] = next;
    }
}

int NilpotentPolynomial::max_photon_power() const {
    int r = 0;
    for (const auto& [m, c] : terms_) r = std::max(r, m.photon_power);
    return r;
}

int NilpotentPolynomial::max_atom_degree() const {
    int r = 0;
    for (const auto& [m, c] : terms_) r = std::max(r, m.atom_degree());
    return r;
}

NilpotentPolynomial& NilpotentPolynomial::operator*=(Cx scale) {
    if (std::abs(scale) < kPruneEpsilon) {
        *this = NilpotentPolynomial(num_atoms_, photon_cap_);
        return *this;
    }
    for (auto& [m, c] : terms_) c *= scale;
    return *this;
}

NilpotentPolynomial poly_combine(const NilpotentPolynomial& a,
                                 const NilpotentPolynomial& b,
                                 CombineMode mode, bool truncate) {
    if (!a.same_shape(b))
        throw DimensionMismatch("polynomials have different atom counts or photon caps");
    NilpotentPolynomial out(a.num_atoms(), a.photon_cap());
    if (mode == CombineMode::add) {
        for (const auto& [m, c] : a.terms()) out.add_coeff(m, c);
        for (const auto& [m, c] : b.terms()) out.add_coeff(m, c);
        return out;
    }
    for (const auto& [ma, ca] : a.terms()) {
        for (const auto& [mb, cb] : b.terms()) {
            if (ma.atoms & mb.atoms) continue;  // repeated atom raises twice: 0
            int p = ma.photon_power + mb.photon_power;
            if (p > a.photon_cap()) {
                if (truncate) continue;
                throw PhotonCapOverflow(
                    "product photon power " + std::to_string(p) +
                    " exceeds cap " + std::to_string(a.photon_cap()));
            }
            out.add_coeff(Monomial{ma.atoms | mb.atoms, p}, ca * cb);
        }
    }
    return out;
}

NilpotentPolynomial poly_exp(const NilpotentPolynomial& f) {
    if (std::abs(f.vacuum_coeff()) != 0.0)
        throw BadVacuumAmplitude("poly_exp requires a zero constant term");
    NilpotentPolynomial result(f.num_atoms(), f.photon_cap());
    result.set_coeff(Monomial{}, 1.0);
    NilpotentPolynomial power = result;  // f^0
    // Every monomial of f has combined degree >= 1, so the series terminates
    // at k = num_atoms + photon_cap.
    const int kmax = f.num_atoms() + f.photon_cap();
    for (int k = 1; k <= kmax; ++k) {
        power = poly_combine(power, f, CombineMode::mul, /*truncate=*/true);
        power *= Cx{1.0 / k, 0.0};
        if (power.empty()) break;
        result = poly_combine(result, power, CombineMode::add);
    }
    return result;
}

NilpotentPolynomial poly_log(const NilpotentPolynomial& F) {
    Cx f0 = F.vacuum_coeff();
    if (std::abs(f0) < kPruneEpsilon)
        throw BadVacuumAmplitude(
            "poly_log requires a nonzero vacuum amplitude; apply local "
            "operations first to lift it");
    NilpotentPolynomial x = F;
    x *= Cx{1.0, 0.0} / f0;
    x.add_coeff(Monomial{}, Cx{-1.0, 0.0});  // x = F/F0 - 1, zero constant
    NilpotentPolynomial result(F.num_atoms(), F.photon_cap());
    result.set_coeff(Monomial{}, std::log(f0));
    NilpotentPolynomial power(F.num_atoms(), F.photon_cap());
    power.set_coeff(Monomial{}, 1.0);
    const int kmax = F.num_atoms() + F.photon_cap();
    double sign = 1.0;
    for (int k = 1; k <= kmax; ++k) {
        power = poly_combine(power, x, CombineMode::mul, /*truncate=*/true);
        if (power.empty()) break;
        NilpotentPolynomial term = power;
        term *= Cx{sign / k, 0.0};
        result = poly_combine(result, term, CombineMode::add);
        sign = -sign;
    }
    return result;
}

Bipartition Bipartition::first_k(int k) {
    Bipartition b;
    b.part_a = (k >= 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << k) - 1);
    return b;
}

bool is_separable(const NilpotentPolynomial& f, const Bipartition& cut) {
    if (f.max_photon_power() != 0)
        throw DimensionMismatch("separability test requires a photon-free nilpotential");
    const std::uint64_t full = (f.num_atoms() >= 64)
                                   ? ~std::uint64_t{0}
                                   : ((std::uint64_t{1} << f.num_atoms()) - 1);
    const std::uint64_t a = cut.part_a & full;
    const std::uint64_t b = full & ~a;
    if (a == 0 || b == 0)
        throw DimensionMismatch("bipartition must split the atoms into two nonempty parts");
    for (const auto& [m, c] : f.terms()) {
        if (std::abs(c) <= kSeparabilityTolerance) continue;
        if ((m.atoms & a) && (m.atoms & b)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

Cx CollectivePolynomial::coeff(int k, int l) const {
    auto it = beta.find({k, l});
    return it == beta.end() ? Cx{} : it->second;
}

namespace {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

}  // namespace

CollectivePolynomial to_collective(const NilpotentPolynomial& p, int n_a) {
    if (n_a <= 0 || n_a >= p.num_atoms())
        throw DimensionMismatch("ensemble split must leave both parts nonempty");
    if (p.max_photon_power() != 0)
        throw DimensionMismatch("collective form requires a photon-free polynomial");
    const int n_b = p.num_atoms() - n_a;
    const std::uint64_t mask_a = (std::uint64_t{1} << n_a) - 1;

    // Group coefficients by shape (k, l) and check permutation symmetry.
    std::map<std::pair<int, int>, Cx> rep;
    std::map<std::pair<int, int>, std::size_t> count;
    for (const auto& [m, c] : p.terms()) {
        int k = std::popcount(m.atoms & mask_a);
        int l = m.atom_degree() - k;
        auto key = std::make_pair(k, l);
        auto it = rep.find(key);
        if (it == rep.end()) {
            rep[key] = c;
        } else if (std::abs(c - it->second) > 1e-12 * std::max(1.0, std::abs(it->second))) {
            throw DimensionMismatch(
                "polynomial is not permutation-symmetric within the ensembles");
        }
        ++count[key];
    }
    CollectivePolynomial cp;
    cp.n_a = n_a;
    cp.n_b = n_b;
    for (const auto& [key, c] : rep) {
        auto [k, l] = key;
        double expected = binomial(n_a, k) * binomial(n_b, l);
        if (static_cast<double>(count[key]) != expected)
            throw DimensionMismatch(
                "polynomial is not permutation-symmetric within the ensembles "
                "(missing monomials of a populated shape)");
        cp.beta[key] = c / (factorial(k) * factorial(l));
    }
    return cp;
}

NilpotentPolynomial expand_collective(const CollectivePolynomial& cp) {
    const int n = cp.n_a + cp.n_b;
    NilpotentPolynomial out(n, 0);
    const std::uint64_t mask_a = (std::uint64_t{1} << cp.n_a) - 1;
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t s = 0; s <= full; ++s) {
        int k = std::popcount(s & mask_a);
        int l = std::popcount(s) - k;
        Cx b = cp.coeff(k, l);
        if (b == Cx{}) continue;
        out.add_coeff(Monomial{s, 0}, b * factorial(k) * factorial(l));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string poly_to_text(const NilpotentPolynomial& p) {
    std::ostringstream os;
    os << "# atoms=" << p.num_atoms() << " photon_cap=" << p.photon_cap() << "\n";
    for (const auto& [m, c] : p.terms()) {
        os << format_double(c.real()) << ' ' << format_double(c.imag()) << ' '
           << m.photon_power;
        for (int a : m.atom_list()) os << ' ' << (a + 1);
        os << "\n";
    }
    return os.str();
}

NilpotentPolynomial poly_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int atoms = -1, cap = -1;
    bool have_header = false;
    NilpotentPolynomial out(0, 0);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (std::sscanf(line.c_str(), "# atoms=%d photon_cap=%d", &atoms, &cap) == 2) {
                out = NilpotentPolynomial(atoms, cap);
                have_header = true;
            }
            continue;
        }
        if (!have_header)
            throw ConfigError("polynomial text is missing the '# atoms=... photon_cap=...' header");
        std::istringstream ls(line);
        double re, im;
        int photon;
        if (!(ls >> re >> im >> photon))
            throw ConfigError("malformed polynomial term line: " + line);
        std::uint64_t mask = 0;
        int idx;
        while (ls >> idx) {
            if (idx < 1 || idx > atoms)
                throw ConfigError("atom index out of range in term line: " + line);
            mask |= std::uint64_t{1} << (idx - 1);
        }
        out.add_coeff(Monomial{mask, photon}, Cx{re, im});
    }
    if (!have_header)
        throw ConfigError("polynomial text is missing the '# atoms=... photon_cap=...' header");
    return out;
}

}  // namespace nilcav
