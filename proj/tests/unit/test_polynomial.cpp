#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nilcav/polynomial.hpp"

using namespace nilcav;

namespace {

Monomial mono(std::uint64_t atoms, int photons = 0) {
    return Monomial{atoms, photons};
}

// Random polynomial with no constant term, suitable as an exp argument.
NilpotentPolynomial random_generator(std::mt19937_64& rng, int num_atoms,
                                     int photon_cap, bool with_photons) {
    std::uniform_real_distribution<double> coeff(-0.5, 0.5);
    std::uniform_int_distribution<int> photon(0, with_photons ? 2 : 0);
    NilpotentPolynomial f(num_atoms, photon_cap);
    const std::uint64_t full = (std::uint64_t{1} << num_atoms) - 1;
    std::uniform_int_distribution<std::uint64_t> atoms(0, full);
    for (int k = 0; k < 2 * num_atoms; ++k) {
        Monomial m{atoms(rng), photon(rng)};
        if (m.atoms == 0 && m.photon_power == 0) continue;  // keep f(0) = 0
        f.set_coeff(m, Cx{coeff(rng), coeff(rng)});
    }
    return f;
}

double max_coeff_delta(const NilpotentPolynomial& a,
                       const NilpotentPolynomial& b) {
    double delta = 0.0;
    for (const auto& [m, v] : a.terms()) delta = std::max(delta, std::abs(v - b.coeff(m)));
    for (const auto& [m, v] : b.terms()) delta = std::max(delta, std::abs(v - a.coeff(m)));
    return delta;
}

}  // namespace

TEST_CASE("monomials order by atom list then photon power") {
    MonomialLess less;
    CHECK(less(mono(0b0), mono(0b1)));          // vacuum before anything
    CHECK(less(mono(0b1), mono(0b10)));         // {1} < {2}
    CHECK(less(mono(0b11), mono(0b10)));        // {1,2} < {2} lexicographic
    CHECK(less(mono(0b11), mono(0b101)));       // {1,2} < {1,3}
    CHECK(less(mono(0b1, 0), mono(0b1, 1)));    // photon power breaks ties
    CHECK_FALSE(less(mono(0b1), mono(0b1)));
    CHECK(mono(0b101).atom_list() == std::vector<int>{0, 2});
    CHECK(mono(0b101).atom_degree() == 2);
}

TEST_CASE("coefficient store prunes tiny values and checks bounds") {
    NilpotentPolynomial p(2, 3);
    p.set_coeff(mono(0b1), Cx{0.5, 0.0});
    CHECK(p.term_count() == 1);
    p.set_coeff(mono(0b1), Cx{0.0, 0.0});
    CHECK(p.term_count() == 0);
    p.add_coeff(mono(0b10, 2), Cx{0.0, 1.0});
    p.add_coeff(mono(0b10, 2), Cx{0.0, -1.0});
    CHECK(p.term_count() == 0);
    CHECK_THROWS_AS(p.set_coeff(mono(0b100), Cx{1.0, 0.0}), DimensionMismatch);
    CHECK_THROWS_AS(p.set_coeff(mono(0b1, 4), Cx{1.0, 0.0}), PhotonCapOverflow);
}

TEST_CASE("products respect nilpotency and the photon cap") {
    NilpotentPolynomial a(2, 2);
    a.set_coeff(mono(0), Cx{1.0, 0.0});
    a.set_coeff(mono(0b1, 1), Cx{0.5, 0.0});
    NilpotentPolynomial b(2, 2);
    b.set_coeff(mono(0), Cx{1.0, 0.0});
    b.set_coeff(mono(0b1, 1), Cx{0.25, 0.0});
    b.set_coeff(mono(0b10, 2), Cx{2.0, 0.0});

    // s1 * s1 terms vanish; photon powers add.
    const NilpotentPolynomial ab = poly_combine(a, b, CombineMode::mul, true);
    CHECK(ab.coeff(mono(0)) == Cx{1.0, 0.0});
    CHECK(ab.coeff(mono(0b1, 1)) == Cx{0.75, 0.0});
    CHECK(ab.coeff(mono(0b1, 2)) == Cx{0.0, 0.0});           // s1*s1 dropped
    CHECK(ab.coeff(mono(0b10, 2)) == Cx{2.0, 0.0});
    CHECK(ab.coeff(mono(0b11, 3)) == Cx{0.0, 0.0});          // above cap, truncated

    CHECK_THROWS_AS(poly_combine(a, b, CombineMode::mul, false),
                    PhotonCapOverflow);

    NilpotentPolynomial c(3, 2);
    c.set_coeff(mono(0), Cx{1.0, 0.0});
    CHECK_THROWS_AS(poly_combine(a, c, CombineMode::add), DimensionMismatch);
}

TEST_CASE("exp of a sum of two raising variables") {
    // exp(s1 + s2) = 1 + s1 + s2 + s1 s2 exactly (all higher powers vanish).
    NilpotentPolynomial f(2, 0);
    f.set_coeff(mono(0b01), Cx{1.0, 0.0});
    f.set_coeff(mono(0b10), Cx{1.0, 0.0});
    const NilpotentPolynomial e = poly_exp(f);
    CHECK(e.term_count() == 4);
    CHECK(std::abs(e.coeff(mono(0)) - Cx{1.0, 0.0}) == doctest::Approx(0.0));
    CHECK(std::abs(e.coeff(mono(0b01)) - Cx{1.0, 0.0}) == doctest::Approx(0.0));
    CHECK(std::abs(e.coeff(mono(0b10)) - Cx{1.0, 0.0}) == doctest::Approx(0.0));
    CHECK(std::abs(e.coeff(mono(0b11)) - Cx{1.0, 0.0}) == doctest::Approx(0.0));
}

TEST_CASE("exp handles photon powers with factorial-free monomial algebra") {
    // exp(c * p * s1) = 1 + c p s1 over one atom: the square vanishes.
    NilpotentPolynomial f(1, 4);
    f.set_coeff(mono(0b1, 1), Cx{0.3, -0.1});
    const NilpotentPolynomial e = poly_exp(f);
    CHECK(e.term_count() == 2);
    CHECK(std::abs(e.coeff(mono(0b1, 1)) - Cx{0.3, -0.1}) < 1e-15);

    // With two atoms the cross term picks up the 1/2! from the series:
    // exp(c1 p s1 + c2 p s2) contains c1 c2 p^2 s1 s2.
    NilpotentPolynomial g(2, 4);
    g.set_coeff(mono(0b01, 1), Cx{0.3, 0.0});
    g.set_coeff(mono(0b10, 1), Cx{0.2, 0.0});
    const NilpotentPolynomial eg = poly_exp(g);
    CHECK(std::abs(eg.coeff(mono(0b11, 2)) - Cx{0.06, 0.0}) < 1e-15);

    NilpotentPolynomial bad(1, 2);
    bad.set_coeff(mono(0), Cx{1.0, 0.0});
    CHECK_THROWS_AS(poly_exp(bad), BadVacuumAmplitude);
}

TEST_CASE("log inverts exp over random generators") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 6);
        const bool photons = (trial % 2) == 0;
        const NilpotentPolynomial f =
            random_generator(rng, n, photons ? n + 4 : 0, photons);
        const NilpotentPolynomial back = poly_log(poly_exp(f));
        CHECK(max_coeff_delta(f, back) < 1e-12);
    }

    NilpotentPolynomial no_vacuum(1, 0);
    no_vacuum.set_coeff(mono(0b1), Cx{1.0, 0.0});
    CHECK_THROWS_AS(poly_log(no_vacuum), BadVacuumAmplitude);
}

TEST_CASE("log takes the principal branch on the vacuum coefficient") {
    NilpotentPolynomial p(1, 0);
    p.set_coeff(mono(0), Cx{0.0, 2.0});  // 2i = 2 exp(i pi/2)
    p.set_coeff(mono(0b1), Cx{0.5, 0.0});
    const NilpotentPolynomial f = poly_log(p);
    CHECK(f.coeff(mono(0)).real() == doctest::Approx(std::log(2.0)));
    CHECK(f.coeff(mono(0)).imag() == doctest::Approx(M_PI / 2.0));
    CHECK(std::abs(f.coeff(mono(0b1)) - Cx{0.5, 0.0} / Cx{0.0, 2.0}) < 1e-15);
}

TEST_CASE("separability is decided by cross-cut monomials") {
    // f = a s1 + b s3 + c s1 s2 stays separable across {1,2} | {3}.
    NilpotentPolynomial f(3, 0);
    f.set_coeff(mono(0b001), Cx{0.3, 0.0});
    f.set_coeff(mono(0b100), Cx{0.2, 0.1});
    f.set_coeff(mono(0b011), Cx{0.0, 0.4});
    CHECK(is_separable(f, Bipartition::first_k(2)));
    CHECK_FALSE(is_separable(f, Bipartition::first_k(1)));  // s1 s2 crosses

    // A cross term below the zero tolerance does not count.
    f.set_coeff(mono(0b101), Cx{1e-13, 0.0});
    CHECK(is_separable(f, Bipartition::first_k(2)));
    f.set_coeff(mono(0b101), Cx{1e-9, 0.0});
    CHECK_FALSE(is_separable(f, Bipartition::first_k(2)));
}

TEST_CASE("collective form round-trips symmetric polynomials") {
    // (1 + mu S_A)(1 + mu S_B) type data: beta_{k,l} on a 2|2 split.
    const int n_a = 2, n_b = 2;
    NilpotentPolynomial p(n_a + n_b, 0);
    p.set_coeff(mono(0), Cx{1.0, 0.0});
    const Cx mu{0.25, -0.05};
    // S_A = s1 + s2, S_B = s3 + s4; encode mu(S_A + S_B) + 0.1 S_A S_B.
    for (int i = 0; i < 4; ++i) p.set_coeff(mono(std::uint64_t{1} << i), mu);
    for (int a = 0; a < 2; ++a) {
        for (int b = 2; b < 4; ++b) {
            p.set_coeff(mono((std::uint64_t{1} << a) | (std::uint64_t{1} << b)),
                        Cx{0.1, 0.0});
        }
    }
    const CollectivePolynomial cp = to_collective(p, n_a);
    CHECK(std::abs(cp.coeff(0, 0) - Cx{1.0, 0.0}) < 1e-14);
    CHECK(std::abs(cp.coeff(1, 0) - mu) < 1e-14);
    CHECK(std::abs(cp.coeff(0, 1) - mu) < 1e-14);
    CHECK(std::abs(cp.coeff(1, 1) - Cx{0.1, 0.0}) < 1e-14);

    const NilpotentPolynomial back = expand_collective(cp);
    CHECK(max_coeff_delta(p, back) < 1e-14);

    // Breaking the symmetry must be rejected.
    p.set_coeff(mono(0b0001), mu + Cx{0.05, 0.0});
    CHECK_THROWS_AS(to_collective(p, n_a), Error);
}

TEST_CASE("text serialization round-trips exactly") {
    std::mt19937_64 rng(7);
    const NilpotentPolynomial p = [&] {
        NilpotentPolynomial q = random_generator(rng, 4, 3, true);
        q.set_coeff(mono(0), Cx{1.0, 0.0});
        return q;
    }();
    const std::string text = poly_to_text(p);
    const NilpotentPolynomial back = poly_from_text(text);
    CHECK(back.num_atoms() == p.num_atoms());
    CHECK(back.photon_cap() == p.photon_cap());
    CHECK(max_coeff_delta(p, back) == 0.0);       // 17 digits are lossless
    CHECK(poly_to_text(back) == text);            // canonical order is stable

    CHECK_THROWS_AS(poly_from_text("not a polynomial"), Error);
}

TEST_CASE("format_double is deterministic and lossless") {
    const double values[] = {0.0, 1.0, -1.0 / 3.0, 6.02214076e23, 1e-300};
    for (double v : values) {
        std::istringstream in(format_double(v));
        double back = 0.0;
        in >> back;
        CHECK(back == v);
    }
}
