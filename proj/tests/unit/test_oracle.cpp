#include <doctest.h>

#include <cmath>
#include <complex>

#include "nilcav/oracle.hpp"

using namespace nilcav;

namespace {

ControlSchedule resonant_drive(int n, double amplitude, double duration) {
    ControlSchedule s;
    s.omega_cavity = 1.0;
    s.omega_atoms.assign(static_cast<std::size_t>(n), -1.0);
    ScheduleSegment seg;
    seg.duration = duration;
    seg.amplitude = amplitude;
    seg.couplings.assign(static_cast<std::size_t>(n), 1.0);
    s.segments = {seg};
    return s;
}

}  // namespace

TEST_CASE("propagation is unitary and respects the vacuum limit") {
    const ControlSchedule s = resonant_drive(2, 0.05, 4.0);
    const DenseState out = propagate(s);
    CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-12));

    // Zero drive leaves only free rotation; the interaction picture strips it.
    ControlSchedule idle = s;
    idle.segments[0].amplitude = 0.0;
    const DenseState free_run = propagate(idle);
    const DenseState stripped = to_interaction_picture(free_run, idle);
    CHECK(std::abs(stripped.amplitude(0, 0) - Cx{1.0, 0.0}) < 1e-12);
}

TEST_CASE("halving every segment does not change the propagated state") {
    ControlSchedule s = resonant_drive(2, 0.06, 3.0);
    s.segments.push_back(s.segments[0]);
    s.segments[1].amplitude = -0.03;
    PropagationSettings split;
    split.split_segments = true;
    const DenseState a = propagate(s);
    const DenseState b = propagate(s, split);
    CHECK(fidelity(a, b) > 1.0 - 1e-12);
}

TEST_CASE("a too-small Fock cutoff is detected rather than silently wrong") {
    PropagationSettings tight;
    tight.fock_cutoff = 3;
    CHECK_THROWS_AS(propagate(resonant_drive(1, 1.0, 5.0), tight),
                    CutoffInadequate);
}

TEST_CASE("displacement produces a coherent field") {
    const Cx lambda{0.6, -0.4};
    const DenseState d = displace(vacuum_state(0, 48), lambda);
    CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-12));
    double mean = 0.0;
    for (int f = 0; f < d.fock_cutoff; ++f) {
        mean += f * d.fock_population(f);
    }
    CHECK(mean == doctest::Approx(std::norm(lambda)).epsilon(1e-10));

    const DenseState back = displace(d, -lambda);
    CHECK(std::abs(back.amplitude(0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("squeezed vacuum occupies even Fock levels with known weights") {
    const double g = 0.15, t = 1.0;  // r = 2gt = 0.3
    const DenseState sq = squeeze(vacuum_state(0, 40), g, t);
    CHECK(sq.norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int f = 1; f < sq.fock_cutoff; f += 2) {
        CHECK(sq.fock_population(f) < 1e-20);
    }
    const double r = 2.0 * g * t;
    CHECK(sq.fock_population(2) / sq.fock_population(0) ==
          doctest::Approx(0.5 * std::tanh(r) * std::tanh(r)).epsilon(1e-10));

    const DenseState undo = squeeze(sq, -g, t);
    CHECK(std::abs(undo.amplitude(0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("phase rotation multiplies Fock levels by exp(i k theta)") {
    const DenseState d = displace(vacuum_state(0, 24), Cx{0.5, 0.0});
    const double theta = 0.7;
    const DenseState rotated = phase_rotate(d, theta);
    for (int f = 0; f < 5; ++f) {
        const Cx expected = d.amplitude(f, 0) * std::exp(Cx{0.0, theta * f});
        CHECK(std::abs(rotated.amplitude(f, 0) - expected) < 1e-13);
    }
}

TEST_CASE("Kerr propagator is unitary and reduces to free evolution") {
    const Eigen::MatrixXcd u = kerr_field_unitary(12, -3.0, 1.0, 0.04, 7.5);
    const Eigen::MatrixXcd gram = u.adjoint() * u;
    CHECK((gram - Eigen::MatrixXcd::Identity(12, 12)).norm() < 1e-12);

    // At zero time the evolution is the identity.
    const DenseState d = displace(vacuum_state(0, 12), Cx{0.3, 0.1});
    const DenseState frozen = kerr_evolve(d, -3.0, 1.0, 0.04, 0.0);
    CHECK(fidelity(d, frozen) > 1.0 - 1e-12);

    // Without drive the Fock populations are conserved (diagonal Hamiltonian).
    const DenseState spun = kerr_evolve(d, -3.0, 1.0, 0.0, 2.0);
    for (int f = 0; f < 6; ++f) {
        CHECK(spun.fock_population(f) ==
              doctest::Approx(d.fock_population(f)).epsilon(1e-12));
    }
}

TEST_CASE("Fock projection is a Born rule") {
    const DenseState d = displace(vacuum_state(1, 24), Cx{0.7, 0.2});
    double total = 0.0;
    for (int f = 0; f < 12; ++f) {
        total += project_fock(d, f).probability;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(project_fock(vacuum_state(1, 8), 5), Error);
}

TEST_CASE("polynomial and dense representations agree") {
    NilpotentPolynomial p(1, 2);
    const Cx c{0.2, 0.1};
    p.set_coeff(Monomial{0, 0}, Cx{1.0, 0.0});
    p.set_coeff(Monomial{1, 1}, c);
    const DenseState d = dense_from_polynomial(p, 4);
    const double scale = std::sqrt(1.0 + std::norm(c));
    CHECK(std::abs(d.amplitude(0, 0) - Cx{1.0, 0.0} / scale) < 1e-14);
    CHECK(std::abs(d.amplitude(1, 1) - c / scale) < 1e-14);

    // Fidelity tolerates different cutoffs (missing levels are zero).
    const DenseState wide = dense_from_polynomial(p, 9);
    CHECK(fidelity(d, wide) > 1.0 - 1e-14);

    const double fid = atomic_fidelity(project_fock(d, 1).atomic, [&] {
        NilpotentPolynomial atomic(1, 0);
        atomic.set_coeff(Monomial{1, 0}, Cx{1.0, 0.0});
        return atomic;
    }());
    CHECK(fid == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("projection comparison summarizes probability and overlap gaps") {
    NilpotentPolynomial p(1, 2);
    const Cx c{0.25, -0.05};
    p.set_coeff(Monomial{0, 0}, Cx{1.0, 0.0});
    p.set_coeff(Monomial{1, 1}, c);
    const DenseState d = dense_from_polynomial(p, 6);

    NilpotentPolynomial atomic(1, 0);
    atomic.set_coeff(Monomial{1, 0}, Cx{1.0, 0.0});
    const double p_analytic = std::norm(c) / (1.0 + std::norm(c));
    const ProjectionComparison cmp =
        project_and_compare(d, 1, atomic, p_analytic);
    CHECK(cmp.probability_dense ==
          doctest::Approx(p_analytic).epsilon(1e-12));
    CHECK(cmp.probability_delta < 1e-12);
    CHECK(cmp.fidelity == doctest::Approx(1.0).epsilon(1e-12));
}
