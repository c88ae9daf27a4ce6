#include "nilcav/protocols.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <thread>

namespace nilcav {
namespace {

constexpr Cx kI{0.0, 1.0};

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return f;
}

double falling_factorial(int n, int i) {  // n! / (n-i)!
    double f = 1.0;
    for (int k = 0; k < i; ++k) f *= static_cast<double>(n - k);
    return f;
}

CouplingCoefficients symmetric_coefficients(int n, Cx c) {
    CouplingCoefficients out;
    out.num_atoms = n;
    out.linear.assign(static_cast<std::size_t>(n), c);
    out.bilinear.assign(static_cast<std::size_t>(n),
                        std::vector<Cx>(static_cast<std::size_t>(n), Cx{}));
    double proxy = static_cast<double>(n) * std::norm(c);
    out.excitation_proxy = proxy;
    out.within_weak_excitation = proxy <= kDefaultExcitationBound;
    return out;
}

}  // namespace

TargetState TargetState::ghz(int n) {
    TargetState t;
    t.kind = TargetKind::ghz;
    t.num_atoms = n;
    return t;
}

TargetState TargetState::w(int n) {
    TargetState t;
    t.kind = TargetKind::w;
    t.num_atoms = n;
    t.excitations = 1;
    return t;
}

TargetState TargetState::dicke(int n, int m) {
    if (m < 0 || m > n) {
        throw DimensionMismatch("Dicke excitation count outside 0..N");
    }
    TargetState t;
    t.kind = TargetKind::dicke;
    t.num_atoms = n;
    t.excitations = m;
    return t;
}

TargetState TargetState::custom_state(NilpotentPolynomial p) {
    if (p.max_photon_power() != 0) {
        throw DimensionMismatch("custom target must be photon-free");
    }
    TargetState t;
    t.kind = TargetKind::custom;
    t.num_atoms = p.num_atoms();
    t.custom = std::move(p);
    return t;
}

NilpotentPolynomial target_polynomial(const TargetState& t) {
    const int n = t.num_atoms;
    NilpotentPolynomial p(n, 0);
    switch (t.kind) {
        case TargetKind::ghz: {
            const double amp = 1.0 / std::sqrt(2.0);
            p.set_coeff(Monomial{0, 0}, amp);
            const uint64_t full =
                n == 64 ? ~uint64_t{0} : (uint64_t{1} << n) - 1;
            p.set_coeff(Monomial{full, 0}, amp);
            return p;
        }
        case TargetKind::w:
        case TargetKind::dicke: {
            const int m = t.kind == TargetKind::w ? 1 : t.excitations;
            const double amp = std::sqrt(factorial(m) * factorial(n - m) /
                                         factorial(n));
            for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
                if (std::popcount(mask) == m) {
                    p.set_coeff(Monomial{mask, 0}, amp);
                }
            }
            return p;
        }
        case TargetKind::custom: {
            NilpotentPolynomial q = t.custom;
            double sq = 0.0;
            for (const auto& [mono, coeff] : q.terms()) sq += std::norm(coeff);
            if (sq <= 0.0) throw Error("custom target is the zero vector");
            q *= 1.0 / std::sqrt(sq);
            return q;
        }
    }
    throw Error("unreachable target kind");
}

double polynomial_fidelity(const NilpotentPolynomial& a,
                           const NilpotentPolynomial& b) {
    if (a.num_atoms() != b.num_atoms()) {
        throw DimensionMismatch("fidelity of polynomials over different atoms");
    }
    if (a.max_photon_power() != 0 || b.max_photon_power() != 0) {
        throw DimensionMismatch("fidelity needs photon-free polynomials");
    }
    Cx overlap{0.0, 0.0};
    double asq = 0.0;
    double bsq = 0.0;
    for (const auto& [mono, coeff] : a.terms()) {
        asq += std::norm(coeff);
        overlap += std::conj(coeff) * b.coeff(mono);
    }
    for (const auto& [mono, coeff] : b.terms()) bsq += std::norm(coeff);
    if (asq <= 0.0 || bsq <= 0.0) return 0.0;
    return std::abs(overlap) / std::sqrt(asq * bsq);
}

double fidelity_to(const PostSelectedState& s, const TargetState& t) {
    return polynomial_fidelity(s.polynomial, target_polynomial(t));
}

double dicke_success_probability(int n, int m, Cx c, ProbabilityFormula f) {
    if (m < 0 || m > n) {
        throw DimensionMismatch("Dicke excitation count outside 0..N");
    }
    const double x = std::norm(c);
    if (f == ProbabilityFormula::exact) {
        double denom = 0.0;
        double xpow = 1.0;
        double numer = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double w = falling_factorial(n, i) * xpow;
            denom += w;
            if (i == m) numer = w;
            xpow *= x;
        }
        return numer / denom;
    }
    // Printed variant: weights i! N!/(N-i)!, sum starting from i = 1.
    double denom = 0.0;
    double xpow = x;
    for (int i = 1; i <= n; ++i) {
        denom += factorial(i) * falling_factorial(n, i) * xpow;
        xpow *= x;
    }
    const double numer =
        factorial(m) * falling_factorial(n, m) * std::pow(x, m);
    if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return numer / denom;
}

PostSelectedState dicke_via_measurement(int n, int m, Cx c) {
    const JointState js = build_joint_state(symmetric_coefficients(n, c));
    return measure_photon_number(js, m);
}

DickeSweep dicke_sweep(int n, const std::vector<int>& excitations,
                       const std::vector<double>& c_grid, int threads) {
    DickeSweep sweep;
    const std::size_t per_m = c_grid.size();
    sweep.rows.resize(excitations.size() * per_m);

    auto fill_row = [&](std::size_t flat) {
        const std::size_t mi = flat / per_m;
        const std::size_t ci = flat % per_m;
        const int m = excitations[mi];
        const Cx c{c_grid[ci], 0.0};
        DickeSweepRow& row = sweep.rows[flat];
        row.num_atoms = n;
        row.excitations = m;
        row.c_abs = c_grid[ci];
        row.p_paper =
            dicke_success_probability(n, m, c, ProbabilityFormula::paper);
        row.p_exact =
            dicke_success_probability(n, m, c, ProbabilityFormula::exact);
    };

    const std::size_t total = sweep.rows.size();
    const int workers = std::max(
        1, std::min<int>(threads, static_cast<int>(total)));
    if (workers == 1) {
        for (std::size_t i = 0; i < total; ++i) fill_row(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                for (std::size_t i = static_cast<std::size_t>(w); i < total;
                     i += static_cast<std::size_t>(workers)) {
                    fill_row(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    for (std::size_t mi = 0; mi < excitations.size(); ++mi) {
        DickeMaximum best;
        best.excitations = excitations[mi];
        std::size_t best_ci = 0;
        for (std::size_t ci = 0; ci < per_m; ++ci) {
            const DickeSweepRow& row = sweep.rows[mi * per_m + ci];
            if (row.p_exact > best.p_max) {
                best.p_max = row.p_exact;
                best.c_at_max = row.c_abs;
                best_ci = ci;
            }
        }
        best.interior = best_ci > 0 && best_ci + 1 < per_m;
        sweep.maxima.push_back(best);
    }
    return sweep;
}

double ProtocolReport::metric(const std::string& name) const {
    for (const auto& [key, value] : metrics) {
        if (key == name) return value;
    }
    throw Error("protocol report has no metric named " + name);
}

namespace {

ProtocolReport ghz_projection_path(const JointState& js,
                                   const KerrParams& kerr,
                                   const std::vector<Cx>& linear) {
    const int n = static_cast<int>(linear.size());
    Cx product{1.0, 0.0};
    for (const Cx& v : linear) {
        if (std::abs(v) == 0.0) {
            throw InfeasibleProtocol(
                "GHZ projection needs every linear coefficient nonzero");
        }
        product *= v;
    }
    const Cx beta = std::sqrt(factorial(n)) * product;
    const double c_mag = 1.0 / std::sqrt(1.0 + std::norm(beta));
    const Cx b_star = beta * c_mag;  // conj(B) = conj(C) sqrt(N!) prod I_n
    const Cx b = std::conj(b_star);
    const Cx c = Cx{c_mag, 0.0};

    const PostSelectedState ps = kerr_project(js, kerr, b, c);
    ProtocolReport report;
    report.protocol = "ghz";
    report.success_probability = ps.success_probability;
    report.fidelity = fidelity_to(ps, TargetState::ghz(n));
    report.add("fidelity_symbolic", report.fidelity);
    report.add("success_symbolic", ps.success_probability);
    report.add("beta_abs", std::abs(beta));
    return report;
}

}  // namespace

ProtocolReport ghz_symbolic(const std::vector<Cx>& linear) {
    const int n = static_cast<int>(linear.size());
    // Placeholder Kerr medium: only the photon gap matters for projection;
    // omega_laser/kappa = n + 1/2 keeps every intermediate level off
    // resonance.
    const KerrParams kerr(1.0, 0.3, static_cast<double>(n) + 0.5, n);
    const JointState js = build_joint_state([&] {
        CouplingCoefficients c;
        c.num_atoms = n;
        c.linear = linear;
        c.bilinear.assign(static_cast<std::size_t>(n),
                          std::vector<Cx>(static_cast<std::size_t>(n), Cx{}));
        return c;
    }());
    ProtocolReport report = ghz_projection_path(js, kerr, linear);
    report.protocol = "ghz_symbolic";
    return report;
}

ProtocolReport ghz_protocol(const std::vector<Cx>& linear,
                            const KerrParams& kerr, const GhzOptions& options) {
    const int n = static_cast<int>(linear.size());
    if (kerr.photon_gap != n) {
        throw InfeasibleProtocol("Kerr photon gap must equal the atom count");
    }
    CouplingCoefficients coeffs;
    coeffs.num_atoms = n;
    coeffs.linear = linear;
    coeffs.bilinear.assign(static_cast<std::size_t>(n),
                           std::vector<Cx>(static_cast<std::size_t>(n), Cx{}));
    const JointState js = build_joint_state(coeffs);

    ProtocolReport report = ghz_projection_path(js, kerr, linear);

    if (!options.run_dynamic) return report;

    const Cx c0 = linear[0];
    for (const Cx& v : linear) {
        if (std::abs(v - c0) > 1e-12 * std::max(1.0, std::abs(c0))) {
            report.add("dynamic_skipped_asymmetric", 1.0);
            return report;
        }
    }

    const double ratio =
        1.0 / (std::sqrt(factorial(n)) * std::pow(std::abs(c0), n));
    const KerrTiming timing = kerr_dynamics_params(kerr, ratio);
    const int cutoff =
        options.fock_cutoff > 0 ? options.fock_cutoff : kerr.photon_gap + 6;

    const Eigen::MatrixXcd u =
        kerr_field_unitary(cutoff, kerr.detuning(), kerr.kappa,
                           kerr.drive_cubed(), timing.t_kerr);
    const double theta =
        (std::arg(u(0, 0)) - std::arg(u(0, n)) - n * std::arg(c0)) /
        static_cast<double>(n);

    DenseState dense = dense_from_polynomial(js.polynomial, cutoff);
    dense = phase_rotate(dense, theta);
    dense = kerr_evolve(dense, kerr.detuning(), kerr.kappa, kerr.drive_cubed(),
                        timing.t_kerr);
    const FockProjection proj = project_fock(dense, 0);
    const double fid_dynamic =
        atomic_fidelity(proj.atomic, target_polynomial(TargetState::ghz(n)));

    // Rabi frequency from the splitting of the two dressed states carrying
    // the |0>/|N> doublet.
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(cutoff, cutoff);
    for (int f = 0; f < cutoff; ++f) {
        const double df = static_cast<double>(f);
        h(f, f) = kerr.detuning() * df + kerr.kappa * df * df;
        if (f + 1 < cutoff) {
            const double root = std::sqrt(static_cast<double>(f + 1));
            h(f, f + 1) = kerr.kappa * kerr.drive_cubed() * root;
            h(f + 1, f) = kerr.kappa * kerr.drive_cubed() * root;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    int first = -1;
    int second = -1;
    double w1 = -1.0;
    double w2 = -1.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double weight = std::norm(es.eigenvectors()(0, k)) +
                              std::norm(es.eigenvectors()(n, k));
        if (weight > w1) {
            w2 = w1;
            second = first;
            w1 = weight;
            first = static_cast<int>(k);
        } else if (weight > w2) {
            w2 = weight;
            second = static_cast<int>(k);
        }
    }
    const double rabi_measured =
        0.5 * std::abs(es.eigenvalues()[first] - es.eigenvalues()[second]);

    double intermediate = 0.0;
    for (int d = 0; d < cutoff; ++d) {
        if (d == 0 || d == n) continue;
        intermediate += std::norm(u(d, 0));
    }

    report.add("fidelity_dynamic", fid_dynamic);
    report.add("success_dynamic", proj.probability);
    report.add("v0n", timing.v0n);
    report.add("t_kerr", timing.t_kerr);
    report.add("theta", theta);
    report.add("rabi_measured", rabi_measured);
    report.add("rabi_relative_error",
               std::abs(rabi_measured - timing.v0n) / timing.v0n);
    report.add("intermediate_population", intermediate);
    return report;
}

TwoEnsembleReport two_ensemble_protocol(int n_per, Cx mu,
                                        const SqueezeParams& p) {
    if (n_per < 1) throw DimensionMismatch("each ensemble needs >= 1 atom");
    const int total = 2 * n_per;
    const JointState js = build_joint_state(symmetric_coefficients(total, mu));
    const PostSelectedState ps = squeeze_then_vacuum(js, p);

    const NilpotentPolynomial nil = nilpotential_of(ps);
    const CollectivePolynomial collective = to_collective(nil, n_per);
    const Cx beta11 = collective.coeff(1, 1);
    const Cx expected = 2.0 * Cx{p.zeta(), 0.0} * mu * mu;

    const bool separable = is_separable(nil, Bipartition::first_k(n_per));

    // Oracle cross-check: exact squeezing of the dense expansion, vacuum
    // detection, fidelity against the closed-form atomic state.
    int cutoff = std::max(4 * total + 4, total + 8);
    double oracle_fid = 0.0;
    double oracle_prob = 0.0;
    while (true) {
        const DenseState dense = dense_from_polynomial(js.polynomial, cutoff);
        const DenseState squeezed = squeeze(dense, p.g, p.t);
        if (squeezed.fock_population(cutoff - 1) <= 1e-10) {
            const FockProjection proj = project_fock(squeezed, 0);
            oracle_fid = atomic_fidelity(proj.atomic, ps.polynomial);
            oracle_prob = proj.probability;
            break;
        }
        if (cutoff > 2048) {
            throw CutoffInadequate("squeezing spreads beyond the Fock cap");
        }
        cutoff *= 2;
    }

    TwoEnsembleReport out;
    out.collective_nilpotential = collective;
    out.entangled = !separable;
    out.report.protocol = "two_ensemble";
    out.report.success_probability = ps.success_probability;
    out.report.fidelity = oracle_fid;
    out.report.add("beta11_re", beta11.real());
    out.report.add("beta11_im", beta11.imag());
    out.report.add("beta11_expected_re", expected.real());
    out.report.add("beta11_expected_im", expected.imag());
    out.report.add("beta11_delta", std::abs(beta11 - expected));
    out.report.add("zeta", p.zeta());
    out.report.add("zeta_exact", p.zeta_exact());
    out.report.add("entangled", separable ? 0.0 : 1.0);
    out.report.add("success_formula", ps.success_probability_formula);
    out.report.add("success_oracle_direct", oracle_prob);
    out.report.add("oracle_fidelity", oracle_fid);
    return out;
}

}  // namespace nilcav
