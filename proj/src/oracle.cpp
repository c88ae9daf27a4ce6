#include "nilcav/oracle.hpp"

#include <cmath>
#include <string>

namespace nilcav {
namespace {

constexpr Cx kI{0.0, 1.0};

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return f;
}

void check_dims(const DenseState& s) {
    if (s.num_atoms < 0 || s.num_atoms > 20) {
        throw DimensionMismatch("dense state supports 0..20 atoms");
    }
    const Eigen::Index expect =
        static_cast<Eigen::Index>(s.fock_cutoff) * (Eigen::Index{1} << s.num_atoms);
    if (s.amplitudes.size() != expect) {
        throw DimensionMismatch("dense state amplitude vector has wrong length");
    }
}

// exp(-i H dt) psi for Hermitian H via full eigendecomposition.
Eigen::VectorXcd evolve_with(const Eigen::MatrixXcd& h, double dt,
                             const Eigen::VectorXcd& psi) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) {
        throw Error("eigendecomposition failed in dense propagation");
    }
    const Eigen::VectorXcd in_basis = es.eigenvectors().adjoint() * psi;
    Eigen::VectorXcd phased(in_basis.size());
    for (Eigen::Index k = 0; k < in_basis.size(); ++k) {
        phased[k] = std::exp(-kI * es.eigenvalues()[k] * dt) * in_basis[k];
    }
    return es.eigenvectors() * phased;
}

// Apply a Fock-factor-only unitary given as a cutoff x cutoff matrix.
DenseState apply_field_matrix(const DenseState& s, const Eigen::MatrixXcd& u) {
    check_dims(s);
    const Eigen::Index atoms_dim = Eigen::Index{1} << s.num_atoms;
    DenseState out = s;
    out.amplitudes.setZero();
    for (int fo = 0; fo < s.fock_cutoff; ++fo) {
        for (int fi = 0; fi < s.fock_cutoff; ++fi) {
            const Cx w = u(fo, fi);
            if (w == Cx{0.0, 0.0}) continue;
            out.amplitudes.segment(out.index(fo, 0), atoms_dim) +=
                w * s.amplitudes.segment(s.index(fi, 0), atoms_dim);
        }
    }
    return out;
}

// Field unitary exp(-i H_f t) for a Hermitian field operator H_f.
Eigen::MatrixXcd field_unitary(const Eigen::MatrixXcd& h, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) {
        throw Error("field operator eigendecomposition failed");
    }
    Eigen::VectorXcd phases(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < phases.size(); ++k) {
        phases[k] = std::exp(-kI * es.eigenvalues()[k] * t);
    }
    return es.eigenvectors() * phases.asDiagonal() *
           es.eigenvectors().adjoint();
}

}  // namespace

double DenseState::fock_population(int fock) const {
    const Eigen::Index atoms_dim = Eigen::Index{1} << num_atoms;
    return amplitudes.segment(index(fock, 0), atoms_dim).squaredNorm();
}

DenseState vacuum_state(int num_atoms, int fock_cutoff) {
    if (fock_cutoff < 1) throw CutoffInadequate("fock cutoff must be >= 1");
    DenseState s;
    s.num_atoms = num_atoms;
    s.fock_cutoff = fock_cutoff;
    s.amplitudes = Eigen::VectorXcd::Zero(
        static_cast<Eigen::Index>(fock_cutoff) * (Eigen::Index{1} << num_atoms));
    s.amplitudes[0] = 1.0;
    return s;
}

DenseState propagate(const ControlSchedule& schedule,
                     const PropagationSettings& settings) {
    schedule.validate();
    const int n = schedule.num_atoms();
    const int cutoff =
        settings.fock_cutoff > 0 ? settings.fock_cutoff : n + 6;
    if (cutoff < n + 4) {
        throw CutoffInadequate("fock cutoff below num_atoms + 4 headroom");
    }

    DenseState state = vacuum_state(n, cutoff);
    const Eigen::Index atoms_dim = Eigen::Index{1} << n;
    const Eigen::Index dim = state.amplitudes.size();

    for (const auto& seg : schedule.segments) {
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
        for (int f = 0; f < cutoff; ++f) {
            for (uint64_t mask = 0; mask < static_cast<uint64_t>(atoms_dim);
                 ++mask) {
                const Eigen::Index row = state.index(f, mask);
                double diag = schedule.omega_cavity * static_cast<double>(f);
                for (int a = 0; a < n; ++a) {
                    const double half = 0.5 * schedule.omega_atoms
                                                  [static_cast<std::size_t>(a)];
                    diag += (mask >> a) & 1 ? half : -half;
                }
                h(row, row) = diag;
                for (int a = 0; a < n; ++a) {
                    const double u = seg.couplings[static_cast<std::size_t>(a)] *
                                     seg.amplitude;
                    if (u == 0.0) continue;
                    const uint64_t flipped = mask ^ (uint64_t{1} << a);
                    if (f + 1 < cutoff) {
                        const Eigen::Index col = state.index(f + 1, flipped);
                        h(row, col) += u * std::sqrt(static_cast<double>(f + 1));
                    }
                    if (f > 0) {
                        const Eigen::Index col = state.index(f - 1, flipped);
                        h(row, col) += u * std::sqrt(static_cast<double>(f));
                    }
                }
            }
        }
        if (settings.split_segments) {
            state.amplitudes = evolve_with(h, 0.5 * seg.duration,
                                           state.amplitudes);
            state.amplitudes = evolve_with(h, 0.5 * seg.duration,
                                           state.amplitudes);
        } else {
            state.amplitudes = evolve_with(h, seg.duration, state.amplitudes);
        }
        const double drift = std::abs(state.norm() - 1.0);
        if (drift > settings.unitarity_tolerance) {
            throw Error("propagation lost unitarity: norm drift " +
                        std::to_string(drift));
        }
    }

    const double top = state.fock_population(cutoff - 1);
    if (top > settings.top_population_tolerance) {
        throw CutoffInadequate("top Fock level population " +
                               std::to_string(top) + " exceeds tolerance");
    }
    return state;
}

DenseState to_interaction_picture(const DenseState& s,
                                  const ControlSchedule& schedule) {
    check_dims(s);
    const double t = schedule.total_duration();
    DenseState out = s;
    const Eigen::Index atoms_dim = Eigen::Index{1} << s.num_atoms;
    for (int f = 0; f < s.fock_cutoff; ++f) {
        for (uint64_t mask = 0; mask < static_cast<uint64_t>(atoms_dim);
             ++mask) {
            double energy = schedule.omega_cavity * static_cast<double>(f);
            for (int a = 0; a < s.num_atoms; ++a) {
                const double half =
                    0.5 * schedule.omega_atoms[static_cast<std::size_t>(a)];
                energy += (mask >> a) & 1 ? half : -half;
            }
            out.amplitudes[out.index(f, mask)] *= std::exp(kI * energy * t);
        }
    }
    return out;
}

DenseState dense_from_polynomial(const NilpotentPolynomial& p,
                                 int fock_cutoff) {
    if (fock_cutoff <= p.max_photon_power()) {
        throw CutoffInadequate("cutoff too small for the polynomial's photons");
    }
    DenseState s = vacuum_state(p.num_atoms(), fock_cutoff);
    s.amplitudes.setZero();
    for (const auto& [mono, coeff] : p.terms()) {
        s.amplitudes[s.index(mono.photon_power, mono.atoms)] +=
            coeff * std::sqrt(factorial(mono.photon_power));
    }
    const double nrm = s.norm();
    if (nrm <= 0.0) throw Error("polynomial expands to the zero vector");
    s.amplitudes /= nrm;
    return s;
}

DenseState dense_exponential_apply(
    const std::vector<Cx>& linear,
    const std::vector<std::vector<Cx>>& pair_sums, int fock_cutoff) {
    const int n = static_cast<int>(linear.size());
    if (fock_cutoff <= n) {
        throw CutoffInadequate("cutoff must exceed num_atoms for the series");
    }
    DenseState acc = vacuum_state(n, fock_cutoff);
    Eigen::VectorXcd term = acc.amplitudes;

    auto apply_generator = [&](const Eigen::VectorXcd& v) {
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
        const Eigen::Index atoms_dim = Eigen::Index{1} << n;
        for (int f = 0; f < fock_cutoff; ++f) {
            for (uint64_t mask = 0; mask < static_cast<uint64_t>(atoms_dim);
                 ++mask) {
                const Cx amp = v[acc.index(f, mask)];
                if (amp == Cx{0.0, 0.0}) continue;
                for (int a = 0; a < n; ++a) {
                    if ((mask >> a) & 1) continue;
                    // adag sigma_a^+ branch
                    if (f + 1 < fock_cutoff) {
                        out[acc.index(f + 1, mask | (uint64_t{1} << a))] +=
                            linear[static_cast<std::size_t>(a)] *
                            std::sqrt(static_cast<double>(f + 1)) * amp;
                    }
                    // sigma_a^+ sigma_b^+ branch, a < b to count each pair once
                    for (int b = a + 1; b < n; ++b) {
                        if ((mask >> b) & 1) continue;
                        out[acc.index(f, mask | (uint64_t{1} << a) |
                                             (uint64_t{1} << b))] +=
                            pair_sums[static_cast<std::size_t>(a)]
                                     [static_cast<std::size_t>(b)] *
                            amp;
                    }
                }
            }
        }
        return out;
    };

    for (int k = 1; k <= n; ++k) {
        term = apply_generator(term) / static_cast<double>(k);
        acc.amplitudes += term;
        if (term.norm() < 1e-300) break;
    }
    const double nrm = acc.norm();
    acc.amplitudes /= nrm;
    return acc;
}

double fidelity(const DenseState& a, const DenseState& b) {
    if (a.num_atoms != b.num_atoms) {
        throw DimensionMismatch("fidelity of states with different atom counts");
    }
    const int shared = std::min(a.fock_cutoff, b.fock_cutoff);
    const Eigen::Index atoms_dim = Eigen::Index{1} << a.num_atoms;
    Cx overlap{0.0, 0.0};
    for (int f = 0; f < shared; ++f) {
        overlap += a.amplitudes.segment(a.index(f, 0), atoms_dim)
                       .dot(b.amplitudes.segment(b.index(f, 0), atoms_dim));
    }
    return std::abs(overlap) / (a.norm() * b.norm());
}

DenseState displace(const DenseState& s, Cx lambda) {
    check_dims(s);
    const int c = s.fock_cutoff;
    // exp(lambda adag - conj(lambda) a) = exp(-i H) with Hermitian
    // H = i (lambda adag - conj(lambda) a).
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(c, c);
    for (int f = 0; f + 1 < c; ++f) {
        const double root = std::sqrt(static_cast<double>(f + 1));
        h(f, f + 1) = -kI * std::conj(lambda) * root;
        h(f + 1, f) = kI * lambda * root;
    }
    return apply_field_matrix(s, field_unitary(h, 1.0));
}

DenseState squeeze(const DenseState& s, double g, double t) {
    check_dims(s);
    const int c = s.fock_cutoff;
    // exp[(g a^2 - g adag^2) t] = exp(-i H t), H = i g (a^2 - adag^2).
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(c, c);
    for (int f = 0; f + 2 < c; ++f) {
        const double root =
            std::sqrt(static_cast<double>(f + 1) * static_cast<double>(f + 2));
        h(f, f + 2) = kI * g * root;
        h(f + 2, f) = -kI * g * root;
    }
    return apply_field_matrix(s, field_unitary(h, t));
}

DenseState phase_rotate(const DenseState& s, double theta) {
    check_dims(s);
    DenseState out = s;
    const Eigen::Index atoms_dim = Eigen::Index{1} << s.num_atoms;
    for (int f = 0; f < s.fock_cutoff; ++f) {
        out.amplitudes.segment(out.index(f, 0), atoms_dim) *=
            std::exp(kI * theta * static_cast<double>(f));
    }
    return out;
}

Eigen::MatrixXcd kerr_field_unitary(int fock_cutoff, double detuning,
                                    double kappa, double eps_cubed, double t) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(fock_cutoff, fock_cutoff);
    for (int f = 0; f < fock_cutoff; ++f) {
        const double df = static_cast<double>(f);
        h(f, f) = detuning * df + kappa * df * df;
        if (f + 1 < fock_cutoff) {
            const double root = std::sqrt(static_cast<double>(f + 1));
            h(f, f + 1) = kappa * eps_cubed * root;
            h(f + 1, f) = kappa * eps_cubed * root;
        }
    }
    return field_unitary(h, t);
}

DenseState kerr_evolve(const DenseState& s, double detuning, double kappa,
                       double eps_cubed, double t) {
    check_dims(s);
    return apply_field_matrix(
        s, kerr_field_unitary(s.fock_cutoff, detuning, kappa, eps_cubed, t));
}

FockProjection project_fock(const DenseState& s, int d) {
    check_dims(s);
    if (d < 0 || d >= s.fock_cutoff) {
        throw DimensionMismatch("projection level outside the Fock range");
    }
    const Eigen::Index atoms_dim = Eigen::Index{1} << s.num_atoms;
    FockProjection out;
    out.atomic = s.amplitudes.segment(s.index(d, 0), atoms_dim);
    const double total = s.amplitudes.squaredNorm();
    out.probability = out.atomic.squaredNorm() / total;
    if (out.probability < 1e-300) {
        throw Error("projection outcome has vanishing probability");
    }
    out.atomic /= out.atomic.norm();
    return out;
}

double atomic_fidelity(const Eigen::VectorXcd& atomic,
                       const NilpotentPolynomial& p) {
    if (p.max_photon_power() != 0) {
        throw DimensionMismatch("atomic fidelity needs a photon-free polynomial");
    }
    const Eigen::Index atoms_dim = Eigen::Index{1} << p.num_atoms();
    if (atomic.size() != atoms_dim) {
        throw DimensionMismatch("atomic vector length mismatch");
    }
    Cx overlap{0.0, 0.0};
    double psq = 0.0;
    for (const auto& [mono, coeff] : p.terms()) {
        overlap += std::conj(coeff) *
                   atomic[static_cast<Eigen::Index>(mono.atoms)];
        psq += std::norm(coeff);
    }
    if (psq <= 0.0) return 0.0;
    return std::abs(overlap) / (std::sqrt(psq) * atomic.norm());
}

ProjectionComparison project_and_compare(const DenseState& dense, int d,
                                         const NilpotentPolynomial& analytic,
                                         double analytic_probability) {
    const FockProjection proj = project_fock(dense, d);
    ProjectionComparison cmp;
    cmp.probability_dense = proj.probability;
    cmp.probability_analytic = analytic_probability;
    cmp.probability_delta = proj.probability - analytic_probability;
    cmp.fidelity = atomic_fidelity(proj.atomic, analytic);
    return cmp;
}

}  // namespace nilcav
