#include "nilcav/control_ops.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace nilcav {
namespace {

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return f;
}

NilpotentPolynomial normalized_atomic(NilpotentPolynomial p) {
    double sq = 0.0;
    for (const auto& [mono, coeff] : p.terms()) sq += std::norm(coeff);
    if (sq > 0.0) p *= 1.0 / std::sqrt(sq);
    return p;
}

// Vacuum-detection probability after applying `field_op` to the dense
// expansion of the joint state, growing the cutoff until the top Fock level
// is empty enough for the answer to be trustworthy.
double oracle_vacuum_probability(
    const JointState& s, int initial_cutoff,
    const std::function<DenseState(const DenseState&)>& field_op) {
    int cutoff = std::max(initial_cutoff, s.num_atoms() + 4);
    while (true) {
        const DenseState dense =
            dense_from_polynomial(s.polynomial, cutoff);
        const DenseState transformed = field_op(dense);
        if (transformed.fock_population(cutoff - 1) <= 1e-10) {
            return project_fock(transformed, 0).probability;
        }
        if (cutoff > 2048) {
            throw CutoffInadequate(
                "field operation spreads beyond a manageable Fock cutoff");
        }
        cutoff *= 2;
    }
}

// exp[ sum_{n<m} quad(n,m) sigma_n^+ sigma_m^+ + scale * O with O linear ],
// photon-free; used by the displacement/squeezing closed forms.
NilpotentPolynomial atomic_exponent_state(const CouplingCoefficients& c,
                                          Cx linear_scale, Cx quad_scale) {
    const int n = c.num_atoms;
    NilpotentPolynomial exponent(n, 0);
    for (int i = 0; i < n; ++i) {
        const Cx v = linear_scale * c.linear[static_cast<std::size_t>(i)];
        if (std::abs(v) > 0.0) {
            exponent.set_coeff(Monomial{uint64_t{1} << i, 0}, v);
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            // quad_scale multiplies O^2's pair expansion 2 I_i I_j; the
            // drive-generated pair coefficient enters unscaled.
            const Cx v = c.pair_sum(i, j) +
                         quad_scale * 2.0 *
                             c.linear[static_cast<std::size_t>(i)] *
                             c.linear[static_cast<std::size_t>(j)];
            if (std::abs(v) > 0.0) {
                const uint64_t mask = (uint64_t{1} << i) | (uint64_t{1} << j);
                exponent.set_coeff(Monomial{mask, 0}, v);
            }
        }
    }
    return poly_exp(exponent);
}

double atomic_squared_sum(const NilpotentPolynomial& p) {
    double sq = 0.0;
    for (const auto& [mono, coeff] : p.terms()) sq += std::norm(coeff);
    return sq;
}

}  // namespace

NilpotentPolynomial nilpotential_of(const PostSelectedState& s) {
    const Cx vac = s.polynomial.vacuum_coeff();
    if (std::abs(vac) < 1e-12) {
        throw BadVacuumAmplitude(
            "nilpotential undefined: vacuum amplitude below 1e-12");
    }
    NilpotentPolynomial scaled = s.polynomial;
    scaled *= 1.0 / vac;
    return poly_log(scaled);
}

PostSelectedState measure_photon_number(const JointState& s, int d) {
    if (d < 0 || d > s.polynomial.photon_cap()) {
        throw DimensionMismatch("photon count " + std::to_string(d) +
                                " outside 0.." +
                                std::to_string(s.polynomial.photon_cap()));
    }
    NilpotentPolynomial shell(s.num_atoms(), 0);
    const double root = std::sqrt(factorial(d));
    for (const auto& [mono, coeff] : s.polynomial.terms()) {
        if (mono.photon_power == d) {
            shell.set_coeff(Monomial{mono.atoms, 0}, coeff * root);
        }
    }
    const double shell_sq = atomic_squared_sum(shell);

    PostSelectedState out;
    out.primitive = "measure_photon_number";
    out.success_probability = shell_sq / (s.norm * s.norm);
    out.success_probability_formula = out.success_probability;
    out.polynomial = normalized_atomic(std::move(shell));
    return out;
}

PostSelectedState displace_then_vacuum(const JointState& s, Cx lambda) {
    // <0|D(lambda) exp(adag O)|0> = exp(-|lambda|^2/2) exp(-conj(lambda) O),
    // so the post-selected atomic state is exp[-conj(lambda) O + G]|O>.
    const NilpotentPolynomial atomic =
        atomic_exponent_state(s.provenance, -std::conj(lambda), Cx{0.0, 0.0});
    const double formula = std::exp(-std::norm(lambda)) *
                           atomic_squared_sum(atomic) / (s.norm * s.norm);

    PostSelectedState out;
    out.primitive = "displace_then_vacuum";
    out.polynomial = normalized_atomic(atomic);
    out.success_probability_formula = formula;
    const double spread = std::abs(lambda);
    const int cutoff = s.num_atoms() + 8 +
                       static_cast<int>(std::ceil(2.0 * spread * spread +
                                                  6.0 * spread));
    out.success_probability = oracle_vacuum_probability(
        s, cutoff, [lambda](const DenseState& d) { return displace(d, lambda); });
    return out;
}

double SqueezeParams::r() const {
    return std::sqrt(2.0 * M_PI) / std::sqrt(1.0 + std::exp(2.0 * g * t));
}

double SqueezeParams::zeta() const {
    const double x = g * t;
    return 2.0 * std::tanh(x) - x;
}

double SqueezeParams::zeta_exact() const {
    return 0.5 * std::tanh(2.0 * g * t);
}

namespace {

PostSelectedState squeeze_impl(const JointState& s, const SqueezeParams& p,
                               double kernel, const char* tag) {
    const NilpotentPolynomial atomic =
        atomic_exponent_state(s.provenance, Cx{0.0, 0.0}, Cx{kernel, 0.0});

    // Exact closed form: the vacuum projection of the squeezed state is
    // sech(2gt)^{1/2} exp[zeta_exact O^2 + G]|O>, giving the probability
    // sech(2gt) * |exp[zeta_exact O^2 + G]|O>|^2 / A^2.
    const NilpotentPolynomial exact_atomic =
        atomic_exponent_state(s.provenance, Cx{0.0, 0.0},
                              Cx{p.zeta_exact(), 0.0});
    const double formula = (1.0 / std::cosh(2.0 * p.g * p.t)) *
                           atomic_squared_sum(exact_atomic) /
                           (s.norm * s.norm);

    PostSelectedState out;
    out.primitive = tag;
    out.polynomial = normalized_atomic(atomic);
    out.success_probability_formula = formula;
    const double stretch = std::sinh(std::abs(2.0 * p.g * p.t));
    const int cutoff =
        std::max(4 * s.num_atoms() + 4,
                 s.num_atoms() + 8 +
                     static_cast<int>(std::ceil(3.0 * stretch * stretch +
                                                8.0 * stretch)));
    const double g = p.g;
    const double t = p.t;
    out.success_probability = oracle_vacuum_probability(
        s, cutoff, [g, t](const DenseState& d) { return squeeze(d, g, t); });
    return out;
}

}  // namespace

PostSelectedState squeeze_then_vacuum(const JointState& s,
                                      const SqueezeParams& p) {
    return squeeze_impl(s, p, p.zeta(), "squeeze_then_vacuum");
}

PostSelectedState squeeze_then_vacuum_exact(const JointState& s,
                                            const SqueezeParams& p) {
    return squeeze_impl(s, p, p.zeta_exact(), "squeeze_then_vacuum_exact");
}

KerrParams::KerrParams(double kappa_in, double laser_amplitude_in,
                       double omega_laser_in, int photon_gap_in)
    : kappa(kappa_in),
      laser_amplitude(laser_amplitude_in),
      omega_laser(omega_laser_in),
      photon_gap(photon_gap_in) {
    if (kappa == 0.0) {
        throw InfeasibleProtocol("Kerr nonlinearity must be nonzero");
    }
    if (photon_gap < 1) {
        throw InfeasibleProtocol("photon gap must be at least 1");
    }
    omega_cavity = omega_laser - kappa * static_cast<double>(photon_gap);
}

double KerrParams::drive_cubed() const {
    return laser_amplitude * laser_amplitude * laser_amplitude;
}

double KerrParams::v0n() const {
    const double ratio = omega_laser / kappa;
    for (int n = 1; n <= photon_gap; ++n) {
        if (std::abs(ratio - static_cast<double>(n)) <
            1e-9 * std::max(1.0, std::abs(ratio))) {
            throw InfeasibleProtocol(
                "resonance collision: omega_laser/kappa equals " +
                std::to_string(n) +
                ", an intermediate multiphoton level becomes resonant");
        }
    }
    // Ladder energies in the laser frame are E_d = kappa d (d - N); the
    // N-th order path product is prod_{d=1..N-1} (E_0 - E_d)
    // = kappa^{N-1} ((N-1)!)^2 with step elements kappa eps^3 sqrt(d).
    const int n = photon_gap;
    double value = kappa * std::sqrt(factorial(n));
    for (int i = 0; i < n; ++i) value *= drive_cubed();
    const double denom = factorial(n - 1);
    return value / (denom * denom);
}

double KerrParams::v0n_printed() const {
    const double ratio = omega_laser / kappa;
    double denom = std::sqrt(factorial(photon_gap));
    for (int n = 1; n <= photon_gap; ++n) {
        denom *= static_cast<double>(n) - ratio;
    }
    if (std::abs(denom) < 1e-300) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double numer = 1.0;
    for (int i = 0; i < photon_gap; ++i) numer *= drive_cubed();
    return numer / denom;
}

PostSelectedState kerr_project(const JointState& s, const KerrParams& k,
                               Cx b_coeff, Cx c_coeff) {
    const int gap = k.photon_gap;
    if (gap != s.num_atoms()) {
        throw InfeasibleProtocol(
            "Kerr photon gap " + std::to_string(gap) +
            " must equal the atom count " + std::to_string(s.num_atoms()));
    }
    const double nb = std::sqrt(std::norm(b_coeff) + std::norm(c_coeff));
    if (nb <= 0.0) {
        throw InfeasibleProtocol("projection field state is the zero vector");
    }
    const Cx b = b_coeff / nb;
    const Cx c = c_coeff / nb;

    NilpotentPolynomial atomic(s.num_atoms(), 0);
    const double root_gap = std::sqrt(factorial(gap));
    for (const auto& [mono, coeff] : s.polynomial.terms()) {
        if (mono.photon_power == 0) {
            atomic.add_coeff(Monomial{mono.atoms, 0}, std::conj(b) * coeff);
        } else if (mono.photon_power == gap) {
            atomic.add_coeff(Monomial{mono.atoms, 0},
                             std::conj(c) * root_gap * coeff);
        }
    }
    const double sq = atomic_squared_sum(atomic);

    PostSelectedState out;
    out.primitive = "kerr_project";
    out.success_probability = sq / (s.norm * s.norm);
    out.success_probability_formula = out.success_probability;
    out.polynomial = normalized_atomic(std::move(atomic));
    return out;
}

KerrTiming kerr_dynamics_params(const KerrParams& k, double target_ratio) {
    KerrTiming timing;
    timing.v0n = k.v0n();
    double t = std::atan(target_ratio) / timing.v0n;
    const double period = M_PI / timing.v0n;
    while (t < 0.0) t += period;
    timing.t_kerr = t;
    return timing;
}

}  // namespace nilcav
