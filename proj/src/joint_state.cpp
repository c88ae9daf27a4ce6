#include "nilcav/joint_state.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <string>

namespace nilcav {
namespace {

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return f;
}

}  // namespace

JointState build_joint_state(const CouplingCoefficients& c) {
    const int n = c.num_atoms;
    NilpotentPolynomial exponent(n, n);
    for (int i = 0; i < n; ++i) {
        const Cx v = c.linear[static_cast<std::size_t>(i)];
        if (std::abs(v) > 0.0) {
            exponent.set_coeff(Monomial{uint64_t{1} << i, 1}, v);
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Cx v = c.pair_sum(i, j);
            if (std::abs(v) > 0.0) {
                const uint64_t mask = (uint64_t{1} << i) | (uint64_t{1} << j);
                exponent.set_coeff(Monomial{mask, 0}, v);
            }
        }
    }

    JointState state;
    // Each adag arrives multiplied by one sigma^+, so photon power never
    // exceeds atom degree and the cap N can never overflow.
    state.polynomial = poly_exp(exponent);
    state.norm = exact_norm(state.polynomial);
    state.provenance = c;
    return state;
}

double exact_norm(const NilpotentPolynomial& p) {
    double sq = 0.0;
    for (const auto& [mono, coeff] : p.terms()) {
        sq += std::norm(coeff) * factorial(mono.photon_power);
    }
    return std::sqrt(sq);
}

double excitation_probability(const JointState& s, int atom) {
    if (atom < 0 || atom >= s.num_atoms()) {
        throw DimensionMismatch("atom index " + std::to_string(atom) +
                                " out of range for " +
                                std::to_string(s.num_atoms()) + " atoms");
    }
    const uint64_t bit = uint64_t{1} << atom;
    double hit = 0.0;
    double total = 0.0;
    for (const auto& [mono, coeff] : s.polynomial.terms()) {
        const double w = std::norm(coeff) * factorial(mono.photon_power);
        total += w;
        if (mono.atoms & bit) hit += w;
    }
    return total > 0.0 ? hit / total : 0.0;
}

double mean_excitation_fraction(const JointState& s) {
    const int n = s.num_atoms();
    if (n == 0) return 0.0;
    double weighted = 0.0;
    double total = 0.0;
    for (const auto& [mono, coeff] : s.polynomial.terms()) {
        const double w = std::norm(coeff) * factorial(mono.photon_power);
        total += w;
        weighted += w * static_cast<double>(mono.atom_degree());
    }
    return total > 0.0 ? weighted / (total * static_cast<double>(n)) : 0.0;
}

GaussianNormDiagnostic gaussian_norm_diagnostic(const CouplingCoefficients& c) {
    const int n = c.num_atoms;
    using Mat = Eigen::MatrixXcd;

    Mat m = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Cx li = c.linear[static_cast<std::size_t>(i)];
            const Cx lj = c.linear[static_cast<std::size_t>(j)];
            const Cx g = c.bilinear[static_cast<std::size_t>(i)]
                                   [static_cast<std::size_t>(j)];
            m(i, j) = 0.5 * li * std::conj(lj);
            m(n + i, n + j) = 0.5 * std::conj(li) * lj;
            m(i, n + j) = g;
            m(n + j, i) = std::conj(g);
        }
    }

    Eigen::JacobiSVD<Mat> svd(m);
    const double smax = svd.singularValues()[0];
    const double smin = svd.singularValues()[svd.singularValues().size() - 1];
    const double condition =
        smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(condition <= 1e12)) {
        throw SingularSystem(
            "coefficient matrix is singular (degenerate low-drive regime)",
            condition);
    }

    const Mat m_inv = m.inverse();
    Mat v = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        v(i, n + i) = 1.0;
        v(n + i, i) = 1.0;
    }
    Mat b = Mat::Zero(4 * n, 4 * n);
    b.topLeftCorner(2 * n, 2 * n) = v;
    b.topRightCorner(2 * n, 2 * n) = v;
    b.bottomLeftCorner(2 * n, 2 * n) = v;
    b.bottomRightCorner(2 * n, 2 * n) = v - m_inv;

    const Cx det_m = m.determinant();
    const Cx det_b = b.determinant();
    const Cx ratio = (1.0 / det_m) / det_b;

    GaussianNormDiagnostic diag;
    diag.value = std::abs(ratio);
    diag.signed_ratio = ratio.real();
    diag.condition = condition;
    diag.det_m_abs = std::abs(det_m);
    diag.det_b_abs = std::abs(det_b);
    return diag;
}

double gaussian_norm(const CouplingCoefficients& c) {
    return gaussian_norm_diagnostic(c).value;
}

std::string state_summary_json(const JointState& s) {
    std::string out = "{\n";
    out += "  \"num_atoms\": " + std::to_string(s.num_atoms()) + ",\n";
    out += "  \"norm\": " + format_double(s.norm) + ",\n";
    out += "  \"mean_excitation_fraction\": " +
           format_double(mean_excitation_fraction(s)) + ",\n";
    out += "  \"within_weak_excitation\": ";
    out += s.provenance.within_weak_excitation ? "true" : "false";
    out += ",\n  \"excitation_probability\": [";
    for (int a = 0; a < s.num_atoms(); ++a) {
        if (a > 0) out += ", ";
        out += format_double(excitation_probability(s, a));
    }
    out += "]\n}\n";
    return out;
}

}  // namespace nilcav
