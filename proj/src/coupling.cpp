#include "nilcav/coupling.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

namespace nilcav {
namespace {

constexpr Cx kI{0.0, 1.0};

// phi1(z) = (exp(z) - 1) / z, entire; series below |z| = 0.5.
Cx phi1(Cx z) {
    if (std::abs(z) < 0.5) {
        Cx sum{0.0, 0.0};
        Cx term{1.0, 0.0};  // z^m / (m+1)! at m = 0
        for (int m = 0; m < 24; ++m) {
            sum += term;
            term *= z / static_cast<double>(m + 2);
        }
        return sum;
    }
    return (std::exp(z) - 1.0) / z;
}

// k-th derivative of phi1.  Series for small |z|, otherwise the recursion
// phi1^{(k)}(z) = (exp(z) - k*phi1^{(k-1)}(z)) / z obtained by differentiating
// z*phi1(z) = exp(z) - 1 repeatedly.
Cx phi1_deriv(int k, Cx z) {
    if (k == 0) return phi1(z);
    if (std::abs(z) < 0.9) {
        Cx sum{0.0, 0.0};
        Cx zpow{1.0, 0.0};
        double jfact = 1.0;
        for (int j = 0; j < 30; ++j) {
            sum += zpow / (jfact * static_cast<double>(j + k + 1));
            zpow *= z;
            jfact *= static_cast<double>(j + 1);
        }
        return sum;
    }
    const Cx ez = std::exp(z);
    Cx f = phi1(z);
    for (int i = 1; i <= k; ++i) f = (ez - static_cast<double>(i) * f) / z;
    return f;
}

// Integral of exp(i*a*tau) over [t0, t0 + dt].
Cx segment_phase_integral(double a, double t0, double dt) {
    return dt * std::exp(kI * a * t0) * phi1(kI * a * dt);
}

// Phi(x, y) = (phi1(x + y) - phi1(y)) / x, continued analytically through
// x = 0 via the Taylor series in x so nearly-resonant inner atoms do not
// suffer catastrophic cancellation.
Cx phi1_difference_quotient(Cx x, Cx y) {
    if (std::abs(x) > 1e-3) return (phi1(x + y) - phi1(y)) / x;
    Cx sum{0.0, 0.0};
    Cx xpow{1.0, 0.0};
    double kfact = 1.0;
    for (int k = 1; k <= 8; ++k) {
        kfact *= static_cast<double>(k);
        sum += phi1_deriv(k, y) * xpow / kfact;
        xpow *= x;
    }
    return sum;
}

// Integral over s in [0, dt] of exp(i*b*s) * (exp(i*a*s) - 1) / (i*a),
// i.e. the nested-growth part of a bilinear segment in shifted time.
Cx nested_growth_integral(double a, double b, double dt) {
    return dt * dt * phi1_difference_quotient(kI * a * dt, kI * b * dt);
}

double drive_of(const ScheduleSegment& seg, int atom) {
    return seg.couplings[static_cast<std::size_t>(atom)] * seg.amplitude;
}

}  // namespace

double ControlSchedule::total_duration() const {
    double total = 0.0;
    for (const auto& seg : segments) total += seg.duration;
    return total;
}

void ControlSchedule::validate() const {
    const auto n = omega_atoms.size();
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const auto& seg = segments[s];
        if (seg.couplings.size() != n) {
            throw DimensionMismatch("segment " + std::to_string(s) + " has " +
                                    std::to_string(seg.couplings.size()) +
                                    " couplings for " + std::to_string(n) +
                                    " atoms");
        }
        if (!(seg.duration > 0.0)) {
            throw DimensionMismatch("segment " + std::to_string(s) +
                                    " duration must be positive");
        }
    }
}

Cx CouplingCoefficients::pair_sum(int n, int m) const {
    return bilinear[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)] +
           bilinear[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)];
}

double CouplingCoefficients::antisymmetric_norm() const {
    double sq = 0.0;
    for (int n = 0; n < num_atoms; ++n) {
        for (int m = 0; m < num_atoms; ++m) {
            const Cx half = 0.5 * (bilinear[static_cast<std::size_t>(n)]
                                           [static_cast<std::size_t>(m)] -
                                   bilinear[static_cast<std::size_t>(m)]
                                           [static_cast<std::size_t>(n)]);
            sq += std::norm(half);
        }
    }
    return std::sqrt(sq);
}

CouplingCoefficients integrate_coefficients(const ControlSchedule& schedule,
                                            double excitation_bound) {
    schedule.validate();
    const int n_atoms = schedule.num_atoms();
    const double total = schedule.total_duration();

    std::vector<double> a(static_cast<std::size_t>(n_atoms));
    std::vector<double> b(static_cast<std::size_t>(n_atoms));
    for (int n = 0; n < n_atoms; ++n) {
        a[static_cast<std::size_t>(n)] =
            schedule.omega_cavity + schedule.omega_atoms[static_cast<std::size_t>(n)];
        b[static_cast<std::size_t>(n)] =
            schedule.omega_cavity - schedule.omega_atoms[static_cast<std::size_t>(n)];
    }

    CouplingCoefficients out;
    out.num_atoms = n_atoms;
    out.linear.assign(static_cast<std::size_t>(n_atoms), Cx{0.0, 0.0});
    out.bilinear.assign(
        static_cast<std::size_t>(n_atoms),
        std::vector<Cx>(static_cast<std::size_t>(n_atoms), Cx{0.0, 0.0}));

    // Running values of the inner integral J_n(t) = Int_0^t u_n exp(i a_n).
    std::vector<Cx> inner(static_cast<std::size_t>(n_atoms), Cx{0.0, 0.0});

    double t0 = 0.0;
    for (const auto& seg : schedule.segments) {
        const double dt = seg.duration;
        for (int m = 0; m < n_atoms; ++m) {
            const double um = drive_of(seg, m);
            if (um == 0.0) continue;
            const Cx outer_osc = segment_phase_integral(
                -b[static_cast<std::size_t>(m)], t0, dt);
            for (int n = 0; n < n_atoms; ++n) {
                const double un = drive_of(seg, n);
                Cx contrib = inner[static_cast<std::size_t>(n)] * outer_osc;
                if (un != 0.0) {
                    const double an = a[static_cast<std::size_t>(n)];
                    const double bm = b[static_cast<std::size_t>(m)];
                    contrib += un * std::exp(kI * (an - bm) * t0) *
                               nested_growth_integral(an, -bm, dt);
                }
                out.bilinear[static_cast<std::size_t>(n)]
                            [static_cast<std::size_t>(m)] += um * contrib;
            }
        }
        for (int n = 0; n < n_atoms; ++n) {
            const double un = drive_of(seg, n);
            if (un == 0.0) continue;
            const Cx growth =
                un * segment_phase_integral(a[static_cast<std::size_t>(n)], t0, dt);
            out.linear[static_cast<std::size_t>(n)] += growth;
            inner[static_cast<std::size_t>(n)] += growth;
        }
        t0 += dt;
    }

    for (int n = 0; n < n_atoms; ++n) {
        out.linear[static_cast<std::size_t>(n)] *=
            kI * std::exp(-kI * a[static_cast<std::size_t>(n)] * total);
        for (int m = 0; m < n_atoms; ++m) {
            const double wsum = schedule.omega_atoms[static_cast<std::size_t>(n)] +
                                schedule.omega_atoms[static_cast<std::size_t>(m)];
            out.bilinear[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)] *=
                std::exp(-kI * total * wsum);
        }
    }

    double proxy = 0.0;
    for (int n = 0; n < n_atoms; ++n) {
        proxy += std::norm(out.linear[static_cast<std::size_t>(n)]);
        for (int m = n + 1; m < n_atoms; ++m) proxy += std::norm(out.pair_sum(n, m));
    }
    out.excitation_proxy = proxy;
    out.within_weak_excitation = proxy <= excitation_bound;
    return out;
}

CouplingCoefficients negated(const CouplingCoefficients& c) {
    CouplingCoefficients out = c;
    for (auto& v : out.linear) v = -v;
    for (auto& row : out.bilinear) {
        for (auto& v : row) v = -v;
    }
    return out;
}

ResonanceReport resonance_report(const ControlSchedule& schedule) {
    schedule.validate();
    const int n_atoms = schedule.num_atoms();
    const double total = schedule.total_duration();

    ResonanceReport report;
    report.atoms.resize(static_cast<std::size_t>(n_atoms));
    for (int n = 0; n < n_atoms; ++n) {
        auto& entry = report.atoms[static_cast<std::size_t>(n)];
        const double a =
            schedule.omega_cavity + schedule.omega_atoms[static_cast<std::size_t>(n)];
        entry.phase_turn = std::abs(a) * total;
        entry.resonant = entry.phase_turn <= kResonancePhaseThreshold;
        double weighted = 0.0;
        for (const auto& seg : schedule.segments) {
            weighted += std::abs(drive_of(seg, n)) * seg.duration;
        }
        entry.mean_drive = total > 0.0 ? weighted / total : 0.0;
    }

    report.pair_suppression.assign(
        static_cast<std::size_t>(n_atoms),
        std::vector<double>(static_cast<std::size_t>(n_atoms), 0.0));
    const double floor = total > 0.0 ? 1.0 / total : 1.0;
    for (int n = 0; n < n_atoms; ++n) {
        for (int m = 0; m < n_atoms; ++m) {
            const double bm = schedule.omega_cavity -
                              schedule.omega_atoms[static_cast<std::size_t>(m)];
            const double scale = std::max(std::abs(bm), floor);
            report.pair_suppression[static_cast<std::size_t>(n)]
                                   [static_cast<std::size_t>(m)] =
                report.atoms[static_cast<std::size_t>(m)].mean_drive / scale;
        }
    }
    return report;
}

namespace {

ControlSchedule schedule_from_windows(double omega_cavity,
                                      const std::vector<double>& omega_atoms,
                                      const std::vector<ScheduleWindow>& windows,
                                      const Eigen::VectorXd& amplitudes) {
    ControlSchedule schedule;
    schedule.omega_cavity = omega_cavity;
    schedule.omega_atoms = omega_atoms;
    const int n_atoms = static_cast<int>(omega_atoms.size());
    for (std::size_t w = 0; w < windows.size(); ++w) {
        ScheduleSegment seg;
        seg.duration = windows[w].duration;
        seg.amplitude = amplitudes[static_cast<Eigen::Index>(w)];
        seg.couplings.assign(static_cast<std::size_t>(n_atoms), 0.0);
        for (int atom : windows[w].atoms) {
            if (atom < 0 || atom >= n_atoms) {
                throw DimensionMismatch("window atom index " +
                                        std::to_string(atom) + " out of range");
            }
            seg.couplings[static_cast<std::size_t>(atom)] = 1.0;
        }
        schedule.segments.push_back(std::move(seg));
    }
    return schedule;
}

Eigen::VectorXd stack_coefficients(const CouplingCoefficients& c) {
    const int n = c.num_atoms;
    const int n_pairs = n * (n - 1) / 2;
    Eigen::VectorXd v(2 * (n + n_pairs));
    Eigen::Index k = 0;
    for (int i = 0; i < n; ++i) {
        v[k++] = c.linear[static_cast<std::size_t>(i)].real();
        v[k++] = c.linear[static_cast<std::size_t>(i)].imag();
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Cx p = c.pair_sum(i, j);
            v[k++] = p.real();
            v[k++] = p.imag();
        }
    }
    return v;
}

}  // namespace

SolveResult solve_schedule(const CouplingCoefficients& target,
                           double omega_cavity,
                           const std::vector<double>& omega_atoms,
                           const std::vector<ScheduleWindow>& windows,
                           const SolveOptions& options) {
    const int n_atoms = static_cast<int>(omega_atoms.size());
    if (target.num_atoms != n_atoms) {
        throw DimensionMismatch("target has " + std::to_string(target.num_atoms) +
                                " atoms, frequencies describe " +
                                std::to_string(n_atoms));
    }
    if (windows.empty()) throw InfeasibleProtocol("no adjustable windows");

    const Eigen::VectorXd goal = stack_coefficients(target);
    const double goal_scale = std::max(1.0, goal.norm());

    int targeted = 0;
    for (int i = 0; i < n_atoms; ++i) {
        if (std::abs(target.linear[static_cast<std::size_t>(i)]) > 1e-14) ++targeted;
        for (int j = i + 1; j < n_atoms; ++j) {
            if (std::abs(target.pair_sum(i, j)) > 1e-14) ++targeted;
        }
    }
    if (static_cast<int>(windows.size()) < targeted) {
        throw InfeasibleProtocol(
            std::to_string(windows.size()) + " windows cannot match " +
            std::to_string(targeted) + " independent coefficients");
    }

    const Eigen::Index n_vars = static_cast<Eigen::Index>(windows.size());
    auto residual = [&](const Eigen::VectorXd& x) {
        const auto sched =
            schedule_from_windows(omega_cavity, omega_atoms, windows, x);
        return Eigen::VectorXd(stack_coefficients(integrate_coefficients(sched)) -
                               goal);
    };

    if (goal.norm() < 1e-15) {
        SolveResult result;
        result.schedule = schedule_from_windows(omega_cavity, omega_atoms, windows,
                                                Eigen::VectorXd::Zero(n_vars));
        result.residual_norm = residual(Eigen::VectorXd::Zero(n_vars)).norm();
        return result;
    }

    std::vector<Eigen::VectorXd> starts;
    starts.push_back(Eigen::VectorXd::Constant(n_vars, 1.0));
    starts.push_back(Eigen::VectorXd::Constant(n_vars, 0.3));
    starts.push_back(Eigen::VectorXd::Constant(n_vars, -0.7));

    SolveResult best;
    double best_residual = std::numeric_limits<double>::infinity();
    bool any_finished = false;
    double worst_condition = 0.0;

    for (const auto& start : starts) {
        Eigen::VectorXd x = start;
        Eigen::VectorXd r = residual(x);
        double damping = 1e-3;
        int iter = 0;
        bool singular = false;
        for (; iter < options.max_iterations; ++iter) {
            if (r.norm() <= options.tolerance * goal_scale) break;
            // The map from amplitudes to coefficients is exactly quadratic,
            // so central differences give the Jacobian to machine precision.
            Eigen::MatrixXd jac(r.size(), n_vars);
            const double h = 1e-3;
            for (Eigen::Index v = 0; v < n_vars; ++v) {
                Eigen::VectorXd xp = x, xm = x;
                xp[v] += h;
                xm[v] -= h;
                jac.col(v) = (residual(xp) - residual(xm)) / (2.0 * h);
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(
                jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const double smax = svd.singularValues()[0];
            const double smin =
                svd.singularValues()[svd.singularValues().size() - 1];
            const double condition =
                smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
            worst_condition = std::max(worst_condition, condition);
            if (!(condition < options.condition_limit)) {
                singular = true;
                break;
            }
            bool stepped = false;
            for (int attempt = 0; attempt < 12; ++attempt) {
                Eigen::MatrixXd normal = jac.transpose() * jac;
                normal.diagonal().array() += damping * smax * smax;
                const Eigen::VectorXd delta =
                    normal.ldlt().solve(-jac.transpose() * r);
                const Eigen::VectorXd x_new = x + delta;
                const Eigen::VectorXd r_new = residual(x_new);
                if (r_new.norm() < r.norm()) {
                    x = x_new;
                    r = r_new;
                    damping = std::max(damping * 0.1, 1e-12);
                    stepped = true;
                    break;
                }
                damping *= 10.0;
            }
            if (!stepped) break;  // stalled; accept current point
        }
        if (singular) continue;
        any_finished = true;
        if (r.norm() < best_residual) {
            best_residual = r.norm();
            best.schedule =
                schedule_from_windows(omega_cavity, omega_atoms, windows, x);
            best.residual_norm = r.norm();
            best.iterations = iter;
        }
        if (best_residual <= options.tolerance * goal_scale) break;
    }

    if (!any_finished) {
        throw SingularSystem(
            "schedule inversion is rank deficient for these windows",
            worst_condition);
    }
    return best;
}

}  // namespace nilcav
