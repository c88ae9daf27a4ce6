// Python bindings for the cavity-QED entangled-state toolkit: polynomial
// algebra, drive-coefficient integrals, joint-state construction, detection
// primitives, protocols, the dense oracle, and scenario execution.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nilcav/canonicalize.hpp"
#include "nilcav/control_ops.hpp"
#include "nilcav/coupling.hpp"
#include "nilcav/errors.hpp"
#include "nilcav/joint_state.hpp"
#include "nilcav/oracle.hpp"
#include "nilcav/polynomial.hpp"
#include "nilcav/protocols.hpp"
#include "nilcav/scenario.hpp"
#include "nilcav/schedule.hpp"
#include "nilcav/validation.hpp"

namespace py = pybind11;
using namespace nilcav;

namespace {

std::map<std::string, double> metrics_dict(const ProtocolReport& r) {
    std::map<std::string, double> out;
    for (const auto& [name, value] : r.metrics) out[name] = value;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "Nilpotent-polynomial toolkit for entangled-state preparation in a "
        "driven cavity";

    // Base first; more specific translators registered later take precedence.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InfeasibleProtocol>(m, "InfeasibleProtocol",
                                               PyExc_RuntimeError);
    py::register_exception<SingularSystem>(m, "SingularSystem",
                                           PyExc_RuntimeError);
    py::register_exception<CutoffInadequate>(m, "CutoffInadequate",
                                             PyExc_RuntimeError);

    // --- polynomial algebra --------------------------------------------------
    py::class_<Monomial>(m, "Monomial")
        .def(py::init<>())
        .def(py::init([](std::uint64_t atoms, int photon_power) {
                 return Monomial{atoms, photon_power};
             }),
             py::arg("atoms"), py::arg("photon_power") = 0)
        .def_readwrite("atoms", &Monomial::atoms)
        .def_readwrite("photon_power", &Monomial::photon_power);

    py::class_<NilpotentPolynomial>(m, "NilpotentPolynomial")
        .def(py::init<int, int>(), py::arg("num_atoms"), py::arg("photon_cap"))
        .def_property_readonly("num_atoms", &NilpotentPolynomial::num_atoms)
        .def_property_readonly("photon_cap", &NilpotentPolynomial::photon_cap)
        .def("coeff",
             [](const NilpotentPolynomial& p, std::uint64_t atoms, int photon) {
                 return p.coeff(Monomial{atoms, photon});
             },
             py::arg("atoms"), py::arg("photon_power") = 0)
        .def("set_coeff",
             [](NilpotentPolynomial& p, std::uint64_t atoms, int photon, Cx v) {
                 p.set_coeff(Monomial{atoms, photon}, v);
             },
             py::arg("atoms"), py::arg("photon_power"), py::arg("value"))
        .def("terms",
             [](const NilpotentPolynomial& p) {
                 std::vector<std::tuple<std::uint64_t, int, Cx>> out;
                 for (const auto& [mono, coeff] : p.terms()) {
                     out.emplace_back(mono.atoms, mono.photon_power, coeff);
                 }
                 return out;
             })
        .def("to_text", [](const NilpotentPolynomial& p) { return poly_to_text(p); })
        .def_static("from_text",
                    [](const std::string& text) { return poly_from_text(text); });

    m.def("poly_exp", &poly_exp, py::arg("f"));
    m.def("poly_log", &poly_log, py::arg("F"));
    m.def(
        "is_separable",
        [](const NilpotentPolynomial& f, int first_k) {
            return is_separable(f, Bipartition::first_k(first_k));
        },
        py::arg("f"), py::arg("first_k"),
        "True when no monomial crosses the cut between atoms [0, first_k) and "
        "the rest");

    py::class_<CanonicalForm>(m, "CanonicalForm")
        .def_readonly("tanglemeter", &CanonicalForm::tanglemeter)
        .def_readonly("vacuum_probability", &CanonicalForm::vacuum_probability)
        .def_readonly("converged", &CanonicalForm::converged)
        .def_readonly("sweeps", &CanonicalForm::sweeps);
    m.def(
        "canonicalize",
        [](const NilpotentPolynomial& state, int restarts, std::uint64_t seed) {
            CanonicalizeOptions opts;
            opts.restarts = restarts;
            opts.seed = seed;
            return canonicalize(state, opts);
        },
        py::arg("state"), py::arg("restarts") = 8, py::arg("seed") = 1);

    // --- schedules and coupling coefficients ---------------------------------
    py::class_<ScheduleSegment>(m, "ScheduleSegment")
        .def(py::init<>())
        .def(py::init([](double duration, double amplitude,
                         std::vector<double> couplings) {
                 ScheduleSegment s;
                 s.duration = duration;
                 s.amplitude = amplitude;
                 s.couplings = std::move(couplings);
                 return s;
             }),
             py::arg("duration"), py::arg("amplitude"), py::arg("couplings"))
        .def_readwrite("duration", &ScheduleSegment::duration)
        .def_readwrite("amplitude", &ScheduleSegment::amplitude)
        .def_readwrite("couplings", &ScheduleSegment::couplings);

    py::class_<ControlSchedule>(m, "ControlSchedule")
        .def(py::init<>())
        .def(py::init([](double omega_cavity, std::vector<double> omega_atoms,
                         std::vector<ScheduleSegment> segments) {
                 ControlSchedule s;
                 s.omega_cavity = omega_cavity;
                 s.omega_atoms = std::move(omega_atoms);
                 s.segments = std::move(segments);
                 return s;
             }),
             py::arg("omega_cavity"), py::arg("omega_atoms"),
             py::arg("segments"))
        .def_readwrite("omega_cavity", &ControlSchedule::omega_cavity)
        .def_readwrite("omega_atoms", &ControlSchedule::omega_atoms)
        .def_readwrite("segments", &ControlSchedule::segments)
        .def("total_duration", &ControlSchedule::total_duration);

    py::class_<CouplingCoefficients>(m, "CouplingCoefficients")
        .def(py::init<>())
        .def_readwrite("num_atoms", &CouplingCoefficients::num_atoms)
        .def_readwrite("linear", &CouplingCoefficients::linear)
        .def_readwrite("bilinear", &CouplingCoefficients::bilinear)
        .def_readonly("excitation_proxy", &CouplingCoefficients::excitation_proxy)
        .def_readonly("within_weak_excitation",
                      &CouplingCoefficients::within_weak_excitation)
        .def("pair_sum", &CouplingCoefficients::pair_sum, py::arg("n"),
             py::arg("m"))
        .def("antisymmetric_norm", &CouplingCoefficients::antisymmetric_norm);

    m.def("integrate_coefficients", &integrate_coefficients,
          py::arg("schedule"),
          py::arg("excitation_bound") = kDefaultExcitationBound);

    py::class_<ScheduleWindow>(m, "ScheduleWindow")
        .def(py::init([](double duration, std::vector<int> atoms) {
                 ScheduleWindow w;
                 w.duration = duration;
                 w.atoms = std::move(atoms);
                 return w;
             }),
             py::arg("duration"), py::arg("atoms"))
        .def_readwrite("duration", &ScheduleWindow::duration)
        .def_readwrite("atoms", &ScheduleWindow::atoms);

    py::class_<SolveResult>(m, "SolveResult")
        .def_readonly("schedule", &SolveResult::schedule)
        .def_readonly("residual_norm", &SolveResult::residual_norm)
        .def_readonly("iterations", &SolveResult::iterations);
    m.def(
        "solve_schedule",
        [](const CouplingCoefficients& target, double omega_cavity,
           const std::vector<double>& omega_atoms,
           const std::vector<ScheduleWindow>& windows) {
            return solve_schedule(target, omega_cavity, omega_atoms, windows);
        },
        py::arg("target"), py::arg("omega_cavity"), py::arg("omega_atoms"),
        py::arg("windows"));

    // --- joint state ----------------------------------------------------------
    py::class_<JointState>(m, "JointState")
        .def_readonly("polynomial", &JointState::polynomial)
        .def_readonly("norm", &JointState::norm)
        .def_property_readonly("num_atoms", &JointState::num_atoms);
    m.def("build_joint_state", &build_joint_state, py::arg("coefficients"));
    m.def("exact_norm", &exact_norm, py::arg("polynomial"));
    m.def("excitation_probability", &excitation_probability, py::arg("state"),
          py::arg("atom"));
    m.def("mean_excitation_fraction", &mean_excitation_fraction,
          py::arg("state"));
    m.def("gaussian_norm", &gaussian_norm, py::arg("coefficients"));

    // --- detection primitives -------------------------------------------------
    py::class_<PostSelectedState>(m, "PostSelectedState")
        .def_readonly("polynomial", &PostSelectedState::polynomial)
        .def_readonly("success_probability",
                      &PostSelectedState::success_probability)
        .def_readonly("success_probability_formula",
                      &PostSelectedState::success_probability_formula)
        .def_readonly("primitive", &PostSelectedState::primitive);
    m.def("nilpotential_of", &nilpotential_of, py::arg("state"));
    m.def("measure_photon_number", &measure_photon_number, py::arg("state"),
          py::arg("photons"));
    m.def("displace_then_vacuum", &displace_then_vacuum, py::arg("state"),
          py::arg("lambda_"));

    py::class_<SqueezeParams>(m, "SqueezeParams")
        .def(py::init([](double g, double t) {
                 SqueezeParams p;
                 p.g = g;
                 p.t = t;
                 return p;
             }),
             py::arg("g"), py::arg("t"))
        .def_readwrite("g", &SqueezeParams::g)
        .def_readwrite("t", &SqueezeParams::t)
        .def("eta", &SqueezeParams::eta)
        .def("r", &SqueezeParams::r)
        .def("zeta", &SqueezeParams::zeta)
        .def("zeta_exact", &SqueezeParams::zeta_exact);
    m.def("squeeze_then_vacuum", &squeeze_then_vacuum, py::arg("state"),
          py::arg("params"));

    py::class_<KerrParams>(m, "KerrParams")
        .def(py::init<double, double, double, int>(), py::arg("kappa"),
             py::arg("laser_amplitude"), py::arg("omega_laser"),
             py::arg("photon_gap"))
        .def_readonly("kappa", &KerrParams::kappa)
        .def_readonly("laser_amplitude", &KerrParams::laser_amplitude)
        .def_readonly("omega_laser", &KerrParams::omega_laser)
        .def_readonly("photon_gap", &KerrParams::photon_gap)
        .def_readonly("omega_cavity", &KerrParams::omega_cavity)
        .def("v0n", &KerrParams::v0n)
        .def("v0n_printed", &KerrParams::v0n_printed);
    m.def("kerr_project", &kerr_project, py::arg("state"), py::arg("params"),
          py::arg("b"), py::arg("c"));

    // --- protocols -------------------------------------------------------------
    py::class_<TargetState>(m, "TargetState")
        .def_static("ghz", &TargetState::ghz, py::arg("num_atoms"))
        .def_static("w", &TargetState::w, py::arg("num_atoms"))
        .def_static("dicke", &TargetState::dicke, py::arg("num_atoms"),
                    py::arg("excitations"));
    m.def("target_polynomial", &target_polynomial, py::arg("target"));
    m.def("polynomial_fidelity", &polynomial_fidelity, py::arg("a"),
          py::arg("b"));
    m.def("fidelity_to", &fidelity_to, py::arg("state"), py::arg("target"));

    m.def(
        "dicke_success_probability",
        [](int n, int mm, Cx c, bool exact) {
            return dicke_success_probability(
                n, mm, c,
                exact ? ProbabilityFormula::exact : ProbabilityFormula::paper);
        },
        py::arg("num_atoms"), py::arg("excitations"), py::arg("c"),
        py::arg("exact") = true);
    m.def("dicke_via_measurement", &dicke_via_measurement, py::arg("num_atoms"),
          py::arg("excitations"), py::arg("c"));

    py::class_<ProtocolReport>(m, "ProtocolReport")
        .def_readonly("protocol", &ProtocolReport::protocol)
        .def_readonly("success_probability",
                      &ProtocolReport::success_probability)
        .def_readonly("fidelity", &ProtocolReport::fidelity)
        .def("metric", &ProtocolReport::metric, py::arg("name"))
        .def("metrics", &metrics_dict);

    m.def("ghz_symbolic", &ghz_symbolic, py::arg("linear"));
    m.def(
        "ghz_protocol",
        [](const std::vector<Cx>& linear, const KerrParams& kerr,
           bool run_dynamic) {
            GhzOptions options;
            options.run_dynamic = run_dynamic;
            return ghz_protocol(linear, kerr, options);
        },
        py::arg("linear"), py::arg("kerr"), py::arg("run_dynamic") = true);

    py::class_<TwoEnsembleReport>(m, "TwoEnsembleReport")
        .def_readonly("report", &TwoEnsembleReport::report)
        .def_readonly("entangled", &TwoEnsembleReport::entangled)
        .def("beta",
             [](const TwoEnsembleReport& r, int k, int l) {
                 return r.collective_nilpotential.coeff(k, l);
             },
             py::arg("k"), py::arg("l"));
    m.def("two_ensemble_protocol", &two_ensemble_protocol,
          py::arg("atoms_per_ensemble"), py::arg("mu"), py::arg("params"));

    // --- dense oracle -----------------------------------------------------------
    py::class_<DenseState>(m, "DenseState")
        .def_readonly("num_atoms", &DenseState::num_atoms)
        .def_readonly("fock_cutoff", &DenseState::fock_cutoff)
        .def("amplitude", &DenseState::amplitude, py::arg("fock"),
             py::arg("mask"))
        .def("norm", &DenseState::norm)
        .def("fock_population", &DenseState::fock_population, py::arg("fock"));
    m.def(
        "propagate",
        [](const ControlSchedule& schedule, int fock_cutoff) {
            PropagationSettings settings;
            settings.fock_cutoff = fock_cutoff;
            return propagate(schedule, settings);
        },
        py::arg("schedule"), py::arg("fock_cutoff") = 0);
    m.def("to_interaction_picture", &to_interaction_picture, py::arg("state"),
          py::arg("schedule"));
    m.def("dense_from_polynomial", &dense_from_polynomial, py::arg("polynomial"),
          py::arg("fock_cutoff"));
    m.def("fidelity", &fidelity, py::arg("a"), py::arg("b"));

    // --- validation and scenarios ------------------------------------------------
    py::class_<ValidationRow>(m, "ValidationRow")
        .def_readonly("check", &ValidationRow::check)
        .def_readonly("value", &ValidationRow::value)
        .def_readonly("tolerance", &ValidationRow::tolerance)
        .def_readonly("status", &ValidationRow::status);
    py::class_<ValidationReport>(m, "ValidationReport")
        .def_readonly("rows", &ValidationReport::rows)
        .def("all_passed", &ValidationReport::all_passed);
    m.def(
        "run_validation",
        [](std::uint64_t seed) {
            ValidationOptions options;
            options.seed = seed;
            return run_validation(options);
        },
        py::arg("seed") = 1);
    m.def("validation_csv", &validation_csv, py::arg("report"));

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def_readonly("protocol", &ScenarioConfig::protocol)
        .def_readonly("seed", &ScenarioConfig::seed)
        .def_readonly("threads", &ScenarioConfig::threads)
        .def_readwrite("out_dir", &ScenarioConfig::out_dir);
    py::class_<ScenarioResult>(m, "ScenarioResult")
        .def_readonly("report", &ScenarioResult::report)
        .def_readonly("files_written", &ScenarioResult::files_written)
        .def_readonly("validation_failed", &ScenarioResult::validation_failed);
    m.def("scenario_from_text", &scenario_from_text, py::arg("text"));
    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("dump_config", &dump_config, py::arg("config"));
    m.def("run_scenario", &run_scenario, py::arg("config"));
}
