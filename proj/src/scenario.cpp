#include "nilcav/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <utility>

#include "nilcav/canonicalize.hpp"
#include "nilcav/control_ops.hpp"
#include "nilcav/errors.hpp"
#include "nilcav/joint_state.hpp"
#include "nilcav/validation.hpp"

namespace nilcav {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

void check_keys(const Json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            fail(path + "." + it.key(), "unknown key");
        }
    }
}

const Json& require_key(const Json& obj, const std::string& path,
                        const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing required key '") + key + "'");
    return *it;
}

double as_double(const Json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

int as_int(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

bool as_bool(const Json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected a boolean");
    return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

// Complex values are two-element [re, im] arrays.
Cx as_complex(const Json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number()) {
        fail(path, "expected a complex value as [re, im]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

Json complex_to_json(Cx z) { return Json::array({z.real(), z.imag()}); }

std::vector<Cx> as_complex_list(const Json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of [re, im] pairs");
    std::vector<Cx> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(as_complex(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

// --- section parsers ---------------------------------------------------------

DickeSweepConfig parse_dicke_sweep(const Json& v, const std::string& path) {
    check_keys(v, path, {"num_atoms", "excitations", "c_abs_min", "c_abs_max",
                         "c_abs_steps"});
    DickeSweepConfig cfg;
    cfg.num_atoms = as_int(require_key(v, path, "num_atoms"), path + ".num_atoms");
    if (cfg.num_atoms < 1 || cfg.num_atoms > 62) {
        fail(path + ".num_atoms", "must be in 1..62");
    }
    if (auto it = v.find("excitations"); it != v.end()) {
        if (!it->is_array()) fail(path + ".excitations", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string p = path + ".excitations[" + std::to_string(i) + "]";
            const int m = as_int((*it)[i], p);
            if (m < 0 || m > cfg.num_atoms) fail(p, "must be in 0..num_atoms");
            cfg.excitations.push_back(m);
        }
    } else {
        for (int m = 1; m <= cfg.num_atoms; ++m) cfg.excitations.push_back(m);
    }
    if (auto it = v.find("c_abs_min"); it != v.end())
        cfg.c_abs_min = as_double(*it, path + ".c_abs_min");
    if (auto it = v.find("c_abs_max"); it != v.end())
        cfg.c_abs_max = as_double(*it, path + ".c_abs_max");
    if (auto it = v.find("c_abs_steps"); it != v.end())
        cfg.c_abs_steps = as_int(*it, path + ".c_abs_steps");
    if (cfg.c_abs_steps < 1) fail(path + ".c_abs_steps", "must be >= 1");
    if (cfg.c_abs_min < 0.0 || cfg.c_abs_max < cfg.c_abs_min) {
        fail(path, "require 0 <= c_abs_min <= c_abs_max");
    }
    return cfg;
}

GhzConfig parse_ghz(const Json& v, const std::string& path) {
    check_keys(v, path,
               {"linear", "kappa", "laser_amplitude", "omega_laser",
                "run_dynamic"});
    GhzConfig cfg;
    cfg.linear = as_complex_list(require_key(v, path, "linear"), path + ".linear");
    if (cfg.linear.size() < 2) fail(path + ".linear", "need at least 2 atoms");
    cfg.kappa = as_double(require_key(v, path, "kappa"), path + ".kappa");
    cfg.laser_amplitude = as_double(require_key(v, path, "laser_amplitude"),
                                    path + ".laser_amplitude");
    cfg.omega_laser =
        as_double(require_key(v, path, "omega_laser"), path + ".omega_laser");
    if (auto it = v.find("run_dynamic"); it != v.end())
        cfg.run_dynamic = as_bool(*it, path + ".run_dynamic");
    return cfg;
}

TwoEnsembleConfig parse_two_ensemble(const Json& v, const std::string& path) {
    check_keys(v, path, {"atoms_per_ensemble", "mu", "g", "t"});
    TwoEnsembleConfig cfg;
    cfg.atoms_per_ensemble = as_int(require_key(v, path, "atoms_per_ensemble"),
                                    path + ".atoms_per_ensemble");
    if (cfg.atoms_per_ensemble < 1 || cfg.atoms_per_ensemble > 31) {
        fail(path + ".atoms_per_ensemble", "must be in 1..31");
    }
    cfg.mu = as_complex(require_key(v, path, "mu"), path + ".mu");
    cfg.g = as_double(require_key(v, path, "g"), path + ".g");
    cfg.t = as_double(require_key(v, path, "t"), path + ".t");
    return cfg;
}

ControlSchedule parse_schedule(const Json& v, const std::string& path) {
    check_keys(v, path, {"omega_cavity", "omega_atoms", "segments"});
    ControlSchedule s;
    s.omega_cavity =
        as_double(require_key(v, path, "omega_cavity"), path + ".omega_cavity");
    const Json& atoms = require_key(v, path, "omega_atoms");
    if (!atoms.is_array() || atoms.empty()) {
        fail(path + ".omega_atoms", "expected a nonempty array of numbers");
    }
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        s.omega_atoms.push_back(
            as_double(atoms[i], path + ".omega_atoms[" + std::to_string(i) + "]"));
    }
    const Json& segs = require_key(v, path, "segments");
    if (!segs.is_array() || segs.empty()) {
        fail(path + ".segments", "expected a nonempty array");
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const std::string p = path + ".segments[" + std::to_string(i) + "]";
        const Json& seg = segs[i];
        if (!seg.is_object()) fail(p, "expected an object");
        check_keys(seg, p, {"duration", "amplitude", "couplings"});
        ScheduleSegment out;
        out.duration = as_double(require_key(seg, p, "duration"), p + ".duration");
        if (!(out.duration > 0.0)) fail(p + ".duration", "must be > 0");
        out.amplitude =
            as_double(require_key(seg, p, "amplitude"), p + ".amplitude");
        const Json& coup = require_key(seg, p, "couplings");
        if (!coup.is_array() || coup.size() != s.omega_atoms.size()) {
            fail(p + ".couplings", "expected one entry per atom");
        }
        for (std::size_t a = 0; a < coup.size(); ++a) {
            out.couplings.push_back(
                as_double(coup[a], p + ".couplings[" + std::to_string(a) + "]"));
        }
        s.segments.push_back(std::move(out));
    }
    return s;
}

Json schedule_to_json(const ControlSchedule& s) {
    Json v;
    v["omega_cavity"] = s.omega_cavity;
    v["omega_atoms"] = s.omega_atoms;
    Json segs = Json::array();
    for (const auto& seg : s.segments) {
        Json j;
        j["duration"] = seg.duration;
        j["amplitude"] = seg.amplitude;
        j["couplings"] = seg.couplings;
        segs.push_back(std::move(j));
    }
    v["segments"] = std::move(segs);
    return v;
}

// {"linear": [[re,im],...], "pairs": [{"n", "m", "value"}...]} with 1-based
// atom indices; each unordered pair may appear once and carries the full
// symmetrized pair coefficient.
CouplingCoefficients parse_coefficients(const Json& v, const std::string& path) {
    check_keys(v, path, {"linear", "pairs"});
    CouplingCoefficients c;
    c.linear = as_complex_list(require_key(v, path, "linear"), path + ".linear");
    if (c.linear.empty()) fail(path + ".linear", "need at least one atom");
    c.num_atoms = static_cast<int>(c.linear.size());
    c.bilinear.assign(static_cast<std::size_t>(c.num_atoms),
                      std::vector<Cx>(static_cast<std::size_t>(c.num_atoms)));
    if (auto it = v.find("pairs"); it != v.end()) {
        if (!it->is_array()) fail(path + ".pairs", "expected an array");
        std::set<std::pair<int, int>> seen;
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string p = path + ".pairs[" + std::to_string(i) + "]";
            const Json& entry = (*it)[i];
            if (!entry.is_object()) fail(p, "expected an object");
            check_keys(entry, p, {"n", "m", "value"});
            const int n = as_int(require_key(entry, p, "n"), p + ".n");
            const int m = as_int(require_key(entry, p, "m"), p + ".m");
            if (n < 1 || n > c.num_atoms || m < 1 || m > c.num_atoms || n == m) {
                fail(p, "atom indices must be distinct and in 1..num_atoms");
            }
            const auto key = std::minmax(n, m);
            if (!seen.insert(key).second) fail(p, "duplicate pair");
            c.bilinear[static_cast<std::size_t>(key.first - 1)]
                      [static_cast<std::size_t>(key.second - 1)] =
                as_complex(require_key(entry, p, "value"), p + ".value");
        }
    }
    double proxy = 0.0;
    for (const Cx& l : c.linear) proxy += std::norm(l);
    for (int n = 0; n < c.num_atoms; ++n) {
        for (int m = n + 1; m < c.num_atoms; ++m) {
            proxy += std::norm(c.pair_sum(n, m));
        }
    }
    c.excitation_proxy = proxy;
    c.within_weak_excitation = proxy <= kDefaultExcitationBound;
    return c;
}

Json coefficients_to_json(const CouplingCoefficients& c) {
    Json v;
    Json linear = Json::array();
    for (const Cx& l : c.linear) linear.push_back(complex_to_json(l));
    v["linear"] = std::move(linear);
    Json pairs = Json::array();
    for (int n = 0; n < c.num_atoms; ++n) {
        for (int m = n + 1; m < c.num_atoms; ++m) {
            const Cx sum = c.pair_sum(n, m);
            if (sum == Cx{}) continue;
            Json entry;
            entry["n"] = n + 1;
            entry["m"] = m + 1;
            entry["value"] = complex_to_json(sum);
            pairs.push_back(std::move(entry));
        }
    }
    v["pairs"] = std::move(pairs);
    return v;
}

ScheduleSolveConfig parse_schedule_solve(const Json& v, const std::string& path) {
    check_keys(v, path, {"omega_cavity", "omega_atoms", "windows", "target"});
    ScheduleSolveConfig cfg;
    cfg.omega_cavity =
        as_double(require_key(v, path, "omega_cavity"), path + ".omega_cavity");
    const Json& atoms = require_key(v, path, "omega_atoms");
    if (!atoms.is_array() || atoms.empty()) {
        fail(path + ".omega_atoms", "expected a nonempty array of numbers");
    }
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        cfg.omega_atoms.push_back(
            as_double(atoms[i], path + ".omega_atoms[" + std::to_string(i) + "]"));
    }
    const int num_atoms = static_cast<int>(cfg.omega_atoms.size());
    const Json& windows = require_key(v, path, "windows");
    if (!windows.is_array() || windows.empty()) {
        fail(path + ".windows", "expected a nonempty array");
    }
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const std::string p = path + ".windows[" + std::to_string(i) + "]";
        const Json& w = windows[i];
        if (!w.is_object()) fail(p, "expected an object");
        check_keys(w, p, {"duration", "atoms"});
        ScheduleWindow out;
        out.duration = as_double(require_key(w, p, "duration"), p + ".duration");
        if (!(out.duration > 0.0)) fail(p + ".duration", "must be > 0");
        const Json& in_atoms = require_key(w, p, "atoms");
        if (!in_atoms.is_array() || in_atoms.empty()) {
            fail(p + ".atoms", "expected a nonempty array of 1-based indices");
        }
        std::set<int> seen;
        for (std::size_t a = 0; a < in_atoms.size(); ++a) {
            const std::string q = p + ".atoms[" + std::to_string(a) + "]";
            const int idx = as_int(in_atoms[a], q);
            if (idx < 1 || idx > num_atoms) fail(q, "must be in 1..num_atoms");
            if (!seen.insert(idx).second) fail(q, "duplicate atom in window");
            out.atoms.push_back(idx - 1);
        }
        cfg.windows.push_back(std::move(out));
    }
    cfg.target =
        parse_coefficients(require_key(v, path, "target"), path + ".target");
    if (cfg.target.num_atoms != num_atoms) {
        fail(path + ".target.linear", "size must match omega_atoms");
    }
    return cfg;
}

CanonicalizeConfig parse_canonicalize(const Json& v, const std::string& path) {
    check_keys(v, path, {"polynomial", "restarts"});
    CanonicalizeConfig cfg;
    cfg.polynomial =
        as_string(require_key(v, path, "polynomial"), path + ".polynomial");
    try {
        (void)poly_from_text(cfg.polynomial);
    } catch (const Error& e) {
        fail(path + ".polynomial", e.what());
    }
    if (auto it = v.find("restarts"); it != v.end()) {
        cfg.restarts = as_int(*it, path + ".restarts");
        if (cfg.restarts < 1) fail(path + ".restarts", "must be >= 1");
    }
    return cfg;
}

bool is_terminal_op(const std::string& op) {
    return op == "measure" || op == "displace" || op == "squeeze" ||
           op == "kerr";
}

PipelineStage parse_stage(const Json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected an object");
    PipelineStage stage;
    stage.op = as_string(require_key(v, path, "op"), path + ".op");
    if (stage.op == "measure") {
        check_keys(v, path, {"op", "photons"});
        stage.photons = as_int(require_key(v, path, "photons"), path + ".photons");
        if (stage.photons < 0) fail(path + ".photons", "must be >= 0");
    } else if (stage.op == "displace") {
        check_keys(v, path, {"op", "lambda"});
        stage.lambda = as_complex(require_key(v, path, "lambda"), path + ".lambda");
    } else if (stage.op == "squeeze") {
        check_keys(v, path, {"op", "g", "t"});
        stage.g = as_double(require_key(v, path, "g"), path + ".g");
        stage.t = as_double(require_key(v, path, "t"), path + ".t");
    } else if (stage.op == "kerr") {
        check_keys(v, path,
                   {"op", "kappa", "laser_amplitude", "omega_laser", "b", "c"});
        stage.kappa = as_double(require_key(v, path, "kappa"), path + ".kappa");
        stage.laser_amplitude = as_double(
            require_key(v, path, "laser_amplitude"), path + ".laser_amplitude");
        stage.omega_laser = as_double(require_key(v, path, "omega_laser"),
                                      path + ".omega_laser");
        stage.b = as_complex(require_key(v, path, "b"), path + ".b");
        stage.c = as_complex(require_key(v, path, "c"), path + ".c");
    } else if (stage.op == "canonicalize") {
        check_keys(v, path, {"op", "restarts"});
        if (auto it = v.find("restarts"); it != v.end()) {
            stage.restarts = as_int(*it, path + ".restarts");
            if (stage.restarts < 1) fail(path + ".restarts", "must be >= 1");
        }
    } else {
        fail(path + ".op",
             "unknown stage (expected measure, displace, squeeze, kerr, or "
             "canonicalize)");
    }
    return stage;
}

PipelineConfig parse_pipeline(const Json& v, const std::string& path) {
    check_keys(v, path, {"schedule", "coefficients", "stages"});
    PipelineConfig cfg;
    const bool has_schedule = v.contains("schedule");
    const bool has_coefficients = v.contains("coefficients");
    if (has_schedule == has_coefficients) {
        fail(path, "provide exactly one of 'schedule' or 'coefficients'");
    }
    if (has_schedule) {
        cfg.schedule = parse_schedule(v["schedule"], path + ".schedule");
    } else {
        cfg.coefficients =
            parse_coefficients(v["coefficients"], path + ".coefficients");
    }
    const Json& stages = require_key(v, path, "stages");
    if (!stages.is_array()) fail(path + ".stages", "expected an array");
    int terminal_count = 0;
    int terminal_index = -1;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const std::string p = path + ".stages[" + std::to_string(i) + "]";
        cfg.stages.push_back(parse_stage(stages[i], p));
        if (is_terminal_op(cfg.stages.back().op)) {
            ++terminal_count;
            terminal_index = static_cast<int>(i);
        }
    }
    if (terminal_count == 0) {
        fail(path + ".stages", "no terminal measurement (need exactly one of "
                               "measure/displace/squeeze/kerr)");
    }
    if (terminal_count > 1) {
        fail(path + ".stages", "multiple terminal measurements (need exactly one)");
    }
    for (int i = 0; i < terminal_index; ++i) {
        if (cfg.stages[static_cast<std::size_t>(i)].op == "canonicalize") {
            fail(path + ".stages[" + std::to_string(i) + "]",
                 "canonicalize must follow the terminal measurement");
        }
    }
    return cfg;
}

std::string section_key_for(const std::string& protocol) {
    if (protocol == "dicke-sweep") return "dicke_sweep";
    if (protocol == "two-ensemble") return "two_ensemble";
    if (protocol == "schedule-solve") return "schedule_solve";
    return protocol;  // ghz, validate, canonicalize, pipeline
}

// --- output helpers ----------------------------------------------------------

void write_file(const fs::path& dir, const std::string& name,
                const std::string& content, ScenarioResult& result) {
    const fs::path full = dir / name;
    std::ofstream out(full, std::ios::binary);
    if (!out) throw Error("cannot open output file " + full.string());
    out << content;
    out.close();
    if (!out) throw Error("failed writing output file " + full.string());
    result.files_written.push_back(full.string());
}

std::string report_csv(const ProtocolReport& report) {
    std::string out = "metric,value\n";
    out += "success_probability," + format_double(report.success_probability) + "\n";
    out += "fidelity," + format_double(report.fidelity) + "\n";
    for (const auto& [name, value] : report.metrics) {
        out += name + "," + format_double(value) + "\n";
    }
    return out;
}

// 1-based coefficient table; linear entries use m = 0.
std::string coefficients_csv(const CouplingCoefficients& c) {
    std::string out = "n,m,re,im\n";
    for (int n = 0; n < c.num_atoms; ++n) {
        out += std::to_string(n + 1) + ",0," +
               format_double(c.linear[static_cast<std::size_t>(n)].real()) + "," +
               format_double(c.linear[static_cast<std::size_t>(n)].imag()) + "\n";
    }
    for (int n = 0; n < c.num_atoms; ++n) {
        for (int m = n + 1; m < c.num_atoms; ++m) {
            const Cx sum = c.pair_sum(n, m);
            out += std::to_string(n + 1) + "," + std::to_string(m + 1) + "," +
                   format_double(sum.real()) + "," + format_double(sum.imag()) +
                   "\n";
        }
    }
    return out;
}

// --- protocol runners ---------------------------------------------------------

void run_dicke_sweep(const ScenarioConfig& config, const fs::path& dir,
                     ScenarioResult& result) {
    const DickeSweepConfig& cfg = *config.dicke_sweep;
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(cfg.c_abs_steps));
    for (int i = 0; i < cfg.c_abs_steps; ++i) {
        grid.push_back(cfg.c_abs_steps == 1
                           ? cfg.c_abs_min
                           : cfg.c_abs_min + (cfg.c_abs_max - cfg.c_abs_min) *
                                                 static_cast<double>(i) /
                                                 static_cast<double>(
                                                     cfg.c_abs_steps - 1));
    }
    const DickeSweep sweep =
        dicke_sweep(cfg.num_atoms, cfg.excitations, grid, config.threads);

    std::string csv = "N,M,c_abs,P_paper,P_exact\n";
    for (const auto& row : sweep.rows) {
        csv += std::to_string(row.num_atoms) + "," +
               std::to_string(row.excitations) + "," +
               format_double(row.c_abs) + "," + format_double(row.p_paper) +
               "," + format_double(row.p_exact) + "\n";
    }
    write_file(dir, "dicke_sweep.csv", csv, result);

    std::string maxima = "M,c_abs_at_max,P_exact_max,interior\n";
    for (const auto& m : sweep.maxima) {
        maxima += std::to_string(m.excitations) + "," +
                  format_double(m.c_at_max) + "," + format_double(m.p_max) +
                  "," + (m.interior ? "1" : "0") + "\n";
    }
    write_file(dir, "dicke_maxima.csv", maxima, result);

    result.report.protocol = "dicke-sweep";
    result.report.add("rows", static_cast<double>(sweep.rows.size()));
    for (const auto& m : sweep.maxima) {
        const std::string tag = "m" + std::to_string(m.excitations);
        result.report.add(tag + "_c_at_max", m.c_at_max);
        result.report.add(tag + "_p_max", m.p_max);
        result.report.add(tag + "_interior", m.interior ? 1.0 : 0.0);
    }
}

void run_ghz(const ScenarioConfig& config, const fs::path& dir,
             ScenarioResult& result) {
    const GhzConfig& cfg = *config.ghz;
    const KerrParams kerr(cfg.kappa, cfg.laser_amplitude, cfg.omega_laser,
                          static_cast<int>(cfg.linear.size()));
    GhzOptions options;
    options.run_dynamic = cfg.run_dynamic;
    result.report = ghz_protocol(cfg.linear, kerr, options);
    write_file(dir, "ghz_report.csv", report_csv(result.report), result);
}

void run_two_ensemble(const ScenarioConfig& config, const fs::path& dir,
                      ScenarioResult& result) {
    const TwoEnsembleConfig& cfg = *config.two_ensemble;
    SqueezeParams p;
    p.g = cfg.g;
    p.t = cfg.t;
    const TwoEnsembleReport r =
        two_ensemble_protocol(cfg.atoms_per_ensemble, cfg.mu, p);
    result.report = r.report;
    write_file(dir, "two_ensemble_report.csv", report_csv(result.report), result);

    std::string csv = "k,l,re,im\n";
    for (const auto& [kl, value] : r.collective_nilpotential.beta) {
        csv += std::to_string(kl.first) + "," + std::to_string(kl.second) +
               "," + format_double(value.real()) + "," +
               format_double(value.imag()) + "\n";
    }
    write_file(dir, "two_ensemble_nilpotential.csv", csv, result);
}

void run_schedule_solve(const ScenarioConfig& config, const fs::path& dir,
                        ScenarioResult& result) {
    const ScheduleSolveConfig& cfg = *config.schedule_solve;
    const SolveResult solved = solve_schedule(cfg.target, cfg.omega_cavity,
                                              cfg.omega_atoms, cfg.windows);
    result.report.protocol = "schedule-solve";
    result.report.add("residual_norm", solved.residual_norm);
    result.report.add("iterations", static_cast<double>(solved.iterations));
    for (std::size_t i = 0; i < solved.schedule.segments.size(); ++i) {
        result.report.add("window" + std::to_string(i + 1) + "_amplitude",
                          solved.schedule.segments[i].amplitude);
    }
    write_file(dir, "solved_schedule.json",
               schedule_to_json(solved.schedule).dump(2) + "\n", result);
    write_file(dir, "solved_coefficients.csv",
               coefficients_csv(integrate_coefficients(solved.schedule)),
               result);
    write_file(dir, "solve_report.csv", report_csv(result.report), result);
}

void run_validate(const ScenarioConfig& config, const fs::path& dir,
                  ScenarioResult& result) {
    ValidationOptions options;
    options.seed = config.seed;
    const ValidationReport report = run_validation(options);
    write_file(dir, "validation_report.csv", validation_csv(report), result);
    int failures = 0;
    for (const auto& row : report.rows) {
        if (row.status == "fail") ++failures;
    }
    result.report.protocol = "validate";
    result.report.add("checks", static_cast<double>(report.rows.size()));
    result.report.add("failures", static_cast<double>(failures));
    result.validation_failed = !report.all_passed();
}

void run_canonicalize(const ScenarioConfig& config, const fs::path& dir,
                      ScenarioResult& result) {
    const CanonicalizeConfig& cfg = *config.canonicalize;
    const NilpotentPolynomial state = poly_from_text(cfg.polynomial);
    CanonicalizeOptions options;
    options.restarts = cfg.restarts;
    options.seed = config.seed;
    const CanonicalForm canon = ::nilcav::canonicalize(state, options);
    result.report.protocol = "canonicalize";
    result.report.add("vacuum_probability", canon.vacuum_probability);
    result.report.add("converged", canon.converged ? 1.0 : 0.0);
    result.report.add("sweeps", static_cast<double>(canon.sweeps));
    write_file(dir, "tanglemeter.txt", poly_to_text(canon.tanglemeter), result);
    write_file(dir, "canonicalize_report.csv", report_csv(result.report), result);
}

void run_pipeline(const ScenarioConfig& config, const fs::path& dir,
                  ScenarioResult& result) {
    const PipelineConfig& cfg = *config.pipeline;
    CouplingCoefficients coeffs;
    if (cfg.schedule) {
        coeffs = integrate_coefficients(*cfg.schedule);
        write_file(dir, "coefficients.csv", coefficients_csv(coeffs), result);
    } else {
        coeffs = *cfg.coefficients;
    }
    const JointState state = build_joint_state(coeffs);

    result.report.protocol = "pipeline";
    result.report.add("excitation_proxy", coeffs.excitation_proxy);
    result.report.add("within_weak_excitation",
                      coeffs.within_weak_excitation ? 1.0 : 0.0);

    PostSelectedState post;
    for (const auto& stage : cfg.stages) {
        if (stage.op == "measure") {
            post = measure_photon_number(state, stage.photons);
        } else if (stage.op == "displace") {
            post = displace_then_vacuum(state, stage.lambda);
        } else if (stage.op == "squeeze") {
            SqueezeParams p;
            p.g = stage.g;
            p.t = stage.t;
            post = squeeze_then_vacuum(state, p);
        } else if (stage.op == "kerr") {
            const KerrParams kerr(stage.kappa, stage.laser_amplitude,
                                  stage.omega_laser, coeffs.num_atoms);
            post = kerr_project(state, kerr, stage.b, stage.c);
        } else {  // canonicalize (validated to follow the terminal stage)
            CanonicalizeOptions options;
            options.restarts = stage.restarts;
            options.seed = config.seed;
            const CanonicalForm canon =
                ::nilcav::canonicalize(post.polynomial, options);
            result.report.add("vacuum_probability", canon.vacuum_probability);
            result.report.add("canonicalize_sweeps",
                              static_cast<double>(canon.sweeps));
            write_file(dir, "tanglemeter.txt", poly_to_text(canon.tanglemeter),
                       result);
        }
        if (is_terminal_op(stage.op)) {
            result.report.success_probability = post.success_probability;
            result.report.add("success_probability_" + stage.op,
                              post.success_probability);
            if (!std::isnan(post.success_probability_formula)) {
                result.report.add("success_probability_formula",
                                  post.success_probability_formula);
            }
            write_file(dir, "post_state.txt", poly_to_text(post.polynomial),
                       result);
        }
    }
    write_file(dir, "pipeline_report.csv", report_csv(result.report), result);
}

}  // namespace

ScenarioConfig scenario_from_text(const std::string& text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // e.what() carries the byte offset / line info from the parser.
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("$: config must be a JSON object");

    ScenarioConfig config;
    config.version = as_int(require_key(root, "$", "version"), "$.version");
    if (config.version != 1) fail("$.version", "unsupported schema version");
    config.protocol = as_string(require_key(root, "$", "protocol"), "$.protocol");

    static const std::set<std::string> kProtocols = {
        "dicke-sweep", "ghz",      "two-ensemble", "schedule-solve",
        "validate",    "canonicalize", "pipeline"};
    if (!kProtocols.count(config.protocol)) {
        fail("$.protocol", "unknown protocol '" + config.protocol + "'");
    }

    const std::string section = section_key_for(config.protocol);
    check_keys(root, "$",
               {"version", "protocol", "seed", "threads", "out_dir", section});

    if (auto it = root.find("seed"); it != root.end()) {
        if (!it->is_number_unsigned()) fail("$.seed", "expected a nonnegative integer");
        config.seed = it->get<std::uint64_t>();
    }
    if (auto it = root.find("threads"); it != root.end()) {
        config.threads = as_int(*it, "$.threads");
        if (config.threads < 1) fail("$.threads", "must be >= 1");
    }
    if (auto it = root.find("out_dir"); it != root.end()) {
        config.out_dir = as_string(*it, "$.out_dir");
    }

    const std::string path = "$." + section;
    if (config.protocol == "validate") {
        // No parameters beyond the global seed; an empty object is accepted.
        if (auto it = root.find(section); it != root.end()) {
            if (!it->is_object()) fail(path, "expected an object");
            check_keys(*it, path, {});
        }
        return config;
    }
    auto it = root.find(section);
    if (it == root.end()) fail("$", "missing required section '" + section + "'");
    if (!it->is_object()) fail(path, "expected an object");

    if (config.protocol == "dicke-sweep") {
        config.dicke_sweep = parse_dicke_sweep(*it, path);
    } else if (config.protocol == "ghz") {
        config.ghz = parse_ghz(*it, path);
    } else if (config.protocol == "two-ensemble") {
        config.two_ensemble = parse_two_ensemble(*it, path);
    } else if (config.protocol == "schedule-solve") {
        config.schedule_solve = parse_schedule_solve(*it, path);
    } else if (config.protocol == "canonicalize") {
        config.canonicalize = parse_canonicalize(*it, path);
    } else {
        config.pipeline = parse_pipeline(*it, path);
    }
    return config;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return scenario_from_text(text);
}

std::string dump_config(const ScenarioConfig& config) {
    Json root;
    root["version"] = config.version;
    root["protocol"] = config.protocol;
    root["seed"] = config.seed;
    root["threads"] = config.threads;
    root["out_dir"] = config.out_dir;

    if (config.dicke_sweep) {
        Json v;
        v["num_atoms"] = config.dicke_sweep->num_atoms;
        v["excitations"] = config.dicke_sweep->excitations;
        v["c_abs_min"] = config.dicke_sweep->c_abs_min;
        v["c_abs_max"] = config.dicke_sweep->c_abs_max;
        v["c_abs_steps"] = config.dicke_sweep->c_abs_steps;
        root["dicke_sweep"] = std::move(v);
    }
    if (config.ghz) {
        Json v;
        Json linear = Json::array();
        for (const Cx& l : config.ghz->linear) linear.push_back(complex_to_json(l));
        v["linear"] = std::move(linear);
        v["kappa"] = config.ghz->kappa;
        v["laser_amplitude"] = config.ghz->laser_amplitude;
        v["omega_laser"] = config.ghz->omega_laser;
        v["run_dynamic"] = config.ghz->run_dynamic;
        root["ghz"] = std::move(v);
    }
    if (config.two_ensemble) {
        Json v;
        v["atoms_per_ensemble"] = config.two_ensemble->atoms_per_ensemble;
        v["mu"] = complex_to_json(config.two_ensemble->mu);
        v["g"] = config.two_ensemble->g;
        v["t"] = config.two_ensemble->t;
        root["two_ensemble"] = std::move(v);
    }
    if (config.schedule_solve) {
        Json v;
        v["omega_cavity"] = config.schedule_solve->omega_cavity;
        v["omega_atoms"] = config.schedule_solve->omega_atoms;
        Json windows = Json::array();
        for (const auto& w : config.schedule_solve->windows) {
            Json entry;
            entry["duration"] = w.duration;
            Json atoms = Json::array();
            for (int a : w.atoms) atoms.push_back(a + 1);
            entry["atoms"] = std::move(atoms);
            windows.push_back(std::move(entry));
        }
        v["windows"] = std::move(windows);
        v["target"] = coefficients_to_json(config.schedule_solve->target);
        root["schedule_solve"] = std::move(v);
    }
    if (config.canonicalize) {
        Json v;
        v["polynomial"] = config.canonicalize->polynomial;
        v["restarts"] = config.canonicalize->restarts;
        root["canonicalize"] = std::move(v);
    }
    if (config.pipeline) {
        Json v;
        if (config.pipeline->schedule) {
            v["schedule"] = schedule_to_json(*config.pipeline->schedule);
        } else {
            v["coefficients"] =
                coefficients_to_json(*config.pipeline->coefficients);
        }
        Json stages = Json::array();
        for (const auto& stage : config.pipeline->stages) {
            Json s;
            s["op"] = stage.op;
            if (stage.op == "measure") {
                s["photons"] = stage.photons;
            } else if (stage.op == "displace") {
                s["lambda"] = complex_to_json(stage.lambda);
            } else if (stage.op == "squeeze") {
                s["g"] = stage.g;
                s["t"] = stage.t;
            } else if (stage.op == "kerr") {
                s["kappa"] = stage.kappa;
                s["laser_amplitude"] = stage.laser_amplitude;
                s["omega_laser"] = stage.omega_laser;
                s["b"] = complex_to_json(stage.b);
                s["c"] = complex_to_json(stage.c);
            } else {
                s["restarts"] = stage.restarts;
            }
            stages.push_back(std::move(s));
        }
        v["stages"] = std::move(stages);
        root["pipeline"] = std::move(v);
    }
    return root.dump(2) + "\n";
}

void apply_overrides(ScenarioConfig& config,
                     const std::optional<std::string>& out_dir_flag,
                     const std::optional<std::uint64_t>& seed_flag,
                     const std::optional<int>& threads_flag) {
    if (out_dir_flag) {
        config.out_dir = *out_dir_flag;
    } else if (const char* env = std::getenv("NILCAV_OUT_DIR")) {
        config.out_dir = env;
    }
    if (seed_flag) config.seed = *seed_flag;
    if (threads_flag) {
        if (*threads_flag < 1) throw ConfigError("--threads: must be >= 1");
        config.threads = *threads_flag;
    }
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
    const fs::path dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string());

    ScenarioResult result;
    if (config.protocol == "dicke-sweep") {
        run_dicke_sweep(config, dir, result);
    } else if (config.protocol == "ghz") {
        run_ghz(config, dir, result);
    } else if (config.protocol == "two-ensemble") {
        run_two_ensemble(config, dir, result);
    } else if (config.protocol == "schedule-solve") {
        run_schedule_solve(config, dir, result);
    } else if (config.protocol == "validate") {
        run_validate(config, dir, result);
    } else if (config.protocol == "canonicalize") {
        run_canonicalize(config, dir, result);
    } else {
        run_pipeline(config, dir, result);
    }
    return result;
}

}  // namespace nilcav
