#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "nilcav/scenario.hpp"

using namespace nilcav;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("nilcav_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kGhzConfig = R"({
  "version": 1,
  "protocol": "ghz",
  "ghz": {
    "linear": [[0.25, 0.0], [0.25, 0.0], [0.25, 0.0]],
    "kappa": 1.0,
    "laser_amplitude": 0.3,
    "omega_laser": 3.5,
    "run_dynamic": false
  }
})";

}  // namespace

TEST_CASE("minimal configs parse with defaults materialized") {
    const ScenarioConfig cfg = scenario_from_text(kGhzConfig);
    CHECK(cfg.version == 1);
    CHECK(cfg.protocol == "ghz");
    CHECK(cfg.seed == 1);
    CHECK(cfg.threads == 1);
    CHECK(cfg.out_dir == ".");
    REQUIRE(cfg.ghz.has_value());
    CHECK(cfg.ghz->linear.size() == 3);
    CHECK(cfg.ghz->linear[0] == Cx{0.25, 0.0});
    CHECK_FALSE(cfg.ghz->run_dynamic);
}

TEST_CASE("dump and parse are exact inverses") {
    const ScenarioConfig cfg = scenario_from_text(kGhzConfig);
    const std::string dumped = dump_config(cfg);
    const ScenarioConfig back = scenario_from_text(dumped);
    CHECK(dump_config(back) == dumped);

    // Validate needs no section at all.
    const ScenarioConfig v = scenario_from_text(
        R"({"version": 1, "protocol": "validate", "seed": 7})");
    CHECK(v.seed == 7);
    CHECK(dump_config(scenario_from_text(dump_config(v))) == dump_config(v));
}

TEST_CASE("schema violations carry field paths") {
    auto message_of = [](const std::string& text) {
        try {
            (void)scenario_from_text(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };

    CHECK(message_of(R"({"version": 2, "protocol": "validate"})")
              .find("$.version") != std::string::npos);
    CHECK(message_of(R"({"version": 1, "protocol": "teleport"})")
              .find("$.protocol") != std::string::npos);
    CHECK(message_of(
              R"({"version": 1, "protocol": "validate", "speed": 11})")
              .find("speed") != std::string::npos);
    CHECK(message_of(
              R"({"version": 1, "protocol": "validate", "seed": -4})")
              .find("$.seed") != std::string::npos);

    // Sections are protocol keyed: a mismatched section is an unknown key.
    CHECK(message_of(
              R"({"version": 1, "protocol": "validate",
                  "ghz": {"linear": [[0.2, 0.0], [0.2, 0.0]],
                          "kappa": 1.0, "laser_amplitude": 0.3,
                          "omega_laser": 2.5}})")
              .find("ghz") != std::string::npos);

    const std::string dup = message_of(R"({
        "version": 1, "protocol": "pipeline",
        "pipeline": {
          "coefficients": {
            "linear": [[0.2, 0.0], [0.2, 0.0]],
            "pairs": [{"n": 1, "m": 2, "value": [0.01, 0.0]},
                       {"n": 2, "m": 1, "value": [0.02, 0.0]}]
          },
          "stages": [{"op": "measure", "photons": 1}]
        }})");
    CHECK(dup.find("duplicate pair") != std::string::npos);
}

TEST_CASE("pipelines require exactly one terminal stage") {
    auto message_of = [](const std::string& stages) {
        const std::string text = R"({
            "version": 1, "protocol": "pipeline",
            "pipeline": {
              "coefficients": {"linear": [[0.2, 0.0], [0.2, 0.0]]},
              "stages": )" + stages + R"(}})";
        try {
            (void)scenario_from_text(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };

    CHECK(message_of(R"([])").find("no terminal measurement") !=
          std::string::npos);
    CHECK(message_of(R"([{"op": "canonicalize"}])")
              .find("no terminal measurement") != std::string::npos);
    CHECK(message_of(R"([{"op": "measure", "photons": 0},
                         {"op": "displace", "lambda": [0.1, 0.0]}])")
              .find("multiple terminal") != std::string::npos);
    CHECK(message_of(R"([{"op": "canonicalize"},
                         {"op": "measure", "photons": 0}])")
              .find("must follow") != std::string::npos);
    CHECK(message_of(R"([{"op": "measure", "photons": 0},
                         {"op": "canonicalize"}])") == "no error");
}

TEST_CASE("pipeline sources are exclusive") {
    const std::string both = R"({
        "version": 1, "protocol": "pipeline",
        "pipeline": {
          "coefficients": {"linear": [[0.2, 0.0]]},
          "schedule": {"omega_cavity": 1.0, "omega_atoms": [-1.0],
                        "segments": [{"duration": 1.0, "amplitude": 0.1,
                                       "couplings": [1.0]}]},
          "stages": [{"op": "measure", "photons": 0}]
        }})";
    CHECK_THROWS_AS(scenario_from_text(both), ConfigError);
}

TEST_CASE("overrides follow flag > environment > config precedence") {
    ScenarioConfig cfg = scenario_from_text(kGhzConfig);

    ::setenv("NILCAV_OUT_DIR", "/tmp/from_env", 1);
    apply_overrides(cfg, std::nullopt, std::nullopt, std::nullopt);
    CHECK(cfg.out_dir == "/tmp/from_env");

    apply_overrides(cfg, std::string("/tmp/from_flag"), std::uint64_t{9}, 3);
    CHECK(cfg.out_dir == "/tmp/from_flag");
    CHECK(cfg.seed == 9);
    CHECK(cfg.threads == 3);
    ::unsetenv("NILCAV_OUT_DIR");

    ScenarioConfig plain = scenario_from_text(kGhzConfig);
    apply_overrides(plain, std::nullopt, std::nullopt, std::nullopt);
    CHECK(plain.out_dir == ".");
}

TEST_CASE("scenario runs are deterministic byte for byte") {
    const std::string text = R"({
        "version": 1, "protocol": "dicke-sweep",
        "dicke_sweep": {"num_atoms": 3, "c_abs_steps": 21}
    })";
    const fs::path dir_a = fresh_dir("sweep_a");
    const fs::path dir_b = fresh_dir("sweep_b");

    ScenarioConfig a = scenario_from_text(text);
    a.out_dir = dir_a.string();
    const ScenarioResult ra = run_scenario(a);
    ScenarioConfig b = scenario_from_text(text);
    b.out_dir = dir_b.string();
    const ScenarioResult rb = run_scenario(b);

    REQUIRE(ra.files_written.size() == rb.files_written.size());
    CHECK(ra.files_written.size() == 2);
    for (std::size_t i = 0; i < ra.files_written.size(); ++i) {
        CHECK(slurp(ra.files_written[i]) == slurp(rb.files_written[i]));
    }
    CHECK(slurp(dir_a / "dicke_sweep.csv").substr(0, 26) ==
          "N,M,c_abs,P_paper,P_exact\n");
}

TEST_CASE("pipeline scenarios thread state through to reports") {
    const std::string text = R"({
        "version": 1, "protocol": "pipeline",
        "pipeline": {
          "coefficients": {
            "linear": [[0.2, 0.0], [0.2, 0.0], [0.2, 0.0]]
          },
          "stages": [{"op": "measure", "photons": 1},
                      {"op": "canonicalize"}]
        }})";
    const fs::path dir = fresh_dir("pipeline");
    ScenarioConfig cfg = scenario_from_text(text);
    cfg.out_dir = dir.string();
    const ScenarioResult result = run_scenario(cfg);

    CHECK(result.report.protocol == "pipeline");
    CHECK(result.report.success_probability > 0.0);
    CHECK(result.report.metric("vacuum_probability") > 0.0);
    CHECK(fs::exists(dir / "post_state.txt"));
    CHECK(fs::exists(dir / "tanglemeter.txt"));
    CHECK(fs::exists(dir / "pipeline_report.csv"));

    // A single-excitation detection on a symmetric drive prepares W: the
    // canonical tanglemeter retains pairwise structure.
    const NilpotentPolynomial tangle =
        poly_from_text(slurp(dir / "tanglemeter.txt"));
    CHECK(tangle.max_atom_degree() >= 2);
}

TEST_CASE("validate scenarios surface the failure count") {
    const fs::path dir = fresh_dir("validate");
    ScenarioConfig cfg = scenario_from_text(
        R"({"version": 1, "protocol": "validate"})");
    cfg.out_dir = dir.string();
    const ScenarioResult result = run_scenario(cfg);
    CHECK_FALSE(result.validation_failed);
    CHECK(result.report.metric("failures") == 0.0);
    CHECK(result.report.metric("checks") > 80.0);
    CHECK(fs::exists(dir / "validation_report.csv"));
}
