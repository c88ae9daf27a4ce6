// Command line front end: every subcommand reads a scenario config, runs the
// corresponding protocol, and writes CSV artifacts into the output directory.
//
// Exit codes: 0 success, 1 config/CLI errors, 2 infeasible protocol or
// singular system, 3 validation-tolerance breach, 4 unexpected failure.

#include <CLI11.hpp>

#include <array>
#include <cstdio>
#include <optional>
#include <string>

#include "nilcav/errors.hpp"
#include "nilcav/polynomial.hpp"
#include "nilcav/scenario.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    bool dump = false;
};

CLI::App* add_protocol(CLI::App& app, const std::string& name,
                       const std::string& description, CommonArgs& args) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", args.config_path,
                    "Scenario config file (JSON, schema version 1)");
    sub->add_option("--out-dir", args.out_dir,
                    "Output directory (beats NILCAV_OUT_DIR and the config)");
    sub->add_option("--seed", args.seed, "Random seed override");
    sub->add_option("--threads", args.threads, "Worker thread override");
    sub->add_flag("--dump-config", args.dump,
                  "Print the normalized config to stdout and exit");
    return sub;
}

int run_protocol(const std::string& protocol, CLI::App* sub,
                 const CommonArgs& args) {
    nilcav::ScenarioConfig config;
    if (!args.config_path.empty()) {
        config = nilcav::load_scenario(args.config_path);
    } else if (protocol == "validate") {
        config.protocol = "validate";  // validate runs with pure defaults
    } else {
        throw nilcav::ConfigError("--config is required for '" + protocol + "'");
    }
    if (config.protocol != protocol) {
        throw nilcav::ConfigError("config declares protocol '" +
                                  config.protocol + "' but subcommand is '" +
                                  protocol + "'");
    }

    std::optional<std::string> out_dir_flag;
    std::optional<std::uint64_t> seed_flag;
    std::optional<int> threads_flag;
    if (sub->count("--out-dir")) out_dir_flag = args.out_dir;
    if (sub->count("--seed")) seed_flag = args.seed;
    if (sub->count("--threads")) threads_flag = args.threads;
    nilcav::apply_overrides(config, out_dir_flag, seed_flag, threads_flag);

    if (args.dump) {
        std::fputs(nilcav::dump_config(config).c_str(), stdout);
        return 0;
    }

    const nilcav::ScenarioResult result = nilcav::run_scenario(config);
    std::printf("protocol: %s\n", result.report.protocol.c_str());
    std::printf("success_probability: %s\n",
                nilcav::format_double(result.report.success_probability).c_str());
    std::printf("fidelity: %s\n",
                nilcav::format_double(result.report.fidelity).c_str());
    for (const auto& [name, value] : result.report.metrics) {
        std::printf("%s: %s\n", name.c_str(),
                    nilcav::format_double(value).c_str());
    }
    for (const auto& file : result.files_written) {
        std::printf("wrote %s\n", file.c_str());
    }
    if (result.validation_failed) {
        std::fprintf(stderr, "validation: at least one asserted check failed\n");
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity-QED entangled-state preparation toolkit"};
    app.require_subcommand(1);

    const std::array<std::pair<std::string, std::string>, 7> protocols = {{
        {"dicke-sweep", "Dicke success-probability curves over |c|"},
        {"ghz", "GHZ preparation via Kerr-mediated projection"},
        {"two-ensemble", "Squeezing-induced two-ensemble entanglement"},
        {"schedule-solve", "Invert drive windows to hit target coefficients"},
        {"validate", "Run every oracle cross-check; emit the errata CSV"},
        {"canonicalize", "Canonical form and tanglemeter of a state"},
        {"pipeline", "Custom schedule -> state -> primitive pipeline"},
    }};
    std::array<CommonArgs, protocols.size()> args;
    std::array<CLI::App*, protocols.size()> subs{};
    for (std::size_t i = 0; i < protocols.size(); ++i) {
        subs[i] = add_protocol(app, protocols[i].first, protocols[i].second,
                               args[i]);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        for (std::size_t i = 0; i < protocols.size(); ++i) {
            if (subs[i]->parsed()) {
                return run_protocol(protocols[i].first, subs[i], args[i]);
            }
        }
        std::fprintf(stderr, "no subcommand selected\n");
        return 1;
    } catch (const nilcav::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const nilcav::InfeasibleProtocol& e) {
        std::fprintf(stderr, "infeasible protocol: %s\n", e.what());
        return 2;
    } catch (const nilcav::SingularSystem& e) {
        std::fprintf(stderr, "singular system: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
