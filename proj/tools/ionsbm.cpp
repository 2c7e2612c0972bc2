#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ionsbm/errors.hpp"
#include "ionsbm/presets.hpp"
#include "ionsbm/runner.hpp"
#include "ionsbm/scenario.hpp"

namespace {

using ionsbm::scenario::Scenario;

// A scenario argument is a JSON file path or the name of a shipped preset.
Scenario resolve_scenario(const std::string& arg) {
    if (std::filesystem::exists(arg)) {
        return ionsbm::scenario::load_scenario(arg);
    }
    if (const ionsbm::presets::Preset* p = ionsbm::presets::find(arg)) {
        return ionsbm::scenario::parse_scenario(nlohmann::json::parse(p->text));
    }
    throw ionsbm::Error("scenario/io", "no file or preset named \"" + arg + "\"");
}

int resolve_threads(int cli_threads) {
    if (const char* env = std::getenv("IONSBM_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
        throw ionsbm::Error("cli/bad_threads", "IONSBM_THREADS must be a positive integer");
    }
    return cli_threads < 1 ? 1 : cli_threads;
}

void emit_error(const std::string& code, const std::string& message) {
    nlohmann::json err;
    err["error"] = {{"code", code}, {"message", message}};
    std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-boson dynamics of a driven ion in a trapped chain"};
    app.require_subcommand(1);

    std::string scenario_arg;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    int threads = 1;

    CLI::App* run = app.add_subcommand("run", "run a scenario and write its outputs");
    run->add_option("scenario", scenario_arg, "scenario JSON file or preset name")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--threads", threads, "worker threads for the trial loop");

    std::string param;
    std::string values;
    CLI::App* sweep = app.add_subcommand("sweep", "run a scenario across one parameter");
    sweep->add_option("scenario", scenario_arg, "scenario JSON file or preset name")->required();
    sweep->add_option("--param", param, "K, delta, offset, trials, or target_ion")->required();
    sweep->add_option("--values", values, "comma list or start:stop[:step] range")->required();
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--seed", seed, "override the scenario seed");
    sweep->add_option("--threads", threads, "worker threads for the trial loop");

    CLI::App* spectrum = app.add_subcommand("spectrum", "write reservoir curves only");
    spectrum->add_option("scenario", scenario_arg, "scenario JSON file or preset name")
        ->required();
    spectrum->add_option("--out", out_dir, "output directory");

    std::string preset_name;
    CLI::App* presets = app.add_subcommand("presets", "list shipped presets");
    presets->add_option("name", preset_name, "print this preset's JSON instead");

    CLI11_PARSE(app, argc, argv);

    try {
        if (presets->parsed()) {
            if (!preset_name.empty()) {
                const ionsbm::presets::Preset* p = ionsbm::presets::find(preset_name);
                if (!p) {
                    throw ionsbm::Error("cli/bad_preset", "no preset named \"" + preset_name +
                                                              "\"");
                }
                std::cout << p->text;
                return 0;
            }
            for (const ionsbm::presets::Preset& p : ionsbm::presets::all()) {
                std::printf("%-8s %s\n", p.name.c_str(), p.description.c_str());
            }
            return 0;
        }

        Scenario scen = resolve_scenario(scenario_arg);
        if (seed) scen.seed = *seed;

        if (run->parsed()) {
            const ionsbm::runner::RunArtifacts art =
                ionsbm::runner::run_scenario(scen, resolve_threads(threads));
            ionsbm::runner::write_run_outputs(art, out_dir);
            std::printf("wrote %s (hash %s", out_dir.c_str(),
                        ionsbm::scenario::scenario_hash(scen).c_str());
            if (art.revival.revival_time) {
                std::printf(", revival at %.3f ms", *art.revival.revival_time);
            }
            std::printf(")\n");
        } else if (sweep->parsed()) {
            const ionsbm::runner::SweepResult result = ionsbm::runner::run_sweep(
                scen, param, ionsbm::runner::expand_values(values), resolve_threads(threads));
            ionsbm::runner::write_sweep_outputs(result, out_dir);
            const std::string tail =
                result.converged_at ? ", converged at " + *result.converged_at : std::string();
            std::printf("wrote %s (%zu points%s)\n", out_dir.c_str(), result.points.size(),
                        tail.c_str());
        } else if (spectrum->parsed()) {
            ionsbm::runner::write_spectrum_outputs(scen, out_dir);
            std::printf("wrote %s\n", out_dir.c_str());
        }
    } catch (const ionsbm::Error& e) {
        emit_error(e.code(), e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return 1;
    }
    return 0;
}
