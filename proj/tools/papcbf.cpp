// SPDX-License-Identifier: Apache-2.0
//
// papcbf: robust MISO downlink beamforming under per-antenna power constraints
// Copyright (C) 2026 The papcbf authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// papcbf command-line front end.
//
//   papcbf run <fig1|fig3|fig5|custom> [options]
//   papcbf replay <manifest.json> [--out DIR]
//   papcbf list
//
// Exit codes: 0 success, 2 configuration error, 3 I/O failure, 1 otherwise.

#include "papcbf/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace
{

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

/// --power-list and --antennas set the sweep when they match the sweep
/// variable and the fixed scenario value otherwise.
void apply_sweep_override(papcbf::Settings &overrides, const papcbf::Settings &layered, const std::string &option,
                          const std::string &sweep_name, const std::string &scenario_key, const std::string &value)
{
    const std::string sweep = layered.count("experiment.sweep_variable") ? layered.at("experiment.sweep_variable")
                                                                         : "total_power";
    if (sweep == sweep_name)
    {
        overrides["experiment.sweep_values"] = value;
        return;
    }
    const auto items = papcbf::detail::split_list(value);
    if (items.size() != 1)
        throw papcbf::ConfigError(option, "this experiment sweeps " + sweep + "; give a single value");
    overrides[scenario_key] = items.front();
}

void print_summary(const papcbf::RunOutputs &out)
{
    long nonconverged = 0;
    long failed = 0;
    for (const auto &r : out.rows)
    {
        nonconverged += r.stats.n_nonconverged;
        failed += r.stats.n_failed;
    }
    std::cout << "wrote " << out.csv.string() << "\n"
              << "wrote " << out.json.string() << "\n"
              << "wrote " << out.manifest.string() << "\n";
    if (!out.trace.empty())
        std::cout << "wrote " << out.trace.string() << "\n";
    std::cout << out.rows.size() << " rows, " << nonconverged << " non-converged designs, " << failed
              << " solver failures\n";
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Robust MISO beamforming with per-antenna power constraints: outage experiments"};
    app.require_subcommand(1);

    std::string experiment;
    std::optional<long> realizations;
    std::optional<long long> seed;
    std::string out_dir = "results";
    std::string config_path;
    bool trace = false;
    bool timing = false;
    std::optional<int> workers;
    std::string power_list;
    std::string antennas;
    std::optional<int> users;

    CLI::App *run = app.add_subcommand("run", "run a named experiment");
    run->add_option("experiment", experiment, "fig1, fig3, fig5 or custom")->required();
    run->add_option("--realizations", realizations, "channel realizations per sweep point");
    run->add_option("--seed", seed, "random seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--config", config_path, "settings file (key = value)");
    run->add_flag("--trace", trace, "write the per-iteration PAPC violation trace");
    run->add_flag("--timing", timing, "report mean solve time (makes the CSV run-dependent)");
    run->add_option("--workers", workers, "worker threads");
    run->add_option("--power-list", power_list, "total powers, comma separated");
    run->add_option("--antennas", antennas, "antenna counts, comma separated");
    run->add_option("--users", users, "users per realization");

    std::string manifest_path;
    std::string replay_out;
    CLI::App *replay = app.add_subcommand("replay", "rerun the configuration stored in a manifest");
    replay->add_option("manifest", manifest_path, "manifest JSON written by run")->required();
    replay->add_option("--out", replay_out, "output directory (default: the manifest's directory)");

    CLI::App *list = app.add_subcommand("list", "list registered algorithms");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try
    {
        if (list->parsed())
        {
            for (const auto &a : papcbf::algorithm_registry())
                std::cout << a.name << "  [" << papcbf::to_string(a.mode) << "]  " << a.description << "\n";
            return 0;
        }
        if (replay->parsed())
        {
            const std::filesystem::path manifest(manifest_path);
            const papcbf::RunConfig rc = papcbf::manifest_config(manifest);
            const std::filesystem::path dir = replay_out.empty() ? manifest.parent_path() : std::filesystem::path(replay_out);
            print_summary(papcbf::run_config(rc, dir.empty() ? std::filesystem::path(".") : dir));
            return 0;
        }

        papcbf::Settings file;
        if (!config_path.empty())
            file = papcbf::parse_settings_file(config_path);
        const papcbf::Settings layered = papcbf::merge_settings(papcbf::experiment_preset(experiment), file);

        papcbf::Settings overrides;
        if (realizations)
            overrides["experiment.realizations"] = std::to_string(*realizations);
        if (seed)
            overrides["experiment.seed"] = std::to_string(*seed);
        if (workers)
            overrides["experiment.workers"] = std::to_string(*workers);
        if (trace)
            overrides["experiment.trace"] = "true";
        if (timing)
            overrides["experiment.timing"] = "true";
        if (users)
            overrides["scenario.n_users"] = std::to_string(*users);
        if (!power_list.empty())
            apply_sweep_override(overrides, layered, "--power-list", "total_power", "scenario.total_power",
                                 power_list);
        if (!antennas.empty())
            apply_sweep_override(overrides, layered, "--antennas", "n_antennas", "scenario.n_antennas", antennas);

        print_summary(papcbf::run_experiment(experiment, file, overrides, out_dir));
        return 0;
    }
    catch (const papcbf::ConfigError &e)
    {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (const papcbf::IoError &e)
    {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
