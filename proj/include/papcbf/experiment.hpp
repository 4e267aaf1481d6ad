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

// Named experiments and result files.
//
// `run_experiment` resolves settings, runs the sweep and writes
//   <name>.csv, <name>.json, <name>_manifest.json and, with tracing,
//   <name>_trace.csv
// into the output directory. Only the manifest carries timestamps, so a
// replay reproduces the other files byte for byte.

#ifndef PAPCBF_EXPERIMENT_HPP
#define PAPCBF_EXPERIMENT_HPP

#include "papcbf/config.hpp"
#include "papcbf/version.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace papcbf
{

/// Output files could not be written or the manifest could not be read.
class IoError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Settings layer for a named experiment. "custom" adds nothing.
inline Settings experiment_preset(const std::string &name)
{
    if (name == "fig1")
        return {{"experiment.name", "fig1"},
                {"experiment.sweep_variable", "total_power"},
                {"experiment.sweep_values", "10, 20, 40, 80"},
                {"experiment.algorithms", "offsetmax_nominal_r0, offsetmax_alg1, offsetmax_alg1_accel, "
                                          "offsetmax_alg2, offsetmax_alg3, offsetmax_total_power"},
                {"scenario.n_antennas", "4"},
                {"scenario.n_users", "3"}};
    if (name == "fig3")
        return {{"experiment.name", "fig3"},
                {"experiment.sweep_variable", "n_antennas"},
                {"experiment.sweep_values", "4, 6, 8"},
                {"experiment.algorithms", "zf_alg4, zf_alg5, zf_uniform_t, zf_uniform_t_unnormalized, zf_total_power"},
                {"scenario.total_power", "2"},
                {"scenario.n_users", "3"}};
    if (name == "fig5")
        return {{"experiment.name", "fig5"},
                {"experiment.sweep_variable", "n_antennas"},
                {"experiment.sweep_values", "16, 32, 64"},
                {"experiment.algorithms", "mrt_alg6, mrt_alg7, mrt_alg8, mrt_alg9, mrt_total_power"},
                {"scenario.total_power", "1"},
                {"scenario.n_users", "8"}};
    if (name == "custom")
        return {{"experiment.name", "custom"}};
    throw ConfigError("experiment", "unknown experiment '" + name + "' (fig1, fig3, fig5, custom)");
}

// ------------------------------------------------------------------------
// Serialization
// ------------------------------------------------------------------------

namespace detail
{

inline std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

inline nlohmann::json vector_json(const RVector &v)
{
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(v(i));
    return a;
}

inline void write_file(const std::filesystem::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out)
        throw IoError("failed writing '" + path.string() + "'");
}

inline std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

} // namespace detail

inline std::string results_csv(const std::vector<SweepRow> &rows, bool timing)
{
    std::ostringstream os;
    os << "sweep_value,algorithm,outage_mean,outage_max_user,stderr,n_real,n_nonconverged,mean_iters,mean_ms\n";
    for (const SweepRow &r : rows)
    {
        const OutageStats &s = r.stats;
        os << detail::fmt(r.sweep_value) << ',' << r.algorithm << ',' << detail::fmt(s.mean_outage) << ','
           << detail::fmt(s.max_outage) << ',' << detail::fmt(s.mean_stderr) << ',' << s.realizations_used << ','
           << s.n_nonconverged << ',' << detail::fmt(s.mean_iterations) << ','
           << (timing ? detail::fmt(s.mean_ms) : std::string("NA")) << '\n';
    }
    return os.str();
}

/// Per-iteration fraction of violated PAPCs for every (sweep value, algorithm).
inline std::string trace_csv(const std::vector<SweepRow> &rows)
{
    std::ostringstream os;
    os << "sweep_value,algorithm,iteration,violation_fraction\n";
    for (const SweepRow &r : rows)
        for (std::size_t n = 0; n < r.violation_profile.size(); ++n)
            os << detail::fmt(r.sweep_value) << ',' << r.algorithm << ',' << n << ','
               << detail::fmt(r.violation_profile[n]) << '\n';
    return os.str();
}

inline nlohmann::json scenario_json(const ScenarioConfig &c)
{
    return {{"n_antennas", c.n_antennas},
            {"n_users", c.n_users},
            {"total_power", c.total_power},
            {"papc", detail::vector_json(c.papc)},
            {"sinr_targets", detail::vector_json(c.sinr_targets)},
            {"noise_powers", detail::vector_json(c.noise_powers)},
            {"error_variance", c.error_variance},
            {"papc_tolerance", detail::vector_json(c.papc_tolerance)},
            {"max_outer_iterations", c.max_outer_iterations},
            {"fixed_point_tolerance", c.fixed_point_tolerance}};
}

inline nlohmann::json results_json(const RunConfig &rc, const std::vector<SweepRow> &rows)
{
    nlohmann::json doc;
    doc["experiment"] = rc.experiment.name;
    doc["config"] = rc.settings;
    doc["scenario"] = scenario_json(rc.scenario_config());
    nlohmann::json out = nlohmann::json::array();
    for (const SweepRow &r : rows)
    {
        const OutageStats &s = r.stats;
        nlohmann::json row;
        row["sweep_value"] = r.sweep_value;
        row["algorithm"] = r.algorithm;
        row["papc_mode"] = to_string(find_algorithm(r.algorithm).mode);
        row["outage_mean"] = s.mean_outage;
        row["outage_mean_stderr"] = s.mean_stderr;
        row["outage_max_user"] = s.max_outage;
        row["outage_max_user_stderr"] = s.max_stderr;
        row["per_user_outage"] = detail::vector_json(s.per_user_outage);
        row["per_user_served"] = s.per_user_served;
        row["served_pairs"] = s.served_pairs;
        row["n_real"] = s.realizations_used;
        row["realizations_skipped"] = s.realizations_skipped;
        row["n_nonconverged"] = s.n_nonconverged;
        row["n_failed"] = s.n_failed;
        row["mean_iters"] = s.mean_iterations;
        row["mean_ms"] = rc.experiment.timing ? nlohmann::json(s.mean_ms) : nlohmann::json(nullptr);
        row["seed"] = s.seed;
        out.push_back(row);
    }
    doc["rows"] = out;
    return doc;
}

// ------------------------------------------------------------------------
// Running
// ------------------------------------------------------------------------

struct RunOutputs
{
    std::filesystem::path csv;
    std::filesystem::path json;
    std::filesystem::path manifest;
    std::filesystem::path trace; // empty without tracing
    std::vector<SweepRow> rows;
};

/// Runs a resolved configuration and writes all files into `out_dir`.
inline RunOutputs run_config(const RunConfig &rc, const std::filesystem::path &out_dir)
{
    const std::string started = detail::utc_now();
    std::vector<SweepRow> rows = run_sweep(rc.experiment, rc.scenario, rc.propagation);
    const std::string finished = detail::utc_now();

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

    RunOutputs out;
    const std::string stem = rc.experiment.name;
    out.csv = out_dir / (stem + ".csv");
    out.json = out_dir / (stem + ".json");
    out.manifest = out_dir / (stem + "_manifest.json");
    detail::write_file(out.csv, results_csv(rows, rc.experiment.timing));
    detail::write_file(out.json, results_json(rc, rows).dump(2) + "\n");
    if (rc.experiment.capture_trace)
    {
        out.trace = out_dir / (stem + "_trace.csv");
        detail::write_file(out.trace, trace_csv(rows));
    }

    nlohmann::json m;
    m["experiment"] = stem;
    m["tool_version"] = kVersion;
    m["seed"] = rc.experiment.rng_seed;
    m["started_utc"] = started;
    m["finished_utc"] = finished;
    m["config"] = rc.settings;
    m["scenario"] = scenario_json(rc.scenario_config());
    m["propagation"] = {{"cell_radius", rc.propagation.cell_radius},
                        {"pathloss_exponent", rc.propagation.pathloss_exponent},
                        {"shadow_std_db", rc.propagation.shadow_std_db},
                        {"reference_distance", rc.propagation.reference_distance},
                        {"min_distance", rc.propagation.min_distance},
                        {"error_scale",
                         rc.propagation.error_scale == ErrorScale::Relative ? "relative" : "absolute"}};
    m["outputs"] = {{"csv", out.csv.filename().string()}, {"json", out.json.filename().string()}};
    if (!out.trace.empty())
        m["outputs"]["trace"] = out.trace.filename().string();
    detail::write_file(out.manifest, m.dump(2) + "\n");
    out.rows = std::move(rows);
    return out;
}

/// defaults <- preset(name) <- file <- overrides
inline RunConfig experiment_config(const std::string &name, const Settings &file, const Settings &overrides)
{
    Settings layered = merge_settings(experiment_preset(name), file);
    layered = merge_settings(layered, overrides);
    layered["experiment.name"] = name == "custom" && file.count("experiment.name") ? file.at("experiment.name")
                                                                                   : name;
    return resolve_settings(layered);
}

inline RunOutputs run_experiment(const std::string &name, const Settings &file, const Settings &overrides,
                                 const std::filesystem::path &out_dir)
{
    return run_config(experiment_config(name, file, overrides), out_dir);
}

/// Reads the settings stored in a manifest.
inline RunConfig manifest_config(const std::filesystem::path &manifest)
{
    std::ifstream in(manifest);
    if (!in)
        throw IoError("cannot open manifest '" + manifest.string() + "'");
    nlohmann::json m;
    try
    {
        in >> m;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw IoError("cannot parse manifest '" + manifest.string() + "': " + e.what());
    }
    if (!m.contains("config") || !m["config"].is_object())
        throw ConfigError("config", "manifest has no config object");
    Settings s;
    for (auto it = m["config"].begin(); it != m["config"].end(); ++it)
    {
        if (!it.value().is_string())
            throw ConfigError(it.key(), "manifest values must be strings");
        s[it.key()] = it.value().get<std::string>();
    }
    return resolve_settings(s);
}

} // namespace papcbf

#endif
