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

// Run configuration: a flat `key = value` text format with dotted keys.
//
//   # comment
//   scenario.total_power = 40
//   experiment.algorithms = offsetmax_alg1, offsetmax_alg2
//
// Settings are layered (defaults, experiment preset, file, command line) as
// string maps and resolved once into typed structures. dB and dBm values are
// converted to linear units here and nowhere else.

#ifndef PAPCBF_CONFIG_HPP
#define PAPCBF_CONFIG_HPP

#include "papcbf/simkit.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace papcbf
{

using Settings = std::map<std::string, std::string>;

/// Every recognized key with its default value.
inline const Settings &default_settings()
{
    static const Settings defaults = {
        {"scenario.n_antennas", "4"},
        {"scenario.n_users", "3"},
        {"scenario.total_power", "40"},
        {"scenario.power_unit", "mW"},
        {"scenario.sinr_target_db", "3"},
        {"scenario.noise_dbm", "-90"},
        {"scenario.error_variance", "0.04"},
        {"scenario.error_scale", "relative"},
        {"scenario.papc_mode", "papc_only"},
        {"scenario.generalized_papc_factor", "1.2"},
        {"propagation.cell_radius", "3200"},
        {"propagation.pathloss_exponent", "3.52"},
        {"propagation.shadow_std_db", "8"},
        {"propagation.reference_distance", "1"},
        {"propagation.min_distance", "35"},
        {"solver.tolerance_fraction", "0.1"},
        {"solver.max_outer_iterations", "200"},
        {"solver.fixed_point_tolerance", "1e-8"},
        {"experiment.name", "custom"},
        {"experiment.sweep_variable", "total_power"},
        {"experiment.sweep_values", "40"},
        {"experiment.algorithms", "offsetmax_alg1"},
        {"experiment.realizations", "2000"},
        {"experiment.error_draws", "1"},
        {"experiment.seed", "1"},
        {"experiment.workers", "1"},
        {"experiment.trace", "false"},
        {"experiment.timing", "false"},
    };
    return defaults;
}

// ------------------------------------------------------------------------
// Text parsing
// ------------------------------------------------------------------------

namespace detail
{

inline std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

inline double parse_double(const std::string &key, const std::string &v)
{
    try
    {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(d))
            throw std::invalid_argument(v);
        return d;
    }
    catch (const std::exception &)
    {
        throw ConfigError(key, "expected a number, got '" + v + "'");
    }
}

inline long long parse_int(const std::string &key, const std::string &v)
{
    try
    {
        std::size_t used = 0;
        const long long i = std::stoll(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return i;
    }
    catch (const std::exception &)
    {
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string &key, const std::string &v)
{
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

} // namespace detail

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and
/// malformed lines are rejected.
inline Settings parse_settings(std::istream &in, const std::string &source = "config")
{
    Settings out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno), "expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (!default_settings().count(key))
            throw ConfigError(key, "unknown key (" + source + ":" + std::to_string(lineno) + ")");
        out[key] = value;
    }
    return out;
}

inline Settings parse_settings_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("--config", "cannot open '" + path + "'");
    return parse_settings(in, path);
}

/// Later layers win.
inline Settings merge_settings(Settings base, const Settings &layer)
{
    for (const auto &[k, v] : layer)
    {
        if (!default_settings().count(k))
            throw ConfigError(k, "unknown key");
        base[k] = v;
    }
    return base;
}

// ------------------------------------------------------------------------
// Resolution
// ------------------------------------------------------------------------

/// Typed view of a settings map.
struct RunConfig
{
    Settings settings; // complete, every key present
    ScenarioTemplate scenario;
    PropagationModel propagation;
    ExperimentSpec experiment;

    /// The ScenarioConfig for scenario.papc_mode at the template values.
    ScenarioConfig scenario_config() const { return scenario.build(); }
};

inline double dbm_to_linear(double dbm, const std::string &unit)
{
    const double mw = std::pow(10.0, dbm / 10.0);
    return unit == "W" ? mw * 1e-3 : mw;
}

inline PapcMode parse_papc_mode(const std::string &key, const std::string &v)
{
    if (v == "papc_only")
        return PapcMode::PapcOnly;
    if (v == "generalized")
        return PapcMode::Generalized;
    if (v == "total_only")
        return PapcMode::TotalOnly;
    throw ConfigError(key, "expected papc_only, generalized or total_only, got '" + v + "'");
}

inline RunConfig resolve_settings(const Settings &layer)
{
    using namespace detail;
    RunConfig rc;
    rc.settings = merge_settings(default_settings(), layer);
    const Settings &s = rc.settings;
    auto get = [&](const std::string &k) { return s.at(k); };
    auto num = [&](const std::string &k) { return parse_double(k, get(k)); };
    auto integer = [&](const std::string &k) { return parse_int(k, get(k)); };

    const std::string unit = get("scenario.power_unit");
    if (unit != "mW" && unit != "W")
        throw ConfigError("scenario.power_unit", "expected mW or W, got '" + unit + "'");

    ScenarioTemplate &t = rc.scenario;
    t.n_antennas = static_cast<int>(integer("scenario.n_antennas"));
    t.n_users = static_cast<int>(integer("scenario.n_users"));
    t.total_power = num("scenario.total_power");
    t.sinr_target = std::pow(10.0, num("scenario.sinr_target_db") / 10.0);
    t.noise_power = dbm_to_linear(num("scenario.noise_dbm"), unit);
    t.error_variance = num("scenario.error_variance");
    t.papc_mode = parse_papc_mode("scenario.papc_mode", get("scenario.papc_mode"));
    t.generalized_papc_factor = num("scenario.generalized_papc_factor");
    t.tolerance_fraction = num("solver.tolerance_fraction");
    t.max_outer_iterations = static_cast<int>(integer("solver.max_outer_iterations"));
    t.fixed_point_tolerance = num("solver.fixed_point_tolerance");
    t.validate();

    PropagationModel &p = rc.propagation;
    p.cell_radius = num("propagation.cell_radius");
    p.pathloss_exponent = num("propagation.pathloss_exponent");
    p.shadow_std_db = num("propagation.shadow_std_db");
    p.reference_distance = num("propagation.reference_distance");
    p.min_distance = num("propagation.min_distance");
    const std::string scale = get("scenario.error_scale");
    if (scale == "relative")
        p.error_scale = ErrorScale::Relative;
    else if (scale == "absolute")
        p.error_scale = ErrorScale::Absolute;
    else
        throw ConfigError("scenario.error_scale", "expected relative or absolute, got '" + scale + "'");
    p.validate();

    ExperimentSpec &e = rc.experiment;
    e.name = get("experiment.name");
    const std::string sweep = get("experiment.sweep_variable");
    if (sweep == "total_power")
        e.sweep_variable = SweepVariable::TotalPower;
    else if (sweep == "n_antennas")
        e.sweep_variable = SweepVariable::NAntennas;
    else
        throw ConfigError("experiment.sweep_variable", "expected total_power or n_antennas, got '" + sweep + "'");
    for (const std::string &v : split_list(get("experiment.sweep_values")))
        e.sweep_values.push_back(parse_double("experiment.sweep_values", v));
    e.algorithms = split_list(get("experiment.algorithms"));
    e.n_realizations = integer("experiment.realizations");
    e.error_draws_per_realization = static_cast<int>(integer("experiment.error_draws"));
    const long long seed = integer("experiment.seed");
    if (seed < 0)
        throw ConfigError("experiment.seed", "must be >= 0");
    e.rng_seed = static_cast<std::uint64_t>(seed);
    e.workers = static_cast<int>(integer("experiment.workers"));
    e.capture_trace = parse_bool("experiment.trace", get("experiment.trace"));
    e.timing = parse_bool("experiment.timing", get("experiment.timing"));
    e.validate();
    return rc;
}

} // namespace papcbf

#endif
