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

// Monte Carlo outage evaluation.
//
// Each realization gets its own generator seeded from (seed, sweep point,
// realization index), so every algorithm at a sweep point sees the same
// channels and results do not depend on the number of workers.

#ifndef PAPCBF_SIMKIT_HPP
#define PAPCBF_SIMKIT_HPP

#include "papcbf/mrt.hpp"
#include "papcbf/offsetmax.hpp"
#include "papcbf/zf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace papcbf
{

/// How ScenarioConfig::error_variance maps to each user's error covariance.
enum class ErrorScale
{
    Relative, // sigma_e^2 times the user's large-scale gain
    Absolute  // sigma_e^2 for everyone
};

struct PropagationModel
{
    double cell_radius = 3200.0;      // m
    double pathloss_exponent = 3.52;
    double shadow_std_db = 8.0;
    double reference_distance = 1.0;  // m
    double min_distance = 35.0;       // m
    ErrorScale error_scale = ErrorScale::Relative;

    void validate() const
    {
        if (!(pathloss_exponent > 2.0))
            throw ConfigError("propagation.pathloss_exponent", "must be > 2");
        if (!(min_distance > 0.0))
            throw ConfigError("propagation.min_distance", "must be > 0");
        if (!(cell_radius > min_distance))
            throw ConfigError("propagation.cell_radius", "must exceed min_distance");
        if (!(reference_distance > 0.0))
            throw ConfigError("propagation.reference_distance", "must be > 0");
        if (!(shadow_std_db >= 0.0))
            throw ConfigError("propagation.shadow_std_db", "must be >= 0");
    }
};

// ------------------------------------------------------------------------
// Channel draws
// ------------------------------------------------------------------------

/// Independent generator for one realization of one sweep point.
inline std::mt19937_64 realization_rng(std::uint64_t seed, std::uint64_t point, std::uint64_t realization)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(point), static_cast<std::uint32_t>(realization),
                      static_cast<std::uint32_t>(realization >> 32)};
    return std::mt19937_64(seq);
}

/// N_t x K matrix of CN(0, 1) entries.
inline CMatrix complex_gaussian(std::mt19937_64 &rng, Eigen::Index rows, Eigen::Index cols)
{
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    CMatrix out(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
        {
            const double re = normal(rng);
            const double im = normal(rng);
            out(r, c) = cdouble(re, im);
        }
    return out;
}

struct LargeScaleDraw
{
    RVector distances;  // m
    RVector shadow_db;
    RVector gains;      // linear
};

/// Users uniform on the annulus [min_distance, cell_radius], log-normal shadowing.
inline LargeScaleDraw draw_large_scale(std::mt19937_64 &rng, int n_users, const PropagationModel &prop)
{
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> shadow(0.0, prop.shadow_std_db);
    const double r0 = prop.min_distance * prop.min_distance;
    const double r1 = prop.cell_radius * prop.cell_radius;
    LargeScaleDraw out;
    out.distances.resize(n_users);
    out.shadow_db.resize(n_users);
    out.gains.resize(n_users);
    for (int k = 0; k < n_users; ++k)
    {
        out.distances(k) = std::sqrt(r0 + uniform(rng) * (r1 - r0));
        out.shadow_db(k) = shadow(rng);
        out.gains(k) = std::pow(out.distances(k) / prop.reference_distance, -prop.pathloss_exponent) *
                       std::pow(10.0, out.shadow_db(k) / 10.0);
    }
    return out;
}

/// Fresh estimation errors for an existing estimate.
inline CMatrix draw_errors(std::mt19937_64 &rng, const ChannelEstimate &estimate)
{
    CMatrix e = complex_gaussian(rng, estimate.n_antennas(), estimate.n_users());
    for (Eigen::Index k = 0; k < e.cols(); ++k)
        e.col(k) *= std::sqrt(estimate.error_variances(k));
    return e;
}

/// h_e = sqrt(L_k) * CN(0, I), h = h_e + e with e ~ CN(0, s_k I).
inline ChannelSet draw_realization(std::mt19937_64 &rng, const ScenarioConfig &cfg, const PropagationModel &prop)
{
    const LargeScaleDraw ls = draw_large_scale(rng, cfg.n_users, prop);
    CMatrix est = complex_gaussian(rng, cfg.n_antennas, cfg.n_users);
    RVector err_var(cfg.n_users);
    for (int k = 0; k < cfg.n_users; ++k)
    {
        est.col(k) *= std::sqrt(ls.gains(k));
        err_var(k) = prop.error_scale == ErrorScale::Relative ? cfg.error_variance * ls.gains(k)
                                                              : cfg.error_variance;
    }
    ChannelSet out;
    out.estimate = ChannelEstimate::make(std::move(est), std::move(err_var));
    out.errors = draw_errors(rng, out.estimate);
    out.true_channels = out.estimate.estimated + out.errors;
    return out;
}

/// Users with |h_e_k|^2 P_t / (K sigma_k^2) >= gamma_k.
inline std::vector<int> select_users(const ChannelEstimate &channels, const ScenarioConfig &cfg)
{
    std::vector<int> out;
    for (int k = 0; k < cfg.n_users; ++k)
    {
        const double strength =
            channels.estimated.col(k).squaredNorm() * cfg.total_power / (cfg.n_users * cfg.noise_powers(k));
        if (strength >= cfg.sinr_targets(k))
            out.push_back(k);
    }
    return out;
}

// ------------------------------------------------------------------------
// Algorithm registry
// ------------------------------------------------------------------------

/// Which constraints a registered algorithm is run under.
enum class PapcMode
{
    PapcOnly,    // p_i = P_t / N_t, no total constraint
    Generalized, // p_i = factor * P_t / N_t plus sum beta = P_t
    TotalOnly    // only sum beta = P_t; p_i = P_t / N_t is reported against
};

inline std::string to_string(PapcMode m)
{
    switch (m)
    {
    case PapcMode::PapcOnly:
        return "papc_only";
    case PapcMode::Generalized:
        return "generalized";
    case PapcMode::TotalOnly:
        return "total_only";
    }
    return "?";
}

using SolverFn = std::function<SolveResult(const ScenarioConfig &, const ChannelEstimate &, const SolverOptions &)>;

struct AlgorithmInfo
{
    std::string name;
    std::string description;
    PapcMode mode;
    SolverFn solve;
};

inline const std::vector<AlgorithmInfo> &algorithm_registry()
{
    using C = const ScenarioConfig &;
    using E = const ChannelEstimate &;
    using O = const SolverOptions &;
    static const std::vector<AlgorithmInfo> registry = {
        {"offsetmax_nominal_r0", "power minimization directions, r = 0, scaled to the power budget",
         PapcMode::PapcOnly,
         [](C c, E e, O o) { return solve_offset_max_papc(c, e, OffsetMaxMode::NominalZero, false, o); }},
        {"offsetmax_alg1", "nominal offset maximization with PAPCs", PapcMode::PapcOnly,
         [](C c, E e, O o) { return solve_offset_max_papc(c, e, OffsetMaxMode::Nominal, false, o); }},
        {"offsetmax_alg1_accel", "nominal offset maximization with PAPCs, accelerated", PapcMode::PapcOnly,
         [](C c, E e, O o) { return solve_offset_max_papc(c, e, OffsetMaxMode::Nominal, true, o); }},
        {"offsetmax_alg2", "robust offset maximization with PAPCs, accelerated", PapcMode::PapcOnly,
         [](C c, E e, O o) { return solve_offset_max_papc(c, e, OffsetMaxMode::Robust, true, o); }},
        {"offsetmax_alg3", "robust offset maximization with PAPCs and total power", PapcMode::Generalized,
         [](C c, E e, O o) { return solve_offset_max_general(c, e, o); }},
        {"offsetmax_total_power", "robust offset maximization, total power only", PapcMode::TotalOnly,
         [](C c, E e, O o) { return solve_offset_max_total_power(c, e, o); }},
        {"zf_alg4", "robust ZF with PAPCs", PapcMode::PapcOnly,
         [](C c, E e, O o) { return solve_zf_papc(c, e, ZfLoading::Robust, o); }},
        {"zf_alg5", "robust ZF with PAPCs and total power", PapcMode::Generalized,
         [](C c, E e, O o) { return solve_zf_general(c, e, o); }},
        {"zf_uniform_t", "ZF with PAPCs, equal signal level, normalized channels", PapcMode::PapcOnly,
         [](C c, E e, O o) { return solve_zf_papc(c, e, ZfLoading::UniformT, o); }},
        {"zf_uniform_t_unnormalized", "ZF with PAPCs, equal received power", PapcMode::PapcOnly,
         [](C c, E e, O o) { return solve_zf_papc(c, e, ZfLoading::UniformTUnnormalized, o); }},
        {"zf_total_power", "robust ZF, total power only", PapcMode::TotalOnly,
         [](C c, E e, O o) { return solve_zf_total_power(c, e, o); }},
        {"mrt_alg6", "nominal MRT with PAPCs", PapcMode::PapcOnly,
         [](C c, E e, O o) { return solve_mrt_nominal(c, e, o); }},
        {"mrt_alg7", "one-shot MRT with uniform PAPCs", PapcMode::PapcOnly,
         [](C c, E e, O o) { return solve_mrt_one_shot(c, e, o); }},
        {"mrt_alg8", "robust MRT with PAPCs", PapcMode::PapcOnly,
         [](C c, E e, O o) { return solve_mrt_robust(c, e, o); }},
        {"mrt_alg9", "robust MRT with PAPCs and total power", PapcMode::Generalized,
         [](C c, E e, O o) { return solve_mrt_general(c, e, o); }},
        {"mrt_total_power", "robust MRT, total power only", PapcMode::TotalOnly,
         [](C c, E e, O o) { return solve_mrt_total_power(c, e, o); }},
    };
    return registry;
}

inline const AlgorithmInfo &find_algorithm(const std::string &name)
{
    for (const AlgorithmInfo &a : algorithm_registry())
        if (a.name == name)
            return a;
    throw ConfigError("experiment.algorithms", "unknown algorithm '" + name + "'");
}

// ------------------------------------------------------------------------
// Experiment description
// ------------------------------------------------------------------------

/// Scalar scenario description; per-antenna vectors are built per PapcMode.
struct ScenarioTemplate
{
    int n_antennas = 4;
    int n_users = 3;
    double total_power = 40.0;             // mW
    double sinr_target = std::pow(10.0, 0.3);
    double noise_power = 1e-9;             // mW
    double error_variance = 0.04;
    PapcMode papc_mode = PapcMode::PapcOnly;
    double generalized_papc_factor = 1.2;
    double tolerance_fraction = 0.1;
    int max_outer_iterations = 200;
    double fixed_point_tolerance = 1e-8;

    ScenarioConfig build(PapcMode mode) const
    {
        const double share = total_power / n_antennas;
        const double p = mode == PapcMode::Generalized ? generalized_papc_factor * share : share;
        ScenarioConfig cfg =
            ScenarioConfig::uniform(n_antennas, n_users, total_power, p, sinr_target, noise_power, error_variance,
                                    tolerance_fraction);
        cfg.max_outer_iterations = max_outer_iterations;
        cfg.fixed_point_tolerance = fixed_point_tolerance;
        return cfg;
    }

    ScenarioConfig build() const { return build(papc_mode); }

    void validate() const
    {
        if (n_antennas <= 0)
            throw ConfigError("scenario.n_antennas", "must be a positive integer");
        if (n_users <= 0)
            throw ConfigError("scenario.n_users", "must be a positive integer");
        if (!(total_power > 0.0) || !std::isfinite(total_power))
            throw ConfigError("scenario.total_power", "must be finite and > 0");
        if (!(sinr_target > 0.0))
            throw ConfigError("scenario.sinr_target_db", "must be finite");
        if (!(noise_power > 0.0))
            throw ConfigError("scenario.noise_dbm", "must be finite");
        if (!(error_variance >= 0.0))
            throw ConfigError("scenario.error_variance", "must be >= 0");
        if (!(generalized_papc_factor > 0.0))
            throw ConfigError("scenario.generalized_papc_factor", "must be > 0");
        if (!(tolerance_fraction > 0.0))
            throw ConfigError("solver.tolerance_fraction", "must be > 0");
        if (max_outer_iterations <= 0)
            throw ConfigError("solver.max_outer_iterations", "must be a positive integer");
        if (!(fixed_point_tolerance > 0.0))
            throw ConfigError("solver.fixed_point_tolerance", "must be > 0");
    }
};

enum class SweepVariable
{
    TotalPower,
    NAntennas
};

inline std::string to_string(SweepVariable v)
{
    return v == SweepVariable::TotalPower ? "total_power" : "n_antennas";
}

struct ExperimentSpec
{
    std::string name = "custom";
    SweepVariable sweep_variable = SweepVariable::TotalPower;
    std::vector<double> sweep_values;
    std::vector<std::string> algorithms;
    long n_realizations = 2000;
    int error_draws_per_realization = 1;
    std::uint64_t rng_seed = 1;
    int workers = 1;
    bool capture_trace = false;
    bool timing = false;

    void validate() const
    {
        if (sweep_values.empty())
            throw ConfigError("experiment.sweep_values", "must not be empty");
        if (sweep_variable == SweepVariable::NAntennas)
            for (double v : sweep_values)
                if (!(v >= 1.0) || v != std::floor(v))
                    throw ConfigError("experiment.sweep_values", "antenna counts must be positive integers");
        if (sweep_variable == SweepVariable::TotalPower)
            for (double v : sweep_values)
                if (!(v > 0.0) || !std::isfinite(v))
                    throw ConfigError("experiment.sweep_values", "powers must be finite and > 0");
        if (algorithms.empty())
            throw ConfigError("experiment.algorithms", "must not be empty");
        for (const std::string &a : algorithms)
            find_algorithm(a);
        if (n_realizations < 100)
            throw ConfigError("experiment.realizations", "must be >= 100");
        if (error_draws_per_realization < 1)
            throw ConfigError("experiment.error_draws", "must be >= 1");
        if (workers < 1)
            throw ConfigError("experiment.workers", "must be >= 1");
    }

    /// The template with the sweep variable set to sweep_values[point].
    ScenarioTemplate at_point(const ScenarioTemplate &base, std::size_t point) const
    {
        ScenarioTemplate t = base;
        if (sweep_variable == SweepVariable::TotalPower)
            t.total_power = sweep_values.at(point);
        else
            t.n_antennas = static_cast<int>(sweep_values.at(point));
        return t;
    }
};

// ------------------------------------------------------------------------
// Outage estimation
// ------------------------------------------------------------------------

namespace detail
{

struct RealizationOutcome
{
    bool skipped = true;
    bool failed = false;
    bool converged = true;
    int iterations = 0;
    double ms = 0.0;
    std::vector<int> users;
    std::vector<int> outages;           // per served user, summed over error draws
    std::vector<int> violations;        // per outer iteration
};

inline RealizationOutcome run_realization(const AlgorithmInfo &alg, const ScenarioConfig &cfg,
                                          const ExperimentSpec &spec, const PropagationModel &prop,
                                          std::size_t point, long index)
{
    std::mt19937_64 rng = realization_rng(spec.rng_seed, point, static_cast<std::uint64_t>(index));
    const ChannelSet set = draw_realization(rng, cfg, prop);
    std::vector<CMatrix> true_channels{set.true_channels};
    for (int d = 1; d < spec.error_draws_per_realization; ++d)
        true_channels.push_back(set.estimate.estimated + draw_errors(rng, set.estimate));

    RealizationOutcome out;
    out.users = select_users(set.estimate, cfg);
    if (out.users.empty())
        return out;
    out.skipped = false;
    out.outages.assign(out.users.size(), 0);

    const ScenarioConfig sub_cfg = cfg.subset(out.users);
    const ChannelEstimate sub_est = set.estimate.subset(out.users);
    // the step schedule follows the configured user count, not the served one
    SolverOptions opt;
    opt.step_t0 = StepSchedule::defaults(cfg).t0;
    SolveResult res;
    const auto t0 = std::chrono::steady_clock::now();
    try
    {
        res = alg.solve(sub_cfg, sub_est, opt);
    }
    catch (const std::exception &)
    {
        out.failed = true;
    }
    out.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (out.failed)
    {
        std::fill(out.outages.begin(), out.outages.end(), spec.error_draws_per_realization);
        return out;
    }

    out.converged = res.status.converged;
    out.iterations = res.status.iterations;
    if (spec.capture_trace)
        for (const TraceRecord &r : res.trace)
            out.violations.push_back(r.n_violations);

    for (const CMatrix &h : true_channels)
        for (std::size_t s = 0; s < out.users.size(); ++s)
        {
            const int k = out.users[s];
            const double value = sinr(h.col(k), res.beams, static_cast<Eigen::Index>(s), cfg.noise_powers(k));
            if (!(value >= cfg.sinr_targets(k)))
                ++out.outages[s];
        }
    return out;
}

inline double binomial_stderr(double p, double n)
{
    return n > 0.0 ? std::sqrt(std::max(p * (1.0 - p), 0.0) / n) : 0.0;
}

} // namespace detail

struct OutageResult
{
    OutageStats stats;
    /// Fraction of violated PAPCs per outer iteration over all solved
    /// realizations; finished runs hold their last count. Empty unless
    /// the spec captures traces.
    std::vector<double> violation_profile;
};

/// Outage statistics of one algorithm at one sweep point.
inline OutageResult estimate_outage(const AlgorithmInfo &alg, const ExperimentSpec &spec,
                                    const ScenarioTemplate &point_template, const PropagationModel &prop,
                                    std::size_t point)
{
    const ScenarioConfig cfg = point_template.build(alg.mode);
    const long n_real = spec.n_realizations;
    std::vector<detail::RealizationOutcome> outcomes(static_cast<std::size_t>(n_real));

    auto work = [&](int worker) {
        for (long r = worker; r < n_real; r += spec.workers)
            outcomes[static_cast<std::size_t>(r)] = detail::run_realization(alg, cfg, spec, prop, point, r);
    };
    if (spec.workers <= 1)
        work(0);
    else
    {
        std::vector<std::thread> pool;
        for (int w = 0; w < spec.workers; ++w)
            pool.emplace_back(work, w);
        for (std::thread &t : pool)
            t.join();
    }

    OutageResult out;
    OutageStats &st = out.stats;
    st.seed = spec.rng_seed;
    st.per_user_outage = RVector::Zero(cfg.n_users);
    st.per_user_served.assign(cfg.n_users, 0);
    std::vector<long> user_outages(cfg.n_users, 0);
    long total_outages = 0;
    long iteration_sum = 0;
    double ms_sum = 0.0;
    std::size_t profile_len = 0;
    const long draws = spec.error_draws_per_realization;

    for (const detail::RealizationOutcome &o : outcomes)
    {
        if (o.skipped)
        {
            ++st.realizations_skipped;
            continue;
        }
        ++st.realizations_used;
        st.n_failed += o.failed;
        st.n_nonconverged += !o.failed && !o.converged;
        iteration_sum += o.iterations;
        ms_sum += o.ms;
        profile_len = std::max(profile_len, o.violations.size());
        for (std::size_t s = 0; s < o.users.size(); ++s)
        {
            st.per_user_served[o.users[s]] += draws;
            user_outages[o.users[s]] += o.outages[s];
            total_outages += o.outages[s];
        }
        st.served_pairs += static_cast<long>(o.users.size()) * draws;
    }

    for (int k = 0; k < cfg.n_users; ++k)
        if (st.per_user_served[k] > 0)
            st.per_user_outage(k) = double(user_outages[k]) / double(st.per_user_served[k]);
    if (st.served_pairs > 0)
    {
        st.mean_outage = double(total_outages) / double(st.served_pairs);
        st.mean_stderr = detail::binomial_stderr(st.mean_outage, double(st.served_pairs));
        Eigen::Index worst = 0;
        st.max_outage = st.per_user_outage.maxCoeff(&worst);
        st.max_stderr = detail::binomial_stderr(st.max_outage, double(st.per_user_served[worst]));
    }
    if (st.realizations_used > 0)
    {
        st.mean_iterations = double(iteration_sum) / double(st.realizations_used);
        st.mean_ms = ms_sum / double(st.realizations_used);
    }

    if (spec.capture_trace && profile_len > 0)
    {
        out.violation_profile.assign(profile_len, 0.0);
        long solved = 0;
        for (const detail::RealizationOutcome &o : outcomes)
        {
            if (o.skipped || o.violations.empty())
                continue;
            ++solved;
            for (std::size_t n = 0; n < profile_len; ++n)
                out.violation_profile[n] += o.violations[std::min(n, o.violations.size() - 1)];
        }
        for (double &v : out.violation_profile)
            v /= double(solved) * cfg.n_antennas;
    }
    return out;
}

struct SweepRow
{
    double sweep_value = 0.0;
    std::string algorithm;
    OutageStats stats;
    std::vector<double> violation_profile;
};

/// Every (sweep value, algorithm) pair, in that order.
inline std::vector<SweepRow> run_sweep(const ExperimentSpec &spec, const ScenarioTemplate &base,
                                       const PropagationModel &prop)
{
    spec.validate();
    base.validate();
    prop.validate();
    std::vector<SweepRow> rows;
    for (std::size_t p = 0; p < spec.sweep_values.size(); ++p)
    {
        const ScenarioTemplate point = spec.at_point(base, p);
        point.validate();
        for (const std::string &name : spec.algorithms)
        {
            OutageResult r = estimate_outage(find_algorithm(name), spec, point, prop, p);
            rows.push_back(SweepRow{spec.sweep_values[p], name, std::move(r.stats), std::move(r.violation_profile)});
        }
    }
    return rows;
}

} // namespace papcbf

#endif
