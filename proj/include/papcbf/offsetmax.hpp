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

// Offset maximization under per-antenna power constraints.
//
// The PAPC duals q (diagonal of Q-hat) shape the beam directions through
//
//   u_k ~ (Q-hat + sum_j nu_j h_j h_j^H)^+ h_k
//
// where the SINR duals nu solve a fixed point for the given Q-hat. q itself
// is found by a projected subgradient iteration driven by the per-antenna
// powers of the current design. The same outer iteration drives the ZF and
// MRT variants in zf.hpp and mrt.hpp.

#ifndef PAPCBF_OFFSETMAX_HPP
#define PAPCBF_OFFSETMAX_HPP

#include "papcbf/model.hpp"
#include "papcbf/powerload.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace papcbf
{

// ------------------------------------------------------------------------
// Options, traces, results
// ------------------------------------------------------------------------

/// t_n = t_{n-1} - t_{n-1}^2 / damping
struct StepSchedule
{
    double t0 = 1.0;
    double damping = 1000.0;

    double next(double t) const { return t - t * t / damping; }

    /// t0 = N_t / (P_t K). PAPC-only scenarios without an explicit total
    /// budget use sum_i p_i in its place.
    static StepSchedule defaults(const ScenarioConfig &cfg, double damping = 1000.0)
    {
        const double budget = cfg.total_power > 0.0 ? cfg.total_power : cfg.papc.sum();
        StepSchedule s;
        s.t0 = static_cast<double>(cfg.n_antennas) / (budget * cfg.n_users);
        s.damping = damping;
        return s;
    }
};

/// Affine first-iterate prediction q <- scale q + shift.
struct Prediction
{
    bool enabled = false;
    double scale = 2.8;
    double shift = -1.8;
};

struct TraceRecord
{
    int iteration = 0;
    double offset = 0.0;
    double max_violation = 0.0; // max_i (powers_i - p_i)
    int n_violations = 0;
    double step_size = 0.0;
};

struct SolveStatus
{
    bool converged = false;
    bool negative_power = false; // some beta_k < 0 was clamped in the output
    int iterations = 0;          // dual updates performed
    int inner_nonconvergence = 0;
    int step_rejections = 0;     // trial dual steps that were halved
};

struct IterationView
{
    int iteration;
    const BeamformerSet &beams;
    const DualState &duals;
    const RVector &antenna_powers;
};

struct SolverOptions
{
    std::optional<double> step_t0; // default N_t / (P_t K)
    double step_damping = 1000.0;
    double prediction_scale = 2.8;
    double prediction_shift = -1.8;
    double fixed_point_tolerance = 1e-9;
    int fixed_point_max_iterations = 500;
    /// Lower bound kept on q_i by the MRT drivers, which need Q-hat^{-1}.
    double mrt_dual_floor = 1e-6;
    std::function<void(const IterationView &)> observer;

    StepSchedule schedule(const ScenarioConfig &cfg) const
    {
        StepSchedule s = StepSchedule::defaults(cfg, step_damping);
        if (step_t0)
            s.t0 = *step_t0;
        return s;
    }
};

struct SolveResult
{
    BeamformerSet beams;
    DualState duals;
    std::vector<TraceRecord> trace;
    SolveStatus status;
};

// ------------------------------------------------------------------------
// SINR dual fixed point and directions
// ------------------------------------------------------------------------

struct FixedPointResult
{
    RVector nu;
    int iterations = 0;
    bool converged = false;
};

namespace detail
{
inline void check_channels(const CMatrix &h)
{
    for (Eigen::Index k = 0; k < h.cols(); ++k)
        if (!(h.col(k).norm() > 0.0))
            throw SolverError(ErrorCode::DegenerateChannel, "channel " + std::to_string(k) + " is zero");
}
} // namespace detail

/// nu_k^{-1} = h_k^H (base + sum_j nu_j h_j h_j^H)^+ h_k (1 + 1/gamma_k), by
/// Picard iteration from nu_k = gamma_k / ((1 + gamma_k) |h_k|^2). The first
/// five steps are blended 50/50 with the previous iterate.
inline FixedPointResult fixed_point_duals(const RVector &base, const CMatrix &channels, const RVector &gammas,
                                          double tol = 1e-9, int max_iter = 500)
{
    detail::check_channels(channels);
    const Eigen::Index k_users = channels.cols();
    FixedPointResult out;
    out.nu.resize(k_users);
    for (Eigen::Index k = 0; k < k_users; ++k)
        out.nu(k) = gammas(k) / ((1.0 + gammas(k)) * channels.col(k).squaredNorm());

    for (int it = 1; it <= max_iter; ++it)
    {
        const HermitianPinv ap = hermitian_pinv(diag_plus_outer(base, channels, out.nu));
        const CMatrix x = ap.pinv * channels;
        RVector next(k_users);
        for (Eigen::Index k = 0; k < k_users; ++k)
        {
            const double quad = std::real(channels.col(k).dot(x.col(k)));
            if (!(quad > 0.0))
                throw SolverError(ErrorCode::DegenerateChannel,
                                  "channel " + std::to_string(k) + " lies in the null space of the weighting");
            next(k) = 1.0 / (quad * (1.0 + 1.0 / gammas(k)));
        }
        if (it <= 5)
            next = 0.5 * (next + out.nu);
        const double change = ((next - out.nu).cwiseAbs().array() / out.nu.array()).maxCoeff();
        out.nu = next;
        out.iterations = it;
        if (change < tol)
        {
            out.converged = true;
            break;
        }
    }
    return out;
}

/// u_k = normalize((base + sum_j nu_j h_j h_j^H)^+ h_k)
inline CMatrix beam_directions(const RVector &base, const RVector &nu, const CMatrix &channels)
{
    if ((nu.array() < 0.0).any())
        throw SolverError(ErrorCode::InvalidArgument, "beam_directions: negative SINR duals");
    const HermitianPinv ap = hermitian_pinv(diag_plus_outer(base, channels, nu));
    CMatrix u = ap.pinv * channels;
    for (Eigen::Index k = 0; k < u.cols(); ++k)
    {
        const double n = u.col(k).norm();
        const double floor = ap.lambda_max > 0.0 ? 1e-14 * channels.col(k).norm() / ap.lambda_max : 0.0;
        if (!(n > floor) || !(n > 0.0))
            throw SolverError(ErrorCode::DegenerateDirection, "direction " + std::to_string(k) + " vanished");
        u.col(k) /= n;
    }
    return u;
}

// ------------------------------------------------------------------------
// Dual projection and updates
// ------------------------------------------------------------------------

/// Euclidean projection onto { q >= 0, sum_i q_i p_i = sum_i p_i }.
/// q_i = max(q_raw_i - p_i z, 0) with z recomputed from the current support
/// until the support stops changing. Starting from z = 0 the multiplier
/// increases monotonically, so at most N_t + 1 sweeps are needed.
inline RVector project_duals(const RVector &q_raw, const RVector &papc)
{
    const Eigen::Index n = q_raw.size();
    if (papc.size() != n)
        throw SolverError(ErrorCode::InvalidArgument, "project_duals: length mismatch");
    if ((papc.array() <= 0.0).any())
        throw SolverError(ErrorCode::InvalidArgument, "project_duals: PAPCs must be > 0");
    const double total = papc.sum();

    std::vector<char> support(n);
    for (Eigen::Index i = 0; i < n; ++i)
        support[i] = q_raw(i) > 0.0;
    RVector q(n);
    for (Eigen::Index sweep = 0; sweep <= n + 1; ++sweep)
    {
        double num = -total;
        double den = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (support[i])
            {
                num += papc(i) * q_raw(i);
                den += papc(i) * papc(i);
            }
        if (den == 0.0)
        {
            // empty support: seed it with the entry that enters first
            Eigen::Index best = 0;
            (q_raw.array() / papc.array()).maxCoeff(&best);
            support[best] = 1;
            continue;
        }
        const double z = num / den;
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            q(i) = std::max(q_raw(i) - papc(i) * z, 0.0);
            const char s = q(i) > 0.0;
            changed |= (s != support[i]);
            support[i] = s;
        }
        if (!changed)
            break;
    }
    return q;
}

/// Feasible starting point q_i = (sum_j p_j) / (N_t p_i); all ones for uniform p.
inline RVector initial_papc_duals(const RVector &papc)
{
    return (papc.sum() / static_cast<double>(papc.size())) * papc.cwiseInverse();
}

/// Projected subgradient step for the PAPC-only problems.
inline DualState dual_update_papc_only(const DualState &state, const RVector &antenna_powers, const RVector &papc,
                                       const StepSchedule &schedule)
{
    const double t = state.step_size;
    RVector raw;
    if (all_equal(papc) && (state.papc_duals.array() > 0.0).all())
        raw = state.papc_duals + t * (antenna_powers - papc);
    else
        raw = state.papc_duals + t * antenna_powers;
    DualState out = state;
    out.papc_duals = project_duals(raw, papc);
    out.step_size = schedule.next(t);
    out.iteration = state.iteration + 1;
    return out;
}

/// q_i <- max(q_i + t (powers_i - p_i), 0) for problems that also carry a
/// total power constraint.
inline DualState dual_update_general(const DualState &state, const RVector &antenna_powers, const RVector &papc,
                                     const StepSchedule &schedule)
{
    const double t = state.step_size;
    DualState out = state;
    out.papc_duals = (state.papc_duals + t * (antenna_powers - papc)).cwiseMax(0.0);
    out.step_size = schedule.next(t);
    out.iteration = state.iteration + 1;
    return out;
}

// ------------------------------------------------------------------------
// Shared outer iteration
// ------------------------------------------------------------------------

enum class DualUpdateKind
{
    PapcOnly,
    General
};

/// Direction step output.
struct DirectionStep
{
    CMatrix directions;
    RVector sinr_duals;
    bool converged = true;
};

namespace detail
{

inline TraceRecord make_trace(int n, double offset, const RVector &powers, const ScenarioConfig &cfg,
                              std::size_t n_viol, double step)
{
    TraceRecord rec;
    rec.iteration = n;
    rec.offset = offset;
    rec.max_violation = (powers - cfg.papc).maxCoeff();
    rec.n_violations = static_cast<int>(n_viol);
    rec.step_size = step;
    return rec;
}

/// Clamps negative powers in the returned design and records the event.
inline void finalize_powers(SolveResult &res)
{
    if ((res.beams.powers.array() < 0.0).any())
    {
        res.status.negative_power = true;
        res.beams.powers = res.beams.powers.cwiseMax(0.0);
    }
}

/// Fraction of a unit-norm beam's energy that may sit on the active antennas
/// before the active-set power equation is treated as degenerate.
inline constexpr double kActiveEnergyFloor = 1e-8;

/// Trial dual steps are halved at most this many times.
inline constexpr int kMaxStepHalvings = 60;

inline void check_active_energy(const CMatrix &directions, const RVector &papc_duals)
{
    RVector energy = RVector::Zero(directions.cols());
    for (Eigen::Index i = 0; i < papc_duals.size(); ++i)
        if (papc_duals(i) > 0.0)
            energy += directions.row(i).cwiseAbs2().transpose();
    if (energy.size() > 0 && energy.minCoeff() < kActiveEnergyFloor)
        throw SolverError(ErrorCode::SingularSystem, "a beam has no energy on the active antennas");
}

/// Runs   directions(state) -> loading(directions, state) -> check PAPCs ->
/// dual update   until no PAPC is violated by more than epsilon_i and the
/// loading has no negative powers, or the iteration cap is hit.
///
/// A dual step whose trial point breaks the inner solves (or leaves a beam
/// with no energy on the active antennas) is retried from the previous point
/// with half the step. The step schedule itself is not altered.
template <class DirectionFn, class LoadingFn>
SolveResult run_dual_loop(const ScenarioConfig &cfg, RVector q0, DualUpdateKind kind, bool accelerate,
                          const SolverOptions &opt, DirectionFn &&direction_step, LoadingFn &&loading_step,
                          double dual_floor = 0.0)
{
    const StepSchedule schedule = opt.schedule(cfg);
    DualState state;
    state.papc_duals = std::move(q0);
    state.sinr_duals = RVector::Zero(cfg.n_users);
    state.step_size = schedule.t0;
    state.iteration = 0;

    auto advance = [&](const DualState &from, const RVector &powers, double shrink) {
        DualState trial = from;
        trial.step_size *= shrink;
        DualState next = kind == DualUpdateKind::PapcOnly ? dual_update_papc_only(trial, powers, cfg.papc, schedule)
                                                          : dual_update_general(trial, powers, cfg.papc, schedule);
        next.step_size = schedule.next(from.step_size);
        if (accelerate && from.iteration == 0 && shrink == 1.0)
        {
            const RVector predicted =
                (opt.prediction_scale * next.papc_duals.array() + opt.prediction_shift).matrix();
            next.papc_duals = kind == DualUpdateKind::PapcOnly ? project_duals(predicted, cfg.papc)
                                                               : predicted.cwiseMax(0.0);
        }
        if (dual_floor > 0.0)
            next.papc_duals = next.papc_duals.cwiseMax(dual_floor);
        return next;
    };

    SolveResult res;
    DualState previous;
    RVector previous_powers;
    for (int n = 0;; ++n)
    {
        DirectionStep dir;
        PowerLoadingState load;
        double shrink = 1.0;
        for (int attempt = 0;; ++attempt)
        {
            try
            {
                dir = direction_step(state);
                if (kind == DualUpdateKind::PapcOnly)
                    check_active_energy(dir.directions, state.papc_duals);
                load = loading_step(dir.directions, state);
                if (!load.powers.allFinite() || !std::isfinite(load.offset))
                    throw SolverError(ErrorCode::SingularSystem, "power loading is not finite");
                break;
            }
            catch (const SolverError &)
            {
                if (n == 0 || attempt >= kMaxStepHalvings)
                    throw;
                shrink *= 0.5;
                state = advance(previous, previous_powers, shrink);
                ++res.status.step_rejections;
            }
        }
        if (!dir.converged)
            ++res.status.inner_nonconvergence;
        if (!load.converged)
            ++res.status.inner_nonconvergence;
        state.sinr_duals = dir.sinr_duals;

        BeamformerSet beams{std::move(dir.directions), load.powers, load.offset};
        const RVector powers = per_antenna_powers(beams);
        const std::vector<int> viol = papc_violations(powers, cfg);
        res.trace.push_back(make_trace(n, load.offset, powers, cfg, viol.size(), state.step_size));
        if (opt.observer)
            opt.observer(IterationView{n, beams, state, powers});

        res.beams = std::move(beams);
        res.duals = state;
        res.status.iterations = n;
        if (viol.empty() && !load.negative_power)
        {
            res.status.converged = true;
            break;
        }
        if (n >= cfg.max_outer_iterations)
            break;

        previous = state;
        previous_powers = powers;
        state = advance(previous, previous_powers, 1.0);
    }
    finalize_powers(res);
    return res;
}

} // namespace detail

// ------------------------------------------------------------------------
// Drivers
// ------------------------------------------------------------------------

enum class OffsetMaxMode
{
    Nominal,     // joint (beta, r) from the nominal offset equations
    Robust,      // robust loading on the offset-maximization directions
    NominalZero  // r fixed to 0, beta rescaled onto the power equation
};

/// PAPC-only offset maximization. Nominal and Robust modes are the two
/// loadings of the same direction iteration; NominalZero is the plain
/// power-minimization benchmark scaled to the available power.
inline SolveResult solve_offset_max_papc(const ScenarioConfig &cfg, const ChannelEstimate &channels,
                                         OffsetMaxMode mode, bool accelerate, const SolverOptions &opt = {})
{
    cfg.validate();
    const CMatrix &h = channels.estimated;
    auto direction_step = [&](const DualState &s) {
        FixedPointResult fp = fixed_point_duals(s.papc_duals, h, cfg.sinr_targets, opt.fixed_point_tolerance,
                                                opt.fixed_point_max_iterations);
        DirectionStep d;
        d.directions = beam_directions(s.papc_duals, fp.nu, h);
        d.sinr_duals = std::move(fp.nu);
        d.converged = fp.converged;
        return d;
    };
    auto loading_step = [&](const CMatrix &u, const DualState &s) {
        const PowerEquation eq = PowerEquation::from_duals(u, s.papc_duals, cfg.papc);
        switch (mode)
        {
        case OffsetMaxMode::Robust:
            return robust_power_loading(u, channels, cfg, eq);
        case OffsetMaxMode::NominalZero:
            return nominal_power_loading(u, channels, cfg, eq, 0.0);
        case OffsetMaxMode::Nominal:
        default:
            return nominal_power_loading(u, channels, cfg, eq);
        }
    };
    return detail::run_dual_loop(cfg, initial_papc_duals(cfg.papc), DualUpdateKind::PapcOnly, accelerate, opt,
                                 direction_step, loading_step);
}

/// Offset maximization with a total power constraint and PAPCs: weighting
/// I + Q-hat, Q-hat starts at zero, robust loading onto sum beta = P_t.
inline SolveResult solve_offset_max_general(const ScenarioConfig &cfg, const ChannelEstimate &channels,
                                            const SolverOptions &opt = {})
{
    cfg.validate();
    const CMatrix &h = channels.estimated;
    auto direction_step = [&](const DualState &s) {
        const RVector base = (s.papc_duals.array() + 1.0).matrix();
        FixedPointResult fp =
            fixed_point_duals(base, h, cfg.sinr_targets, opt.fixed_point_tolerance, opt.fixed_point_max_iterations);
        DirectionStep d;
        d.directions = beam_directions(base, fp.nu, h);
        d.sinr_duals = std::move(fp.nu);
        d.converged = fp.converged;
        return d;
    };
    auto loading_step = [&](const CMatrix &u, const DualState &) {
        return robust_power_loading(u, channels, cfg, PowerEquation::total_power(u.cols(), cfg.total_power));
    };
    return detail::run_dual_loop(cfg, RVector::Zero(cfg.n_antennas), DualUpdateKind::General, false, opt,
                                 direction_step, loading_step);
}

/// Total-power-only benchmark: offset maximization directions (weighting I)
/// with robust loading onto sum beta = P_t. PAPCs are ignored.
inline SolveResult solve_offset_max_total_power(const ScenarioConfig &cfg, const ChannelEstimate &channels,
                                                const SolverOptions &opt = {})
{
    cfg.validate();
    const RVector base = RVector::Ones(cfg.n_antennas);
    FixedPointResult fp = fixed_point_duals(base, channels.estimated, cfg.sinr_targets, opt.fixed_point_tolerance,
                                            opt.fixed_point_max_iterations);
    const CMatrix u = beam_directions(base, fp.nu, channels.estimated);
    const PowerLoadingState load =
        robust_power_loading(u, channels, cfg, PowerEquation::total_power(u.cols(), cfg.total_power));

    SolveResult res;
    res.beams = BeamformerSet{u, load.powers, load.offset};
    res.duals.papc_duals = RVector::Zero(cfg.n_antennas);
    res.duals.sinr_duals = fp.nu;
    res.status.converged = true;
    res.status.inner_nonconvergence = int(!fp.converged) + int(!load.converged);
    const RVector powers = per_antenna_powers(res.beams);
    res.trace.push_back(detail::make_trace(0, load.offset, powers, cfg, papc_violations(powers, cfg).size(), 0.0));
    detail::finalize_powers(res);
    return res;
}

} // namespace papcbf

#endif
