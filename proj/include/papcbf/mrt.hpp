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

// Maximum ratio transmission under per-antenna power constraints.
//
// With PAPC duals q the MRT beam of user k points along Q-hat^{-1} h_{n_k}.
// Since Q-hat is diagonal nothing here needs more than O(N_t K) storage.

#ifndef PAPCBF_MRT_HPP
#define PAPCBF_MRT_HPP

#include "papcbf/offsetmax.hpp"

#include <optional>
#include <utility>

namespace papcbf
{

/// u_k = normalize(h_{n_k} ./ base). Throws ZeroDiagonal if some weight is
/// below 1e-14.
inline CMatrix mrt_directions(const RVector &base, const CMatrix &normalized)
{
    if (base.size() != normalized.rows())
        throw SolverError(ErrorCode::InvalidArgument, "mrt_directions: length mismatch");
    if ((base.array() < 1e-14).any())
        throw SolverError(ErrorCode::ZeroDiagonal, "MRT weighting has a zero diagonal entry");
    CMatrix u = base.cwiseInverse().cast<cdouble>().asDiagonal() * normalized;
    for (Eigen::Index k = 0; k < u.cols(); ++k)
    {
        const double n = u.col(k).norm();
        if (!(n > 0.0))
            throw SolverError(ErrorCode::DegenerateDirection, "MRT direction " + std::to_string(k) + " vanished");
        u.col(k) /= n;
    }
    return u;
}

/// |h_{n_k}^H u_k|^2 for every k, column by column.
inline RVector matched_gains(const CMatrix &normalized, const CMatrix &directions)
{
    return (normalized.conjugate().cwiseProduct(directions)).colwise().sum().cwiseAbs2().transpose();
}

/// Nominal MRT: beta_k |h_{n_k}^H u_k|^2 = t for every user, and the power
/// equation decides t. All PAPC duals stay positive so the equation reduces
/// to sum beta = sum p.
inline SolveResult solve_mrt_nominal(const ScenarioConfig &cfg, const ChannelEstimate &channels,
                                     const SolverOptions &opt = {})
{
    cfg.validate();
    auto direction_step = [&](const DualState &s) {
        DirectionStep d;
        d.directions = mrt_directions(s.papc_duals, channels.normalized);
        d.sinr_duals = RVector::Zero(cfg.n_users);
        return d;
    };
    auto loading_step = [&](const CMatrix &u, const DualState &s) {
        const PowerEquation eq = PowerEquation::from_duals(u, s.papc_duals, cfg.papc);
        const RVector c = matched_gains(channels.normalized, u);
        PowerLoadingState st;
        st.offset = eq.rhs / eq.coefficients.dot(c.cwiseInverse());
        st.powers = st.offset * c.cwiseInverse();
        st.margins_mean = RVector::Constant(cfg.n_users, st.offset);
        st.margins_std = RVector::Ones(cfg.n_users);
        return st;
    };
    return detail::run_dual_loop(cfg, initial_papc_duals(cfg.papc), DualUpdateKind::PapcOnly, false, opt,
                                 direction_step, loading_step, opt.mrt_dual_floor);
}

struct MrtClosedForm
{
    RVector antenna_weights; // g_i
    RVector duals;           // q_i
    double signal_level = 0.0;
    RVector correction;      // z_i
};

/// Closed-form nominal MRT for uniform PAPCs. `user_weights` are the nu_k
/// (default 1/K each).
inline std::pair<BeamformerSet, MrtClosedForm> one_shot_mrt(const ScenarioConfig &cfg,
                                                            const ChannelEstimate &channels,
                                                            std::optional<RVector> user_weights = std::nullopt)
{
    cfg.validate();
    if (!all_equal(cfg.papc))
        throw SolverError(ErrorCode::NonUniformPapc, "one-shot MRT requires equal PAPCs");
    const CMatrix &hn = channels.normalized;
    const Eigen::Index k_users = hn.cols();
    const RVector nu = user_weights ? *user_weights : RVector::Constant(k_users, 1.0 / double(k_users));
    if (nu.size() != k_users)
        throw SolverError(ErrorCode::InvalidArgument, "one_shot_mrt: weight length mismatch");

    MrtClosedForm cf;
    cf.antenna_weights = hn.cwiseAbs2() * nu.cwiseAbs2();
    if ((cf.antenna_weights.array() <= 0.0).any())
        throw SolverError(ErrorCode::ZeroChannelEntry, "an antenna has zero gain to every user");
    const RVector root = cf.antenna_weights.cwiseSqrt();
    cf.signal_level = root.sum();
    cf.duals = cf.signal_level * root;

    const CMatrix u = mrt_directions(cf.duals, hn);
    const RVector beta = cf.signal_level * matched_gains(hn, u).cwiseInverse();
    CMatrix w = u * beta.cwiseSqrt().cast<cdouble>().asDiagonal();

    const RVector y = w.cwiseAbs2().rowwise().sum();
    cf.correction = (cfg.papc.array() / y.array()).sqrt().matrix();
    w = cf.correction.cast<cdouble>().asDiagonal() * w;

    BeamformerSet beams = BeamformerSet::from_beamformers(w, cf.signal_level);
    return {std::move(beams), std::move(cf)};
}

/// one_shot_mrt packaged like the iterative solvers.
inline SolveResult solve_mrt_one_shot(const ScenarioConfig &cfg, const ChannelEstimate &channels,
                                      const SolverOptions & = {})
{
    auto [beams, cf] = one_shot_mrt(cfg, channels);
    SolveResult res;
    res.beams = std::move(beams);
    res.duals.papc_duals = cf.duals;
    res.duals.sinr_duals = RVector::Constant(cfg.n_users, 1.0 / cfg.n_users);
    res.status.converged = true;
    const RVector powers = per_antenna_powers(res.beams);
    res.trace.push_back(
        detail::make_trace(0, cf.signal_level, powers, cfg, papc_violations(powers, cfg).size(), 0.0));
    return res;
}

/// MRT directions with robust loading onto the active-set equation.
inline SolveResult solve_mrt_robust(const ScenarioConfig &cfg, const ChannelEstimate &channels,
                                    const SolverOptions &opt = {})
{
    cfg.validate();
    auto direction_step = [&](const DualState &s) {
        DirectionStep d;
        d.directions = mrt_directions(s.papc_duals, channels.normalized);
        d.sinr_duals = RVector::Zero(cfg.n_users);
        return d;
    };
    auto loading_step = [&](const CMatrix &u, const DualState &s) {
        return robust_power_loading(u, channels, cfg, PowerEquation::from_duals(u, s.papc_duals, cfg.papc));
    };
    return detail::run_dual_loop(cfg, initial_papc_duals(cfg.papc), DualUpdateKind::PapcOnly, false, opt,
                                 direction_step, loading_step, opt.mrt_dual_floor);
}

/// MRT with a total power constraint and PAPCs: weighting I + Q-hat from
/// Q-hat = 0, robust loading onto sum beta = P_t.
inline SolveResult solve_mrt_general(const ScenarioConfig &cfg, const ChannelEstimate &channels,
                                     const SolverOptions &opt = {})
{
    cfg.validate();
    auto direction_step = [&](const DualState &s) {
        DirectionStep d;
        d.directions = mrt_directions((s.papc_duals.array() + 1.0).matrix(), channels.normalized);
        d.sinr_duals = RVector::Zero(cfg.n_users);
        return d;
    };
    auto loading_step = [&](const CMatrix &u, const DualState &) {
        return robust_power_loading(u, channels, cfg, PowerEquation::total_power(u.cols(), cfg.total_power));
    };
    return detail::run_dual_loop(cfg, RVector::Zero(cfg.n_antennas), DualUpdateKind::General, false, opt,
                                 direction_step, loading_step);
}

/// Total-power-only benchmark: plain MRT directions with robust loading.
inline SolveResult solve_mrt_total_power(const ScenarioConfig &cfg, const ChannelEstimate &channels,
                                         const SolverOptions & = {})
{
    cfg.validate();
    const CMatrix &u = channels.normalized;
    const PowerLoadingState load =
        robust_power_loading(u, channels, cfg, PowerEquation::total_power(u.cols(), cfg.total_power));
    SolveResult res;
    res.beams = BeamformerSet{u, load.powers, load.offset};
    res.duals.papc_duals = RVector::Zero(cfg.n_antennas);
    res.duals.sinr_duals = RVector::Zero(cfg.n_users);
    res.status.converged = true;
    res.status.inner_nonconvergence = int(!load.converged);
    const RVector powers = per_antenna_powers(res.beams);
    res.trace.push_back(detail::make_trace(0, load.offset, powers, cfg, papc_violations(powers, cfg).size(), 0.0));
    detail::finalize_powers(res);
    return res;
}

} // namespace papcbf

#endif
