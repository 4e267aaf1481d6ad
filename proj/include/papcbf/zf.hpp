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

// Zero-forcing under per-antenna power constraints.
//
// Every ZF beam for user k has the form u_zf_k + H_perp m_k, where
// U_zf = H (H^H H)^{-1} has unit gain towards its own user and H_perp spans
// the null space of H^H. The free coefficients M are set from the PAPC duals,
// M = -(H_perp^H D H_perp)^+ H_perp^H D U_zf with D = Q-hat (or Q-hat + I).

#ifndef PAPCBF_ZF_HPP
#define PAPCBF_ZF_HPP

#include "papcbf/offsetmax.hpp"

#include <limits>

namespace papcbf
{

struct ZfBasis
{
    CMatrix zf_directions; // N_t x K, h_j^H u_zf_k = delta_jk
    CMatrix null_basis;    // N_t x (N_t - K), orthonormal
    CMatrix scaling;       // (N_t - K) x K
};

/// Condition number cap on H^H H.
inline constexpr double kZfConditionCap = 1e8;

inline ZfBasis zf_basis(const CMatrix &channels)
{
    const Eigen::Index nt = channels.rows();
    const Eigen::Index k = channels.cols();
    if (k > nt)
        throw SolverError(ErrorCode::RankDeficient, "more users than antennas");

    const CMatrix gram = hermitian_part(channels.adjoint() * channels);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin >= kZfConditionCap)
        throw SolverError(ErrorCode::RankDeficient, "channel Gram matrix is numerically singular");

    ZfBasis b;
    b.zf_directions = channels * gram.llt().solve(CMatrix::Identity(k, k));
    const Eigen::HouseholderQR<CMatrix> qr(channels);
    const CMatrix q = qr.householderQ() * CMatrix::Identity(nt, nt);
    b.null_basis = q.rightCols(nt - k);
    b.scaling = CMatrix::Zero(nt - k, k);
    return b;
}

/// M = -(H_perp^H D H_perp)^+ (H_perp^H D U_zf), D = diag(q) or diag(q) + I.
inline CMatrix scaling_matrix(const ZfBasis &basis, const RVector &q_diag, bool regularized)
{
    const Eigen::Index m = basis.null_basis.cols();
    const Eigen::Index k = basis.zf_directions.cols();
    if (m == 0)
        return CMatrix::Zero(0, k);
    RVector d = q_diag;
    if (regularized)
        d.array() += 1.0;
    const auto dc = d.cast<cdouble>().asDiagonal();
    const CMatrix g = basis.null_basis.adjoint() * dc * basis.null_basis;
    const CMatrix rhs = basis.null_basis.adjoint() * dc * basis.zf_directions;
    return -hermitian_pinv(g).pinv * rhs;
}

/// Un-normalized ZF beams u_zf_k + H_perp m_k.
inline CMatrix zf_beams(const ZfBasis &basis, const CMatrix &scaling)
{
    if (scaling.rows() == 0)
        return basis.zf_directions;
    return basis.zf_directions + basis.null_basis * scaling;
}

enum class ZfLoading
{
    Robust,              // robust loading onto the active-set equation
    UniformT,            // equal signal power in the normalized-channel metric
    UniformTUnnormalized // equal received power (basis built from raw h_e)
};

namespace detail
{

struct ZfDirections
{
    CMatrix directions;
    RVector gains; // |d_k|^2 of the un-normalized beams
};

inline ZfDirections normalize_zf(const CMatrix &d)
{
    ZfDirections out;
    out.directions = d;
    out.gains.resize(d.cols());
    for (Eigen::Index k = 0; k < d.cols(); ++k)
    {
        const double n = d.col(k).norm();
        if (!(n > 0.0))
            throw SolverError(ErrorCode::DegenerateDirection, "ZF beam " + std::to_string(k) + " vanished");
        out.gains(k) = n * n;
        out.directions.col(k) /= n;
    }
    return out;
}

} // namespace detail

/// PAPC-only ZF. Robust loading, or the uniform-t baselines whose final
/// signal level is the largest t with t p_hat_i <= p_i.
inline SolveResult solve_zf_papc(const ScenarioConfig &cfg, const ChannelEstimate &channels, ZfLoading loading,
                                 const SolverOptions &opt = {})
{
    cfg.validate();
    const ZfBasis basis =
        zf_basis(loading == ZfLoading::UniformTUnnormalized ? channels.estimated : channels.normalized);
    RVector gains;

    auto direction_step = [&](const DualState &s) {
        detail::ZfDirections z = detail::normalize_zf(zf_beams(basis, scaling_matrix(basis, s.papc_duals, false)));
        gains = z.gains;
        DirectionStep d;
        d.directions = std::move(z.directions);
        d.sinr_duals = RVector::Zero(cfg.n_users);
        return d;
    };
    auto loading_step = [&](const CMatrix &u, const DualState &s) {
        const PowerEquation eq = PowerEquation::from_duals(u, s.papc_duals, cfg.papc);
        if (loading == ZfLoading::Robust)
            return robust_power_loading(u, channels, cfg, eq);
        PowerLoadingState st;
        const double denom = eq.coefficients.dot(gains);
        if (!(denom > 0.0))
            throw SolverError(ErrorCode::SingularSystem, "uniform-t loading has no active antennas");
        st.offset = eq.rhs / denom;
        st.powers = st.offset * gains;
        st.margins_std = RVector::Ones(cfg.n_users);
        st.margins_mean = RVector::Constant(cfg.n_users, st.offset);
        return st;
    };

    SolveResult res = detail::run_dual_loop(cfg, initial_papc_duals(cfg.papc), DualUpdateKind::PapcOnly, false, opt,
                                            direction_step, loading_step);
    if (loading != ZfLoading::Robust)
    {
        // p_hat at t = 1, then the largest feasible t
        const RVector unit = res.beams.directions.cwiseAbs2() * gains;
        double t = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < unit.size(); ++i)
            if (unit(i) > 0.0)
                t = std::min(t, cfg.papc(i) / unit(i));
        res.beams.powers = t * gains;
        res.beams.offset = t;
    }
    return res;
}

/// ZF with a total power constraint and PAPCs: D = Q-hat + I, Q-hat from zero,
/// robust loading onto sum beta = P_t.
inline SolveResult solve_zf_general(const ScenarioConfig &cfg, const ChannelEstimate &channels,
                                    const SolverOptions &opt = {})
{
    cfg.validate();
    const ZfBasis basis = zf_basis(channels.normalized);
    auto direction_step = [&](const DualState &s) {
        DirectionStep d;
        d.directions = detail::normalize_zf(zf_beams(basis, scaling_matrix(basis, s.papc_duals, true))).directions;
        d.sinr_duals = RVector::Zero(cfg.n_users);
        return d;
    };
    auto loading_step = [&](const CMatrix &u, const DualState &) {
        return robust_power_loading(u, channels, cfg, PowerEquation::total_power(u.cols(), cfg.total_power));
    };
    return detail::run_dual_loop(cfg, RVector::Zero(cfg.n_antennas), DualUpdateKind::General, false, opt,
                                 direction_step, loading_step);
}

/// Total-power-only benchmark: nominal ZF directions with robust loading.
inline SolveResult solve_zf_total_power(const ScenarioConfig &cfg, const ChannelEstimate &channels,
                                        const SolverOptions & = {})
{
    cfg.validate();
    const ZfBasis basis = zf_basis(channels.normalized);
    const CMatrix u = detail::normalize_zf(basis.zf_directions).directions;
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
