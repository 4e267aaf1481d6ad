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

#ifndef PAPCBF_MODEL_HPP
#define PAPCBF_MODEL_HPP

#include "papcbf/error.hpp"
#include "papcbf/linalg.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace papcbf
{

// ------------------------------------------------------------------------
// Scenario data
// ------------------------------------------------------------------------

/// Static problem data for one design. All quantities are linear (no dB).
struct ScenarioConfig
{
    int n_antennas = 0;              // N_t
    int n_users = 0;                 // K
    double total_power = 0.0;        // P_t
    RVector papc;                    // p_i, length N_t
    RVector sinr_targets;            // gamma_k, length K
    RVector noise_powers;            // sigma_k^2, length K
    double error_variance = 0.0;     // sigma_e^2 per entry of e_k
    RVector papc_tolerance;          // epsilon_i, length N_t
    int max_outer_iterations = 200;  // dual updates before giving up
    double fixed_point_tolerance = 1e-8;

    void validate() const
    {
        if (n_antennas <= 0)
            throw ConfigError("n_antennas", "must be a positive integer");
        if (n_users <= 0)
            throw ConfigError("n_users", "must be a positive integer");
        if (!(total_power >= 0.0) || !std::isfinite(total_power))
            throw ConfigError("total_power", "must be finite and >= 0");
        if (papc.size() != n_antennas)
            throw ConfigError("papc", "length must equal n_antennas");
        if (papc_tolerance.size() != n_antennas)
            throw ConfigError("papc_tolerance", "length must equal n_antennas");
        if (sinr_targets.size() != n_users)
            throw ConfigError("sinr_targets", "length must equal n_users");
        if (noise_powers.size() != n_users)
            throw ConfigError("noise_powers", "length must equal n_users");
        if ((papc.array() < 0.0).any())
            throw ConfigError("papc", "entries must be >= 0");
        if ((papc_tolerance.array() <= 0.0).any())
            throw ConfigError("papc_tolerance", "entries must be > 0");
        if ((sinr_targets.array() <= 0.0).any())
            throw ConfigError("sinr_targets", "entries must be > 0");
        if ((noise_powers.array() < 0.0).any())
            throw ConfigError("noise_powers", "entries must be >= 0");
        if (!(error_variance >= 0.0))
            throw ConfigError("error_variance", "must be >= 0");
        if (max_outer_iterations <= 0)
            throw ConfigError("max_outer_iterations", "must be a positive integer");
        if (!(fixed_point_tolerance > 0.0))
            throw ConfigError("fixed_point_tolerance", "must be > 0");
    }

    /// Same target, noise and PAPC for everyone; epsilon_i = tolerance_fraction * p_i.
    static ScenarioConfig uniform(int n_antennas, int n_users, double total_power, double papc_each,
                                  double gamma, double noise, double error_variance,
                                  double tolerance_fraction = 0.1)
    {
        ScenarioConfig cfg;
        cfg.n_antennas = n_antennas;
        cfg.n_users = n_users;
        cfg.total_power = total_power;
        cfg.papc = RVector::Constant(n_antennas, papc_each);
        cfg.sinr_targets = RVector::Constant(n_users, gamma);
        cfg.noise_powers = RVector::Constant(n_users, noise);
        cfg.error_variance = error_variance;
        cfg.papc_tolerance = tolerance_fraction * cfg.papc;
        return cfg;
    }

    /// Restriction to the served users, in the given order.
    ScenarioConfig subset(const std::vector<int> &users) const
    {
        ScenarioConfig out = *this;
        out.n_users = static_cast<int>(users.size());
        out.sinr_targets.resize(out.n_users);
        out.noise_powers.resize(out.n_users);
        for (int k = 0; k < out.n_users; ++k)
        {
            out.sinr_targets(k) = sinr_targets(users[k]);
            out.noise_powers(k) = noise_powers(users[k]);
        }
        return out;
    }
};

/// What the transmitter knows: estimated channels h_{e_k} (columns), their
/// unit-norm directions h_{n_k}, and the error variance attached to each
/// estimate. Solvers only ever see this type.
struct ChannelEstimate
{
    CMatrix estimated;
    CMatrix normalized;
    RVector error_variances;

    Eigen::Index n_antennas() const { return estimated.rows(); }
    Eigen::Index n_users() const { return estimated.cols(); }

    static ChannelEstimate make(CMatrix estimated, RVector error_variances)
    {
        if (error_variances.size() != estimated.cols())
            throw SolverError(ErrorCode::InvalidArgument, "error_variances length must equal the user count");
        ChannelEstimate out;
        out.normalized = CMatrix::Zero(estimated.rows(), estimated.cols());
        for (Eigen::Index k = 0; k < estimated.cols(); ++k)
        {
            const double n = estimated.col(k).norm();
            if (n > 0.0)
                out.normalized.col(k) = estimated.col(k) / n;
        }
        out.estimated = std::move(estimated);
        out.error_variances = std::move(error_variances);
        return out;
    }

    static ChannelEstimate make(CMatrix estimated, double error_variance)
    {
        RVector ev = RVector::Constant(estimated.cols(), error_variance);
        return make(std::move(estimated), std::move(ev));
    }

    ChannelEstimate subset(const std::vector<int> &users) const
    {
        ChannelEstimate out;
        const auto n = static_cast<Eigen::Index>(users.size());
        out.estimated.resize(n_antennas(), n);
        out.normalized.resize(n_antennas(), n);
        out.error_variances.resize(n);
        for (Eigen::Index k = 0; k < n; ++k)
        {
            out.estimated.col(k) = estimated.col(users[k]);
            out.normalized.col(k) = normalized.col(users[k]);
            out.error_variances(k) = error_variances(users[k]);
        }
        return out;
    }
};

/// One channel realization: the estimate plus the true channels h_k = h_{e_k} + e_k.
struct ChannelSet
{
    ChannelEstimate estimate;
    CMatrix true_channels;
    CMatrix errors;
};

// ------------------------------------------------------------------------
// Designs and duals
// ------------------------------------------------------------------------

/// Beamformers w_k = sqrt(beta_k) u_k with unit-norm directions u_k.
struct BeamformerSet
{
    CMatrix directions;
    RVector powers;
    double offset = 0.0;

    Eigen::Index n_antennas() const { return directions.rows(); }
    Eigen::Index n_users() const { return directions.cols(); }

    CMatrix beamformers() const
    {
        return directions * powers.cwiseMax(0.0).cwiseSqrt().cast<cdouble>().asDiagonal();
    }

    /// Splits raw beamformers into direction and power. A zero column gets
    /// direction e_1 and zero power.
    static BeamformerSet from_beamformers(const CMatrix &w, double offset = 0.0)
    {
        BeamformerSet out;
        out.directions = CMatrix::Zero(w.rows(), w.cols());
        out.powers = RVector::Zero(w.cols());
        out.offset = offset;
        for (Eigen::Index k = 0; k < w.cols(); ++k)
        {
            const double n = w.col(k).norm();
            out.powers(k) = n * n;
            if (n > 0.0)
                out.directions.col(k) = w.col(k) / n;
            else if (w.rows() > 0)
                out.directions(0, k) = 1.0;
        }
        return out;
    }
};

/// Dual variables of the PAPC (q_i, the diagonal of Q-hat) and SINR (nu_k)
/// constraints together with the subgradient step state.
struct DualState
{
    RVector papc_duals;
    RVector sinr_duals;
    double step_size = 0.0;
    int iteration = 0;
};

struct OutageStats
{
    RVector per_user_outage;           // delta_k over (realization, served user k)
    std::vector<long> per_user_served; // sample count behind each delta_k
    double mean_outage = 0.0;          // over all (realization, served user) pairs
    double mean_stderr = 0.0;
    double max_outage = 0.0;           // max_k delta_k
    double max_stderr = 0.0;           // binomial stderr of the arg-max user
    long served_pairs = 0;
    long realizations_used = 0;
    long realizations_skipped = 0;     // nobody passed user selection
    long n_nonconverged = 0;
    long n_failed = 0;                 // solver threw; served users counted in outage
    double mean_iterations = 0.0;
    double mean_ms = 0.0;
    std::uint64_t seed = 0;
};

// ------------------------------------------------------------------------
// Operations
// ------------------------------------------------------------------------

namespace detail
{
inline void check_user(const BeamformerSet &beams, Eigen::Index user)
{
    if (user < 0 || user >= beams.n_users())
        throw std::out_of_range("user index " + std::to_string(user) + " outside [0, " +
                                std::to_string(beams.n_users()) + ")");
}
} // namespace detail

/// Q_k = w_k w_k^H / gamma_k - sum_{j != k} w_j w_j^H, symmetrized.
inline CMatrix interference_matrix(const BeamformerSet &beams, Eigen::Index user, double gamma)
{
    detail::check_user(beams, user);
    if (!(gamma > 0.0))
        throw SolverError(ErrorCode::InvalidArgument, "gamma must be > 0");
    const CMatrix w = beams.beamformers();
    RVector weight = RVector::Constant(w.cols(), -1.0);
    weight(user) = 1.0 / gamma;
    CMatrix q = w * weight.cast<cdouble>().asDiagonal() * w.adjoint();
    return hermitian_part(q);
}

/// |h^H w_k|^2 / (sum_{j != k} |h^H w_j|^2 + sigma^2)
inline double sinr(const CVector &channel, const BeamformerSet &beams, Eigen::Index user, double noise)
{
    detail::check_user(beams, user);
    if (!(noise > 0.0))
        throw SolverError(ErrorCode::InvalidArgument, "noise must be > 0");
    const CVector g = beams.beamformers().adjoint() * channel;
    double interference = noise;
    for (Eigen::Index j = 0; j < g.size(); ++j)
        if (j != user)
            interference += std::norm(g(j));
    return std::norm(g(user)) / interference;
}

/// [sum_k w_k w_k^H]_{i,i} for every antenna.
inline RVector per_antenna_powers(const BeamformerSet &beams)
{
    return beams.directions.cwiseAbs2() * beams.powers;
}

/// Antennas with powers_i - p_i > epsilon_i.
inline std::vector<int> papc_violations(const RVector &powers, const RVector &papc, const RVector &tolerance)
{
    if (powers.size() != papc.size() || tolerance.size() != papc.size())
        throw SolverError(ErrorCode::InvalidArgument, "papc_violations: length mismatch");
    std::vector<int> out;
    for (Eigen::Index i = 0; i < powers.size(); ++i)
        if (powers(i) - papc(i) > tolerance(i))
            out.push_back(static_cast<int>(i));
    return out;
}

inline std::vector<int> papc_violations(const RVector &powers, const ScenarioConfig &cfg)
{
    return papc_violations(powers, cfg.papc, cfg.papc_tolerance);
}

} // namespace papcbf

#endif
