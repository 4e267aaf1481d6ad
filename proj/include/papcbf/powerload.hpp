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

// Power loading for fixed beam directions.
//
// For user k the SINR margin f_k(e) = h_k^H Q_k h_k - sigma_k^2 evaluated at
// h_k = h_{e_k} + e_k, e_k ~ CN(0, s_k I), has
//
//   mean      mu_k    = h_e^H Q_k h_e - sigma_k^2 + s_k tr(Q_k)
//   variance  sigma_k^2 = 2 s_k h_e^H Q_k^2 h_e + s_k^2 tr(Q_k^2)
//
// with tr(Q_k) = beta_k (1/gamma_k + 1) - sum_j beta_j. The mean is linear in
// beta, so equalizing mu_k = r sigma_k for all users plus one power equation
// is a (K+1)-dimensional linear system once sigma_k is frozen. The robust
// loader alternates that solve with a refresh of sigma_k.

#ifndef PAPCBF_POWERLOAD_HPP
#define PAPCBF_POWERLOAD_HPP

#include "papcbf/model.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

namespace papcbf
{

/// The extra equation that closes the K margin equations.
struct PowerEquation
{
    enum class Kind
    {
        TotalPower,
        ActiveSet
    };

    Kind kind = Kind::TotalPower;
    RVector coefficients; // length K
    double rhs = 0.0;
    std::vector<int> active; // antenna indices (ActiveSet only)

    /// sum_k beta_k = total
    static PowerEquation total_power(Eigen::Index n_users, double total)
    {
        PowerEquation eq;
        eq.kind = Kind::TotalPower;
        eq.coefficients = RVector::Ones(n_users);
        eq.rhs = total;
        return eq;
    }

    /// sum_{i in S} [sum_k beta_k u_k u_k^H]_{ii} = sum_{i in S} p_i
    static PowerEquation active_set(const CMatrix &directions, std::vector<int> active, const RVector &papc)
    {
        PowerEquation eq;
        eq.kind = Kind::ActiveSet;
        eq.coefficients = RVector::Zero(directions.cols());
        for (int i : active)
        {
            eq.coefficients += directions.row(i).cwiseAbs2().transpose();
            eq.rhs += papc(i);
        }
        eq.active = std::move(active);
        return eq;
    }

    /// Active set taken from the strictly positive PAPC duals.
    static PowerEquation from_duals(const CMatrix &directions, const RVector &papc_duals, const RVector &papc)
    {
        std::vector<int> active;
        for (Eigen::Index i = 0; i < papc_duals.size(); ++i)
            if (papc_duals(i) > 0.0)
                active.push_back(static_cast<int>(i));
        return active_set(directions, std::move(active), papc);
    }

    double residual(const RVector &powers) const { return coefficients.dot(powers) - rhs; }
};

struct PowerLoadingState
{
    RVector margins_mean; // mu_{f_k}
    RVector margins_std;  // sigma_{f_k}
    RVector powers;       // beta_k
    double offset = 0.0;  // r
    int iterations = 0;
    bool converged = true;
    bool negative_power = false;
};

struct LoadingOptions
{
    int max_iterations = 100;
    double tolerance = 0.0; // <= 0: use ScenarioConfig::fixed_point_tolerance
};

// ------------------------------------------------------------------------
// Margin moments
// ------------------------------------------------------------------------

/// Row a with mu_k = a^T beta - sigma_k^2:
/// a_k = (|h^H u_k|^2 + s)/gamma, a_j = -(|h^H u_j|^2 + s) for j != k.
inline RVector margin_coefficients(const CMatrix &directions, const CVector &channel, Eigen::Index user,
                                   double gamma, double error_variance)
{
    RVector a = -((directions.adjoint() * channel).cwiseAbs2().array() + error_variance).matrix();
    a(user) = -a(user) / gamma;
    return a;
}

/// Nominal part only: b^T beta = h_e^H Q_k h_e.
inline RVector nominal_coefficients(const CMatrix &directions, const CVector &channel, Eigen::Index user,
                                    double gamma)
{
    return margin_coefficients(directions, channel, user, gamma, 0.0);
}

inline double margin_mean(const CMatrix &directions, const RVector &powers, const CVector &channel,
                          Eigen::Index user, double gamma, double noise, double error_variance)
{
    return margin_coefficients(directions, channel, user, gamma, error_variance).dot(powers) - noise;
}

/// 2 s h^H Q^2 h + s^2 tr(Q^2), evaluated without forming Q:
/// Q = U D U^H with D = diag(beta_j c_j), c_k = 1/gamma, c_j = -1.
inline double margin_variance(const CMatrix &directions, const RVector &powers, const CVector &channel,
                              Eigen::Index user, double gamma, double error_variance)
{
    if (error_variance == 0.0)
        return 0.0;
    RVector d = -powers;
    d(user) = powers(user) / gamma;
    const CVector proj = directions.adjoint() * channel;
    const CVector qh = directions * (d.cast<cdouble>().asDiagonal() * proj);
    const RMatrix gram2 = (directions.adjoint() * directions).cwiseAbs2();
    const double tr_q2 = d.dot(gram2 * d);
    const double v = 2.0 * error_variance * qh.squaredNorm() + error_variance * error_variance * tr_q2;
    return std::max(v, 0.0);
}

// ------------------------------------------------------------------------
// Linear solve
// ------------------------------------------------------------------------

namespace detail
{

/// Solves  A beta - r s = noise,  c^T beta = rhs  for (beta, r). A is
/// factored once; each new s is handled by bordering.
class BorderedSolver
{
  public:
    BorderedSolver(RMatrix a, RVector c, RVector noise, double rhs)
        : a_(std::move(a)), c_(std::move(c)), noise_(std::move(noise)), rhs_(rhs), lu_(a_)
    {
        rcond_ = a_.size() == 0 ? 0.0 : lu_.rcond();
        factored_ = std::isfinite(rcond_) && rcond_ > 1e-13;
        if (factored_)
            x_noise_ = lu_.solve(noise_);
    }

    /// Returns false when the bordered system is singular.
    bool solve(const RVector &s, RVector &beta, double &r) const
    {
        if (factored_)
        {
            const RVector x_s = lu_.solve(s);
            const double denom = c_.dot(x_s);
            const double scale = c_.cwiseAbs().dot(x_s.cwiseAbs());
            if (std::abs(denom) > 1e-12 * scale && std::isfinite(denom))
            {
                r = (rhs_ - c_.dot(x_noise_)) / denom;
                beta = x_noise_ + r * x_s;
                return beta.allFinite() && std::isfinite(r);
            }
        }
        const Eigen::Index k = a_.rows();
        RMatrix full = RMatrix::Zero(k + 1, k + 1);
        full.topLeftCorner(k, k) = a_;
        full.topRightCorner(k, 1) = -s;
        full.bottomLeftCorner(1, k) = c_.transpose();
        RVector b(k + 1);
        b.head(k) = noise_;
        b(k) = rhs_;
        Eigen::FullPivLU<RMatrix> flu(full);
        flu.setThreshold(1e-13);
        if (!flu.isInvertible())
            return false;
        const RVector x = flu.solve(b);
        beta = x.head(k);
        r = x(k);
        return beta.allFinite() && std::isfinite(r);
    }

    double rcond() const { return rcond_; }

  private:
    RMatrix a_;
    RVector c_;
    RVector noise_;
    double rhs_;
    Eigen::PartialPivLU<RMatrix> lu_;
    RVector x_noise_;
    double rcond_ = 0.0;
    bool factored_ = false;
};

[[noreturn]] inline void throw_singular(const char *who, double rcond)
{
    std::ostringstream os;
    os << who << ": margin system is rank-deficient (rcond estimate " << rcond << ")";
    throw SolverError(ErrorCode::SingularSystem, os.str());
}

inline void check_loading_inputs(const CMatrix &directions, const ChannelEstimate &channels,
                                 const ScenarioConfig &cfg, const PowerEquation &eq)
{
    const Eigen::Index k = directions.cols();
    if (channels.n_users() != k || cfg.sinr_targets.size() != k || cfg.noise_powers.size() != k ||
        eq.coefficients.size() != k)
        throw SolverError(ErrorCode::InvalidArgument, "power loading: user count mismatch");
    if (channels.n_antennas() != directions.rows())
        throw SolverError(ErrorCode::InvalidArgument, "power loading: antenna count mismatch");
}

} // namespace detail

/// Robust loading by iterative linearization: freeze sigma_{f_k}, solve the
/// K+1 linear equations, refresh sigma_{f_k}, repeat. Users with zero error
/// variance keep sigma_{f_k} = 1, which turns their equation into a nominal
/// offset constraint. Stops once sigma moves by less than the tolerance and
/// mu_k = r sigma_k holds to tolerance * (1 + |r|).
inline PowerLoadingState robust_power_loading(const CMatrix &directions, const ChannelEstimate &channels,
                                              const ScenarioConfig &cfg, const PowerEquation &eq,
                                              LoadingOptions opts = {})
{
    detail::check_loading_inputs(directions, channels, cfg, eq);
    const Eigen::Index k_users = directions.cols();
    if (opts.tolerance <= 0.0)
        opts.tolerance = cfg.fixed_point_tolerance;

    RMatrix a(k_users, k_users);
    for (Eigen::Index k = 0; k < k_users; ++k)
        a.row(k) = margin_coefficients(directions, channels.estimated.col(k), k, cfg.sinr_targets(k),
                                       channels.error_variances(k))
                       .transpose();
    const detail::BorderedSolver solver(a, eq.coefficients, cfg.noise_powers, eq.rhs);

    auto std_of = [&](const RVector &beta) {
        RVector s(k_users);
        for (Eigen::Index k = 0; k < k_users; ++k)
        {
            const double ev = channels.error_variances(k);
            if (ev == 0.0)
            {
                s(k) = 1.0;
                continue;
            }
            const double floor = 1e-12 * (cfg.noise_powers(k) > 0.0 ? cfg.noise_powers(k) : 1.0);
            const double v = margin_variance(directions, beta, channels.estimated.col(k), k,
                                             cfg.sinr_targets(k), ev);
            s(k) = std::max(std::sqrt(v), floor);
        }
        return s;
    };

    PowerLoadingState st;
    RVector s = RVector::Ones(k_users);
    RVector beta;
    double r = 0.0;
    st.converged = false;
    for (int it = 1; it <= opts.max_iterations; ++it)
    {
        if (!solver.solve(s, beta, r))
            detail::throw_singular("robust_power_loading", solver.rcond());
        const RVector s_new = std_of(beta);
        double change = 0.0;
        for (Eigen::Index k = 0; k < k_users; ++k)
            change = std::max(change, std::abs(s_new(k) - s(k)) / std::max(s(k), 1e-12));
        st.iterations = it;
        s = s_new;
        if (change < opts.tolerance)
        {
            // a small change in sigma still leaves a residual of about r * sigma * change
            const double residual = (a * beta - cfg.noise_powers - r * s).cwiseAbs().maxCoeff();
            if (residual < opts.tolerance * (1.0 + std::abs(r)))
            {
                st.converged = true;
                break;
            }
        }
    }

    st.powers = beta;
    st.offset = r;
    st.margins_std = s;
    st.margins_mean = a * beta - cfg.noise_powers;
    st.negative_power = (beta.array() < 0.0).any();
    return st;
}

/// Nominal (offset) loading: h_e^H Q_k h_e - sigma_k^2 = r for every user plus
/// the power equation. With `fixed_offset` the K equations are solved for
/// beta alone and beta is then scaled so the power equation holds.
inline PowerLoadingState nominal_power_loading(const CMatrix &directions, const ChannelEstimate &channels,
                                               const ScenarioConfig &cfg, const PowerEquation &eq,
                                               std::optional<double> fixed_offset = std::nullopt)
{
    detail::check_loading_inputs(directions, channels, cfg, eq);
    const Eigen::Index k_users = directions.cols();

    RMatrix b(k_users, k_users);
    for (Eigen::Index k = 0; k < k_users; ++k)
        b.row(k) = nominal_coefficients(directions, channels.estimated.col(k), k, cfg.sinr_targets(k)).transpose();

    PowerLoadingState st;
    st.iterations = 1;
    st.margins_std = RVector::Ones(k_users);
    if (fixed_offset)
    {
        Eigen::FullPivLU<RMatrix> lu(b);
        lu.setThreshold(1e-13);
        if (!lu.isInvertible())
            detail::throw_singular("nominal_power_loading", lu.rcond());
        RVector beta = lu.solve((cfg.noise_powers.array() + *fixed_offset).matrix());
        const double load = eq.coefficients.dot(beta);
        if (!(std::abs(load) > 0.0) || !std::isfinite(load))
            detail::throw_singular("nominal_power_loading", lu.rcond());
        beta *= eq.rhs / load;
        st.powers = beta;
        st.margins_mean = b * beta - cfg.noise_powers;
        st.offset = st.margins_mean.minCoeff();
    }
    else
    {
        const detail::BorderedSolver solver(b, eq.coefficients, cfg.noise_powers, eq.rhs);
        RVector beta;
        double r = 0.0;
        if (!solver.solve(RVector::Ones(k_users), beta, r))
            detail::throw_singular("nominal_power_loading", solver.rcond());
        st.powers = beta;
        st.offset = r;
        st.margins_mean = b * beta - cfg.noise_powers;
    }
    st.negative_power = (st.powers.array() < 0.0).any();
    return st;
}

} // namespace papcbf

#endif
