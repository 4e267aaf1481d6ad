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

#include "oracles.hpp"
#include "papcbf/offsetmax.hpp"

#include <gtest/gtest.h>

using namespace papcbf;

namespace
{

/// A = base + sum_k nu_k h_k h_k^H, built densely.
CMatrix weighting(const RVector &base, const CMatrix &h, const RVector &nu)
{
    CMatrix a = base.cast<cdouble>().asDiagonal();
    for (Eigen::Index k = 0; k < h.cols(); ++k)
        a += nu(k) * h.col(k) * h.col(k).adjoint();
    return a;
}

bool feasible_duals(const RVector &q, const RVector &p, double tol)
{
    return (q.array() >= 0.0).all() && std::abs(q.dot(p) - p.sum()) < tol;
}

double stationarity_residual(const SolveResult &res, const CMatrix &h)
{
    const CMatrix a = weighting(res.duals.papc_duals, h, res.duals.sinr_duals);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < h.cols(); ++k)
    {
        const CVector v = a * res.beams.directions.col(k);
        const CVector hk = h.col(k).normalized();
        worst = std::max(worst, (v - hk * hk.dot(v)).norm() / v.norm());
    }
    return worst;
}

} // namespace

TEST(StepSchedule, DefaultsAndDecay)
{
    const ScenarioConfig cfg = ScenarioConfig::uniform(4, 3, 40.0, 10.0, 2.0, 1.0, 0.0);
    const StepSchedule s = StepSchedule::defaults(cfg);
    EXPECT_DOUBLE_EQ(s.t0, 4.0 / 120.0);
    EXPECT_DOUBLE_EQ(s.damping, 1000.0);
    EXPECT_DOUBLE_EQ(s.next(10.0), 10.0 - 0.1);
    double t = s.t0;
    for (int n = 0; n < 10000; ++n)
    {
        const double nt = s.next(t);
        ASSERT_GT(nt, 0.0);
        ASSERT_LT(nt, t);
        t = nt;
    }
}

TEST(FixedPointDuals, SingleUserClosedForm)
{
    std::mt19937_64 rng(1);
    const CMatrix h = oracle::random_complex(rng, 5, 1);
    RVector gamma(1);
    gamma << 3.0;
    const FixedPointResult fp = fixed_point_duals(RVector::Ones(5), h, gamma, 1e-13);
    EXPECT_TRUE(fp.converged);
    EXPECT_NEAR(fp.nu(0), 3.0 / h.squaredNorm(), 1e-9 * fp.nu(0));
}

TEST(FixedPointDuals, OrthonormalChannels)
{
    std::mt19937_64 rng(2);
    const CMatrix h = oracle::random_complex(rng, 6, 3).householderQr().householderQ() * CMatrix::Identity(6, 3);
    const FixedPointResult fp = fixed_point_duals(RVector::Ones(6), h, RVector::Constant(3, 2.5));
    EXPECT_LT((fp.nu - RVector::Constant(3, 2.5)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FixedPointDuals, SymmetricUsersGetEqualDuals)
{
    // swapping antennas 0 and 1 maps one user onto the other
    CMatrix h(3, 2);
    h << cdouble(1.0, 0.2), cdouble(0.3, -0.7), cdouble(0.3, -0.7), cdouble(1.0, 0.2), cdouble(0.5, 0.5),
        cdouble(0.5, 0.5);
    RVector base(3);
    base << 0.7, 0.7, 1.9;
    const FixedPointResult fp = fixed_point_duals(base, h, RVector::Constant(2, 4.0));
    EXPECT_NEAR(fp.nu(0), fp.nu(1), 1e-10 * fp.nu(0));
}

TEST(FixedPointDuals, SatisfiesDefiningRelation)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial)
    {
        const CMatrix h = oracle::random_complex(rng, 4, 3);
        const RVector base = oracle::random_positive(rng, 4, 0.2, 2.0);
        const RVector gamma = oracle::random_positive(rng, 3, 0.5, 4.0);
        const FixedPointResult fp = fixed_point_duals(base, h, gamma);
        ASSERT_TRUE(fp.converged);
        const CMatrix ainv = oracle::pinv(weighting(base, h, fp.nu));
        for (Eigen::Index k = 0; k < 3; ++k)
        {
            const double quad = std::real(h.col(k).dot(ainv * h.col(k)));
            EXPECT_NEAR(1.0 / fp.nu(k), quad * (1.0 + 1.0 / gamma(k)), 1e-7 / fp.nu(k));
        }
    }
}

TEST(FixedPointDuals, ZeroChannelIsRejected)
{
    CMatrix h = CMatrix::Zero(3, 2);
    h(0, 0) = 1.0;
    try
    {
        fixed_point_duals(RVector::Ones(3), h, RVector::Ones(2));
        FAIL();
    }
    catch (const SolverError &e)
    {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateChannel);
    }
}

TEST(BeamDirections, SingleUserIsMatchedFilter)
{
    std::mt19937_64 rng(4);
    const CMatrix h = oracle::random_complex(rng, 4, 1);
    RVector nu(1);
    nu << 0.8;
    const CMatrix u = beam_directions(RVector::Ones(4), nu, h);
    EXPECT_NEAR(std::abs(u.col(0).dot(h.col(0).normalized())), 1.0, 1e-12);
}

TEST(BeamDirections, OrthonormalChannelsAreMatched)
{
    std::mt19937_64 rng(5);
    const CMatrix h = oracle::random_complex(rng, 5, 3).householderQr().householderQ() * CMatrix::Identity(5, 3);
    const CMatrix u = beam_directions(RVector::Ones(5), RVector::Constant(3, 1.7), h);
    for (Eigen::Index k = 0; k < 3; ++k)
        EXPECT_NEAR(std::abs(u.col(k).dot(h.col(k))), 1.0, 1e-10);
}

TEST(BeamDirections, MatchPseudoInverseOracle)
{
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial)
    {
        const CMatrix h = oracle::random_complex(rng, 4, 3);
        RVector base = oracle::random_positive(rng, 4, 0.0, 2.0);
        if (trial % 4 == 0)
            base(trial % 3) = 0.0; // singular weighting
        const RVector nu = oracle::random_positive(rng, 3, 0.1, 2.0);
        const CMatrix u = beam_directions(base, nu, h);
        const CMatrix ref = oracle::unit_columns(oracle::pinv(weighting(base, h, nu)) * h);
        for (Eigen::Index k = 0; k < 3; ++k)
        {
            EXPECT_NEAR(u.col(k).norm(), 1.0, 1e-12);
            EXPECT_NEAR(std::abs(u.col(k).dot(ref.col(k))), 1.0, 1e-9);
        }
    }
}

TEST(BeamDirections, ScaleInvariance)
{
    std::mt19937_64 rng(7);
    const CMatrix h = oracle::random_complex(rng, 4, 3);
    const RVector base = oracle::random_positive(rng, 4, 0.5, 2.0);
    const RVector nu = oracle::random_positive(rng, 3, 0.1, 2.0);
    const CMatrix u = beam_directions(base, nu, h);
    const CMatrix scaled = beam_directions(7.0 * base, 7.0 * nu, h);
    for (Eigen::Index k = 0; k < 3; ++k)
        EXPECT_NEAR(std::abs(u.col(k).dot(scaled.col(k))), 1.0, 1e-10);

    // with a zero weighting only nu is left, and scaling it alone changes nothing
    const CMatrix u0 = beam_directions(RVector::Zero(4), nu, h);
    const CMatrix u7 = beam_directions(RVector::Zero(4), 7.0 * nu, h);
    for (Eigen::Index k = 0; k < 3; ++k)
        EXPECT_NEAR(std::abs(u0.col(k).dot(u7.col(k))), 1.0, 1e-10);
}

TEST(BeamDirections, NegativeDualsRejected)
{
    const CMatrix h = CMatrix::Identity(2, 2);
    RVector nu(2);
    nu << 1.0, -1.0;
    EXPECT_THROW(beam_directions(RVector::Ones(2), nu, h), SolverError);
}

TEST(ProjectDuals, FeasiblePointUnchanged)
{
    RVector p(3), q(3);
    p << 1.0, 2.0, 3.0;
    q << 2.0, 1.5, 1.0 / 3.0;
    ASSERT_NEAR(q.dot(p), p.sum(), 1e-15);
    EXPECT_LT((project_duals(q, p) - q).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ProjectDuals, EqualPowersMeanShift)
{
    RVector q(4);
    q << 1.5, 1.2, 0.9, 1.4;
    const RVector p = RVector::Constant(4, 2.5);
    const RVector expected = (q.array() - (q.sum() - 4.0) / 4.0).matrix();
    EXPECT_LT((project_duals(q, p) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ProjectDuals, MatchesExhaustiveEnumeration)
{
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.5, 1.5);
    for (int trial = 0; trial < 20; ++trial)
    {
        RVector q(8);
        for (auto &v : q)
            v = n(rng);
        const RVector p = oracle::random_positive(rng, 8, 0.2, 3.0);
        const RVector got = project_duals(q, p);
        EXPECT_LT((got - oracle::brute_force_projection(q, p)).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_TRUE(feasible_duals(got, p, 1e-10 * p.sum()));
        EXPECT_LT((project_duals(got, p) - got).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ProjectDuals, AllNegativeInput)
{
    RVector q(3), p(3);
    q << -3.0, -1.0, -2.0;
    p << 1.0, 1.0, 2.0;
    const RVector got = project_duals(q, p);
    EXPECT_TRUE(feasible_duals(got, p, 1e-12));
    EXPECT_LT((got - oracle::brute_force_projection(q, p)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(DualUpdatePapcOnly, ZeroStepLeavesDualsAlone)
{
    const RVector p = RVector::Constant(4, 2.0);
    DualState s;
    s.papc_duals = initial_papc_duals(p);
    s.step_size = 0.0;
    RVector powers(4);
    powers << 3.0, 1.0, 0.5, 2.5;
    const DualState out = dual_update_papc_only(s, powers, p, StepSchedule{});
    EXPECT_LT((out.papc_duals - s.papc_duals).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(out.iteration, 1);
}

TEST(DualUpdatePapcOnly, PowersAtLimitKeepDuals)
{
    const RVector p = RVector::Constant(4, 2.0);
    DualState s;
    s.papc_duals = RVector::Ones(4);
    s.papc_duals(0) = 1.3;
    s.papc_duals(1) = 0.7;
    s.step_size = 0.4;
    const DualState out = dual_update_papc_only(s, p, p, StepSchedule{});
    EXPECT_LT((out.papc_duals - s.papc_duals).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_DOUBLE_EQ(out.step_size, 0.4 - 0.16 / 1000.0);
}

TEST(DualUpdatePapcOnly, BothSubgradientFormsAgree)
{
    std::mt19937_64 rng(9);
    const RVector p = RVector::Constant(5, 1.5);
    for (int trial = 0; trial < 20; ++trial)
    {
        const RVector q = project_duals(oracle::random_positive(rng, 5, 0.5, 1.5), p);
        const RVector powers = oracle::random_positive(rng, 5, 0.0, 3.0);
        const double t = 0.05;
        const RVector plain = project_duals(q + t * powers, p);
        const RVector centered = project_duals(q + t * (powers - p), p);
        EXPECT_LT((plain - centered).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(DualUpdatePapcOnly, OutputIsFeasible)
{
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 50; ++trial)
    {
        const RVector p = oracle::random_positive(rng, 6, 0.5, 2.0);
        DualState s;
        s.papc_duals = project_duals(oracle::random_positive(rng, 6, 0.0, 2.0), p);
        s.step_size = 0.3;
        const DualState out = dual_update_papc_only(s, oracle::random_positive(rng, 6, 0.0, 5.0), p, StepSchedule{});
        EXPECT_TRUE(feasible_duals(out.papc_duals, p, 1e-10 * p.sum()));
    }
}

TEST(DualUpdateGeneral, Examples)
{
    const RVector p = RVector::Constant(2, 10.0);
    DualState s;
    s.papc_duals = RVector::Constant(2, 0.5);
    s.step_size = 0.1;
    EXPECT_EQ(dual_update_general(s, p, p, StepSchedule{}).papc_duals, s.papc_duals);

    RVector low(2);
    low << 0.0, 9.0;
    s.papc_duals.setZero();
    EXPECT_EQ(dual_update_general(s, low, p, StepSchedule{}).papc_duals, RVector::Zero(2));

    s.papc_duals = RVector::Constant(2, 0.5);
    EXPECT_EQ(dual_update_general(s, low, p, StepSchedule{}).papc_duals(0), 0.0);
    EXPECT_NEAR(dual_update_general(s, low, p, StepSchedule{}).papc_duals(1), 0.4, 1e-15);
}

TEST(OffsetMaxPapc, SingleUserEqualGain)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 3; ++trial)
    {
        const CMatrix h = oracle::random_complex(rng, 4, 1);
        ScenarioConfig cfg = ScenarioConfig::uniform(4, 1, 4.0, 1.0, 2.0, 0.1, 0.0, 1e-6);
        cfg.max_outer_iterations = 20000;
        const SolveResult res =
            solve_offset_max_papc(cfg, ChannelEstimate::make(h, 0.0), OffsetMaxMode::Nominal, false);
        ASSERT_TRUE(res.status.converged);
        const double gain = h.cwiseAbs().sum();
        EXPECT_NEAR(res.beams.offset, gain * gain / 2.0 - 0.1, 1e-4 * gain * gain);
        const CVector w = res.beams.beamformers().col(0);
        const cdouble ref = w(0) / h(0, 0) * std::abs(h(0, 0));
        for (Eigen::Index i = 0; i < 4; ++i)
        {
            EXPECT_NEAR(std::abs(w(i)), 1.0, 1e-3);
            EXPECT_NEAR(std::abs(w(i) / h(i, 0) * std::abs(h(i, 0)) - ref), 0.0, 1e-2);
        }
    }
}

TEST(OffsetMaxPapc, OrthonormalSymmetricUsers)
{
    const CMatrix h = CMatrix::Identity(3, 3) * 1.3;
    ScenarioConfig cfg = ScenarioConfig::uniform(3, 3, 6.0, 2.0, 2.0, 0.1, 0.0, 1e-6);
    const SolveResult res = solve_offset_max_papc(cfg, ChannelEstimate::make(h, 0.0), OffsetMaxMode::Nominal, false);
    ASSERT_TRUE(res.status.converged);
    EXPECT_NEAR(res.beams.powers(0), res.beams.powers(1), 1e-9);
    EXPECT_NEAR(res.beams.powers(1), res.beams.powers(2), 1e-9);
    const RVector powers = per_antenna_powers(res.beams);
    EXPECT_LT((powers - cfg.papc).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(OffsetMaxPapc, NominalKktResiduals)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 5; ++trial)
    {
        const CMatrix h = oracle::random_complex(rng, 4, 3);
        ScenarioConfig cfg = ScenarioConfig::uniform(4, 3, 40.0, 10.0, 2.0, 1.0, 0.0, 1e-6);
        cfg.max_outer_iterations = 20000;
        const SolveResult res =
            solve_offset_max_papc(cfg, ChannelEstimate::make(h, 0.0), OffsetMaxMode::Nominal, false);
        ASSERT_TRUE(res.status.converged);
        const RVector powers = per_antenna_powers(res.beams);
        for (Eigen::Index i = 0; i < 4; ++i)
            EXPECT_LT(std::abs(res.duals.papc_duals(i) * (powers(i) - cfg.papc(i))), 1e-3 * cfg.papc(i));
        EXPECT_LT(stationarity_residual(res, h), 1e-6);
        for (Eigen::Index k = 0; k < 3; ++k)
        {
            const CMatrix q = oracle::signed_q(res.beams.directions, res.beams.powers, k, 2.0);
            const double margin = std::real(h.col(k).dot(q * h.col(k))) - 1.0;
            const double signal = res.beams.powers(k) * std::norm(h.col(k).dot(res.beams.directions.col(k))) / 2.0;
            EXPECT_LT(std::abs(margin - res.beams.offset), 1e-6 * signal);
        }
    }
}

TEST(OffsetMaxPapc, TerminalIterateRespectsPapcs)
{
    std::mt19937_64 rng(13);
    for (OffsetMaxMode mode : {OffsetMaxMode::Nominal, OffsetMaxMode::Robust, OffsetMaxMode::NominalZero})
        for (bool accel : {false, true})
            for (int trial = 0; trial < 5; ++trial)
            {
                const CMatrix h = oracle::random_complex(rng, 4, 3);
                const ScenarioConfig cfg = ScenarioConfig::uniform(4, 3, 40.0, 10.0, 2.0, 1.0, 0.05);
                const SolveResult res = solve_offset_max_papc(cfg, ChannelEstimate::make(h, 0.05), mode, accel);
                ASSERT_FALSE(res.trace.empty());
                EXPECT_EQ(res.trace.size(), std::size_t(res.status.iterations + 1));
                if (res.status.converged)
                {
                    EXPECT_TRUE(papc_violations(per_antenna_powers(res.beams), cfg).empty());
                }
                EXPECT_TRUE(feasible_duals(res.duals.papc_duals, cfg.papc, 1e-9 * cfg.papc.sum()));
            }
}

TEST(OffsetMaxPapc, IterationCapIsFlagged)
{
    std::mt19937_64 rng(14);
    const CMatrix h = oracle::random_complex(rng, 4, 3);
    ScenarioConfig cfg = ScenarioConfig::uniform(4, 3, 40.0, 10.0, 2.0, 1.0, 0.0, 1e-12);
    cfg.max_outer_iterations = 2;
    const SolveResult res = solve_offset_max_papc(cfg, ChannelEstimate::make(h, 0.0), OffsetMaxMode::Nominal, false);
    EXPECT_FALSE(res.status.converged);
    EXPECT_EQ(res.status.iterations, 2);
    EXPECT_EQ(res.trace.size(), 3u);
}

TEST(OffsetMaxPapc, ObserverSeesEveryIteration)
{
    std::mt19937_64 rng(15);
    const CMatrix h = oracle::random_complex(rng, 4, 3);
    const ScenarioConfig cfg = ScenarioConfig::uniform(4, 3, 40.0, 10.0, 2.0, 1.0, 0.05);
    SolverOptions opt;
    std::vector<int> seen;
    opt.observer = [&](const IterationView &v) { seen.push_back(v.iteration); };
    const SolveResult res = solve_offset_max_papc(cfg, ChannelEstimate::make(h, 0.05), OffsetMaxMode::Robust, true, opt);
    ASSERT_EQ(seen.size(), res.trace.size());
    for (std::size_t n = 0; n < seen.size(); ++n)
        EXPECT_EQ(seen[n], int(n));
}

TEST(OffsetMaxGeneral, GenerousPapcsMatchTotalPowerDesign)
{
    std::mt19937_64 rng(16);
    const CMatrix h = oracle::random_complex(rng, 4, 3);
    const ScenarioConfig cfg = ScenarioConfig::uniform(4, 3, 4.0, 40.0, 2.0, 0.1, 0.05);
    const ChannelEstimate est = ChannelEstimate::make(h, 0.05);
    const SolveResult gen = solve_offset_max_general(cfg, est);
    const SolveResult tot = solve_offset_max_total_power(cfg, est);
    EXPECT_TRUE(gen.status.converged);
    EXPECT_EQ(gen.status.iterations, 0);
    EXPECT_EQ(gen.duals.papc_duals, RVector::Zero(4));
    EXPECT_LT((gen.beams.powers - tot.beams.powers).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(gen.beams.offset, tot.beams.offset, 1e-10);
}

TEST(OffsetMaxGeneral, SingleUserMatchedFilter)
{
    std::mt19937_64 rng(17);
    const CMatrix h = oracle::random_complex(rng, 4, 1);
    const ScenarioConfig cfg = ScenarioConfig::uniform(4, 1, 0.5, 1.0, 2.0, 0.1, 0.01);
    const SolveResult res = solve_offset_max_general(cfg, ChannelEstimate::make(h, 0.01));
    EXPECT_NEAR(res.beams.powers(0), 0.5, 1e-12);
    EXPECT_NEAR(std::abs(res.beams.directions.col(0).dot(h.col(0).normalized())), 1.0, 1e-12);
}

TEST(OffsetMaxGeneral, BindingPapcsFeasibleAtTermination)
{
    std::mt19937_64 rng(18);
    int converged = 0;
    for (int trial = 0; trial < 20; ++trial)
    {
        const CMatrix h = oracle::random_complex(rng, 4, 3);
        const ScenarioConfig cfg = ScenarioConfig::uniform(4, 3, 40.0, 12.0, 2.0, 1.0, 0.05);
        const SolveResult res = solve_offset_max_general(cfg, ChannelEstimate::make(h, 0.05));
        EXPECT_NEAR(res.beams.powers.sum(), 40.0, 1e-8 * 40.0);
        if (!res.status.converged)
            continue;
        ++converged;
        const RVector powers = per_antenna_powers(res.beams);
        EXPECT_TRUE(((powers - cfg.papc - cfg.papc_tolerance).array() <= 0.0).all());
    }
    EXPECT_GE(converged, 18);
}
