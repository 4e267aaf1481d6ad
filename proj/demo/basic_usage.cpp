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

// Draws one channel realization, designs beams with three of the solvers and
// prints per-antenna powers and the realized SINRs on the true channels.

#include "papcbf/papcbf.hpp"

#include <cstdio>

using namespace papcbf;

static void report(const char *name, const SolveResult &res, const ScenarioConfig &cfg, const ChannelSet &set)
{
    const RVector powers = per_antenna_powers(res.beams);
    std::printf("%-22s converged=%d iterations=%3d offset=%.4g\n", name, int(res.status.converged),
                res.status.iterations, res.beams.offset);
    std::printf("  antenna power / p_i :");
    for (Eigen::Index i = 0; i < powers.size(); ++i)
        std::printf(" %.3f", powers(i) / cfg.papc(i));
    std::printf("\n  realized SINR / gamma:");
    for (Eigen::Index k = 0; k < res.beams.n_users(); ++k)
        std::printf(" %.3f", sinr(set.true_channels.col(k), res.beams, k, cfg.noise_powers(k)) / cfg.sinr_targets(k));
    std::printf("\n");
}

int main()
{
    ScenarioTemplate scenario;
    scenario.total_power = 40e3; // 40 W expressed in mW
    const ScenarioConfig cfg = scenario.build(PapcMode::PapcOnly);

    std::mt19937_64 rng = realization_rng(2026, 0, 0);
    ChannelSet set = draw_realization(rng, cfg, PropagationModel{});
    const std::vector<int> users = select_users(set.estimate, cfg);
    if (users.size() != static_cast<std::size_t>(cfg.n_users))
    {
        std::printf("only %zu of %d users pass selection for this seed\n", users.size(), cfg.n_users);
        return 0;
    }

    report("nominal offset max", solve_offset_max_papc(cfg, set.estimate, OffsetMaxMode::Nominal, false), cfg, set);
    report("robust offset max", solve_offset_max_papc(cfg, set.estimate, OffsetMaxMode::Robust, true), cfg, set);
    report("robust ZF", solve_zf_papc(cfg, set.estimate, ZfLoading::Robust), cfg, set);
    report("one-shot MRT", solve_mrt_one_shot(cfg, set.estimate), cfg, set);
    return 0;
}
