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

// Umbrella header for the solver library. The experiment layer
// (config.hpp, experiment.hpp) additionally needs nlohmann/json.

#ifndef PAPCBF_PAPCBF_HPP
#define PAPCBF_PAPCBF_HPP

#include "papcbf/error.hpp"
#include "papcbf/linalg.hpp"
#include "papcbf/model.hpp"
#include "papcbf/mrt.hpp"
#include "papcbf/offsetmax.hpp"
#include "papcbf/powerload.hpp"
#include "papcbf/simkit.hpp"
#include "papcbf/version.hpp"
#include "papcbf/zf.hpp"

#endif
