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

#ifndef PAPCBF_ERROR_HPP
#define PAPCBF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace papcbf
{

/// Failure categories raised by the solvers. Conditions that still yield a
/// usable iterate (non-convergence, negative powers) are reported through
/// status flags instead.
enum class ErrorCode
{
    SingularSystem,
    DegenerateChannel,
    DegenerateDirection,
    RankDeficient,
    ZeroDiagonal,
    ZeroChannelEntry,
    NonUniformPapc,
    InvalidArgument
};

inline const char *to_string(ErrorCode code)
{
    switch (code)
    {
    case ErrorCode::SingularSystem:
        return "SingularSystem";
    case ErrorCode::DegenerateChannel:
        return "DegenerateChannel";
    case ErrorCode::DegenerateDirection:
        return "DegenerateDirection";
    case ErrorCode::RankDeficient:
        return "RankDeficient";
    case ErrorCode::ZeroDiagonal:
        return "ZeroDiagonal";
    case ErrorCode::ZeroChannelEntry:
        return "ZeroChannelEntry";
    case ErrorCode::NonUniformPapc:
        return "NonUniformPapc";
    case ErrorCode::InvalidArgument:
        return "InvalidArgument";
    }
    return "Unknown";
}

class SolverError : public std::runtime_error
{
  public:
    SolverError(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

/// Raised by configuration validation; `field` is the offending key path.
class ConfigError : public std::invalid_argument
{
  public:
    ConfigError(std::string field, const std::string &what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field))
    {
    }

    const std::string &field() const noexcept { return field_; }

  private:
    std::string field_;
};

} // namespace papcbf

#endif
