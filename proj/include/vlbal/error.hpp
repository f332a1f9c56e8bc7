// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vlbal {

enum class ErrorCode {
    InvalidInput,
    InvalidPartition,
    InfeasiblePlan,
    ParseError,
    SchemaError,
    IoError,
};

/// Stable, machine-parseable name of an error code (e.g. "E_INFEASIBLE_PLAN").
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Thrown by the simulator when a stage's peak memory exceeds the device budget.
/// `stage` is 1-based.
class InfeasiblePlanError : public Error {
public:
    InfeasiblePlanError(int stage, double peak_bytes, double budget_bytes);

    int stage() const noexcept { return stage_; }
    double peak_bytes() const noexcept { return peak_; }
    double budget_bytes() const noexcept { return budget_; }

private:
    int stage_;
    double peak_;
    double budget_;
};

} // namespace vlbal
