// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlbal/error.hpp"

#include <cstdio>

namespace vlbal {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidInput: return "E_INVALID_INPUT";
    case ErrorCode::InvalidPartition: return "E_INVALID_PARTITION";
    case ErrorCode::InfeasiblePlan: return "E_INFEASIBLE_PLAN";
    case ErrorCode::ParseError: return "E_PARSE";
    case ErrorCode::SchemaError: return "E_SCHEMA";
    case ErrorCode::IoError: return "E_IO";
    }
    return "E_UNKNOWN";
}

namespace {

std::string infeasible_message(int stage, double peak, double budget) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "stage %d peak memory %.0f bytes exceeds device budget %.0f bytes",
                  stage, peak, budget);
    return buf;
}

} // namespace

InfeasiblePlanError::InfeasiblePlanError(int stage, double peak_bytes, double budget_bytes)
    : Error(ErrorCode::InfeasiblePlan, infeasible_message(stage, peak_bytes, budget_bytes)),
      stage_(stage), peak_(peak_bytes), budget_(budget_bytes) {}

} // namespace vlbal
