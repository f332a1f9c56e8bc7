// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlbal/core.hpp"

#include <unordered_set>

#include "vlbal/error.hpp"
#include "vlbal/kernels.hpp"

namespace vlbal {

void validate_sample(const Sample& s) {
    if (s.id.empty()) {
        throw Error(ErrorCode::InvalidInput, "sample id must be non-empty");
    }
    if (s.text_tokens < 1) {
        throw Error(ErrorCode::InvalidInput,
                    "sample '" + s.id + "': text_tokens must be >= 1");
    }
    if (s.vision_units < 0) {
        throw Error(ErrorCode::InvalidInput,
                    "sample '" + s.id + "': vision_units must be >= 0");
    }
}

Dataset::Dataset(std::vector<Sample> samples) : samples_(std::move(samples)) {
    std::unordered_set<std::string> seen;
    seen.reserve(samples_.size());
    for (const Sample& s : samples_) {
        validate_sample(s);
        if (!seen.insert(s.id).second) {
            throw Error(ErrorCode::InvalidInput, "duplicate sample id '" + s.id + "'");
        }
    }
}

std::int64_t Dataset::total_vision_units() const {
    std::int64_t total = 0;
    for (const Sample& s : samples_) {
        total += s.vision_units;
    }
    return total;
}

std::int64_t Dataset::total_text_tokens() const {
    std::int64_t total = 0;
    for (const Sample& s : samples_) {
        total += s.text_tokens;
    }
    return total;
}

Group make_group(const Dataset& dataset, std::vector<std::size_t> members) {
    Group g;
    g.members.reserve(members.size());
    for (std::size_t i : members) {
        if (i >= dataset.size()) {
            throw Error(ErrorCode::InvalidInput, "group member index out of range");
        }
        g.add(i, dataset[i]);
    }
    return g;
}

void BalanceParams::validate() const {
    auto fail = [](const char* what) { throw Error(ErrorCode::InvalidInput, what); };
    if (q_text < 1 || q_text_min < 1) fail("q_text and q_text_min must be positive");
    if (q_text_min > q_text) fail("q_text_min must not exceed q_text");
    if (q_vision < 0 || q_vision_min < 0) fail("vision thresholds must be non-negative");
    if (q_vision == 0 && q_vision_min != 0) fail("text-only mode (q_vision = 0) requires q_vision_min = 0");
    if (q_vision > 0 && q_vision_min < 1) fail("q_vision_min must be positive");
    if (q_vision_min > q_vision) fail("q_vision_min must not exceed q_vision");
    if (max_iters < 1) fail("max_iters must be >= 1");
}

namespace {

// Both metrics share one shape. sum(max - x_i) == n * max - sum(x_i) exactly
// in integers, so the ratio is an exact rational until the final division.
double spread_ratio(std::span<const std::int64_t> xs, const char* what) {
    if (xs.empty()) {
        throw Error(ErrorCode::InvalidInput, std::string(what) + ": empty input");
    }
    for (std::int64_t x : xs) {
        if (x < 0) {
            throw Error(ErrorCode::InvalidInput, std::string(what) + ": negative entry");
        }
    }
    const std::int64_t hi = kernels::max(xs);
    if (hi <= 0) {
        throw Error(ErrorCode::InvalidInput, std::string(what) + ": all entries are zero");
    }
    const auto n = static_cast<std::int64_t>(xs.size());
    const std::int64_t deficit = n * hi - kernels::sum(xs);
    return static_cast<double>(deficit) / (static_cast<double>(hi) * static_cast<double>(n));
}

} // namespace

double pad_ratio(std::span<const std::int64_t> per_sample_tokens) {
    return spread_ratio(per_sample_tokens, "pad_ratio");
}

double dist_ratio(std::span<const std::int64_t> per_device_tokens) {
    return spread_ratio(per_device_tokens, "dist_ratio");
}

} // namespace vlbal
