// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Packing samples into size-balanced groups by iterated sampling and
// filtering, plus the padded baseline batchers used for comparison.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vlbal/core.hpp"
#include "vlbal/rng.hpp"

namespace vlbal {

/// Output of one sampling pass.
struct CandidateSet {
    std::vector<Group> groups;
    /// Samples that exceed (q_vision, q_text) on their own.
    std::vector<std::size_t> oversize;
};

struct FilterResult {
    std::vector<Group> accepted;
    /// Pool indices still unassigned, in their incoming order.
    std::vector<std::size_t> remaining;
};

struct IterationMetrics {
    int iteration = 0;
    /// Cumulative accepted groups after this iteration.
    std::size_t accepted_groups = 0;
    std::size_t newly_accepted = 0;
    std::size_t remaining_samples = 0;
    /// Unset while fewer accepted groups exist than data-parallel ranks.
    std::optional<double> vision_dist_ratio;
    std::optional<double> text_dist_ratio;
    double mean_group_size = 0.0;
};

struct PackedBatchPlan {
    BalanceParams params;
    std::vector<Group> accepted_groups;
    /// Best-effort groups built from leftovers after the last iteration.
    /// Every one of them is below the acceptance thresholds.
    std::vector<Group> fallback_groups;
    /// Samples never accepted by the filter (members of fallback_groups).
    std::vector<std::size_t> leftovers;
    std::vector<std::size_t> oversize;
    int iterations_run = 0;
    std::vector<IterationMetrics> metrics;
};

struct IsfOptions {
    /// Ranks used for the per-iteration dist-ratio trace.
    int dp_ranks = 4;
    std::int64_t tokens_per_vision_unit = 256;
    bool pack_leftovers = true;
};

bool fits_alone(const Sample& s, const BalanceParams& params);

/// I_v <= Q_v, I_t <= Q_t and (I_v >= Q'_v or I_t >= Q'_t).
bool satisfies_acceptance(const Group& g, const BalanceParams& params);

/// Reject iff I_v < Q'_v and I_t < Q'_t (vision ignored in text-only mode).
bool passes_filter(const Group& g, const BalanceParams& params);

/// One sampling pass over `pool` (indices into `dataset`). The pool is
/// permuted with `rng`, samples are appended to a running group, and a group
/// is emitted only when the next sample would overflow it. The trailing
/// in-progress group is never emitted.
CandidateSet isf_sample(const Dataset& dataset, std::span<const std::size_t> pool,
                        const BalanceParams& params, Rng& rng);

/// Sampling pass over the whole dataset.
CandidateSet isf_sample(const Dataset& dataset, const BalanceParams& params, Rng& rng);

/// Splits candidates into accepted groups and the samples that stay in the pool.
FilterResult isf_filter(const CandidateSet& candidates, std::span<const std::size_t> pool,
                        const BalanceParams& params);

/// Alternates sampling and filtering up to params.max_iters times, stopping
/// early once nothing is left or an iteration accepts no group.
PackedBatchPlan isf_run(const Dataset& dataset, const BalanceParams& params,
                        const IsfOptions& options = {});

/// Derives limits from corpus statistics: q_vision is q_text divided by the
/// mean text tokens per vision unit, rounded; q_text_min = q_text - 128;
/// q_vision_min = q_vision. Throws when the corpus has no vision units.
BalanceParams derive_thresholds(const Dataset& dataset, std::int64_t q_text);

// ---------------------------------------------------------------------------
// Baselines and evaluation

enum class BatchLayout {
    /// Each batch is one concatenated sequence; nothing is padded.
    Packed,
    /// Each batch pads every text sequence to the longest member.
    Padded,
};

/// Batches in step-major order: batch k runs on rank k % dp in step k / dp.
struct BatchList {
    BatchLayout layout = BatchLayout::Padded;
    std::vector<Group> batches;
};

/// Seeded shuffle, then fixed-size chunks.
BatchList baseline_random(const Dataset& dataset, int batch_size, int dp_ranks, std::uint64_t seed);

/// Sort by (text, vision), chunk, then shuffle the order of whole batches.
BatchList baseline_sorted(const Dataset& dataset, int batch_size, int dp_ranks, std::uint64_t seed);

/// Sort, cut into step-sized windows, deal each window's samples across the
/// ranks of that step, then shuffle the order of steps.
BatchList baseline_device_group(const Dataset& dataset, int batch_size, int dp_ranks,
                                std::uint64_t seed);

/// Accepted groups as packed batches; fallback groups appended when asked.
BatchList as_batches(const PackedBatchPlan& plan, bool include_fallback = false);

struct BalanceReport {
    std::size_t batches = 0;
    std::size_t steps = 0;
    std::size_t samples = 0;
    double ave_bs = 0.0;
    std::int64_t max_seq_vision = 0;
    std::int64_t max_seq_text = 0;
    /// Mean within-batch text pad ratio (0 for packed batches).
    double pad_ratio = 0.0;
    double vision_dist_ratio = 0.0;
    double text_dist_ratio = 0.0;
};

/// Per-batch token load as seen by a device: vision tiles are never padded;
/// text is padded to the longest member unless the batch is packed.
std::int64_t batch_vision_load(const Dataset& dataset, const Group& batch,
                               std::int64_t tokens_per_vision_unit);
std::int64_t batch_text_load(const Dataset& dataset, const Group& batch, BatchLayout layout);

/// Round-robin step assignment, then mean metrics over complete steps.
/// Throws when there are fewer batches than ranks.
BalanceReport evaluate_plan(const Dataset& dataset, const BatchList& batches, int dp_ranks,
                            std::int64_t tokens_per_vision_unit);

} // namespace vlbal
