// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Search-based pipeline partitioning: a greedy time-balanced anchor, a
// jittered neighbourhood around it, a cheap two-metric ranking, and a final
// choice by simulated iteration time over the best K candidates.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vlbal/costmodel.hpp"
#include "vlbal/partition_types.hpp"
#include "vlbal/pipesim.hpp"

namespace vlbal {

struct RankWeights {
    double var = 1.0;
    double comm = 1.0;
};

struct RankedCandidate {
    Partition partition;
    /// Sum of squared deviations of stage forward times from their mean (us^2).
    double var_fwd = 0.0;
    /// Bytes crossing stage boundaries per micro-batch.
    double sum_comm = 0.0;
    double combined_score = 0.0;
};

/// Greedy fill towards total_fwd / N: each stage keeps absorbing the next
/// layer while that strictly reduces |accumulated - target|, and always
/// leaves at least one layer for every later stage.
Partition anchor_partition(const ModelSpec& spec, int n_stages);

/// (2r + 1)^(N - 1): the candidate count before validity filtering.
std::size_t jitter_raw_count(int n_stages, int radius);

/// Every cut moved independently by -r..r, invalid combinations dropped.
/// Ordered lexicographically by offset vector; the anchor is always included.
std::vector<Partition> jitter_candidates(const Partition& anchor, int radius, int num_layers);

double var_fwd(std::span<const double> stage_fwd_times);
double sum_comm(const ModelSpec& spec, const Partition& partition);

/// Scores each candidate by weights.var * var / max(var) + weights.comm *
/// comm / max(comm) (a zero maximum contributes 0) and sorts ascending, ties
/// broken by the cut list.
std::vector<RankedCandidate> rank_candidates(std::span<const Partition> candidates,
                                             const ModelSpec& spec, RankWeights weights = {});

struct CandidateEvaluation {
    RankedCandidate candidate;
    bool feasible = false;
    double simulated_time = 0.0;
    std::string infeasible_reason;
};

struct SearchOptions {
    int n_stages = 4;
    int radius = 1;
    int top_k = 4;
    RankWeights weights;
    /// Worker threads for candidate simulation; 0 picks hardware concurrency.
    unsigned threads = 0;
};

struct SearchResult {
    Partition anchor;
    Partition best;
    double best_time = 0.0;
    std::size_t raw_candidates = 0;
    std::vector<RankedCandidate> ranked;
    /// The simulated top-K, in rank order.
    std::vector<CandidateEvaluation> evaluations;
};

/// anchor -> jitter -> rank -> simulate top_k (all layers recomputed) ->
/// argmin simulated time, ties broken by smaller sum_comm then cuts.
/// Throws InfeasiblePlanError when no evaluated candidate fits in memory.
SearchResult select_partition(const ModelSpec& spec, const SimConfig& sim, const SearchOptions& options);

struct BaselinePartitions {
    /// Balances per-stage weight bytes.
    Partition parameter_based;
    /// Balances layer counts (sizes differ by at most one).
    Partition layer_based;
    /// Balances per-stage forward time, ignoring communication.
    Partition profile_based;
};

/// Min-max contiguous split of `costs` into n parts; among splits reaching
/// the optimal bottleneck, the one with the smallest squared deviation from
/// the mean, then the lexicographically smallest cuts.
Partition balanced_partition(std::span<const double> costs, int n_stages);

BaselinePartitions baseline_partitions(const ModelSpec& spec, int n_stages);

} // namespace vlbal
