// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Adaptive re-computation: per stage, cancel re-computation on the layers
// that buy the most backward time per extra byte, as long as the stage
// still fits in device memory.

#pragma once

#include <span>
#include <vector>

#include "vlbal/costmodel.hpp"
#include "vlbal/pipesim.hpp"
#include "vlbal/recompute_plan.hpp"

namespace vlbal {

struct RecomputeResult {
    RecomputePlan plan;
    std::vector<int> per_stage_cancelled;
    SimResult sim;
};

/// Per stage, chooses the layers whose re-computation is cancelled so that
/// stored forward time is maximal within the memory left after the
/// all-recompute plan. Layers are ordered by fwd_time / (in_flight *
/// (act_mem_full - act_mem_ckpt)), lower layer index first on ties; a greedy
/// pass in that order seeds a branch and bound search that only replaces it
/// with a strictly better selection. The search is capped at 2^22 nodes per
/// stage. Throws InfeasiblePlanError naming the stage when even the
/// all-recompute plan does not fit.
RecomputeResult optimize_recompute(const ModelSpec& spec, const Partition& partition, const SimConfig& config,
                                   std::span<const MicroBatchScale> scales = {});

struct StageMemory {
    double peak_mem = 0.0;
    /// device_memory - peak_mem; negative when the plan does not fit.
    double remaining_mem = 0.0;
};

std::vector<StageMemory> memory_report(const ModelSpec& spec, const Partition& partition,
                                       const RecomputePlan& plan, const SimConfig& config,
                                       std::span<const MicroBatchScale> scales = {});

} // namespace vlbal
