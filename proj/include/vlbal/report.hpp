// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end planning and the comparison reports: batcher metrics, partition
// metrics, per-stage memory, and the naive -> +data -> +model -> +memory
// ablation ladder measured in simulated time.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vlbal/batcher.hpp"
#include "vlbal/costmodel.hpp"
#include "vlbal/ingest.hpp"
#include "vlbal/partition.hpp"
#include "vlbal/pipesim.hpp"
#include "vlbal/presets.hpp"
#include "vlbal/recompute.hpp"

namespace vlbal {

struct PartitionMetrics {
    std::string method;
    Partition partition;
    std::vector<int> stages_layer_num;
    /// Squared deviations from the mean, summed over stages: weight GB^2,
    /// layers^2 and ms^2.
    double var_param = 0.0;
    double var_num_layer = 0.0;
    double var_fwd_time = 0.0;
    /// Megabytes crossing stage boundaries per micro-batch.
    double sum_comm_mb = 0.0;
    double delta_sum_comm_mb = 0.0;
    bool feasible = false;
    double simulated_time = 0.0;
};

PartitionMetrics partition_metrics(const ModelSpec& spec, const Partition& partition, std::string method,
                                   const SimConfig& sim);

/// Micro-batch size of one batch relative to the profiled reference.
MicroBatchScale batch_scale(const Dataset& dataset, const Group& batch, BatchLayout layout,
                            std::int64_t vision_tokens_per_unit, const ModelSpec& spec);

struct EpochStats {
    double total_time = 0.0;
    std::size_t steps = 0;
    double mean_step_time = 0.0;
    double mean_bubble_ratio = 0.0;
};

/// Consumes every batch: within a step, batch j goes to rank j % dp as its
/// micro-batch j / dp. A step lasts as long as its slowest rank.
EpochStats simulate_epoch(const ModelSpec& spec, const Partition& partition, const RecomputePlan& plan,
                          const SimConfig& sim, const Dataset& dataset, const BatchList& batches, int dp,
                          std::int64_t vision_tokens_per_unit);

struct LadderRung {
    std::string name;
    Partition partition;
    std::vector<int> recompute_cancelled_per_stage;
    EpochStats epoch;
};

struct PlanFullOptions {
    ScenarioPreset preset;
    int radius = 2;
    int top_k = 8;
    int isf_iters = 10;
    std::uint64_t seed = 42;
};

struct RunReport {
    std::string preset;
    BalanceParams thresholds;
    int pp = 1;
    int dp = 1;
    int tp = 1;
    std::size_t samples = 0;
    std::size_t oversize_samples = 0;
    std::vector<std::pair<std::string, BalanceReport>> balance;
    std::vector<PartitionMetrics> partitions;
    std::vector<std::pair<std::string, std::vector<StageMemory>>> memory;
    std::vector<LadderRung> ladder;
    double speedup = 1.0;
};

struct PlanArtifacts {
    RunReport report;
    ModelSpec spec;
    PackedBatchPlan isf;
    SearchResult search;
    PlanDocument final_plan;
};

/// thresholds -> ISF -> analytic profile -> partition search -> recompute ->
/// simulation of every ladder rung over the whole dataset.
PlanArtifacts plan_full(const Dataset& dataset, const PlanFullOptions& options);

nlohmann::ordered_json balance_report_to_json(const BalanceReport& r);
nlohmann::ordered_json run_report_to_json(const RunReport& r);

/// CSV tables (one header row each, 4-decimal ratios).
std::string balance_csv(const std::vector<std::pair<std::string, BalanceReport>>& rows);
std::string partition_csv(const std::vector<PartitionMetrics>& rows);
std::string ladder_csv(const std::vector<LadderRung>& rows);

/// Fixed 4-decimal rendering used in reports.
std::string fixed4(double x);

} // namespace vlbal
