// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Discrete-event model of one 1F1B pipeline-parallel training iteration.
//
// Stage i (0-based, N stages, M micro-batches) runs min(N - i - 1, M) warm-up
// forwards, alternates one forward with one backward, then drains the
// remaining backwards. Each operation starts as soon as the stage is free and
// its input has arrived. A backward on a stage first replays the forward of
// its recomputed layers (a `recompute` event), then runs the backward proper.
//
// Point-to-point transfers cost latency + bytes / bandwidth. By default the
// sender is blocked for the transfer (a `send` event on the sender). With
// overlap_comm the sender continues immediately and the transfer is logged
// as a `recv` event on the receiver; recv events run on a separate channel
// and may overlap the receiver's compute.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vlbal/costmodel.hpp"
#include "vlbal/recompute_plan.hpp"

namespace vlbal {

enum class Phase { Fwd, Bwd, Recompute, Send, Recv };

std::string_view phase_name(Phase phase);
Phase parse_phase(std::string_view name);

struct TimelineEvent {
    int stage = 0;
    int micro_batch = 0;
    Phase phase = Phase::Fwd;
    /// Seconds from iteration start.
    double start = 0.0;
    double end = 0.0;

    friend bool operator==(const TimelineEvent&, const TimelineEvent&) = default;
};

struct SimConfig {
    int micro_batches = 8;
    /// Bytes per second.
    double p2p_bandwidth = 25e9;
    /// Seconds per transfer.
    double p2p_latency = 10e-6;
    /// Bytes available per stage.
    double device_memory = 80e9;
    bool overlap_comm = false;
    /// Gradients plus optimizer state, as a multiple of the weight bytes.
    double optimizer_multiplier = 2.0;

    void validate() const;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct SimResult {
    double iteration_time = 0.0;
    double bubble_ratio = 0.0;
    /// Seconds of fwd + bwd + recompute per stage.
    std::vector<double> per_stage_busy;
    std::vector<double> per_stage_peak_mem;
    std::vector<TimelineEvent> timeline;

    friend bool operator==(const SimResult&, const SimResult&) = default;
};

/// Micro-batches simultaneously holding activations on a stage under 1F1B.
int in_flight_micro_batches(int stage, int num_stages, int micro_batches);

/// Peak bytes per stage: weights * (1 + optimizer_multiplier) plus the
/// in-flight micro-batches' stored activations (full for stored layers,
/// checkpoint-only for recomputed ones). With non-empty `scales`, every
/// in-flight slot is charged at the largest micro-batch.
std::vector<double> peak_memory(const ModelSpec& spec, const Partition& partition,
                                const RecomputePlan& plan, const SimConfig& config,
                                std::span<const MicroBatchScale> scales = {});

/// Runs one iteration. `scales` is empty (every micro-batch matches the
/// profile) or has exactly config.micro_batches entries. Throws
/// InfeasiblePlanError when a stage's peak memory exceeds device_memory.
SimResult simulate(const ModelSpec& spec, const Partition& partition, const RecomputePlan& plan,
                   const SimConfig& config, std::span<const MicroBatchScale> scales = {});

/// 1 - sum(per_stage_busy) / (N * iteration_time).
double bubble_ratio(const SimResult& result);

enum class TimelineFormat { Json, Svg };

TimelineFormat parse_timeline_format(std::string_view name);

/// JSON is the canonical event list; SVG is a self-contained per-stage Gantt.
std::string export_timeline(const SimResult& result, TimelineFormat format);
std::string export_timeline(const SimResult& result, std::string_view format);

/// Parses the JSON produced by export_timeline.
std::vector<TimelineEvent> parse_timeline_json(std::string_view text);

} // namespace vlbal
