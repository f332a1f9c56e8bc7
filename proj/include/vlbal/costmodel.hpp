// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Heterogeneous layer stack (vision tower, connector, language model) with
// per-layer time and memory costs, either measured or synthesized from an
// analytic FLOP count.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vlbal/partition_types.hpp"

namespace vlbal {

enum class LayerKind { Vision, Connector, Language };

std::string_view layer_kind_name(LayerKind kind);
LayerKind parse_layer_kind(std::string_view name);

/// Costs of one layer for one reference micro-batch. Times are in
/// microseconds, memory in bytes.
struct LayerProfile {
    int index = 1;
    LayerKind kind = LayerKind::Language;
    double fwd_time = 1.0;
    double bwd_time = 2.0;
    /// Bytes sent downstream when a stage ends at this layer.
    double output_activation = 0.0;
    double weight_mem = 0.0;
    /// Activation kept per micro-batch when the layer is not recomputed.
    double act_mem_full = 0.0;
    /// Activation kept per micro-batch when the layer is recomputed.
    double act_mem_ckpt = 0.0;

    friend bool operator==(const LayerProfile&, const LayerProfile&) = default;
};

struct ModelSpec {
    std::vector<LayerProfile> layers;
    int vision_seq_tokens = 0;
    int language_seq_tokens = 0;
    int subsample_factor = 1;
    int tp_degree = 1;
    std::string notes;

    int num_layers() const { return static_cast<int>(layers.size()); }
    const LayerProfile& layer(int index) const { return layers[static_cast<std::size_t>(index - 1)]; }

    /// Indices contiguous from 1, positive forward times, ckpt <= full, and
    /// either no connector (a single-kind stack) or exactly one connector
    /// sitting between the last vision and the first language layer.
    void validate() const;

    double total_fwd_time() const;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct TowerConfig {
    int layers = 0;
    int hidden = 0;
    int seq = 0;
};

struct ArchConfig {
    TowerConfig vision;
    TowerConfig language;
    int subsample_factor = 4;
    int bytes_per_elem = 2;
    /// Sustained FLOP/s of one device.
    double device_throughput = 150e12;
    int tp_degree = 1;
    /// act_mem_full = multiplier * output_activation.
    double act_full_multiplier = 4.0;
    std::string notes;
};

/// Forward FLOPs of one transformer block: 24*s*h^2 + 4*s^2*h.
double transformer_layer_flops(double seq, double hidden);

/// Synthesizes a vision + connector + language stack. Either tower may have
/// zero layers; the connector is emitted only when both towers exist.
ModelSpec analytic_profile(const ArchConfig& arch);

struct StageCost {
    int first_layer = 1;
    int last_layer = 1;
    double fwd_time = 0.0;
    double bwd_time = 0.0;
    double weight_mem = 0.0;
    int num_layers() const { return last_layer - first_layer + 1; }
};

struct StageCosts {
    std::vector<StageCost> stages;
    /// Output activation of each non-final stage's last layer (N - 1 entries).
    std::vector<double> boundary_activation;
};

/// Per-stage sums over a validated partition; throws on an invalid partition.
StageCosts stage_costs(const ModelSpec& spec, const Partition& partition);

/// Per-micro-batch size relative to the profiled reference micro-batch.
/// Vision layers and the connector scale with `vision`, language layers with
/// `text`.
struct MicroBatchScale {
    double vision = 1.0;
    double text = 1.0;

    double for_kind(LayerKind kind) const { return kind == LayerKind::Language ? text : vision; }

    friend bool operator==(const MicroBatchScale&, const MicroBatchScale&) = default;
};

} // namespace vlbal
