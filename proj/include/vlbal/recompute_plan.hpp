// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "vlbal/partition_types.hpp"

namespace vlbal {

enum class LayerMode { Recompute, Store };

/// Per-layer activation policy: recompute in backward, or keep the full
/// activation (re-computation cancelled).
struct RecomputePlan {
    /// per_layer[k] is the mode of layer k + 1.
    std::vector<LayerMode> per_layer;

    static RecomputePlan all_recompute(int num_layers) {
        return {std::vector<LayerMode>(static_cast<std::size_t>(num_layers), LayerMode::Recompute)};
    }
    static RecomputePlan all_stored(int num_layers) {
        return {std::vector<LayerMode>(static_cast<std::size_t>(num_layers), LayerMode::Store)};
    }

    bool stored(int layer) const { return per_layer[static_cast<std::size_t>(layer - 1)] == LayerMode::Store; }
    void set(int layer, LayerMode mode) { per_layer[static_cast<std::size_t>(layer - 1)] = mode; }

    /// 1-based indices of stored layers, ascending.
    std::vector<int> stored_layers() const;

    /// Number of layers per stage whose re-computation is cancelled.
    std::vector<int> per_stage_cancelled(const Partition& partition) const;

    friend bool operator==(const RecomputePlan&, const RecomputePlan&) = default;
};

} // namespace vlbal
