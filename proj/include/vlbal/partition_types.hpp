// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <vector>

namespace vlbal {

/// Stage boundaries over a 1-based layer stack of L layers.
///
/// With implicit cuts[-1] = 1 and cuts[N-1] = L + 1, stage i owns layers
/// [cuts[i-1], cuts[i]). An empty cut list is the single-stage partition.
struct Partition {
    std::vector<int> cuts;

    int num_stages() const { return static_cast<int>(cuts.size()) + 1; }

    /// First layer of stage i (0-based stage index).
    int stage_begin(int stage) const { return stage == 0 ? 1 : cuts[stage - 1]; }

    /// One past the last layer of stage i.
    int stage_end(int stage, int num_layers) const {
        return stage == num_stages() - 1 ? num_layers + 1 : cuts[stage];
    }

    /// Layer counts per stage (the "stages_layer_num" report column).
    std::vector<int> stage_sizes(int num_layers) const;

    /// Stage (0-based) owning a 1-based layer index.
    int stage_of(int layer) const;

    bool is_valid(int num_layers) const;

    /// Throws Error(InvalidPartition) describing the first violated rule.
    void validate(int num_layers) const;

    friend bool operator==(const Partition&, const Partition&) = default;
    friend auto operator<=>(const Partition&, const Partition&) = default;
};

/// Inverse of stage_sizes.
Partition partition_from_sizes(const std::vector<int>& sizes);

} // namespace vlbal
