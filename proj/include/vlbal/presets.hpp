// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vlbal/costmodel.hpp"
#include "vlbal/pipesim.hpp"

namespace vlbal {

/// A vision + language model on a 3D-parallel layout, with the hardware
/// envelope the simulator should assume. Layer counts and hidden sizes
/// follow the public model cards; throughput is an A100-class sustained
/// rate.
struct ScenarioPreset {
    std::string name;
    ArchConfig arch;
    int tp = 1;
    int pp = 4;
    int dp = 4;
    SimConfig sim;
    /// Vision-tower tokens per tile (448 px tile, 14 px patches).
    int vision_tokens_per_unit = 1024;
    int q_text = 4096;
    /// Per-rank batch size of the unbalanced baseline.
    int naive_batch_size = 4;
    /// Synthetic corpus used when no dataset file is given.
    std::string dataset_preset = "internvl-like";
};

ScenarioPreset scenario_preset(std::string_view name);
std::vector<std::string> scenario_preset_names();

} // namespace vlbal
