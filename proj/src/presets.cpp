// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlbal/presets.hpp"

#include <array>

#include "vlbal/error.hpp"

namespace vlbal {

namespace {

struct Row {
    const char* name;
    TowerConfig vision;
    TowerConfig language;
    int tp, pp, dp;
};

// Sequence lengths are placeholders; the planner sets them from the data
// thresholds (q_vision * tokens per tile, q_text).
constexpr std::array kRows = {
    Row{"internvl-6b-20b", {45, 3200, 9216}, {48, 6144, 4096}, 2, 4, 4},
    Row{"internvl-6b-8b", {45, 3200, 9216}, {32, 4096, 4096}, 1, 4, 8},
    Row{"internvl-6b-34b", {45, 3200, 9216}, {60, 7168, 4096}, 4, 4, 2},
    Row{"internvl-6b-70b", {45, 3200, 9216}, {80, 8192, 4096}, 4, 8, 2},
    Row{"internvl-6b-110b", {45, 3200, 9216}, {80, 8192, 4096}, 8, 8, 1},
    Row{"eva-1b-20b", {40, 1408, 9216}, {48, 6144, 4096}, 2, 4, 4},
    Row{"eva-4b-20b", {54, 2560, 9216}, {48, 6144, 4096}, 2, 4, 4},
    Row{"eva-8b-20b", {32, 4096, 9216}, {48, 6144, 4096}, 2, 4, 4},
    Row{"eva-18b-20b", {48, 5120, 9216}, {48, 6144, 4096}, 4, 4, 4},
};

} // namespace

std::vector<std::string> scenario_preset_names() {
    std::vector<std::string> out;
    for (const Row& r : kRows) out.emplace_back(r.name);
    return out;
}

ScenarioPreset scenario_preset(std::string_view name) {
    for (const Row& r : kRows) {
        if (name != r.name) continue;
        ScenarioPreset p;
        p.name = r.name;
        p.arch.vision = r.vision;
        p.arch.language = r.language;
        p.arch.subsample_factor = 4;
        p.arch.bytes_per_elem = 2;
        p.arch.device_throughput = 140e12;
        p.arch.tp_degree = r.tp;
        p.arch.act_full_multiplier = 4.0;
        p.arch.notes = std::string("preset ") + r.name;
        p.tp = r.tp;
        p.pp = r.pp;
        p.dp = r.dp;
        p.sim.micro_batches = 8;
        p.sim.p2p_bandwidth = 25e9;
        p.sim.p2p_latency = 10e-6;
        p.sim.device_memory = 80e9;
        return p;
    }
    throw Error(ErrorCode::InvalidInput, "unknown architecture preset '" + std::string(name) + "'");
}

} // namespace vlbal
