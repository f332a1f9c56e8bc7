// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0
//
// File formats and synthetic inputs.
//
// Dataset statistics are line-delimited JSON, one record per sample:
//   {"id": "s0", "vision_units": 4, "text_tokens": 512}
// Model specs, plans and simulation results are JSON documents carrying
// "schema_version": 1.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vlbal/batcher.hpp"
#include "vlbal/core.hpp"
#include "vlbal/costmodel.hpp"
#include "vlbal/partition_types.hpp"
#include "vlbal/pipesim.hpp"
#include "vlbal/recompute_plan.hpp"

namespace vlbal {

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Dataset statistics (JSONL)

/// Streams records one line at a time; blank lines are skipped. Errors name
/// the 1-based line number.
Dataset read_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);

void write_dataset(std::ostream& out, const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

struct SynthDistribution {
    /// Text length ~ round(exp(N(mu, sigma))), clamped to [1, text_cap].
    double text_mu = 6.0;
    double text_sigma = 0.8;
    std::int64_t text_cap = 4096;
    /// vision_weights[k] is P(vision_units == k); must sum to 1.
    std::vector<double> vision_weights;
    std::size_t sample_count = 1000;
    std::uint64_t seed = 42;

    void validate() const;
};

/// Uniform weights over [lo, hi] (zero elsewhere, indices 0..hi).
std::vector<double> uniform_vision_weights(int lo, int hi);

/// Deterministic under `seed`; ids are "s<index>".
Dataset generate_dataset(const SynthDistribution& dist);

/// Named generators: "mixed-12" (log-normal text mu 6.0 sigma 0.8 capped at
/// 4096, 1-12 tiles), "internvl-like", "llava-like", "caption-like", and "patch-1",
/// "patch-4", "patch-6", "patch-12" tiling regimes.
SynthDistribution synth_preset(std::string_view name, std::size_t sample_count, std::uint64_t seed);
std::vector<std::string> synth_preset_names();

// ---------------------------------------------------------------------------
// JSON documents

nlohmann::ordered_json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

nlohmann::ordered_json sim_config_to_json(const SimConfig& c);
SimConfig sim_config_from_json(const nlohmann::json& j);

/// Self-contained plan: the model, its partition, the recompute choice and
/// the simulator settings it was planned for.
struct PlanDocument {
    ModelSpec model;
    Partition partition;
    RecomputePlan recompute;
    SimConfig sim;
    int dp_degree = 1;
    std::string notes;

    friend bool operator==(const PlanDocument&, const PlanDocument&) = default;
};

nlohmann::ordered_json plan_to_json(const PlanDocument& plan);
PlanDocument plan_from_json(const nlohmann::json& j);

nlohmann::ordered_json sim_result_to_json(const SimResult& r);
SimResult sim_result_from_json(const nlohmann::json& j);

/// One JSON object per line: {"group", "ids", "vision_units", "text_tokens", "below_threshold"}.
void write_groups(std::ostream& out, const Dataset& dataset, const PackedBatchPlan& plan);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_text_file(const std::filesystem::path& path, std::string_view contents);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Stable text form used for every JSON artifact (indent 1, trailing newline).
std::string dump_json(const nlohmann::ordered_json& j);

ModelSpec load_model_spec(const std::filesystem::path& path);
void save_model_spec(const std::filesystem::path& path, const ModelSpec& spec);
PlanDocument load_plan(const std::filesystem::path& path);
void save_plan(const std::filesystem::path& path, const PlanDocument& plan);

} // namespace vlbal
