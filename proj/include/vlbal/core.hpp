// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vlbal {

/// One training example, reduced to the two sizes the balancer needs.
struct Sample {
    std::string id;
    /// Image tiles after dynamic-resolution tiling; each maps to a fixed
    /// number of vision tokens.
    std::int64_t vision_units = 0;
    /// Full text length including image placeholder tokens.
    std::int64_t text_tokens = 1;

    friend bool operator==(const Sample&, const Sample&) = default;
};

/// Ordered samples with pairwise distinct ids.
class Dataset {
public:
    Dataset() = default;

    /// Validates every sample and id uniqueness; throws Error(InvalidInput).
    explicit Dataset(std::vector<Sample> samples);

    std::span<const Sample> samples() const { return samples_; }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    std::int64_t total_vision_units() const;
    std::int64_t total_text_tokens() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<Sample> samples_;
};

void validate_sample(const Sample& s);

/// Samples referenced by index into the owning Dataset, with cached totals.
struct Group {
    std::vector<std::size_t> members;
    std::int64_t total_vision = 0;
    std::int64_t total_text = 0;

    void add(std::size_t index, const Sample& s) {
        members.push_back(index);
        total_vision += s.vision_units;
        total_text += s.text_tokens;
    }

    void pop(const Sample& s) {
        members.pop_back();
        total_vision -= s.vision_units;
        total_text -= s.text_tokens;
    }

    friend bool operator==(const Group&, const Group&) = default;
};

/// Rebuilds a group from indices; the totals are recomputed from the dataset.
Group make_group(const Dataset& dataset, std::vector<std::size_t> members);

/// Packing limits and acceptance thresholds.
///
/// q_vision == 0 selects text-only mode: the vision limit and the vision
/// acceptance condition are both ignored (q_vision_min must then be 0 too).
struct BalanceParams {
    std::int64_t q_vision = 9;
    std::int64_t q_text = 4096;
    std::int64_t q_vision_min = 9;
    std::int64_t q_text_min = 3968;
    int max_iters = 10;
    std::uint64_t seed = 42;

    bool text_only() const { return q_vision == 0; }
    void validate() const;

    friend bool operator==(const BalanceParams&, const BalanceParams&) = default;
};

/// Per data-parallel rank token counts.
struct DeviceLoads {
    std::vector<std::int64_t> per_device_tokens;
};

/// Share of padding in a padded batch: sum(max - x_i) / (max * n).
double pad_ratio(std::span<const std::int64_t> per_sample_tokens);

/// Spread of load across ranks: sum(max - x_i) / (max * n).
double dist_ratio(std::span<const std::int64_t> per_device_tokens);

inline double dist_ratio(const DeviceLoads& loads) {
    return dist_ratio(loads.per_device_tokens);
}

} // namespace vlbal
