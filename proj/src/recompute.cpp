// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlbal/recompute.hpp"

#include <algorithm>
#include <limits>

#include "vlbal/error.hpp"

namespace vlbal {

std::vector<int> RecomputePlan::stored_layers() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < per_layer.size(); ++i) {
        if (per_layer[i] == LayerMode::Store) out.push_back(static_cast<int>(i) + 1);
    }
    return out;
}

std::vector<int> RecomputePlan::per_stage_cancelled(const Partition& partition) const {
    const int L = static_cast<int>(per_layer.size());
    std::vector<int> counts(static_cast<std::size_t>(partition.num_stages()), 0);
    for (int k = 1; k <= L; ++k) {
        if (stored(k)) ++counts[static_cast<std::size_t>(partition.stage_of(k))];
    }
    return counts;
}

namespace {

struct Choice {
    int layer;
    double extra_bytes;
    double density;
};

constexpr std::size_t kNodeLimit = std::size_t{1} << 22;

// Depth-first branch and bound over the density-ordered choices, maximizing
// stored forward time within capacity. The fractional relaxation bounds each
// branch. A run of identical layers is only ever taken as a prefix.
class Knapsack {
public:
    Knapsack(const ModelSpec& spec, const std::vector<Choice>& items, double capacity)
        : items_(items), capacity_(capacity) {
        for (const Choice& c : items) value_.push_back(spec.layer(c.layer).fwd_time);
        take_.assign(items.size(), false);
    }

    void seed(const std::vector<bool>& chosen) {
        best_ = 0.0;
        for (std::size_t i = 0; i < items_.size(); ++i) {
            if (chosen[i]) best_ += value_[i];
        }
        best_take_ = chosen;
    }

    const std::vector<bool>& solve() {
        search(0, capacity_, 0.0);
        return best_take_;
    }

private:
    bool same(std::size_t a, std::size_t b) const {
        return value_[a] == value_[b] && items_[a].extra_bytes == items_[b].extra_bytes;
    }

    double bound(std::size_t i, double room, double value) const {
        for (; i < items_.size(); ++i) {
            const double w = items_[i].extra_bytes;
            if (w <= room) {
                room -= w;
                value += value_[i];
            } else {
                return value + value_[i] * (room / w);
            }
        }
        return value;
    }

    void search(std::size_t i, double room, double value) {
        if (++nodes_ > kNodeLimit) return;
        if (value > best_) {
            best_ = value;
            best_take_ = take_;
            for (std::size_t k = i; k < items_.size(); ++k) best_take_[k] = false;
        }
        if (i == items_.size() || !(bound(i, room, value) > best_)) return;
        if (items_[i].extra_bytes <= room) {
            take_[i] = true;
            search(i + 1, room - items_[i].extra_bytes, value + value_[i]);
            take_[i] = false;
        }
        std::size_t next = i + 1;
        while (next < items_.size() && same(i, next)) ++next;
        search(next, room, value);
    }

    const std::vector<Choice>& items_;
    double capacity_;
    std::vector<double> value_;
    std::vector<bool> take_;
    std::vector<bool> best_take_;
    double best_ = 0.0;
    std::size_t nodes_ = 0;
};

// Replaces the greedy selection with the best selection found by branch and
// bound, which starts from the greedy one as its incumbent.
void improve_exactly(const ModelSpec& spec, const std::vector<Choice>& choices, double capacity,
                     std::vector<bool>& chosen) {
    Knapsack k(spec, choices, capacity);
    k.seed(chosen);
    chosen = k.solve();
}

} // namespace

RecomputeResult optimize_recompute(const ModelSpec& spec, const Partition& partition, const SimConfig& config,
                                   std::span<const MicroBatchScale> scales) {
    const int L = spec.num_layers();
    RecomputePlan plan = RecomputePlan::all_recompute(L);
    const std::vector<double> base = peak_memory(spec, partition, plan, config, scales);
    const int n = partition.num_stages();
    for (int s = 0; s < n; ++s) {
        if (base[static_cast<std::size_t>(s)] > config.device_memory) {
            throw InfeasiblePlanError(s + 1, base[static_cast<std::size_t>(s)], config.device_memory);
        }
    }

    MicroBatchScale worst{1.0, 1.0};
    if (!scales.empty()) {
        worst = {0.0, 0.0};
        for (const auto& sc : scales) {
            worst.vision = std::max(worst.vision, sc.vision);
            worst.text = std::max(worst.text, sc.text);
        }
    }

    std::vector<Choice> choices;
    std::vector<std::vector<int>> added(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        const int depth = in_flight_micro_batches(s, n, config.micro_batches);
        double slack = config.device_memory - base[static_cast<std::size_t>(s)];
        choices.clear();
        for (int k = partition.stage_begin(s); k < partition.stage_end(s, L); ++k) {
            const LayerProfile& l = spec.layer(k);
            const double extra = depth * (l.act_mem_full - l.act_mem_ckpt) * worst.for_kind(l.kind);
            const double density = extra > 0.0 ? l.fwd_time / extra : std::numeric_limits<double>::infinity();
            choices.push_back({k, extra, density});
        }
        std::stable_sort(choices.begin(), choices.end(), [](const Choice& a, const Choice& b) {
            if (a.density != b.density) return a.density > b.density;
            return a.layer < b.layer;
        });
        std::vector<bool> in(choices.size(), false);
        for (std::size_t i = 0; i < choices.size(); ++i) {
            if (choices[i].extra_bytes <= slack) {
                in[i] = true;
                slack -= choices[i].extra_bytes;
            }
        }
        improve_exactly(spec, choices, config.device_memory - base[static_cast<std::size_t>(s)], in);
        for (std::size_t i = 0; i < choices.size(); ++i) {
            if (!in[i]) continue;
            plan.set(choices[i].layer, LayerMode::Store);
            added[static_cast<std::size_t>(s)].push_back(choices[i].layer);
        }
    }

    // The slack bookkeeping sums in a different order than peak_memory; undo
    // the latest picks if rounding pushed a stage a few ulps over budget.
    std::vector<double> peaks = peak_memory(spec, partition, plan, config, scales);
    for (int s = 0; s < n; ++s) {
        auto& picks = added[static_cast<std::size_t>(s)];
        while (peaks[static_cast<std::size_t>(s)] > config.device_memory && !picks.empty()) {
            plan.set(picks.back(), LayerMode::Recompute);
            picks.pop_back();
            peaks = peak_memory(spec, partition, plan, config, scales);
        }
    }

    RecomputeResult out;
    out.sim = simulate(spec, partition, plan, config, scales);
    out.per_stage_cancelled = plan.per_stage_cancelled(partition);
    out.plan = std::move(plan);
    return out;
}

std::vector<StageMemory> memory_report(const ModelSpec& spec, const Partition& partition,
                                       const RecomputePlan& plan, const SimConfig& config,
                                       std::span<const MicroBatchScale> scales) {
    if (spec.layers.empty()) return {};
    const std::vector<double> peaks = peak_memory(spec, partition, plan, config, scales);
    std::vector<StageMemory> out;
    out.reserve(peaks.size());
    for (double p : peaks) out.push_back({p, config.device_memory - p});
    return out;
}

} // namespace vlbal
