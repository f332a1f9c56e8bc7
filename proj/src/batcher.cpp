// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlbal/batcher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vlbal/error.hpp"

namespace vlbal {

bool fits_alone(const Sample& s, const BalanceParams& params) {
    if (s.text_tokens > params.q_text) return false;
    return params.text_only() || s.vision_units <= params.q_vision;
}

namespace {

bool overflows(const Group& g, const BalanceParams& params) {
    if (g.total_text > params.q_text) return true;
    return !params.text_only() && g.total_vision > params.q_vision;
}

} // namespace

bool passes_filter(const Group& g, const BalanceParams& params) {
    const bool text_ok = g.total_text >= params.q_text_min;
    const bool vision_ok = !params.text_only() && g.total_vision >= params.q_vision_min;
    return text_ok || vision_ok;
}

bool satisfies_acceptance(const Group& g, const BalanceParams& params) {
    return !g.members.empty() && !overflows(g, params) && passes_filter(g, params);
}

CandidateSet isf_sample(const Dataset& dataset, std::span<const std::size_t> pool,
                        const BalanceParams& params, Rng& rng) {
    std::vector<std::size_t> order(pool.begin(), pool.end());
    rng.shuffle(std::span<std::size_t>(order));

    CandidateSet out;
    Group current;
    for (std::size_t idx : order) {
        const Sample& s = dataset[idx];
        if (!fits_alone(s, params)) {
            out.oversize.push_back(idx);
            continue;
        }
        current.add(idx, s);
        if (overflows(current, params)) {
            current.pop(s);
            out.groups.push_back(std::move(current));
            current = Group{};
            current.add(idx, s);
        }
    }
    return out;
}

CandidateSet isf_sample(const Dataset& dataset, const BalanceParams& params, Rng& rng) {
    std::vector<std::size_t> pool(dataset.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    return isf_sample(dataset, pool, params, rng);
}

FilterResult isf_filter(const CandidateSet& candidates, std::span<const std::size_t> pool,
                        const BalanceParams& params) {
    FilterResult out;
    std::vector<char> taken;
    std::size_t max_index = 0;
    for (std::size_t i : pool) max_index = std::max(max_index, i + 1);
    taken.assign(max_index, 0);

    for (const Group& g : candidates.groups) {
        if (!passes_filter(g, params)) continue;
        for (std::size_t m : g.members) {
            if (m < taken.size()) taken[m] = 1;
        }
        out.accepted.push_back(g);
    }
    out.remaining.reserve(pool.size());
    for (std::size_t i : pool) {
        if (!taken[i]) out.remaining.push_back(i);
    }
    return out;
}

namespace {

// First-fit decreasing by text over the leftovers.
std::vector<Group> pack_fallback(const Dataset& dataset, std::vector<std::size_t> leftovers,
                                 const BalanceParams& params) {
    std::stable_sort(leftovers.begin(), leftovers.end(), [&](std::size_t a, std::size_t b) {
        return dataset[a].text_tokens > dataset[b].text_tokens;
    });
    std::vector<Group> bins;
    for (std::size_t idx : leftovers) {
        const Sample& s = dataset[idx];
        bool placed = false;
        for (Group& g : bins) {
            g.add(idx, s);
            if (!overflows(g, params)) {
                placed = true;
                break;
            }
            g.pop(s);
        }
        if (!placed) {
            Group g;
            g.add(idx, s);
            bins.push_back(std::move(g));
        }
    }
    return bins;
}

IterationMetrics trace_iteration(const Dataset& dataset, const std::vector<Group>& accepted,
                                 int iteration, std::size_t newly, std::size_t remaining,
                                 const IsfOptions& options) {
    IterationMetrics m;
    m.iteration = iteration;
    m.accepted_groups = accepted.size();
    m.newly_accepted = newly;
    m.remaining_samples = remaining;
    std::size_t members = 0;
    for (const Group& g : accepted) members += g.members.size();
    m.mean_group_size = accepted.empty() ? 0.0
                                         : static_cast<double>(members) / static_cast<double>(accepted.size());
    if (options.dp_ranks >= 1 && accepted.size() >= static_cast<std::size_t>(options.dp_ranks)) {
        BatchList list{BatchLayout::Packed, accepted};
        const BalanceReport r = evaluate_plan(dataset, list, options.dp_ranks, options.tokens_per_vision_unit);
        m.vision_dist_ratio = r.vision_dist_ratio;
        m.text_dist_ratio = r.text_dist_ratio;
    }
    return m;
}

} // namespace

PackedBatchPlan isf_run(const Dataset& dataset, const BalanceParams& params, const IsfOptions& options) {
    params.validate();
    PackedBatchPlan plan;
    plan.params = params;

    std::vector<std::size_t> pool;
    pool.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (fits_alone(dataset[i], params)) {
            pool.push_back(i);
        } else {
            plan.oversize.push_back(i);
        }
    }

    Rng rng(params.seed);
    for (int it = 1; it <= params.max_iters && !pool.empty(); ++it) {
        const CandidateSet candidates = isf_sample(dataset, pool, params, rng);
        FilterResult filtered = isf_filter(candidates, pool, params);
        const std::size_t newly = filtered.accepted.size();
        for (Group& g : filtered.accepted) {
            plan.accepted_groups.push_back(std::move(g));
        }
        pool = std::move(filtered.remaining);
        plan.iterations_run = it;
        plan.metrics.push_back(trace_iteration(dataset, plan.accepted_groups, it, newly, pool.size(), options));
        if (newly == 0) break;
    }

    std::sort(pool.begin(), pool.end());
    plan.leftovers = pool;
    if (options.pack_leftovers) {
        plan.fallback_groups = pack_fallback(dataset, pool, params);
    }
    return plan;
}

BalanceParams derive_thresholds(const Dataset& dataset, std::int64_t q_text) {
    if (q_text <= 128) {
        throw Error(ErrorCode::InvalidInput, "q_text must exceed 128");
    }
    const std::int64_t vision = dataset.total_vision_units();
    if (vision <= 0) {
        throw Error(ErrorCode::InvalidInput,
                    "dataset has no vision units; use text-only mode (q_vision = 0, vision predicate ignored)");
    }
    const double text_per_unit =
        static_cast<double>(dataset.total_text_tokens()) / static_cast<double>(vision);
    BalanceParams p;
    p.q_text = q_text;
    p.q_vision = std::max<std::int64_t>(1, std::llround(static_cast<double>(q_text) / text_per_unit));
    p.q_vision_min = p.q_vision;
    p.q_text_min = q_text - 128;
    return p;
}

// ---------------------------------------------------------------------------

namespace {

void check_batching(int batch_size, int dp_ranks) {
    if (batch_size < 1) throw Error(ErrorCode::InvalidInput, "batch_size must be >= 1");
    if (dp_ranks < 1) throw Error(ErrorCode::InvalidInput, "dp_ranks must be >= 1");
}

std::vector<std::size_t> sorted_order(const Dataset& dataset) {
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Sample& x = dataset[a];
        const Sample& y = dataset[b];
        if (x.text_tokens != y.text_tokens) return x.text_tokens < y.text_tokens;
        return x.vision_units < y.vision_units;
    });
    return order;
}

std::vector<Group> chunk(const Dataset& dataset, std::span<const std::size_t> order, int batch_size) {
    std::vector<Group> out;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
        Group g;
        for (std::size_t k = start; k < end; ++k) g.add(order[k], dataset[order[k]]);
        out.push_back(std::move(g));
    }
    return out;
}

} // namespace

BatchList baseline_random(const Dataset& dataset, int batch_size, int dp_ranks, std::uint64_t seed) {
    check_batching(batch_size, dp_ranks);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    return {BatchLayout::Padded, chunk(dataset, order, batch_size)};
}

BatchList baseline_sorted(const Dataset& dataset, int batch_size, int dp_ranks, std::uint64_t seed) {
    check_batching(batch_size, dp_ranks);
    const auto order = sorted_order(dataset);
    std::vector<Group> batches = chunk(dataset, order, batch_size);
    Rng rng(seed);
    rng.shuffle(std::span<Group>(batches));
    return {BatchLayout::Padded, std::move(batches)};
}

BatchList baseline_device_group(const Dataset& dataset, int batch_size, int dp_ranks, std::uint64_t seed) {
    check_batching(batch_size, dp_ranks);
    const auto order = sorted_order(dataset);
    const std::size_t ranks = static_cast<std::size_t>(dp_ranks);
    const std::size_t window = static_cast<std::size_t>(batch_size) * ranks;

    std::vector<std::vector<Group>> steps;
    for (std::size_t start = 0; start < order.size(); start += window) {
        const std::size_t end = std::min(order.size(), start + window);
        std::vector<Group> step(ranks);
        for (std::size_t k = start; k < end; ++k) {
            step[(k - start) % ranks].add(order[k], dataset[order[k]]);
        }
        std::erase_if(step, [](const Group& g) { return g.members.empty(); });
        steps.push_back(std::move(step));
    }
    Rng rng(seed);
    rng.shuffle(std::span<std::vector<Group>>(steps));

    BatchList out{BatchLayout::Padded, {}};
    for (auto& step : steps) {
        for (auto& g : step) out.batches.push_back(std::move(g));
    }
    return out;
}

BatchList as_batches(const PackedBatchPlan& plan, bool include_fallback) {
    BatchList out{BatchLayout::Packed, plan.accepted_groups};
    if (include_fallback) {
        out.batches.insert(out.batches.end(), plan.fallback_groups.begin(), plan.fallback_groups.end());
    }
    return out;
}

std::int64_t batch_vision_load(const Dataset& dataset, const Group& batch,
                               std::int64_t tokens_per_vision_unit) {
    std::int64_t units = 0;
    for (std::size_t m : batch.members) units += dataset[m].vision_units;
    return units * tokens_per_vision_unit;
}

std::int64_t batch_text_load(const Dataset& dataset, const Group& batch, BatchLayout layout) {
    std::int64_t total = 0;
    std::int64_t longest = 0;
    for (std::size_t m : batch.members) {
        total += dataset[m].text_tokens;
        longest = std::max(longest, dataset[m].text_tokens);
    }
    if (layout == BatchLayout::Packed) return total;
    return longest * static_cast<std::int64_t>(batch.members.size());
}

BalanceReport evaluate_plan(const Dataset& dataset, const BatchList& list, int dp_ranks,
                            std::int64_t tokens_per_vision_unit) {
    if (dp_ranks < 1) throw Error(ErrorCode::InvalidInput, "dp_ranks must be >= 1");
    const std::size_t ranks = static_cast<std::size_t>(dp_ranks);
    if (list.batches.size() < ranks) {
        throw Error(ErrorCode::InvalidInput, "fewer batches than data-parallel ranks");
    }

    BalanceReport r;
    r.batches = list.batches.size();

    std::vector<std::int64_t> vision_load(list.batches.size());
    std::vector<std::int64_t> text_load(list.batches.size());
    double pad_sum = 0.0;
    std::vector<std::int64_t> lengths;
    for (std::size_t k = 0; k < list.batches.size(); ++k) {
        const Group& b = list.batches[k];
        if (b.members.empty()) throw Error(ErrorCode::InvalidInput, "empty batch");
        r.samples += b.members.size();
        vision_load[k] = batch_vision_load(dataset, b, tokens_per_vision_unit);
        text_load[k] = batch_text_load(dataset, b, list.layout);
        r.max_seq_vision = std::max(r.max_seq_vision, vision_load[k]);
        r.max_seq_text = std::max(r.max_seq_text, text_load[k]);
        if (list.layout == BatchLayout::Padded) {
            lengths.clear();
            for (std::size_t m : b.members) lengths.push_back(dataset[m].text_tokens);
            pad_sum += pad_ratio(lengths);
        }
    }
    r.ave_bs = static_cast<double>(r.samples) / static_cast<double>(r.batches);
    r.pad_ratio = pad_sum / static_cast<double>(r.batches);

    r.steps = list.batches.size() / ranks;
    double vision_sum = 0.0;
    double text_sum = 0.0;
    std::size_t vision_steps = 0;
    for (std::size_t s = 0; s < r.steps; ++s) {
        const std::span<const std::int64_t> v(vision_load.data() + s * ranks, ranks);
        const std::span<const std::int64_t> t(text_load.data() + s * ranks, ranks);
        text_sum += dist_ratio(t);
        if (std::any_of(v.begin(), v.end(), [](std::int64_t x) { return x > 0; })) {
            vision_sum += dist_ratio(v);
            ++vision_steps;
        }
    }
    r.text_dist_ratio = text_sum / static_cast<double>(r.steps);
    r.vision_dist_ratio = vision_steps == 0 ? 0.0 : vision_sum / static_cast<double>(vision_steps);
    return r;
}

} // namespace vlbal
