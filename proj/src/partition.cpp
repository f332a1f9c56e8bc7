// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlbal/partition.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "vlbal/error.hpp"
#include "vlbal/kernels.hpp"

namespace vlbal {

Partition anchor_partition(const ModelSpec& spec, int n_stages) {
    const int L = spec.num_layers();
    if (n_stages < 1) throw Error(ErrorCode::InvalidInput, "n_stages must be >= 1");
    if (n_stages > L) {
        throw Error(ErrorCode::InvalidInput, "n_stages (" + std::to_string(n_stages) +
                                                 ") exceeds the layer count (" + std::to_string(L) + ")");
    }
    const double target = spec.total_fwd_time() / n_stages;
    Partition p;
    int layer = 1;
    for (int stage = 0; stage + 1 < n_stages; ++stage) {
        const int later_stages = n_stages - stage - 1;
        double acc = spec.layer(layer).fwd_time;
        int end = layer + 1;
        while (L + 1 - (end + 1) >= later_stages) {
            const double extended = acc + spec.layer(end).fwd_time;
            if (!(std::abs(extended - target) < std::abs(acc - target))) break;
            acc = extended;
            ++end;
        }
        p.cuts.push_back(end);
        layer = end;
    }
    return p;
}

std::size_t jitter_raw_count(int n_stages, int radius) {
    std::size_t count = 1;
    for (int i = 0; i + 1 < n_stages; ++i) count *= static_cast<std::size_t>(2 * radius + 1);
    return count;
}

std::vector<Partition> jitter_candidates(const Partition& anchor, int radius, int num_layers) {
    if (radius < 0) throw Error(ErrorCode::InvalidInput, "radius must be >= 0");
    anchor.validate(num_layers);
    const std::size_t k = anchor.cuts.size();
    std::vector<Partition> out;
    std::vector<int> offset(k, -radius);
    while (true) {
        Partition cand;
        cand.cuts.resize(k);
        for (std::size_t i = 0; i < k; ++i) cand.cuts[i] = anchor.cuts[i] + offset[i];
        if (cand.is_valid(num_layers)) out.push_back(std::move(cand));
        // Odometer increment, last cut fastest.
        std::size_t pos = k;
        while (pos > 0) {
            --pos;
            if (offset[pos] < radius) {
                ++offset[pos];
                break;
            }
            offset[pos] = -radius;
            if (pos == 0) return out;
        }
        if (k == 0) return out;
    }
}

double var_fwd(std::span<const double> stage_fwd_times) {
    if (stage_fwd_times.empty()) return 0.0;
    const double mean = kernels::sum(stage_fwd_times) / static_cast<double>(stage_fwd_times.size());
    return kernels::sq_dev_sum(stage_fwd_times, mean);
}

double sum_comm(const ModelSpec& spec, const Partition& partition) {
    partition.validate(spec.num_layers());
    double total = 0.0;
    for (int cut : partition.cuts) total += spec.layer(cut - 1).output_activation;
    return total;
}

std::vector<RankedCandidate> rank_candidates(std::span<const Partition> candidates, const ModelSpec& spec,
                                             RankWeights weights) {
    if (candidates.empty()) throw Error(ErrorCode::InvalidInput, "rank_candidates: no candidates");
    std::vector<RankedCandidate> out;
    out.reserve(candidates.size());
    std::vector<double> stage_fwd;
    for (const Partition& p : candidates) {
        const StageCosts costs = stage_costs(spec, p);
        stage_fwd.clear();
        for (const StageCost& c : costs.stages) stage_fwd.push_back(c.fwd_time);
        RankedCandidate r;
        r.partition = p;
        r.var_fwd = var_fwd(stage_fwd);
        for (double b : costs.boundary_activation) r.sum_comm += b;
        out.push_back(std::move(r));
    }
    double max_var = 0.0;
    double max_comm = 0.0;
    for (const auto& r : out) {
        max_var = std::max(max_var, r.var_fwd);
        max_comm = std::max(max_comm, r.sum_comm);
    }
    for (auto& r : out) {
        const double v = max_var > 0.0 ? r.var_fwd / max_var : 0.0;
        const double c = max_comm > 0.0 ? r.sum_comm / max_comm : 0.0;
        r.combined_score = weights.var * v + weights.comm * c;
    }
    std::stable_sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.combined_score != b.combined_score) return a.combined_score < b.combined_score;
        return a.partition.cuts < b.partition.cuts;
    });
    return out;
}

namespace {

CandidateEvaluation evaluate_candidate(const ModelSpec& spec, const SimConfig& sim, const RankedCandidate& cand) {
    CandidateEvaluation e;
    e.candidate = cand;
    try {
        const SimResult r = simulate(spec, cand.partition, RecomputePlan::all_recompute(spec.num_layers()), sim);
        e.feasible = true;
        e.simulated_time = r.iteration_time;
    } catch (const InfeasiblePlanError& err) {
        e.feasible = false;
        e.infeasible_reason = err.what();
    }
    return e;
}

bool better(const CandidateEvaluation& a, const CandidateEvaluation& b) {
    if (a.simulated_time != b.simulated_time) return a.simulated_time < b.simulated_time;
    if (a.candidate.sum_comm != b.candidate.sum_comm) return a.candidate.sum_comm < b.candidate.sum_comm;
    return a.candidate.partition.cuts < b.candidate.partition.cuts;
}

} // namespace

SearchResult select_partition(const ModelSpec& spec, const SimConfig& sim, const SearchOptions& options) {
    if (options.top_k < 1) throw Error(ErrorCode::InvalidInput, "top_k must be >= 1");
    spec.validate();
    sim.validate();

    SearchResult result;
    result.anchor = anchor_partition(spec, options.n_stages);
    result.raw_candidates = jitter_raw_count(options.n_stages, options.radius);
    const auto candidates = jitter_candidates(result.anchor, options.radius, spec.num_layers());
    result.ranked = rank_candidates(candidates, spec, options.weights);

    const std::size_t k = std::min(result.ranked.size(), static_cast<std::size_t>(options.top_k));
    result.evaluations.resize(k);
    unsigned threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, k));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < k; i = next++) {
            result.evaluations[i] = evaluate_candidate(spec, sim, result.ranked[i]);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    const CandidateEvaluation* best = nullptr;
    for (const auto& e : result.evaluations) {
        if (!e.feasible) continue;
        if (best == nullptr || better(e, *best)) best = &e;
    }
    if (best == nullptr) {
        throw Error(ErrorCode::InfeasiblePlan,
                    "no evaluated partition fits in device memory even with every layer recomputed: " +
                        result.evaluations.front().infeasible_reason);
    }
    result.best = best->candidate.partition;
    result.best_time = best->simulated_time;
    return result;
}

Partition balanced_partition(std::span<const double> costs, int n_stages) {
    const int L = static_cast<int>(costs.size());
    if (n_stages < 1 || n_stages > L) {
        throw Error(ErrorCode::InvalidInput, "balanced_partition: need 1 <= n_stages <= layer count");
    }
    std::vector<double> prefix(static_cast<std::size_t>(L) + 1, 0.0);
    for (int i = 0; i < L; ++i) prefix[i + 1] = prefix[i] + costs[static_cast<std::size_t>(i)];
    auto seg = [&](int a, int b) { return prefix[static_cast<std::size_t>(b)] - prefix[static_cast<std::size_t>(a)]; };
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const auto n = static_cast<std::size_t>(n_stages);
    const auto width = static_cast<std::size_t>(L) + 1;

    // best[k][i]: smallest bottleneck splitting layers i..L-1 into k parts.
    std::vector<double> best((n + 1) * width, kInf);
    auto at = [&](std::vector<double>& t, std::size_t k, int i) -> double& { return t[k * width + static_cast<std::size_t>(i)]; };
    at(best, 0, L) = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        for (int i = L - 1; i >= 0; --i) {
            for (int j = i + 1; j <= L; ++j) {
                const double rest = at(best, k - 1, j);
                if (rest == kInf) continue;
                at(best, k, i) = std::min(at(best, k, i), std::max(seg(i, j), rest));
            }
        }
    }
    const double bottleneck = at(best, n, 0);
    const double limit = bottleneck + 1e-9 * std::max(1.0, std::abs(bottleneck));
    const double mean = prefix[static_cast<std::size_t>(L)] / n_stages;

    // dev[k][i]: smallest squared deviation over splits of i..L-1 into k parts
    // that respect the bottleneck.
    std::vector<double> dev((n + 1) * width, kInf);
    at(dev, 0, L) = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        for (int i = L - 1; i >= 0; --i) {
            for (int j = i + 1; j <= L; ++j) {
                const double s = seg(i, j);
                if (s > limit) break;
                const double rest = at(dev, k - 1, j);
                if (rest == kInf) continue;
                const double d = (s - mean) * (s - mean);
                at(dev, k, i) = std::min(at(dev, k, i), d + rest);
            }
        }
    }
    Partition p;
    int i = 0;
    for (std::size_t k = n; k > 1; --k) {
        const double target = at(dev, k, i);
        const double tol = 1e-9 * std::max(1.0, std::abs(target));
        for (int j = i + 1; j <= L; ++j) {
            const double s = seg(i, j);
            const double rest = at(dev, k - 1, j);
            if (s > limit || rest == kInf) continue;
            if ((s - mean) * (s - mean) + rest <= target + tol) {
                p.cuts.push_back(j + 1);
                i = j;
                break;
            }
        }
    }
    return p;
}

BaselinePartitions baseline_partitions(const ModelSpec& spec, int n_stages) {
    const int L = spec.num_layers();
    if (n_stages < 1 || n_stages > L) {
        throw Error(ErrorCode::InvalidInput, "n_stages must be between 1 and the layer count");
    }
    std::vector<double> weights, times;
    for (const LayerProfile& l : spec.layers) {
        weights.push_back(l.weight_mem);
        times.push_back(l.fwd_time);
    }
    BaselinePartitions out;
    out.parameter_based = balanced_partition(weights, n_stages);
    out.profile_based = balanced_partition(times, n_stages);
    std::vector<int> sizes(static_cast<std::size_t>(n_stages), L / n_stages);
    for (int s = 0; s < L % n_stages; ++s) ++sizes[static_cast<std::size_t>(s)];
    out.layer_based = partition_from_sizes(sizes);
    return out;
}

} // namespace vlbal
