// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlbal/pipesim.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "vlbal/error.hpp"

namespace vlbal {

std::string_view phase_name(Phase phase) {
    switch (phase) {
    case Phase::Fwd: return "fwd";
    case Phase::Bwd: return "bwd";
    case Phase::Recompute: return "recompute";
    case Phase::Send: return "send";
    case Phase::Recv: return "recv";
    }
    return "fwd";
}

Phase parse_phase(std::string_view name) {
    if (name == "fwd") return Phase::Fwd;
    if (name == "bwd") return Phase::Bwd;
    if (name == "recompute") return Phase::Recompute;
    if (name == "send") return Phase::Send;
    if (name == "recv") return Phase::Recv;
    throw Error(ErrorCode::ParseError, "unknown timeline phase '" + std::string(name) + "'");
}

void SimConfig::validate() const {
    auto fail = [](const char* what) { throw Error(ErrorCode::InvalidInput, what); };
    if (micro_batches < 1) fail("micro_batches must be >= 1");
    if (!(p2p_bandwidth > 0.0)) fail("p2p_bandwidth must be positive");
    if (!(p2p_latency >= 0.0)) fail("p2p_latency must be non-negative");
    if (!(device_memory > 0.0)) fail("device_memory must be positive");
    if (!(optimizer_multiplier >= 0.0)) fail("optimizer_multiplier must be non-negative");
}

int in_flight_micro_batches(int stage, int num_stages, int micro_batches) {
    return std::min(num_stages - stage, micro_batches);
}

namespace {

void check_inputs(const ModelSpec& spec, const Partition& partition, const RecomputePlan& plan,
                  const SimConfig& config, std::span<const MicroBatchScale> scales) {
    config.validate();
    partition.validate(spec.num_layers());
    if (plan.per_layer.size() != spec.layers.size()) {
        throw Error(ErrorCode::InvalidInput, "recompute plan must cover every layer exactly once");
    }
    if (!scales.empty() && scales.size() != static_cast<std::size_t>(config.micro_batches)) {
        throw Error(ErrorCode::InvalidInput, "micro-batch scales must match micro_batches");
    }
}

MicroBatchScale max_scale(std::span<const MicroBatchScale> scales) {
    if (scales.empty()) return {};
    MicroBatchScale m{0.0, 0.0};
    for (const auto& s : scales) {
        m.vision = std::max(m.vision, s.vision);
        m.text = std::max(m.text, s.text);
    }
    return m;
}

std::vector<double> peak_memory_unchecked(const ModelSpec& spec, const Partition& partition,
                                          const RecomputePlan& plan, const SimConfig& config,
                                          std::span<const MicroBatchScale> scales) {
    const int L = spec.num_layers();
    const int n = partition.num_stages();
    const MicroBatchScale worst = max_scale(scales);
    std::vector<double> peaks;
    peaks.reserve(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        double weights = 0.0;
        double act = 0.0;
        for (int k = partition.stage_begin(s); k < partition.stage_end(s, L); ++k) {
            const LayerProfile& l = spec.layer(k);
            weights += l.weight_mem;
            const double per_mb = plan.stored(k) ? l.act_mem_full : l.act_mem_ckpt;
            act += per_mb * worst.for_kind(l.kind);
        }
        const int depth = in_flight_micro_batches(s, n, config.micro_batches);
        peaks.push_back(weights * (1.0 + config.optimizer_multiplier) + depth * act);
    }
    return peaks;
}

struct StageDurations {
    // Indexed [micro_batch].
    std::vector<double> fwd;
    std::vector<double> recompute;
    std::vector<double> bwd;
    // Transfer to the next stage (forward) / from the next stage (backward).
    std::vector<double> comm_next;
};

constexpr double kMicro = 1e-6;

std::vector<StageDurations> durations(const ModelSpec& spec, const Partition& partition,
                                      const RecomputePlan& plan, const SimConfig& config,
                                      std::span<const MicroBatchScale> scales) {
    const int L = spec.num_layers();
    const int n = partition.num_stages();
    const int m_count = config.micro_batches;
    std::vector<StageDurations> out(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        StageDurations& d = out[static_cast<std::size_t>(s)];
        d.fwd.assign(static_cast<std::size_t>(m_count), 0.0);
        d.recompute.assign(static_cast<std::size_t>(m_count), 0.0);
        d.bwd.assign(static_cast<std::size_t>(m_count), 0.0);
        d.comm_next.assign(static_cast<std::size_t>(m_count), 0.0);
        for (int m = 0; m < m_count; ++m) {
            const MicroBatchScale sc = scales.empty() ? MicroBatchScale{} : scales[static_cast<std::size_t>(m)];
            double f = 0.0, r = 0.0, b = 0.0;
            for (int k = partition.stage_begin(s); k < partition.stage_end(s, L); ++k) {
                const LayerProfile& l = spec.layer(k);
                const double x = sc.for_kind(l.kind);
                f += l.fwd_time * x;
                b += l.bwd_time * x;
                if (!plan.stored(k)) r += l.fwd_time * x;
            }
            d.fwd[static_cast<std::size_t>(m)] = f * kMicro;
            d.recompute[static_cast<std::size_t>(m)] = r * kMicro;
            d.bwd[static_cast<std::size_t>(m)] = b * kMicro;
            if (s + 1 < n) {
                const LayerProfile& last = spec.layer(partition.stage_end(s, L) - 1);
                const double bytes = last.output_activation * sc.for_kind(last.kind);
                const double c = bytes > 0.0 ? config.p2p_latency + bytes / config.p2p_bandwidth
                                             : config.p2p_latency;
                d.comm_next[static_cast<std::size_t>(m)] = c;
            }
        }
    }
    return out;
}

struct Op {
    bool forward;
    int micro_batch;
};

std::vector<Op> one_f_one_b_order(int stage, int num_stages, int micro_batches) {
    const int warmup = std::min(num_stages - stage - 1, micro_batches);
    std::vector<Op> ops;
    ops.reserve(static_cast<std::size_t>(2 * micro_batches));
    for (int m = 0; m < warmup; ++m) ops.push_back({true, m});
    for (int k = 0; k < micro_batches - warmup; ++k) {
        ops.push_back({true, warmup + k});
        ops.push_back({false, k});
    }
    for (int m = micro_batches - warmup; m < micro_batches; ++m) ops.push_back({false, m});
    return ops;
}

} // namespace

std::vector<double> peak_memory(const ModelSpec& spec, const Partition& partition,
                                const RecomputePlan& plan, const SimConfig& config,
                                std::span<const MicroBatchScale> scales) {
    check_inputs(spec, partition, plan, config, scales);
    return peak_memory_unchecked(spec, partition, plan, config, scales);
}

SimResult simulate(const ModelSpec& spec, const Partition& partition, const RecomputePlan& plan,
                   const SimConfig& config, std::span<const MicroBatchScale> scales) {
    check_inputs(spec, partition, plan, config, scales);
    const int n = partition.num_stages();
    const int m_count = config.micro_batches;

    SimResult result;
    result.per_stage_peak_mem = peak_memory_unchecked(spec, partition, plan, config, scales);
    for (int s = 0; s < n; ++s) {
        const double peak = result.per_stage_peak_mem[static_cast<std::size_t>(s)];
        if (peak > config.device_memory) {
            throw InfeasiblePlanError(s + 1, peak, config.device_memory);
        }
    }

    const auto dur = durations(spec, partition, plan, config, scales);
    const auto idx = [m_count](int s, int m) { return static_cast<std::size_t>(s * m_count + m); };
    constexpr double kUnknown = -1.0;
    // Time at which a micro-batch's input (activation or gradient) is available.
    std::vector<double> fwd_ready(static_cast<std::size_t>(n * m_count), kUnknown);
    std::vector<double> bwd_ready(static_cast<std::size_t>(n * m_count), kUnknown);
    for (int m = 0; m < m_count; ++m) fwd_ready[idx(0, m)] = 0.0;

    std::vector<std::vector<Op>> orders;
    for (int s = 0; s < n; ++s) orders.push_back(one_f_one_b_order(s, n, m_count));
    std::vector<std::size_t> next(static_cast<std::size_t>(n), 0);
    std::vector<double> free_at(static_cast<std::size_t>(n), 0.0);
    result.per_stage_busy.assign(static_cast<std::size_t>(n), 0.0);

    auto emit = [&](int s, int m, Phase p, double start, double end) {
        result.timeline.push_back({s, m, p, start, end});
    };

    std::size_t remaining = static_cast<std::size_t>(2 * n * m_count);
    while (remaining > 0) {
        bool progressed = false;
        for (int s = 0; s < n; ++s) {
            auto& cursor = next[static_cast<std::size_t>(s)];
            const auto& order = orders[static_cast<std::size_t>(s)];
            const StageDurations& d = dur[static_cast<std::size_t>(s)];
            double& free = free_at[static_cast<std::size_t>(s)];
            while (cursor < order.size()) {
                const Op op = order[cursor];
                const auto m = static_cast<std::size_t>(op.micro_batch);
                if (op.forward) {
                    const double ready = fwd_ready[idx(s, op.micro_batch)];
                    if (ready < 0.0) break;
                    const double start = std::max(free, ready);
                    const double end = start + d.fwd[m];
                    emit(s, op.micro_batch, Phase::Fwd, start, end);
                    result.per_stage_busy[static_cast<std::size_t>(s)] += d.fwd[m];
                    free = end;
                    if (s + 1 < n) {
                        const double c = d.comm_next[m];
                        if (c > 0.0) {
                            if (config.overlap_comm) {
                                emit(s + 1, op.micro_batch, Phase::Recv, end, end + c);
                            } else {
                                emit(s, op.micro_batch, Phase::Send, end, end + c);
                                free = end + c;
                            }
                        }
                        fwd_ready[idx(s + 1, op.micro_batch)] = end + c;
                    } else {
                        bwd_ready[idx(s, op.micro_batch)] = end;
                    }
                } else {
                    const double ready = bwd_ready[idx(s, op.micro_batch)];
                    if (ready < 0.0) break;
                    const double start = std::max(free, ready);
                    double t = start;
                    if (d.recompute[m] > 0.0) {
                        emit(s, op.micro_batch, Phase::Recompute, t, t + d.recompute[m]);
                        t += d.recompute[m];
                    }
                    const double end = t + d.bwd[m];
                    emit(s, op.micro_batch, Phase::Bwd, t, end);
                    result.per_stage_busy[static_cast<std::size_t>(s)] += d.recompute[m] + d.bwd[m];
                    free = end;
                    if (s > 0) {
                        const double c = dur[static_cast<std::size_t>(s - 1)].comm_next[m];
                        if (c > 0.0) {
                            if (config.overlap_comm) {
                                emit(s - 1, op.micro_batch, Phase::Recv, end, end + c);
                            } else {
                                emit(s, op.micro_batch, Phase::Send, end, end + c);
                                free = end + c;
                            }
                        }
                        bwd_ready[idx(s - 1, op.micro_batch)] = end + c;
                    }
                }
                ++cursor;
                --remaining;
                progressed = true;
            }
        }
        if (!progressed) {
            throw Error(ErrorCode::InvalidInput, "pipeline schedule deadlocked");
        }
    }

    for (const TimelineEvent& e : result.timeline) {
        result.iteration_time = std::max(result.iteration_time, e.end);
    }
    std::stable_sort(result.timeline.begin(), result.timeline.end(),
                     [](const TimelineEvent& a, const TimelineEvent& b) {
                         return std::tie(a.start, a.stage, a.micro_batch) <
                                std::tie(b.start, b.stage, b.micro_batch);
                     });
    result.bubble_ratio = bubble_ratio(result);
    return result;
}

double bubble_ratio(const SimResult& result) {
    const auto n = static_cast<double>(result.per_stage_busy.size());
    if (n == 0.0 || result.iteration_time <= 0.0) return 0.0;
    double busy = 0.0;
    for (double b : result.per_stage_busy) busy += b;
    return std::max(0.0, 1.0 - busy / (n * result.iteration_time));
}

} // namespace vlbal
