// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlbal/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "vlbal/error.hpp"

namespace vlbal {

namespace {

double sq_dev(const std::vector<double>& xs) {
    return var_fwd(std::span<const double>(xs));
}

std::vector<MicroBatchScale> repeat_scale(MicroBatchScale s, int m) {
    return std::vector<MicroBatchScale>(static_cast<std::size_t>(m), s);
}

MicroBatchScale worst_scale(const ModelSpec& spec, const Dataset& dataset, const BatchList& batches,
                            std::int64_t tpu) {
    MicroBatchScale worst{0.0, 0.0};
    for (const Group& b : batches.batches) {
        const MicroBatchScale s = batch_scale(dataset, b, batches.layout, tpu, spec);
        worst.vision = std::max(worst.vision, s.vision);
        worst.text = std::max(worst.text, s.text);
    }
    return worst;
}

} // namespace

std::string fixed4(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

PartitionMetrics partition_metrics(const ModelSpec& spec, const Partition& partition, std::string method,
                                   const SimConfig& sim) {
    const StageCosts costs = stage_costs(spec, partition);
    PartitionMetrics m;
    m.method = std::move(method);
    m.partition = partition;
    m.stages_layer_num = partition.stage_sizes(spec.num_layers());
    std::vector<double> param_gb, layers, fwd_ms;
    for (const StageCost& s : costs.stages) {
        param_gb.push_back(s.weight_mem / 1e9);
        layers.push_back(static_cast<double>(s.num_layers()));
        fwd_ms.push_back(s.fwd_time / 1e3);
    }
    m.var_param = sq_dev(param_gb);
    m.var_num_layer = sq_dev(layers);
    m.var_fwd_time = sq_dev(fwd_ms);
    m.sum_comm_mb = sum_comm(spec, partition) / 1e6;
    try {
        const SimResult r = simulate(spec, partition, RecomputePlan::all_recompute(spec.num_layers()), sim);
        m.feasible = true;
        m.simulated_time = r.iteration_time;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InfeasiblePlan) throw;
    }
    return m;
}

MicroBatchScale batch_scale(const Dataset& dataset, const Group& batch, BatchLayout layout,
                            std::int64_t vision_tokens_per_unit, const ModelSpec& spec) {
    MicroBatchScale s;
    if (spec.vision_seq_tokens > 0) {
        s.vision = static_cast<double>(batch_vision_load(dataset, batch, vision_tokens_per_unit)) /
                   spec.vision_seq_tokens;
    }
    if (spec.language_seq_tokens > 0) {
        s.text = static_cast<double>(batch_text_load(dataset, batch, layout)) / spec.language_seq_tokens;
    }
    return s;
}

EpochStats simulate_epoch(const ModelSpec& spec, const Partition& partition, const RecomputePlan& plan,
                          const SimConfig& sim, const Dataset& dataset, const BatchList& batches, int dp,
                          std::int64_t vision_tokens_per_unit) {
    if (dp < 1) throw Error(ErrorCode::InvalidInput, "dp must be at least 1");
    sim.validate();
    const std::size_t per_step = static_cast<std::size_t>(dp) * static_cast<std::size_t>(sim.micro_batches);
    EpochStats out;
    double bubble_sum = 0.0;
    std::size_t bubble_n = 0;
    for (std::size_t begin = 0; begin < batches.batches.size(); begin += per_step) {
        const std::size_t end = std::min(batches.batches.size(), begin + per_step);
        std::vector<std::vector<MicroBatchScale>> ranks(static_cast<std::size_t>(dp));
        for (std::size_t j = begin; j < end; ++j) {
            ranks[(j - begin) % static_cast<std::size_t>(dp)].push_back(
                batch_scale(dataset, batches.batches[j], batches.layout, vision_tokens_per_unit, spec));
        }
        double step = 0.0;
        for (const auto& scales : ranks) {
            if (scales.empty()) continue;
            SimConfig cfg = sim;
            cfg.micro_batches = static_cast<int>(scales.size());
            const SimResult r = simulate(spec, partition, plan, cfg, scales);
            step = std::max(step, r.iteration_time);
            bubble_sum += r.bubble_ratio;
            ++bubble_n;
        }
        out.total_time += step;
        ++out.steps;
    }
    if (out.steps > 0) out.mean_step_time = out.total_time / static_cast<double>(out.steps);
    if (bubble_n > 0) out.mean_bubble_ratio = bubble_sum / static_cast<double>(bubble_n);
    return out;
}

PlanArtifacts plan_full(const Dataset& dataset, const PlanFullOptions& options) {
    const ScenarioPreset& p = options.preset;
    if (p.pp < 1 || p.dp < 1 || p.tp < 1) throw Error(ErrorCode::InvalidInput, "pp, dp and tp must be positive");
    PlanArtifacts art;
    RunReport& rep = art.report;
    rep.preset = p.name;
    rep.pp = p.pp;
    rep.dp = p.dp;
    rep.tp = p.tp;
    rep.samples = dataset.size();

    BalanceParams params;
    if (dataset.total_vision_units() > 0) {
        params = derive_thresholds(dataset, p.q_text);
    } else {
        params.q_vision = 0;
        params.q_vision_min = 0;
        params.q_text = p.q_text;
        params.q_text_min = p.q_text - 128;
    }
    params.max_iters = options.isf_iters;
    params.seed = options.seed;
    rep.thresholds = params;
    const std::int64_t tpu = p.vision_tokens_per_unit;

    IsfOptions isf_opts;
    isf_opts.dp_ranks = p.dp;
    isf_opts.tokens_per_vision_unit = tpu;
    art.isf = isf_run(dataset, params, isf_opts);
    rep.oversize_samples = art.isf.oversize.size();

    // Balance comparison.
    const int bs = p.naive_batch_size;
    const BatchList naive_batches = baseline_random(dataset, bs, p.dp, options.seed);
    const BatchList isf_batches = as_batches(art.isf, true);
    auto add_balance = [&](const std::string& name, const BatchList& b) {
        if (b.batches.size() >= static_cast<std::size_t>(p.dp)) {
            rep.balance.emplace_back(name, evaluate_plan(dataset, b, p.dp, tpu));
        }
    };
    add_balance("random", naive_batches);
    add_balance("sorted", baseline_sorted(dataset, bs, p.dp, options.seed));
    add_balance("device-group", baseline_device_group(dataset, bs, p.dp, options.seed));
    add_balance("isf", as_batches(art.isf, false));

    // Model profile sized to the data thresholds.
    ArchConfig arch = p.arch;
    arch.tp_degree = p.tp;
    if (arch.vision.layers > 0) arch.vision.seq = static_cast<int>(std::max<std::int64_t>(1, params.q_vision) * tpu);
    arch.language.seq = static_cast<int>(params.q_text);
    art.spec = analytic_profile(arch);
    const ModelSpec& spec = art.spec;
    const int L = spec.num_layers();
    if (p.pp > L) throw Error(ErrorCode::InvalidInput, "more pipeline stages than layers");

    const SimConfig& sim = p.sim;
    const BaselinePartitions base = baseline_partitions(spec, p.pp);

    SearchOptions so;
    so.n_stages = p.pp;
    so.radius = options.radius;
    so.top_k = options.top_k;
    art.search = select_partition(spec, sim, so);
    const Partition& bmp = art.search.best;

    const PartitionMetrics param_row = partition_metrics(spec, base.parameter_based, "parameter-based", sim);
    for (auto row : {param_row, partition_metrics(spec, base.layer_based, "layer-based", sim),
                     partition_metrics(spec, base.profile_based, "profile-based", sim),
                     partition_metrics(spec, bmp, "bmp", sim)}) {
        row.delta_sum_comm_mb = row.sum_comm_mb - param_row.sum_comm_mb;
        rep.partitions.push_back(std::move(row));
    }

    // Memory balance at the worst micro-batch of the balanced data.
    const MicroBatchScale worst = worst_scale(spec, dataset, isf_batches, tpu);
    const auto worst_m = repeat_scale(worst, sim.micro_batches);
    const RecomputePlan all_rc = RecomputePlan::all_recompute(L);
    const RecomputeResult rc = optimize_recompute(spec, bmp, sim, worst_m);
    rep.memory.emplace_back("all-recompute", memory_report(spec, bmp, all_rc, sim, worst_m));
    rep.memory.emplace_back("optimized", memory_report(spec, bmp, rc.plan, sim, worst_m));

    auto rung = [&](std::string name, const Partition& part, const RecomputePlan& plan, const BatchList& b) {
        LadderRung r;
        r.name = std::move(name);
        r.partition = part;
        r.recompute_cancelled_per_stage = plan.per_stage_cancelled(part);
        r.epoch = simulate_epoch(spec, part, plan, sim, dataset, b, p.dp, tpu);
        rep.ladder.push_back(std::move(r));
    };
    rung("naive", base.parameter_based, all_rc, naive_batches);
    rung("+data", base.parameter_based, all_rc, isf_batches);
    rung("+data+model", bmp, all_rc, isf_batches);
    rung("+data+model+memory", bmp, rc.plan, isf_batches);
    const double full = rep.ladder.back().epoch.total_time;
    rep.speedup = full > 0.0 ? rep.ladder.front().epoch.total_time / full : 1.0;

    art.final_plan.model = spec;
    art.final_plan.partition = bmp;
    art.final_plan.recompute = rc.plan;
    art.final_plan.sim = sim;
    art.final_plan.dp_degree = p.dp;
    art.final_plan.notes = "preset " + p.name;
    return art;
}

nlohmann::ordered_json balance_report_to_json(const BalanceReport& r) {
    nlohmann::ordered_json j;
    j["batches"] = r.batches;
    j["steps"] = r.steps;
    j["samples"] = r.samples;
    j["ave_bs"] = r.ave_bs;
    j["max_seq_vision"] = r.max_seq_vision;
    j["max_seq_text"] = r.max_seq_text;
    j["pad_ratio"] = r.pad_ratio;
    j["vision_dist_ratio"] = r.vision_dist_ratio;
    j["text_dist_ratio"] = r.text_dist_ratio;
    return j;
}

nlohmann::ordered_json run_report_to_json(const RunReport& r) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "run_report";
    j["preset"] = r.preset;
    j["pp"] = r.pp;
    j["dp"] = r.dp;
    j["tp"] = r.tp;
    j["samples"] = r.samples;
    j["oversize_samples"] = r.oversize_samples;
    j["thresholds"] = {{"q_vision", r.thresholds.q_vision},
                       {"q_text", r.thresholds.q_text},
                       {"q_vision_min", r.thresholds.q_vision_min},
                       {"q_text_min", r.thresholds.q_text_min}};
    auto bal = nlohmann::ordered_json::array();
    for (const auto& [name, b] : r.balance) {
        auto row = balance_report_to_json(b);
        row["strategy"] = name;
        bal.push_back(std::move(row));
    }
    j["balance"] = std::move(bal);
    auto parts = nlohmann::ordered_json::array();
    for (const auto& m : r.partitions) {
        nlohmann::ordered_json row;
        row["method"] = m.method;
        row["cuts"] = m.partition.cuts;
        row["stages_layer_num"] = m.stages_layer_num;
        row["var_param"] = m.var_param;
        row["var_num_layer"] = m.var_num_layer;
        row["var_fwd_time"] = m.var_fwd_time;
        row["sum_comm_mb"] = m.sum_comm_mb;
        row["delta_sum_comm_mb"] = m.delta_sum_comm_mb;
        row["feasible"] = m.feasible;
        row["simulated_time"] = m.simulated_time;
        parts.push_back(std::move(row));
    }
    j["partitions"] = std::move(parts);
    auto mem = nlohmann::ordered_json::array();
    for (const auto& [name, stages] : r.memory) {
        nlohmann::ordered_json row;
        row["plan"] = name;
        auto peak = nlohmann::ordered_json::array();
        auto rem = nlohmann::ordered_json::array();
        for (const auto& s : stages) {
            peak.push_back(s.peak_mem / 1e9);
            rem.push_back(s.remaining_mem / 1e9);
        }
        row["peak_mem_gb"] = std::move(peak);
        row["remaining_mem_gb"] = std::move(rem);
        mem.push_back(std::move(row));
    }
    j["memory"] = std::move(mem);
    auto lad = nlohmann::ordered_json::array();
    for (const auto& rung : r.ladder) {
        nlohmann::ordered_json row;
        row["name"] = rung.name;
        row["cuts"] = rung.partition.cuts;
        row["recompute_cancelled_per_stage"] = rung.recompute_cancelled_per_stage;
        row["epoch_time"] = rung.epoch.total_time;
        row["steps"] = rung.epoch.steps;
        row["mean_step_time"] = rung.epoch.mean_step_time;
        row["mean_bubble_ratio"] = rung.epoch.mean_bubble_ratio;
        lad.push_back(std::move(row));
    }
    j["ladder"] = std::move(lad);
    j["speedup"] = r.speedup;
    return j;
}

std::string balance_csv(const std::vector<std::pair<std::string, BalanceReport>>& rows) {
    std::ostringstream os;
    os << "strategy,batches,ave_bs,max_seq_vision,max_seq_text,pad_ratio,vision_dist_ratio,text_dist_ratio\n";
    for (const auto& [name, r] : rows) {
        os << name << ',' << r.batches << ',' << fixed4(r.ave_bs) << ',' << r.max_seq_vision << ','
           << r.max_seq_text << ',' << fixed4(r.pad_ratio) << ',' << fixed4(r.vision_dist_ratio) << ','
           << fixed4(r.text_dist_ratio) << '\n';
    }
    return os.str();
}

std::string partition_csv(const std::vector<PartitionMetrics>& rows) {
    std::ostringstream os;
    os << "method,stages_layer_num,var_param,var_num_layer,var_fwd_time,sum_comm_mb,delta_sum_comm_mb,"
          "simulated_time\n";
    for (const auto& m : rows) {
        os << m.method << ',';
        for (std::size_t i = 0; i < m.stages_layer_num.size(); ++i) {
            os << (i ? "/" : "") << m.stages_layer_num[i];
        }
        os << ',' << fixed4(m.var_param) << ',' << fixed4(m.var_num_layer) << ',' << fixed4(m.var_fwd_time)
           << ',' << fixed4(m.sum_comm_mb) << ',' << fixed4(m.delta_sum_comm_mb) << ','
           << (m.feasible ? fixed4(m.simulated_time) : std::string("infeasible")) << '\n';
    }
    return os.str();
}

std::string ladder_csv(const std::vector<LadderRung>& rows) {
    std::ostringstream os;
    os << "rung,epoch_time,steps,mean_step_time,mean_bubble_ratio,speedup_vs_naive\n";
    const double naive = rows.empty() ? 0.0 : rows.front().epoch.total_time;
    for (const auto& r : rows) {
        os << r.name << ',' << fixed4(r.epoch.total_time) << ',' << r.epoch.steps << ','
           << fixed4(r.epoch.mean_step_time) << ',' << fixed4(r.epoch.mean_bubble_ratio) << ','
           << fixed4(r.epoch.total_time > 0.0 ? naive / r.epoch.total_time : 1.0) << '\n';
    }
    return os.str();
}

} // namespace vlbal
