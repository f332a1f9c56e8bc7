// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlbal/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vlbal/batcher.hpp"
#include "vlbal/costmodel.hpp"
#include "vlbal/error.hpp"
#include "vlbal/ingest.hpp"
#include "vlbal/partition.hpp"
#include "vlbal/pipesim.hpp"
#include "vlbal/presets.hpp"
#include "vlbal/recompute.hpp"
#include "vlbal/report.hpp"
#include "vlbal/rng.hpp"

namespace vlbal {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

double parse_byte_size(std::string_view text) {
    std::string s(text);
    if (s.empty()) throw Error(ErrorCode::InvalidInput, "empty byte size");
    double mult = 1.0;
    const char last = s.back();
    switch (last) {
    case 'K': case 'k': mult = 1e3; break;
    case 'M': case 'm': mult = 1e6; break;
    case 'G': case 'g': mult = 1e9; break;
    case 'T': case 't': mult = 1e12; break;
    default: break;
    }
    if (mult != 1.0) s.pop_back();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || !std::isfinite(v) || v <= 0.0) {
        throw Error(ErrorCode::InvalidInput, "invalid byte size '" + std::string(text) + "'");
    }
    return v * mult;
}

namespace {

struct DataSource {
    std::string dataset;
    std::string synthetic;
    std::size_t samples = 20000;

    void add(CLI::App* app) {
        app->add_option("--dataset", dataset, "JSONL dataset (id, vision_units, text_tokens)");
        app->add_option("--synthetic", synthetic, "Generate a synthetic corpus from a named distribution");
        app->add_option("--samples", samples, "Sample count for --synthetic");
    }

    Dataset load(std::uint64_t seed, const std::string& fallback_preset) const {
        if (!dataset.empty() && !synthetic.empty()) {
            throw Error(ErrorCode::InvalidInput, "--dataset and --synthetic are mutually exclusive");
        }
        if (!dataset.empty()) return load_dataset(dataset);
        const std::string name = synthetic.empty() ? fallback_preset : synthetic;
        if (name.empty()) throw Error(ErrorCode::InvalidInput, "one of --dataset or --synthetic is required");
        return generate_dataset(synth_preset(name, samples, seed));
    }
};

std::string join_ints(const std::vector<int>& v, char sep = '/') {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += std::to_string(v[i]);
    }
    return out;
}

void write_batches(std::ostream& out, const Dataset& dataset, const BatchList& batches) {
    std::size_t n = 0;
    for (const Group& g : batches.batches) {
        ojson j;
        j["group"] = n++;
        auto ids = ojson::array();
        for (std::size_t m : g.members) ids.push_back(dataset[m].id);
        j["ids"] = std::move(ids);
        j["vision_units"] = g.total_vision;
        j["text_tokens"] = g.total_text;
        out << j.dump() << '\n';
    }
}

bool has_suffix(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void print_balance(std::ostream& out, const std::string& name, const BalanceReport& r) {
    out << "strategy " << name << '\n'
        << "  batches            " << r.batches << '\n'
        << "  steps              " << r.steps << '\n'
        << "  ave_bs             " << fixed4(r.ave_bs) << '\n'
        << "  max_seq_vision     " << r.max_seq_vision << '\n'
        << "  max_seq_text       " << r.max_seq_text << '\n'
        << "  pad_ratio          " << fixed4(r.pad_ratio) << '\n'
        << "  vision_dist_ratio  " << fixed4(r.vision_dist_ratio) << '\n'
        << "  text_dist_ratio    " << fixed4(r.text_dist_ratio) << '\n';
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string preset = "mixed-12";
    std::size_t samples = 1000;
    std::uint64_t seed = 42;
    std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    const Dataset ds = generate_dataset(synth_preset(a.preset, a.samples, a.seed));
    if (a.out.empty()) {
        write_dataset(out, ds);
    } else {
        save_dataset(a.out, ds);
        out << "wrote " << ds.size() << " samples to " << a.out << '\n';
    }
    return 0;
}

struct BalanceArgs {
    DataSource source;
    std::int64_t q_text = 4096;
    std::optional<std::int64_t> q_vision;
    std::optional<std::int64_t> q_vision_min;
    std::optional<std::int64_t> q_text_min;
    bool derive = false;
    int iters = 10;
    std::uint64_t seed = 42;
    std::string strategy = "isf";
    int batch_size = 4;
    int dp = 4;
    std::int64_t tokens_per_unit = 256;
    bool include_fallback = false;
    std::string out;
    std::string report;
};

int cmd_data_balance(const BalanceArgs& a, std::ostream& out) {
    const Dataset ds = a.source.load(a.seed, "");
    const std::int64_t tpu = a.tokens_per_unit;
    BatchList batches;
    std::optional<PackedBatchPlan> plan;
    if (a.strategy == "isf") {
        BalanceParams params;
        if (a.q_vision && a.derive) {
            throw Error(ErrorCode::InvalidInput, "--q-vision and --derive are mutually exclusive");
        }
        if (a.q_vision) {
            params.q_vision = *a.q_vision;
            params.q_text = a.q_text;
            params.q_vision_min = *a.q_vision;
            params.q_text_min = a.q_text - 128;
        } else {
            params = derive_thresholds(ds, a.q_text);
        }
        if (a.q_vision_min) params.q_vision_min = *a.q_vision_min;
        if (a.q_text_min) params.q_text_min = *a.q_text_min;
        params.max_iters = a.iters;
        params.seed = a.seed;
        IsfOptions opts;
        opts.dp_ranks = a.dp;
        opts.tokens_per_vision_unit = tpu;
        plan = isf_run(ds, params, opts);
        batches = as_batches(*plan, a.include_fallback);
        out << "thresholds q_vision=" << params.q_vision << " q_text=" << params.q_text
            << " q_vision_min=" << params.q_vision_min << " q_text_min=" << params.q_text_min << '\n';
        out << "iteration,accepted_groups,newly_accepted,remaining_samples,vision_dist_ratio,text_dist_ratio\n";
        for (const auto& m : plan->metrics) {
            out << m.iteration << ',' << m.accepted_groups << ',' << m.newly_accepted << ','
                << m.remaining_samples << ',' << (m.vision_dist_ratio ? fixed4(*m.vision_dist_ratio) : "-")
                << ',' << (m.text_dist_ratio ? fixed4(*m.text_dist_ratio) : "-") << '\n';
        }
        out << "accepted " << plan->accepted_groups.size() << " groups, " << plan->fallback_groups.size()
            << " fallback groups, " << plan->leftovers.size() << " leftover samples, " << plan->oversize.size()
            << " oversize samples\n";
    } else if (a.strategy == "random") {
        batches = baseline_random(ds, a.batch_size, a.dp, a.seed);
    } else if (a.strategy == "sorted") {
        batches = baseline_sorted(ds, a.batch_size, a.dp, a.seed);
    } else if (a.strategy == "device-group") {
        batches = baseline_device_group(ds, a.batch_size, a.dp, a.seed);
    } else {
        throw Error(ErrorCode::InvalidInput, "unknown strategy '" + a.strategy + "'");
    }
    const BalanceReport rep = evaluate_plan(ds, batches, a.dp, tpu);
    print_balance(out, a.strategy, rep);

    if (!a.out.empty()) {
        std::ostringstream os;
        if (plan && a.strategy == "isf") {
            write_groups(os, ds, *plan);
        } else {
            write_batches(os, ds, batches);
        }
        write_text_file(a.out, os.str());
    }
    if (!a.report.empty()) {
        if (has_suffix(a.report, ".csv")) {
            write_text_file(a.report, balance_csv({{a.strategy, rep}}));
        } else {
            ojson j;
            j["schema_version"] = kSchemaVersion;
            j["kind"] = "balance_report";
            j["strategy"] = a.strategy;
            j["report"] = balance_report_to_json(rep);
            if (plan) {
                j["q_vision"] = plan->params.q_vision;
                j["q_text"] = plan->params.q_text;
                j["iterations_run"] = plan->iterations_run;
                auto it = ojson::array();
                for (const auto& m : plan->metrics) {
                    ojson row;
                    row["iteration"] = m.iteration;
                    row["accepted_groups"] = m.accepted_groups;
                    row["remaining_samples"] = m.remaining_samples;
                    row["vision_dist_ratio"] = m.vision_dist_ratio ? ojson(*m.vision_dist_ratio) : ojson(nullptr);
                    row["text_dist_ratio"] = m.text_dist_ratio ? ojson(*m.text_dist_ratio) : ojson(nullptr);
                    it.push_back(std::move(row));
                }
                j["iterations"] = std::move(it);
            }
            write_text_file(a.report, dump_json(j));
        }
    }
    return 0;
}

struct ProfileArgs {
    std::string preset = "internvl-6b-20b";
    std::optional<int> tp;
    std::optional<int> vision_seq;
    std::optional<int> text_seq;
    std::string out;
};

int cmd_profile(const ProfileArgs& a, std::ostream& out) {
    ScenarioPreset p = scenario_preset(a.preset);
    if (a.tp) p.arch.tp_degree = *a.tp;
    if (a.vision_seq) p.arch.vision.seq = *a.vision_seq;
    if (a.text_seq) p.arch.language.seq = *a.text_seq;
    const ModelSpec spec = analytic_profile(p.arch);
    if (a.out.empty()) {
        out << dump_json(model_spec_to_json(spec));
    } else {
        save_model_spec(a.out, spec);
        out << "wrote " << spec.num_layers() << " layers to " << a.out << '\n';
    }
    return 0;
}

struct SimFlags {
    std::optional<int> micro_batches;
    std::optional<double> bandwidth;
    std::optional<double> latency;
    std::string device_mem;
    bool overlap = false;

    void add(CLI::App* app) {
        app->add_option("--micro-batches", micro_batches, "Micro-batches per iteration");
        app->add_option("--bandwidth", bandwidth, "P2P bandwidth in bytes/s");
        app->add_option("--latency", latency, "P2P latency in seconds");
        app->add_option("--device-mem", device_mem, "Per-device memory (e.g. 80G)");
        app->add_flag("--overlap-comm", overlap, "Overlap P2P transfers with compute");
    }

    void apply(SimConfig& c) const {
        if (micro_batches) c.micro_batches = *micro_batches;
        if (bandwidth) c.p2p_bandwidth = *bandwidth;
        if (latency) c.p2p_latency = *latency;
        if (!device_mem.empty()) c.device_memory = parse_byte_size(device_mem);
        if (overlap) c.overlap_comm = true;
        c.validate();
    }
};

struct SearchArgs {
    std::string profile;
    int pp = 4;
    int radius = 1;
    int top_k = 4;
    unsigned threads = 0;
    SimFlags sim;
    std::string out;
};

int cmd_partition_search(const SearchArgs& a, std::ostream& out) {
    const ModelSpec spec = load_model_spec(a.profile);
    SimConfig sim;
    a.sim.apply(sim);
    SearchOptions so;
    so.n_stages = a.pp;
    so.radius = a.radius;
    so.top_k = a.top_k;
    so.threads = a.threads;
    const SearchResult r = select_partition(spec, sim, so);
    out << "anchor " << join_ints(r.anchor.stage_sizes(spec.num_layers())) << '\n';
    out << r.raw_candidates << " candidates before validity filtering, " << r.ranked.size() << " valid\n";
    out << "rank,stages_layer_num,var_fwd,sum_comm_mb,score,simulated_time\n";
    for (std::size_t i = 0; i < r.ranked.size(); ++i) {
        const auto& c = r.ranked[i];
        out << i + 1 << ',' << join_ints(c.partition.stage_sizes(spec.num_layers())) << ','
            << fixed4(c.var_fwd) << ',' << fixed4(c.sum_comm / 1e6) << ',' << fixed4(c.combined_score) << ',';
        if (i < r.evaluations.size()) {
            const auto& e = r.evaluations[i];
            out << (e.feasible ? fixed4(e.simulated_time) : std::string("infeasible"));
        } else {
            out << '-';
        }
        out << '\n';
    }
    out << "best " << join_ints(r.best.stage_sizes(spec.num_layers())) << " time " << fixed4(r.best_time) << '\n';
    if (!a.out.empty()) {
        PlanDocument doc;
        doc.model = spec;
        doc.partition = r.best;
        doc.recompute = RecomputePlan::all_recompute(spec.num_layers());
        doc.sim = sim;
        save_plan(a.out, doc);
    }
    return 0;
}

struct RecomputeArgs {
    std::string plan;
    std::string device_mem;
    int sweep = 0;
    std::string out;
};

int cmd_recompute(const RecomputeArgs& a, std::ostream& out) {
    PlanDocument doc = load_plan(a.plan);
    if (!a.device_mem.empty()) doc.sim.device_memory = parse_byte_size(a.device_mem);
    doc.sim.validate();
    const RecomputeResult r = optimize_recompute(doc.model, doc.partition, doc.sim);
    const auto mem = memory_report(doc.model, doc.partition, r.plan, doc.sim);
    out << "stage,layers,recompute_cancelled,peak_mem_gb,remaining_mem_gb\n";
    const auto sizes = doc.partition.stage_sizes(doc.model.num_layers());
    for (std::size_t s = 0; s < mem.size(); ++s) {
        out << s + 1 << ',' << sizes[s] << ',' << r.per_stage_cancelled[s] << ',' << fixed4(mem[s].peak_mem / 1e9)
            << ',' << fixed4(mem[s].remaining_mem / 1e9) << '\n';
    }
    out << "iteration_time " << fixed4(r.sim.iteration_time) << '\n';
    if (a.sweep > 0) {
        // Budgets from the all-recompute peak up to the all-stored peak.
        const int L = doc.model.num_layers();
        const auto lo = peak_memory(doc.model, doc.partition, RecomputePlan::all_recompute(L), doc.sim);
        const auto hi = peak_memory(doc.model, doc.partition, RecomputePlan::all_stored(L), doc.sim);
        const double b0 = *std::max_element(lo.begin(), lo.end());
        const double b1 = *std::max_element(hi.begin(), hi.end());
        out << "budget_gb,iteration_time,cancelled\n";
        for (int k = 0; k < a.sweep; ++k) {
            SimConfig c = doc.sim;
            c.device_memory = a.sweep == 1 ? b1 : b0 + (b1 - b0) * k / (a.sweep - 1);
            const RecomputeResult rk = optimize_recompute(doc.model, doc.partition, c);
            out << fixed4(c.device_memory / 1e9) << ',' << fixed4(rk.sim.iteration_time) << ','
                << join_ints(rk.per_stage_cancelled) << '\n';
        }
    }
    if (!a.out.empty()) {
        doc.recompute = r.plan;
        save_plan(a.out, doc);
    }
    return 0;
}

struct SimulateArgs {
    std::string plan;
    SimFlags sim;
    std::string gantt;
    std::string timeline;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    PlanDocument doc = load_plan(a.plan);
    a.sim.apply(doc.sim);
    const SimResult r = simulate(doc.model, doc.partition, doc.recompute, doc.sim);
    out << "iteration_time " << fixed4(r.iteration_time) << '\n';
    out << "bubble_ratio " << fixed4(r.bubble_ratio) << '\n';
    out << "stage,busy,peak_mem_gb\n";
    for (std::size_t s = 0; s < r.per_stage_busy.size(); ++s) {
        out << s + 1 << ',' << fixed4(r.per_stage_busy[s]) << ',' << fixed4(r.per_stage_peak_mem[s] / 1e9) << '\n';
    }
    if (!a.gantt.empty()) write_text_file(a.gantt, export_timeline(r, TimelineFormat::Svg));
    if (!a.timeline.empty()) write_text_file(a.timeline, export_timeline(r, TimelineFormat::Json));
    if (!a.out.empty()) write_text_file(a.out, dump_json(sim_result_to_json(r)));
    return 0;
}

struct PlanArgs {
    DataSource source;
    std::string config;
    std::string preset;
    std::optional<int> pp, dp, tp, micro_batches, radius, top_k, iters, batch_size;
    std::optional<std::int64_t> q_text;
    std::string device_mem;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

template <typename T>
void from_config(const nlohmann::json& cfg, const char* key, T& target) {
    if (cfg.contains(key)) {
        try {
            target = cfg.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw Error(ErrorCode::SchemaError, std::string("config field '") + key + "' has the wrong type");
        }
    }
}

int cmd_plan(const PlanArgs& a, std::ostream& out) {
    // Precedence: flags, then the config file, then the preset.
    nlohmann::json cfg = nlohmann::json::object();
    if (!a.config.empty()) {
        cfg = read_json_file(a.config);
        if (!cfg.is_object()) throw Error(ErrorCode::SchemaError, "config must be a JSON object");
    }
    std::string preset_name = "internvl-6b-20b";
    from_config(cfg, "arch_preset", preset_name);
    if (!a.preset.empty()) preset_name = a.preset;

    PlanFullOptions opts;
    opts.preset = scenario_preset(preset_name);
    ScenarioPreset& p = opts.preset;
    opts.seed = default_seed();
    std::string device_mem;
    std::string synthetic;
    from_config(cfg, "pp", p.pp);
    from_config(cfg, "dp", p.dp);
    from_config(cfg, "tp", p.tp);
    from_config(cfg, "micro_batches", p.sim.micro_batches);
    from_config(cfg, "p2p_bandwidth", p.sim.p2p_bandwidth);
    from_config(cfg, "p2p_latency", p.sim.p2p_latency);
    from_config(cfg, "device_mem", device_mem);
    from_config(cfg, "q_text", p.q_text);
    from_config(cfg, "naive_batch_size", p.naive_batch_size);
    from_config(cfg, "radius", opts.radius);
    from_config(cfg, "top_k", opts.top_k);
    from_config(cfg, "iters", opts.isf_iters);
    from_config(cfg, "seed", opts.seed);
    if (a.pp) p.pp = *a.pp;
    if (a.dp) p.dp = *a.dp;
    if (a.tp) p.tp = *a.tp;
    if (a.micro_batches) p.sim.micro_batches = *a.micro_batches;
    if (!a.device_mem.empty()) device_mem = a.device_mem;
    if (!device_mem.empty()) p.sim.device_memory = parse_byte_size(device_mem);
    if (a.q_text) p.q_text = *a.q_text;
    if (a.batch_size) p.naive_batch_size = *a.batch_size;
    if (a.radius) opts.radius = *a.radius;
    if (a.top_k) opts.top_k = *a.top_k;
    if (a.iters) opts.isf_iters = *a.iters;
    if (a.seed) opts.seed = *a.seed;
    p.sim.validate();

    const Dataset ds = a.source.load(opts.seed, p.dataset_preset);
    const PlanArtifacts art = plan_full(ds, opts);
    const RunReport& rep = art.report;

    out << "preset " << rep.preset << " tp=" << rep.tp << " pp=" << rep.pp << " dp=" << rep.dp << " samples "
        << rep.samples << '\n';
    out << "thresholds q_vision=" << rep.thresholds.q_vision << " q_text=" << rep.thresholds.q_text << '\n';
    out << '\n' << balance_csv(rep.balance) << '\n' << partition_csv(rep.partitions) << '\n';
    out << "plan,stage,peak_mem_gb,remaining_mem_gb\n";
    for (const auto& [name, stages] : rep.memory) {
        for (std::size_t s = 0; s < stages.size(); ++s) {
            out << name << ',' << s + 1 << ',' << fixed4(stages[s].peak_mem / 1e9) << ','
                << fixed4(stages[s].remaining_mem / 1e9) << '\n';
        }
    }
    out << '\n' << ladder_csv(rep.ladder) << '\n';
    out << "speedup " << fixed4(rep.speedup) << '\n';

    if (!a.out_dir.empty()) {
        std::error_code ec;
        fs::create_directories(a.out_dir, ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create '" + a.out_dir + "': " + ec.message());
        const fs::path dir(a.out_dir);
        write_text_file(dir / "report.json", dump_json(run_report_to_json(rep)));
        write_text_file(dir / "balance.csv", balance_csv(rep.balance));
        write_text_file(dir / "partition.csv", partition_csv(rep.partitions));
        write_text_file(dir / "ladder.csv", ladder_csv(rep.ladder));
        save_plan(dir / "plan.json", art.final_plan);
        std::ostringstream groups;
        write_groups(groups, ds, art.isf);
        write_text_file(dir / "groups.jsonl", groups.str());
    }
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Balanced planning for vision-language model training"};
    app.name("vlbal");
    app.require_subcommand(1);
    app.set_version_flag("--version", "vlbal 1.0.0");

    GenerateArgs gen;
    gen.seed = default_seed();
    auto* c_gen = app.add_subcommand("generate-dataset", "Write a synthetic JSONL dataset");
    c_gen->add_option("--preset", gen.preset, "Distribution name");
    c_gen->add_option("--samples", gen.samples, "Number of samples");
    c_gen->add_option("--seed", gen.seed, "RNG seed");
    c_gen->add_option("--out", gen.out, "Output path (stdout when omitted)");

    BalanceArgs bal;
    bal.seed = default_seed();
    auto* c_bal = app.add_subcommand("data-balance", "Pack samples into balanced groups");
    bal.source.add(c_bal);
    c_bal->add_option("--q-text", bal.q_text, "Text token limit per group");
    c_bal->add_option("--q-vision", bal.q_vision, "Vision unit limit per group");
    c_bal->add_flag("--derive", bal.derive, "Derive q_vision from corpus statistics (default)");
    c_bal->add_option("--q-vision-min", bal.q_vision_min, "Vision acceptance threshold");
    c_bal->add_option("--q-text-min", bal.q_text_min, "Text acceptance threshold");
    c_bal->add_option("--iters", bal.iters, "Sampling/filtering iterations");
    c_bal->add_option("--seed", bal.seed, "RNG seed");
    c_bal->add_option("--strategy", bal.strategy, "isf, random, sorted or device-group");
    c_bal->add_option("--batch-size", bal.batch_size, "Samples per batch for baseline strategies");
    c_bal->add_option("--dp", bal.dp, "Data-parallel ranks");
    c_bal->add_option("--tokens-per-unit", bal.tokens_per_unit, "Vision tokens per unit for load metrics");
    c_bal->add_flag("--include-fallback", bal.include_fallback, "Evaluate fallback groups too");
    c_bal->add_option("--out", bal.out, "Groups JSONL output");
    c_bal->add_option("--report", bal.report, "Report output (.json or .csv)");

    ProfileArgs prof;
    auto* c_prof = app.add_subcommand("profile", "Write an analytic layer profile for an architecture preset");
    c_prof->add_option("--arch-preset", prof.preset, "Architecture preset");
    c_prof->add_option("--tp", prof.tp, "Tensor-parallel degree");
    c_prof->add_option("--vision-seq", prof.vision_seq, "Vision tokens per micro-batch");
    c_prof->add_option("--text-seq", prof.text_seq, "Text tokens per micro-batch");
    c_prof->add_option("--out", prof.out, "Output path (stdout when omitted)");

    SearchArgs search;
    auto* c_search = app.add_subcommand("partition-search", "Search pipeline stage boundaries");
    c_search->add_option("--profile", search.profile, "Model profile JSON")->required();
    c_search->add_option("--pp", search.pp, "Pipeline stages");
    c_search->add_option("--radius", search.radius, "Jitter radius around the anchor");
    c_search->add_option("--top-k", search.top_k, "Candidates to simulate");
    c_search->add_option("--threads", search.threads, "Simulation threads (0 = all cores)");
    search.sim.add(c_search);
    c_search->add_option("--out", search.out, "Plan JSON output");

    RecomputeArgs rc;
    auto* c_rc = app.add_subcommand("recompute", "Choose layers whose re-computation is cancelled");
    c_rc->add_option("--plan", rc.plan, "Plan JSON")->required();
    c_rc->add_option("--device-mem", rc.device_mem, "Per-device memory (e.g. 80G)");
    c_rc->add_option("--sweep", rc.sweep, "Also sweep this many budgets");
    c_rc->add_option("--out", rc.out, "Updated plan JSON output");

    SimulateArgs simargs;
    auto* c_sim = app.add_subcommand("simulate", "Simulate one 1F1B iteration of a plan");
    c_sim->add_option("--plan", simargs.plan, "Plan JSON")->required();
    simargs.sim.add(c_sim);
    c_sim->add_option("--gantt", simargs.gantt, "SVG Gantt output");
    c_sim->add_option("--timeline", simargs.timeline, "Timeline JSON output");
    c_sim->add_option("--out", simargs.out, "Simulation result JSON output");

    PlanArgs plan;
    auto* c_plan = app.add_subcommand("plan", "End-to-end plan and ablation report");
    plan.source.add(c_plan);
    c_plan->add_option("--config", plan.config, "JSON config (flags take precedence)");
    c_plan->add_option("--arch-preset", plan.preset, "Architecture preset");
    c_plan->add_option("--pp", plan.pp, "Pipeline stages");
    c_plan->add_option("--dp", plan.dp, "Data-parallel ranks");
    c_plan->add_option("--tp", plan.tp, "Tensor-parallel degree");
    c_plan->add_option("--micro-batches", plan.micro_batches, "Micro-batches per step and rank");
    c_plan->add_option("--device-mem", plan.device_mem, "Per-device memory (e.g. 80G)");
    c_plan->add_option("--q-text", plan.q_text, "Text token limit per group");
    c_plan->add_option("--batch-size", plan.batch_size, "Naive baseline samples per batch");
    c_plan->add_option("--radius", plan.radius, "Jitter radius");
    c_plan->add_option("--top-k", plan.top_k, "Candidates to simulate");
    c_plan->add_option("--iters", plan.iters, "ISF iterations");
    c_plan->add_option("--seed", plan.seed, "RNG seed");
    c_plan->add_option("--out-dir", plan.out_dir, "Directory for reports and the final plan");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error[" << error_code_name(ErrorCode::InvalidInput) << "]: " << e.what() << '\n';
        return 2;
    }

    try {
        if (c_gen->parsed()) return cmd_generate(gen, out);
        if (c_bal->parsed()) return cmd_data_balance(bal, out);
        if (c_prof->parsed()) return cmd_profile(prof, out);
        if (c_search->parsed()) return cmd_partition_search(search, out);
        if (c_rc->parsed()) return cmd_recompute(rc, out);
        if (c_sim->parsed()) return cmd_simulate(simargs, out);
        if (c_plan->parsed()) return cmd_plan(plan, out);
    } catch (const Error& e) {
        err << "error[" << error_code_name(e.code()) << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error[" << error_code_name(ErrorCode::InvalidInput) << "]: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace vlbal
