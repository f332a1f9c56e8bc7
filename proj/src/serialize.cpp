// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>

#include "vlbal/error.hpp"
#include "vlbal/ingest.hpp"

namespace vlbal {

using ojson = nlohmann::ordered_json;

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key, const char* doc) {
    if (!j.is_object()) {
        throw Error(ErrorCode::SchemaError, std::string(doc) + ": expected a JSON object");
    }
    const auto it = j.find(key);
    if (it == j.end()) {
        throw Error(ErrorCode::SchemaError, std::string(doc) + ": missing required field '" + key + "'");
    }
    return *it;
}

template <typename T>
T get(const nlohmann::json& j, const char* key, const char* doc) {
    const nlohmann::json& v = require(j, key, doc);
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::SchemaError, std::string(doc) + ": field '" + key + "' has the wrong type");
    }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const char* doc) {
    if (!j.contains(key)) return fallback;
    return get<T>(j, key, doc);
}

void check_version(const nlohmann::json& j, const char* doc) {
    const int version = get<int>(j, "schema_version", doc);
    if (version != kSchemaVersion) {
        throw Error(ErrorCode::SchemaError, std::string(doc) + ": unsupported schema_version " +
                                                std::to_string(version) + " (expected " +
                                                std::to_string(kSchemaVersion) + ")");
    }
}

} // namespace

std::string dump_json(const ojson& j) {
    return j.dump(1) + "\n";
}

ojson model_spec_to_json(const ModelSpec& spec) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "model_spec";
    j["vision_seq_tokens"] = spec.vision_seq_tokens;
    j["language_seq_tokens"] = spec.language_seq_tokens;
    j["subsample_factor"] = spec.subsample_factor;
    j["tp_degree"] = spec.tp_degree;
    j["notes"] = spec.notes;
    auto layers = ojson::array();
    for (const LayerProfile& l : spec.layers) {
        ojson x;
        x["index"] = l.index;
        x["kind"] = std::string(layer_kind_name(l.kind));
        x["fwd_time"] = l.fwd_time;
        x["bwd_time"] = l.bwd_time;
        x["output_activation"] = l.output_activation;
        x["weight_mem"] = l.weight_mem;
        x["act_mem_full"] = l.act_mem_full;
        x["act_mem_ckpt"] = l.act_mem_ckpt;
        layers.push_back(std::move(x));
    }
    j["layers"] = std::move(layers);
    return j;
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
    constexpr const char* doc = "model spec";
    check_version(j, doc);
    ModelSpec spec;
    spec.vision_seq_tokens = get<int>(j, "vision_seq_tokens", doc);
    spec.language_seq_tokens = get<int>(j, "language_seq_tokens", doc);
    spec.subsample_factor = get<int>(j, "subsample_factor", doc);
    spec.tp_degree = get<int>(j, "tp_degree", doc);
    spec.notes = get_or<std::string>(j, "notes", "", doc);
    const nlohmann::json& layers = require(j, "layers", doc);
    if (!layers.is_array()) throw Error(ErrorCode::SchemaError, "model spec: 'layers' must be an array");
    constexpr const char* ldoc = "model spec layer";
    for (const auto& x : layers) {
        LayerProfile l;
        l.index = get<int>(x, "index", ldoc);
        l.kind = parse_layer_kind(get<std::string>(x, "kind", ldoc));
        l.fwd_time = get<double>(x, "fwd_time", ldoc);
        l.bwd_time = get_or<double>(x, "bwd_time", 2.0 * l.fwd_time, ldoc);
        l.output_activation = get<double>(x, "output_activation", ldoc);
        l.weight_mem = get<double>(x, "weight_mem", ldoc);
        l.act_mem_full = get<double>(x, "act_mem_full", ldoc);
        l.act_mem_ckpt = get<double>(x, "act_mem_ckpt", ldoc);
        spec.layers.push_back(l);
    }
    spec.validate();
    return spec;
}

ojson sim_config_to_json(const SimConfig& c) {
    ojson j;
    j["micro_batches"] = c.micro_batches;
    j["p2p_bandwidth"] = c.p2p_bandwidth;
    j["p2p_latency"] = c.p2p_latency;
    j["device_memory"] = c.device_memory;
    j["overlap_comm"] = c.overlap_comm;
    j["optimizer_multiplier"] = c.optimizer_multiplier;
    return j;
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
    constexpr const char* doc = "sim config";
    SimConfig c;
    c.micro_batches = get_or<int>(j, "micro_batches", c.micro_batches, doc);
    c.p2p_bandwidth = get_or<double>(j, "p2p_bandwidth", c.p2p_bandwidth, doc);
    c.p2p_latency = get_or<double>(j, "p2p_latency", c.p2p_latency, doc);
    c.device_memory = get_or<double>(j, "device_memory", c.device_memory, doc);
    c.overlap_comm = get_or<bool>(j, "overlap_comm", c.overlap_comm, doc);
    c.optimizer_multiplier = get_or<double>(j, "optimizer_multiplier", c.optimizer_multiplier, doc);
    c.validate();
    return c;
}

ojson plan_to_json(const PlanDocument& plan) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "plan";
    j["notes"] = plan.notes;
    j["dp_degree"] = plan.dp_degree;
    j["cuts"] = plan.partition.cuts;
    j["stages_layer_num"] = plan.partition.stage_sizes(plan.model.num_layers());
    j["recompute_cancelled_per_stage"] = plan.recompute.per_stage_cancelled(plan.partition);
    j["stored_layers"] = plan.recompute.stored_layers();
    j["sim_config"] = sim_config_to_json(plan.sim);
    j["model"] = model_spec_to_json(plan.model);
    return j;
}

PlanDocument plan_from_json(const nlohmann::json& j) {
    constexpr const char* doc = "plan";
    check_version(j, doc);
    PlanDocument plan;
    plan.model = model_spec_from_json(require(j, "model", doc));
    const int L = plan.model.num_layers();
    if (j.contains("cuts")) {
        plan.partition.cuts = get<std::vector<int>>(j, "cuts", doc);
        if (j.contains("stages_layer_num") &&
            get<std::vector<int>>(j, "stages_layer_num", doc) != plan.partition.stage_sizes(L)) {
            throw Error(ErrorCode::SchemaError, "plan: 'stages_layer_num' disagrees with 'cuts'");
        }
    } else {
        plan.partition = partition_from_sizes(get<std::vector<int>>(j, "stages_layer_num", doc));
    }
    plan.partition.validate(L);
    plan.recompute = RecomputePlan::all_recompute(L);
    for (int layer : get_or<std::vector<int>>(j, "stored_layers", {}, doc)) {
        if (layer < 1 || layer > L) {
            throw Error(ErrorCode::SchemaError, "plan: stored layer " + std::to_string(layer) + " out of range");
        }
        plan.recompute.set(layer, LayerMode::Store);
    }
    if (j.contains("sim_config")) plan.sim = sim_config_from_json(j["sim_config"]);
    plan.dp_degree = get_or<int>(j, "dp_degree", 1, doc);
    plan.notes = get_or<std::string>(j, "notes", "", doc);
    return plan;
}

ojson sim_result_to_json(const SimResult& r) {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "sim_result";
    j["iteration_time"] = r.iteration_time;
    j["bubble_ratio"] = r.bubble_ratio;
    j["per_stage_busy"] = r.per_stage_busy;
    j["per_stage_peak_mem"] = r.per_stage_peak_mem;
    auto events = ojson::array();
    for (const TimelineEvent& e : r.timeline) {
        ojson x;
        x["stage"] = e.stage;
        x["micro_batch"] = e.micro_batch;
        x["phase"] = std::string(phase_name(e.phase));
        x["start"] = e.start;
        x["end"] = e.end;
        events.push_back(std::move(x));
    }
    j["events"] = std::move(events);
    return j;
}

SimResult sim_result_from_json(const nlohmann::json& j) {
    constexpr const char* doc = "sim result";
    check_version(j, doc);
    SimResult r;
    r.iteration_time = get<double>(j, "iteration_time", doc);
    r.bubble_ratio = get<double>(j, "bubble_ratio", doc);
    r.per_stage_busy = get<std::vector<double>>(j, "per_stage_busy", doc);
    r.per_stage_peak_mem = get<std::vector<double>>(j, "per_stage_peak_mem", doc);
    constexpr const char* edoc = "timeline event";
    for (const auto& x : require(j, "events", doc)) {
        TimelineEvent e;
        e.stage = get<int>(x, "stage", edoc);
        e.micro_batch = get<int>(x, "micro_batch", edoc);
        e.phase = parse_phase(get<std::string>(x, "phase", edoc));
        e.start = get<double>(x, "start", edoc);
        e.end = get<double>(x, "end", edoc);
        r.timeline.push_back(e);
    }
    return r;
}

void write_groups(std::ostream& out, const Dataset& dataset, const PackedBatchPlan& plan) {
    std::size_t n = 0;
    auto emit = [&](const Group& g, bool below) {
        ojson j;
        j["group"] = n++;
        auto ids = ojson::array();
        for (std::size_t m : g.members) ids.push_back(dataset[m].id);
        j["ids"] = std::move(ids);
        j["vision_units"] = g.total_vision;
        j["text_tokens"] = g.total_text;
        j["below_threshold"] = below;
        out << j.dump() << '\n';
    };
    for (const Group& g : plan.accepted_groups) emit(g, false);
    for (const Group& g : plan.fallback_groups) emit(g, true);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error(ErrorCode::IoError, "short write to '" + path.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot move '" + tmp.string() + "' into place: " + ec.message());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

ModelSpec load_model_spec(const std::filesystem::path& path) {
    return model_spec_from_json(read_json_file(path));
}

void save_model_spec(const std::filesystem::path& path, const ModelSpec& spec) {
    write_text_file(path, dump_json(model_spec_to_json(spec)));
}

PlanDocument load_plan(const std::filesystem::path& path) {
    return plan_from_json(read_json_file(path));
}

void save_plan(const std::filesystem::path& path, const PlanDocument& plan) {
    write_text_file(path, dump_json(plan_to_json(plan)));
}

} // namespace vlbal
