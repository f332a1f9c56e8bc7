// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlbal/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vlbal/error.hpp"

namespace vlbal {

std::string_view layer_kind_name(LayerKind kind) {
    switch (kind) {
    case LayerKind::Vision: return "vision";
    case LayerKind::Connector: return "connector";
    case LayerKind::Language: return "language";
    }
    return "language";
}

LayerKind parse_layer_kind(std::string_view name) {
    if (name == "vision") return LayerKind::Vision;
    if (name == "connector") return LayerKind::Connector;
    if (name == "language") return LayerKind::Language;
    throw Error(ErrorCode::ParseError, "unknown layer kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Partition helpers

std::vector<int> Partition::stage_sizes(int num_layers) const {
    std::vector<int> sizes;
    sizes.reserve(cuts.size() + 1);
    for (int s = 0; s < num_stages(); ++s) {
        sizes.push_back(stage_end(s, num_layers) - stage_begin(s));
    }
    return sizes;
}

int Partition::stage_of(int layer) const {
    const auto it = std::upper_bound(cuts.begin(), cuts.end(), layer);
    return static_cast<int>(it - cuts.begin());
}

bool Partition::is_valid(int num_layers) const {
    if (num_layers < 1) return false;
    int prev = 1;
    for (int c : cuts) {
        if (c <= prev || c > num_layers) return false;
        prev = c;
    }
    return true;
}

void Partition::validate(int num_layers) const {
    if (num_layers < 1) {
        throw Error(ErrorCode::InvalidPartition, "model has no layers");
    }
    int prev = 1;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const int c = cuts[i];
        if (c <= prev) {
            throw Error(ErrorCode::InvalidPartition,
                        "cut " + std::to_string(i) + " = " + std::to_string(c) +
                            " leaves an empty stage (cuts must be strictly increasing and > 1)");
        }
        if (c > num_layers) {
            throw Error(ErrorCode::InvalidPartition,
                        "cut " + std::to_string(i) + " = " + std::to_string(c) +
                            " exceeds the layer count " + std::to_string(num_layers));
        }
        prev = c;
    }
}

Partition partition_from_sizes(const std::vector<int>& sizes) {
    Partition p;
    int next = 1;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        if (sizes[i] < 1) throw Error(ErrorCode::InvalidPartition, "stage sizes must be positive");
        next += sizes[i];
        p.cuts.push_back(next);
    }
    if (!sizes.empty() && sizes.back() < 1) {
        throw Error(ErrorCode::InvalidPartition, "stage sizes must be positive");
    }
    return p;
}

// ---------------------------------------------------------------------------

void ModelSpec::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidInput, "model spec: " + what); };
    if (subsample_factor < 1) fail("subsample_factor must be >= 1");
    if (tp_degree < 1) fail("tp_degree must be >= 1");
    int connectors = 0;
    bool has_vision = false;
    bool has_language = false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerProfile& l = layers[i];
        const std::string where = "layer " + std::to_string(i + 1) + ": ";
        if (l.index != static_cast<int>(i) + 1) fail(where + "indices must be contiguous from 1");
        if (!(l.fwd_time > 0.0) || !std::isfinite(l.fwd_time)) fail(where + "fwd_time must be positive");
        if (!(l.bwd_time >= 0.0) || !std::isfinite(l.bwd_time)) fail(where + "bwd_time must be non-negative");
        if (l.output_activation < 0.0 || l.weight_mem < 0.0 || l.act_mem_ckpt < 0.0) {
            fail(where + "memory sizes must be non-negative");
        }
        if (l.act_mem_ckpt > l.act_mem_full) fail(where + "act_mem_ckpt must not exceed act_mem_full");
        if (i > 0 && static_cast<int>(l.kind) < static_cast<int>(layers[i - 1].kind)) {
            fail(where + "vision layers must precede the connector, which precedes language layers");
        }
        connectors += l.kind == LayerKind::Connector ? 1 : 0;
        has_vision = has_vision || l.kind == LayerKind::Vision;
        has_language = has_language || l.kind == LayerKind::Language;
    }
    if (connectors > 1) fail("at most one connector layer is allowed");
    if (has_vision && has_language && connectors != 1) {
        fail("a vision + language stack needs exactly one connector between the towers");
    }
}

double ModelSpec::total_fwd_time() const {
    double total = 0.0;
    for (const LayerProfile& l : layers) total += l.fwd_time;
    return total;
}

double transformer_layer_flops(double seq, double hidden) {
    return 24.0 * seq * hidden * hidden + 4.0 * seq * seq * hidden;
}

ModelSpec analytic_profile(const ArchConfig& arch) {
    auto positive = [](const TowerConfig& t) { return t.layers == 0 || (t.hidden > 0 && t.seq > 0); };
    if (arch.vision.layers < 0 || arch.language.layers < 0 || !positive(arch.vision) ||
        !positive(arch.language) || arch.subsample_factor < 1 || arch.bytes_per_elem < 1 ||
        !(arch.device_throughput > 0.0) || arch.tp_degree < 1 || arch.act_full_multiplier < 1.0) {
        throw Error(ErrorCode::InvalidInput, "analytic_profile: all dimensions must be positive");
    }
    if (arch.vision.layers + arch.language.layers == 0) {
        throw Error(ErrorCode::InvalidInput, "analytic_profile: model has no layers");
    }

    const double tp = arch.tp_degree;
    const double bytes = arch.bytes_per_elem;
    const double to_us = 1e6 / arch.device_throughput / tp;

    ModelSpec spec;
    spec.vision_seq_tokens = arch.vision.seq;
    spec.language_seq_tokens = arch.language.seq;
    spec.subsample_factor = arch.subsample_factor;
    spec.tp_degree = arch.tp_degree;
    spec.notes = arch.notes;

    auto push = [&](LayerKind kind, double flops, double params, double out_elems) {
        LayerProfile l;
        l.index = spec.num_layers() + 1;
        l.kind = kind;
        l.fwd_time = flops * to_us;
        l.bwd_time = 2.0 * l.fwd_time;
        l.output_activation = out_elems * bytes / tp;
        l.weight_mem = params * bytes / tp;
        l.act_mem_ckpt = l.output_activation;
        l.act_mem_full = arch.act_full_multiplier * l.output_activation;
        spec.layers.push_back(l);
    };

    const double sv = arch.vision.seq;
    const double hv = arch.vision.hidden;
    for (int i = 0; i < arch.vision.layers; ++i) {
        push(LayerKind::Vision, transformer_layer_flops(sv, hv), 12.0 * hv * hv, sv * hv);
    }
    const double sl = arch.language.seq;
    const double hl = arch.language.hidden;
    if (arch.vision.layers > 0 && arch.language.layers > 0) {
        // Token merge by `f`, then a two-layer MLP from f*hv to hl.
        const double f = arch.subsample_factor;
        const double tokens = sv / f;
        const double flops = 2.0 * tokens * (f * hv) * hl + 2.0 * tokens * hl * hl;
        push(LayerKind::Connector, flops, f * hv * hl + hl * hl, tokens * hl);
    }
    for (int i = 0; i < arch.language.layers; ++i) {
        push(LayerKind::Language, transformer_layer_flops(sl, hl), 12.0 * hl * hl, sl * hl);
    }
    return spec;
}

StageCosts stage_costs(const ModelSpec& spec, const Partition& partition) {
    const int L = spec.num_layers();
    partition.validate(L);
    StageCosts out;
    const int n = partition.num_stages();
    out.stages.reserve(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        StageCost c;
        c.first_layer = partition.stage_begin(s);
        c.last_layer = partition.stage_end(s, L) - 1;
        for (int k = c.first_layer; k <= c.last_layer; ++k) {
            const LayerProfile& l = spec.layer(k);
            c.fwd_time += l.fwd_time;
            c.bwd_time += l.bwd_time;
            c.weight_mem += l.weight_mem;
        }
        out.stages.push_back(c);
        if (s + 1 < n) out.boundary_activation.push_back(spec.layer(c.last_layer).output_activation);
    }
    return out;
}

} // namespace vlbal
