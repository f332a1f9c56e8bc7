// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "vlbal/costmodel.hpp"
#include "vlbal/error.hpp"
#include "vlbal/presets.hpp"

using namespace vlbal;

namespace {

ArchConfig small_arch() {
    ArchConfig a;
    a.vision = {4, 256, 1024};
    a.language = {6, 256, 512};
    a.subsample_factor = 4;
    a.device_throughput = 1e12;
    return a;
}

} // namespace

TEST_CASE("transformer flops formula") {
    CHECK(transformer_layer_flops(10, 2) == 24.0 * 10 * 4 + 4.0 * 100 * 2);
    const double base = transformer_layer_flops(100, 64) - 4.0 * 100 * 100 * 64;
    const double twice = transformer_layer_flops(100, 128) - 4.0 * 100 * 100 * 128;
    CHECK(twice == doctest::Approx(4.0 * base));
}

TEST_CASE("analytic profile layout and costs") {
    const ArchConfig a = small_arch();
    const ModelSpec spec = analytic_profile(a);
    REQUIRE(spec.num_layers() == 4 + 1 + 6);
    CHECK_NOTHROW(spec.validate());
    CHECK(spec.layer(5).kind == LayerKind::Connector);
    CHECK(spec.layer(1).kind == LayerKind::Vision);
    CHECK(spec.layer(11).kind == LayerKind::Language);
    const auto& v = spec.layer(1);
    CHECK(v.fwd_time == doctest::Approx(transformer_layer_flops(1024, 256) / 1e12 * 1e6));
    CHECK(v.bwd_time == 2.0 * v.fwd_time);
    CHECK(v.output_activation == 1024.0 * 256 * 2);
    CHECK(v.act_mem_ckpt == v.output_activation);
    CHECK(v.act_mem_full == 4.0 * v.output_activation);
    CHECK(v.weight_mem == 12.0 * 256 * 256 * 2);
    const auto& c = spec.layer(5);
    CHECK(c.output_activation == 256.0 * 256 * 2);
    // Ending a stage at the connector instead of one layer earlier shrinks the
    // boundary by the subsample factor (equal hidden sizes).
    CHECK(spec.layer(4).output_activation / c.output_activation == doctest::Approx(4.0));

    ArchConfig tp2 = a;
    tp2.tp_degree = 2;
    const ModelSpec half = analytic_profile(tp2);
    CHECK(half.layer(1).fwd_time == doctest::Approx(v.fwd_time / 2));
    CHECK(half.layer(1).weight_mem == doctest::Approx(v.weight_mem / 2));
}

TEST_CASE("analytic profile is monotone in size") {
    const ArchConfig a = small_arch();
    const double base = analytic_profile(a).total_fwd_time();
    ArchConfig b = a;
    b.language.layers += 1;
    CHECK(analytic_profile(b).total_fwd_time() >= base);
    b = a;
    b.vision.hidden *= 2;
    CHECK(analytic_profile(b).total_fwd_time() >= base);
    b = a;
    b.language.seq *= 2;
    CHECK(analytic_profile(b).total_fwd_time() >= base);
}

TEST_CASE("analytic profile single towers and errors") {
    ArchConfig a = small_arch();
    a.vision.layers = 0;
    const ModelSpec lang = analytic_profile(a);
    CHECK(lang.num_layers() == 6);
    CHECK_NOTHROW(lang.validate());
    a.language.layers = 0;
    CHECK_THROWS_AS(analytic_profile(a), Error);
    ArchConfig bad = small_arch();
    bad.language.hidden = 0;
    CHECK_THROWS_AS(analytic_profile(bad), Error);
}

TEST_CASE("default preset has 45 + 1 + 48 layers") {
    const ScenarioPreset p = scenario_preset("internvl-6b-20b");
    const ModelSpec spec = analytic_profile(p.arch);
    CHECK(spec.num_layers() == 94);
    CHECK(spec.vision_seq_tokens == 9216);
    CHECK(spec.language_seq_tokens == 4096);
    CHECK_THROWS_AS(scenario_preset("nope"), Error);
    for (const auto& name : scenario_preset_names()) CHECK_NOTHROW(analytic_profile(scenario_preset(name).arch));
}

TEST_CASE("model spec validation") {
    ModelSpec s = analytic_profile(small_arch());
    s.layers[2].index = 7;
    CHECK_THROWS_AS(s.validate(), Error);
    s = analytic_profile(small_arch());
    std::swap(s.layers[0].kind, s.layers[10].kind);
    CHECK_THROWS_AS(s.validate(), Error);
    s = analytic_profile(small_arch());
    s.layers[0].act_mem_ckpt = s.layers[0].act_mem_full + 1;
    CHECK_THROWS_AS(s.validate(), Error);
    s = analytic_profile(small_arch());
    s.layers[0].fwd_time = 0.0;
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("stage costs") {
    ModelSpec s;
    for (int i = 1; i <= 20; ++i) {
        LayerProfile l;
        l.index = i;
        l.fwd_time = 3.0;
        l.bwd_time = 6.0;
        l.output_activation = 100.0 * i;
        l.weight_mem = 10.0;
        s.layers.push_back(l);
    }
    const StageCosts c = stage_costs(s, Partition{{6, 11, 16}});
    REQUIRE(c.stages.size() == 4);
    for (const auto& st : c.stages) {
        CHECK(st.fwd_time == 15.0);
        CHECK(st.num_layers() == 5);
    }
    CHECK(c.boundary_activation == std::vector<double>{500.0, 1000.0, 1500.0});
    CHECK(stage_costs(s, Partition{}).boundary_activation.empty());
    CHECK_THROWS_AS(stage_costs(s, Partition{{6, 6}}), Error);

    const ModelSpec a = analytic_profile(small_arch());
    const StageCosts ac = stage_costs(a, Partition{{3, 7}});
    double sum = 0.0;
    for (const auto& st : ac.stages) sum += st.fwd_time;
    CHECK(sum == doctest::Approx(a.total_fwd_time()));
}

TEST_CASE("partition helpers") {
    const Partition p = partition_from_sizes({22, 23, 24, 24});
    CHECK(p.cuts == std::vector<int>{23, 46, 70});
    CHECK(p.stage_sizes(93) == std::vector<int>{22, 23, 24, 24});
    CHECK(p.stage_of(1) == 0);
    CHECK(p.stage_of(22) == 0);
    CHECK(p.stage_of(23) == 1);
    CHECK(p.stage_of(93) == 3);
    CHECK(p.is_valid(93));
    CHECK_FALSE(p.is_valid(69));
    CHECK_FALSE(Partition{{1}}.is_valid(3));
    CHECK_FALSE(Partition{{3, 3}}.is_valid(5));
    CHECK_THROWS_AS(Partition({{4}}).validate(3), Error);
    CHECK_THROWS_AS(partition_from_sizes({2, 0, 1}), Error);
}
