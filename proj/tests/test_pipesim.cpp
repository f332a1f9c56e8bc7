// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <string>

#include "oracles.hpp"
#include "vlbal/error.hpp"
#include "vlbal/pipesim.hpp"
#include "vlbal/rng.hpp"

using namespace vlbal;

namespace {

ModelSpec uniform_spec(int layers, double fwd, double bwd, double activation = 0.0) {
    ModelSpec s;
    for (int i = 1; i <= layers; ++i) {
        LayerProfile l;
        l.index = i;
        l.fwd_time = fwd;
        l.bwd_time = bwd;
        l.output_activation = activation;
        l.weight_mem = 1e6;
        l.act_mem_full = 4e5;
        l.act_mem_ckpt = 1e5;
        s.layers.push_back(l);
    }
    return s;
}

SimConfig cfg(int m, double latency = 0.0) {
    SimConfig c;
    c.micro_batches = m;
    c.p2p_latency = latency;
    return c;
}

Partition even(int layers, int n) {
    std::vector<int> sizes(n, layers / n);
    return partition_from_sizes(sizes);
}

} // namespace

TEST_CASE("closed form for equal stages and zero comm") {
    for (int n : {1, 2, 3, 4}) {
        for (int m : {1, 2, 4, 8}) {
            const ModelSpec s = uniform_spec(2 * n, 5.0, 9.0);
            const SimResult r = simulate(s, even(2 * n, n), RecomputePlan::all_stored(2 * n), cfg(m));
            const double f = 10e-6, b = 18e-6;
            CHECK(r.iteration_time == doctest::Approx((m + n - 1) * (f + b)).epsilon(1e-9));
            if (n == 1) CHECK(r.bubble_ratio == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("bubble ratio approaches (N-1)/(M+N-1)") {
    const ModelSpec s = uniform_spec(4, 1.0, 2.0);
    const SimResult r = simulate(s, even(4, 4), RecomputePlan::all_stored(4), cfg(16));
    CHECK(r.bubble_ratio == doctest::Approx(3.0 / 19.0).epsilon(1e-9));
    CHECK(bubble_ratio(r) == r.bubble_ratio);
}

TEST_CASE("recompute lengthens backward by the forward time") {
    const ModelSpec s = uniform_spec(3, 2.0, 4.0);
    const SimResult stored = simulate(s, Partition{}, RecomputePlan::all_stored(3), cfg(2));
    const SimResult rec = simulate(s, Partition{}, RecomputePlan::all_recompute(3), cfg(2));
    CHECK(rec.iteration_time - stored.iteration_time == doctest::Approx(2 * 6e-6));
    const auto n_rec = std::count_if(rec.timeline.begin(), rec.timeline.end(),
                                     [](const TimelineEvent& e) { return e.phase == Phase::Recompute; });
    CHECK(n_rec == 2);
}

TEST_CASE("imbalanced stages raise the bubble ratio") {
    ModelSpec s = uniform_spec(4, 1.0, 2.0);
    const SimResult bal = simulate(s, even(4, 4), RecomputePlan::all_stored(4), cfg(8));
    s.layers[1].fwd_time = 2.0;
    s.layers[1].bwd_time = 4.0;
    const SimResult imb = simulate(s, even(4, 4), RecomputePlan::all_stored(4), cfg(8));
    CHECK(imb.bubble_ratio > bal.bubble_ratio);
    CHECK(imb.iteration_time > bal.iteration_time);
}

TEST_CASE("simulator matches the dependency oracle") {
    Rng rng(1234);
    for (int t = 0; t < 100; ++t) {
        const int n = 1 + static_cast<int>(rng.below(3));
        const int m = 1 + static_cast<int>(rng.below(4));
        const int L = n + static_cast<int>(rng.below(4));
        ModelSpec s = uniform_spec(L, 1.0, 2.0);
        for (auto& l : s.layers) {
            l.fwd_time = 1.0 + rng.uniform() * 50;
            l.bwd_time = l.fwd_time * (1.0 + rng.uniform() * 2);
            l.output_activation = rng.uniform() * 1e6;
        }
        std::vector<int> sizes(n, 1);
        for (int extra = L - n; extra > 0; --extra) ++sizes[rng.below(n)];
        const Partition p = partition_from_sizes(sizes);
        RecomputePlan plan = RecomputePlan::all_recompute(L);
        for (int k = 1; k <= L; ++k) if (rng.below(2)) plan.set(k, LayerMode::Store);
        SimConfig c = cfg(m, rng.uniform() * 1e-5);
        c.p2p_bandwidth = 1e9 + rng.uniform() * 1e10;
        c.overlap_comm = rng.below(2) == 1;
        const SimResult r = simulate(s, p, plan, c);
        const oracle::PipelineRun o = oracle::one_f_one_b(oracle::stage_times(s, p, plan, c), m, c.overlap_comm);
        CHECK(r.iteration_time == o.iteration_time);
        std::vector<oracle::Event> got;
        for (const auto& e : r.timeline) got.push_back({e.stage, e.micro_batch, e.phase, e.start, e.end});
        std::sort(got.begin(), got.end(), [](const oracle::Event& a, const oracle::Event& b) {
            return std::make_tuple(a.stage, a.micro_batch, static_cast<int>(a.phase), a.start) <
                   std::make_tuple(b.stage, b.micro_batch, static_cast<int>(b.phase), b.start);
        });
        CHECK(got == o.events);
    }
}

TEST_CASE("timeline invariants") {
    const ModelSpec s = uniform_spec(6, 3.0, 6.0, 5e5);
    const Partition p{{3, 5}};
    const SimResult r = simulate(s, p, RecomputePlan::all_recompute(6), cfg(4, 1e-5));
    // Compute and send events never overlap on a stage.
    for (int st = 0; st < 3; ++st) {
        std::vector<TimelineEvent> ev;
        for (const auto& e : r.timeline) if (e.stage == st && e.phase != Phase::Recv) ev.push_back(e);
        std::sort(ev.begin(), ev.end(), [](auto& a, auto& b) { return a.start < b.start; });
        for (std::size_t i = 1; i < ev.size(); ++i) CHECK(ev[i].start >= ev[i - 1].end);
    }
    // Work conservation.
    double busy = 0;
    for (double b : r.per_stage_busy) busy += b;
    CHECK(busy == doctest::Approx(4 * 6 * (3 + 6 + 3) * 1e-6));
    double last = 0;
    for (const auto& e : r.timeline) last = std::max(last, e.end);
    CHECK(r.iteration_time == last);
    // Causality for forwards.
    for (const auto& a : r.timeline) {
        if (a.phase != Phase::Fwd || a.stage == 2) continue;
        for (const auto& b : r.timeline) {
            if (b.phase == Phase::Fwd && b.stage == a.stage + 1 && b.micro_batch == a.micro_batch) {
                CHECK(b.start >= a.end);
            }
        }
    }
}

TEST_CASE("monotone in layer time and deterministic") {
    ModelSpec s = uniform_spec(6, 3.0, 6.0, 5e5);
    const Partition p{{3, 5}};
    const auto plan = RecomputePlan::all_recompute(6);
    const SimResult a = simulate(s, p, plan, cfg(4, 1e-5));
    CHECK(simulate(s, p, plan, cfg(4, 1e-5)) == a);
    s.layers[3].fwd_time += 1.0;
    CHECK(simulate(s, p, plan, cfg(4, 1e-5)).iteration_time >= a.iteration_time);
}

TEST_CASE("overlapped comm is never slower") {
    const ModelSpec s = uniform_spec(6, 3.0, 6.0, 5e6);
    const Partition p{{3, 5}};
    const auto plan = RecomputePlan::all_recompute(6);
    SimConfig c = cfg(4, 1e-5);
    const double blocking = simulate(s, p, plan, c).iteration_time;
    c.overlap_comm = true;
    CHECK(simulate(s, p, plan, c).iteration_time <= blocking);
}

TEST_CASE("memory accounting") {
    const ModelSpec s = uniform_spec(4, 1.0, 2.0);
    const Partition p{{3}};
    SimConfig c = cfg(8);
    const auto rec = peak_memory(s, p, RecomputePlan::all_recompute(4), c);
    CHECK(rec[0] == doctest::Approx(2e6 * 3 + 2 * 2e5));
    CHECK(rec[1] == doctest::Approx(2e6 * 3 + 1 * 2e5));
    CHECK(in_flight_micro_batches(0, 4, 8) == 4);
    CHECK(in_flight_micro_batches(0, 4, 2) == 2);
    CHECK(in_flight_micro_batches(3, 4, 8) == 1);
    RecomputePlan one = RecomputePlan::all_recompute(4);
    one.set(1, LayerMode::Store);
    const auto more = peak_memory(s, p, one, c);
    CHECK(more[0] > rec[0]);
    CHECK(more[1] == rec[1]);
    for (int st = 0; st < 2; ++st) CHECK(rec[st] == doctest::Approx(oracle::stage_peak(s, p, RecomputePlan::all_recompute(4), c, st)));

    c.device_memory = rec[0] - 1.0;
    try {
        simulate(s, p, RecomputePlan::all_recompute(4), c);
        FAIL("expected infeasible");
    } catch (const InfeasiblePlanError& e) {
        CHECK(e.stage() == 1);
        CHECK(e.code() == ErrorCode::InfeasiblePlan);
    }
}

TEST_CASE("micro-batch scales") {
    const ModelSpec s = uniform_spec(2, 1.0, 2.0);
    const std::vector<MicroBatchScale> scales{{1.0, 1.0}, {1.0, 2.0}};
    const SimResult r = simulate(s, Partition{}, RecomputePlan::all_stored(2), cfg(2), scales);
    CHECK(r.iteration_time == doctest::Approx((2 * 3 + 2 * 6) * 1e-6));
    const std::vector<MicroBatchScale> wrong{{1.0, 1.0}};
    CHECK_THROWS_AS(simulate(s, Partition{}, RecomputePlan::all_stored(2), cfg(2), wrong), Error);
}

TEST_CASE("config validation") {
    SimConfig c;
    c.micro_batches = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = SimConfig{};
    c.p2p_bandwidth = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    const ModelSpec s = uniform_spec(2, 1.0, 2.0);
    CHECK_THROWS_AS(simulate(s, Partition{{5}}, RecomputePlan::all_stored(2), cfg(1)), Error);
    CHECK_THROWS_AS(simulate(s, Partition{}, RecomputePlan::all_stored(3), cfg(1)), Error);
}

TEST_CASE("timeline export") {
    const ModelSpec s = uniform_spec(4, 3.0, 6.0, 5e5);
    const SimResult r = simulate(s, Partition{{3}}, RecomputePlan::all_recompute(4), cfg(3, 1e-5));
    const std::string json = export_timeline(r, "json");
    CHECK(parse_timeline_json(json) == r.timeline);
    const std::string svg = export_timeline(r, TimelineFormat::Svg);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("recompute") != std::string::npos);
    const SimResult empty;
    CHECK(parse_timeline_json(export_timeline(empty, "json")).empty());
    CHECK(export_timeline(empty, "svg").find("</svg>") != std::string::npos);
    CHECK_THROWS_AS(export_timeline(r, "png"), Error);
    CHECK(parse_phase("send") == Phase::Send);
    CHECK_THROWS_AS(parse_phase("idle"), Error);
}
