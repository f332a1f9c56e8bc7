// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "vlbal/error.hpp"
#include "vlbal/recompute.hpp"
#include "vlbal/rng.hpp"

using namespace vlbal;

namespace {

ModelSpec toy(const std::vector<double>& fwd, const std::vector<double>& extra) {
    ModelSpec s;
    for (std::size_t i = 0; i < fwd.size(); ++i) {
        LayerProfile l;
        l.index = static_cast<int>(i) + 1;
        l.fwd_time = fwd[i];
        l.bwd_time = 2 * fwd[i];
        l.weight_mem = 100.0;
        l.act_mem_ckpt = 10.0;
        l.act_mem_full = 10.0 + extra[i];
        s.layers.push_back(l);
    }
    return s;
}

SimConfig budget(double bytes, int m = 2) {
    SimConfig c;
    c.micro_batches = m;
    c.p2p_latency = 0.0;
    c.device_memory = bytes;
    return c;
}

double all_recompute_peak(const ModelSpec& s, const Partition& p, const SimConfig& c) {
    const auto peaks = peak_memory(s, p, RecomputePlan::all_recompute(s.num_layers()), c);
    return *std::max_element(peaks.begin(), peaks.end());
}

} // namespace

TEST_CASE("unlimited memory stores everything") {
    const ModelSpec s = toy({1, 2, 3}, {5, 5, 5});
    const RecomputeResult r = optimize_recompute(s, Partition{}, budget(1e18));
    CHECK(r.plan == RecomputePlan::all_stored(3));
    CHECK(r.per_stage_cancelled == std::vector<int>{3});
    const SimResult rc = simulate(s, Partition{}, RecomputePlan::all_recompute(3), budget(1e18));
    CHECK(rc.iteration_time - r.sim.iteration_time == doctest::Approx(2 * 6e-6));
}

TEST_CASE("exact all-recompute budget cancels nothing") {
    const ModelSpec s = toy({1, 2, 3, 4}, {5, 6, 7, 8});
    const Partition p{{3}};
    const double peak = all_recompute_peak(s, p, budget(1e18));
    const RecomputeResult r = optimize_recompute(s, p, budget(peak));
    // Stage 2 may still have slack because only stage 1 binds.
    const auto rep = memory_report(s, p, r.plan, budget(peak));
    for (const auto& m : rep) CHECK(m.remaining_mem >= 0.0);
    ModelSpec one = toy({1, 2}, {5, 6});
    const double p1 = all_recompute_peak(one, Partition{}, budget(1e18));
    CHECK(optimize_recompute(one, Partition{}, budget(p1)).per_stage_cancelled == std::vector<int>{0});
}

TEST_CASE("infeasible base plan names the stage") {
    const ModelSpec s = toy({1, 2, 3, 4}, {5, 6, 7, 8});
    try {
        optimize_recompute(s, Partition{{3}}, budget(10.0));
        FAIL("expected infeasible");
    } catch (const InfeasiblePlanError& e) {
        CHECK(e.stage() == 1);
    }
}

TEST_CASE("density order with lower index first on ties") {
    // Single stage, depth 1: extra bytes per layer = extra.
    const ModelSpec s = toy({4, 4, 1}, {4, 4, 4});
    const double base = all_recompute_peak(s, Partition{}, budget(1e18, 2));
    const RecomputeResult r = optimize_recompute(s, Partition{}, budget(base + 4.0, 2));
    CHECK(r.plan.stored_layers() == std::vector<int>{1});
    // Skips a layer that does not fit and keeps going.
    const ModelSpec t = toy({10, 1}, {10, 1});
    const double tb = all_recompute_peak(t, Partition{}, budget(1e18, 1));
    const RecomputeResult rt = optimize_recompute(t, Partition{}, budget(tb + 5.0, 1));
    CHECK(rt.plan.stored_layers() == std::vector<int>{2});
}

namespace {

double exhaustive_best(const ModelSpec& s, const SimConfig& c) {
    const int L = s.num_layers();
    double best = 1e300;
    for (int mask = 0; mask < (1 << L); ++mask) {
        RecomputePlan p = RecomputePlan::all_recompute(L);
        for (int k = 0; k < L; ++k) if (mask >> k & 1) p.set(k + 1, LayerMode::Store);
        if (oracle::stage_peak(s, Partition{}, p, c, 0) > c.device_memory) continue;
        best = std::min(best, simulate(s, Partition{}, p, c).iteration_time);
    }
    return best;
}

} // namespace

TEST_CASE("three-layer sweep matches exhaustive enumeration") {
    // Equal extra bytes per layer: the density order is the value order.
    const ModelSpec s = toy({3, 5, 2}, {4, 4, 4});
    const double base = all_recompute_peak(s, Partition{}, budget(1e18));
    for (int step = 0; step <= 16; ++step) {
        const SimConfig c = budget(base + step);
        const RecomputeResult g = optimize_recompute(s, Partition{}, c);
        CHECK(g.sim.iteration_time == doctest::Approx(exhaustive_best(s, c)).epsilon(1e-12));
    }
}

TEST_CASE("three-layer sweep with unequal sizes matches exhaustive enumeration") {
    // Density order 3, 1, 2 alone packs layers 3 + 1 where 3 + 2 is worth more.
    const ModelSpec s = toy({3, 5, 2}, {4, 9, 1});
    const double base = all_recompute_peak(s, Partition{}, budget(1e18));
    for (int step = 0; step <= 30; ++step) {
        const SimConfig c = budget(base + step);
        const RecomputeResult g = optimize_recompute(s, Partition{}, c);
        const double best = exhaustive_best(s, c);
        CHECK(g.sim.iteration_time == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("feasibility, dominance and budget monotonicity on random instances") {
    Rng rng(99);
    for (int t = 0; t < 50; ++t) {
        const int L = 2 + static_cast<int>(rng.below(10));
        std::vector<double> fwd(L), extra(L);
        for (int i = 0; i < L; ++i) {
            fwd[i] = 1 + rng.uniform() * 20;
            extra[i] = rng.uniform() * 50;
        }
        const ModelSpec s = toy(fwd, extra);
        const int n = 1 + static_cast<int>(rng.below(std::min(3, L)));
        std::vector<int> sizes(n, 1);
        for (int e = L - n; e > 0; --e) ++sizes[rng.below(n)];
        const Partition p = partition_from_sizes(sizes);
        const double base = all_recompute_peak(s, p, budget(1e18, 4));
        double prev = 1e300;
        for (int k = 0; k < 10; ++k) {
            const SimConfig c = budget(base + k * 20.0, 4);
            const RecomputeResult r = optimize_recompute(s, p, c);
            for (double peak : r.sim.per_stage_peak_mem) CHECK(peak <= c.device_memory);
            const double all_rc = simulate(s, p, RecomputePlan::all_recompute(L), c).iteration_time;
            CHECK(r.sim.iteration_time <= all_rc);
            CHECK(r.sim.iteration_time <= prev);
            prev = r.sim.iteration_time;
        }
    }
}

TEST_CASE("large stages of distinct layers solve quickly") {
    Rng rng(31);
    std::vector<double> fwd(80), extra(80);
    for (int i = 0; i < 80; ++i) {
        fwd[i] = 1 + rng.uniform() * 20;
        extra[i] = 1 + rng.uniform() * 50;
    }
    const ModelSpec s = toy(fwd, extra);
    const double base = all_recompute_peak(s, Partition{}, budget(1e18, 1));
    double prev = 1e300;
    for (int k = 0; k <= 20; ++k) {
        const RecomputeResult r = optimize_recompute(s, Partition{}, budget(base + k * 100.0, 1));
        CHECK(r.sim.iteration_time <= prev);
        prev = r.sim.iteration_time;
    }
}

TEST_CASE("memory report") {
    const ModelSpec s = toy({1, 2}, {5, 6});
    const auto rep = memory_report(s, Partition{}, RecomputePlan::all_recompute(2), budget(1000.0));
    REQUIRE(rep.size() == 1);
    CHECK(rep[0].remaining_mem == doctest::Approx(1000.0 - rep[0].peak_mem));
    CHECK(memory_report(ModelSpec{}, Partition{}, RecomputePlan{}, budget(1.0)).empty());
}

TEST_CASE("recompute plan helpers") {
    RecomputePlan p = RecomputePlan::all_recompute(5);
    p.set(2, LayerMode::Store);
    p.set(5, LayerMode::Store);
    CHECK(p.stored_layers() == std::vector<int>{2, 5});
    CHECK(p.per_stage_cancelled(Partition{{3}}) == std::vector<int>{1, 1});
}
