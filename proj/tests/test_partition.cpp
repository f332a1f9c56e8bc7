// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "vlbal/error.hpp"
#include "vlbal/partition.hpp"
#include "vlbal/presets.hpp"
#include "vlbal/rng.hpp"

using namespace vlbal;

namespace {

ModelSpec spec_from_times(const std::vector<double>& fwd, double activation = 0.0) {
    ModelSpec s;
    for (std::size_t i = 0; i < fwd.size(); ++i) {
        LayerProfile l;
        l.index = static_cast<int>(i) + 1;
        l.fwd_time = fwd[i];
        l.bwd_time = 2 * fwd[i];
        l.output_activation = activation;
        l.weight_mem = 1.0;
        l.act_mem_full = 2.0;
        l.act_mem_ckpt = 1.0;
        s.layers.push_back(l);
    }
    return s;
}

SimConfig zero_comm() {
    SimConfig c;
    c.p2p_latency = 0.0;
    c.micro_batches = 4;
    return c;
}

} // namespace

TEST_CASE("anchor examples") {
    const ModelSpec homo = spec_from_times(std::vector<double>(20, 1.0));
    CHECK(anchor_partition(homo, 4).cuts == std::vector<int>{6, 11, 16});
    CHECK(anchor_partition(homo, 1).cuts.empty());
    CHECK(anchor_partition(spec_from_times({1, 1, 1, 9}), 2).cuts == std::vector<int>{4});
    CHECK_THROWS_AS(anchor_partition(homo, 21), Error);
    // Later stages always keep a layer.
    const Partition p = anchor_partition(spec_from_times({100, 1, 1, 1}), 4);
    CHECK(p.cuts == std::vector<int>{2, 3, 4});
}

TEST_CASE("jitter candidates") {
    CHECK(jitter_raw_count(4, 1) == 27);
    CHECK(jitter_raw_count(1, 3) == 1);
    const Partition anchor{{6, 11, 16}};
    const auto all = jitter_candidates(anchor, 1, 20);
    CHECK(all.size() == 27);
    CHECK(std::find(all.begin(), all.end(), anchor) != all.end());
    CHECK(jitter_candidates(anchor, 0, 20) == std::vector<Partition>{anchor});

    // Anchor (2, 3) on 4 layers: count valid ones by brute force.
    const auto small = jitter_candidates(Partition{{2, 3}}, 1, 4);
    std::size_t expect = 0;
    for (int a = 1; a <= 3; ++a)
        for (int b = 2; b <= 4; ++b)
            if (Partition{{a, b}}.is_valid(4)) ++expect;
    CHECK(small.size() == expect);
    for (const auto& c : small) CHECK(c.is_valid(4));
    std::set<std::vector<int>> uniq;
    for (const auto& c : small) uniq.insert(c.cuts);
    CHECK(uniq.size() == small.size());
}

TEST_CASE("var_fwd equals a two-pass variance") {
    Rng rng(2);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> xs(1 + rng.below(9));
        for (auto& x : xs) x = rng.uniform() * 100;
        double mean = 0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double sq = 0;
        for (double x : xs) sq += (x - mean) * (x - mean);
        CHECK(var_fwd(xs) == doctest::Approx(sq).epsilon(1e-12));
    }
}

TEST_CASE("rank candidates") {
    const ModelSpec homo = spec_from_times(std::vector<double>(8, 1.0));
    const auto parts = oracle::all_partitions(8, 2);
    const auto ranked = rank_candidates(parts, homo);
    CHECK(ranked.front().partition.cuts == std::vector<int>{5});
    CHECK(ranked.front().var_fwd == 0.0);
    for (std::size_t i = 1; i < ranked.size(); ++i) {
        CHECK(ranked[i - 1].combined_score <= ranked[i].combined_score);
    }
    // A lone balanced candidate with no boundary traffic normalizes 0/0 to 0.
    const std::vector<Partition> one{Partition{{5}}};
    CHECK(rank_candidates(one, homo)[0].combined_score == 0.0);
    CHECK_THROWS_AS(rank_candidates(std::vector<Partition>{}, homo), Error);
}

TEST_CASE("equal variance ranks the post-connector cut first") {
    // Two candidates with identical stage times; one cuts after the connector.
    ModelSpec s = spec_from_times({1, 1, 1, 1, 1, 1});
    s.layers[0].kind = LayerKind::Vision;
    s.layers[1].kind = LayerKind::Vision;
    s.layers[2].kind = LayerKind::Connector;
    for (int i = 3; i < 6; ++i) s.layers[i].kind = LayerKind::Language;
    s.layers[1].output_activation = 400.0;
    s.layers[2].output_activation = 100.0;
    s.layers[0].fwd_time = 1.5;
    s.layers[3].fwd_time = 0.5;
    // Cut at 3: stages (1.5+1, 1+0.5+1+1) = (2.5, 3.5); cut at 4: (3.5, 2.5).
    const std::vector<Partition> cands{Partition{{3}}, Partition{{4}}};
    const auto ranked = rank_candidates(cands, s);
    CHECK(ranked[0].var_fwd == ranked[1].var_fwd);
    CHECK(ranked[0].partition.cuts == std::vector<int>{4});
}

TEST_CASE("select_partition on a homogeneous model picks the even split") {
    const ModelSpec homo = spec_from_times(std::vector<double>(12, 1.0));
    SearchOptions o;
    o.n_stages = 3;
    o.radius = 1;
    o.top_k = 27;
    const SearchResult r = select_partition(homo, zero_comm(), o);
    CHECK(r.best.cuts == std::vector<int>{5, 9});
    CHECK(r.raw_candidates == 9);
    CHECK(r.evaluations.size() == r.ranked.size());
}

TEST_CASE("select_partition equals brute force on small instances") {
    Rng rng(77);
    for (int t = 0; t < 60; ++t) {
        const int L = 2 + static_cast<int>(rng.below(7));
        const int n = 1 + static_cast<int>(rng.below(std::min(3, L)));
        std::vector<double> fwd(L);
        for (auto& x : fwd) x = 1.0 + rng.uniform() * 20.0;
        ModelSpec s = spec_from_times(fwd, 1e5 * (1 + rng.below(5)));
        SimConfig c = zero_comm();
        c.p2p_latency = 1e-6;
        c.p2p_bandwidth = 1e10;
        SearchOptions o;
        o.n_stages = n;
        o.radius = L;
        o.top_k = 100000;
        o.threads = 2;
        const SearchResult r = select_partition(s, c, o);
        double best = 1e300;
        for (const auto& p : oracle::all_partitions(L, n)) {
            const SimResult sr = simulate(s, p, RecomputePlan::all_recompute(L), c);
            best = std::min(best, sr.iteration_time);
        }
        CHECK(r.best_time == best);
    }
}

TEST_CASE("baseline partitions") {
    const ModelSpec homo = spec_from_times(std::vector<double>(20, 1.0));
    const BaselinePartitions b = baseline_partitions(homo, 4);
    CHECK(b.parameter_based.cuts == std::vector<int>{6, 11, 16});
    CHECK(b.layer_based.cuts == std::vector<int>{6, 11, 16});
    CHECK(b.profile_based.cuts == std::vector<int>{6, 11, 16});

    std::vector<double> fwd(93, 1.0);
    const ModelSpec s93 = spec_from_times(fwd);
    const auto sizes = baseline_partitions(s93, 4).layer_based.stage_sizes(93);
    CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
    CHECK(sizes == std::vector<int>{24, 23, 23, 23});
}

TEST_CASE("parameter-based has the largest time variance on the default preset") {
    const ModelSpec spec = analytic_profile(scenario_preset("internvl-6b-20b").arch);
    const BaselinePartitions b = baseline_partitions(spec, 4);
    auto var_of = [&](const Partition& p) {
        std::vector<double> f;
        for (const auto& st : stage_costs(spec, p).stages) f.push_back(st.fwd_time);
        return var_fwd(f);
    };
    CHECK(var_of(b.parameter_based) > var_of(b.layer_based));
    CHECK(var_of(b.parameter_based) > var_of(b.profile_based));
}

TEST_CASE("balanced_partition minimizes the bottleneck") {
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        const int L = 2 + static_cast<int>(rng.below(9));
        const int n = 1 + static_cast<int>(rng.below(std::min(4, L)));
        std::vector<double> costs(L);
        for (auto& x : costs) x = static_cast<double>(1 + rng.below(50));
        const Partition got = balanced_partition(costs, n);
        REQUIRE(got.is_valid(L));
        REQUIRE(got.num_stages() == n);
        auto bottleneck = [&](const Partition& p) {
            double worst = 0;
            for (int s = 0; s < n; ++s) {
                double sum = 0;
                for (int k = p.stage_begin(s); k < p.stage_end(s, L); ++k) sum += costs[k - 1];
                worst = std::max(worst, sum);
            }
            return worst;
        };
        double best = 1e300;
        for (const auto& p : oracle::all_partitions(L, n)) best = std::min(best, bottleneck(p));
        CHECK(bottleneck(got) == best);
    }
}

