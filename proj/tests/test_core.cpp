// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <vector>

#include "oracles.hpp"
#include "vlbal/core.hpp"
#include "vlbal/error.hpp"
#include "vlbal/rng.hpp"

using namespace vlbal;

TEST_CASE("pad and dist ratio examples") {
    const std::vector<std::int64_t> a{4, 2, 2};
    CHECK(pad_ratio(a) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    const std::vector<std::int64_t> b{10, 5};
    CHECK(dist_ratio(b) == doctest::Approx(0.25).epsilon(1e-12));
    const std::vector<std::int64_t> same{7, 7, 7};
    CHECK(pad_ratio(same) == 0.0);
    const std::vector<std::int64_t> one{3};
    CHECK(dist_ratio(one) == 0.0);
    CHECK(dist_ratio(DeviceLoads{{10, 5}}) == 0.25);
}

TEST_CASE("ratios reject empty, negative and all-zero inputs") {
    CHECK_THROWS_AS(pad_ratio(std::vector<std::int64_t>{}), Error);
    CHECK_THROWS_AS(pad_ratio(std::vector<std::int64_t>{1, -1}), Error);
    CHECK_THROWS_AS(dist_ratio(std::vector<std::int64_t>{0, 0}), Error);
}

TEST_CASE("ratio properties on random inputs") {
    Rng rng(11);
    for (int t = 0; t < 2000; ++t) {
        const std::size_t n = 1 + rng.below(16);
        std::vector<std::int64_t> xs(n);
        for (auto& x : xs) x = static_cast<std::int64_t>(rng.below(5000));
        xs[rng.below(n)] += 1;
        const double r = pad_ratio(xs);
        CHECK(r >= 0.0);
        CHECK(r < 1.0);
        CHECK(r == oracle::spread_ratio(xs));
        auto perm = xs;
        rng.shuffle(std::span<std::int64_t>(perm));
        CHECK(dist_ratio(perm) == r);
        auto scaled = xs;
        for (auto& x : scaled) x *= 3;
        CHECK(dist_ratio(scaled) == doctest::Approx(r).epsilon(1e-12));
    }
}

TEST_CASE("dataset validation") {
    CHECK_NOTHROW(Dataset({{"a", 1, 10}, {"b", 0, 5}}));
    CHECK_THROWS_AS(Dataset({{"a", 1, 10}, {"a", 2, 5}}), Error);
    CHECK_THROWS_AS(Dataset({{"a", -1, 10}}), Error);
    CHECK_THROWS_AS(Dataset({{"", 1, 10}}), Error);
    const Dataset ds({{"a", 2, 10}, {"b", 3, 5}});
    CHECK(ds.total_vision_units() == 5);
    CHECK(ds.total_text_tokens() == 15);
    const Group g = make_group(ds, {1, 0});
    CHECK(g.total_vision == 5);
    CHECK(g.total_text == 15);
}

TEST_CASE("balance params validation") {
    BalanceParams p;
    CHECK_NOTHROW(p.validate());
    p.q_vision_min = p.q_vision + 1;
    CHECK_THROWS_AS(p.validate(), Error);
    BalanceParams t;
    t.q_vision = 0;
    t.q_vision_min = 0;
    CHECK(t.text_only());
    CHECK_NOTHROW(t.validate());
}

TEST_CASE("rng is deterministic and in range") {
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.below(7) < 7);
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    std::vector<int> v{1, 2, 3, 4, 5, 6};
    r.shuffle(std::span<int>(v));
    std::sort(v.begin(), v.end());
    CHECK(v == std::vector<int>{1, 2, 3, 4, 5, 6});
}
