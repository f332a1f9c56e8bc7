// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstring>
#include <limits>
#include <vector>

#include "vlbal/kernels.hpp"
#include "vlbal/rng.hpp"

using namespace vlbal;

namespace {

bool same_bits(double a, double b) {
    return std::memcmp(&a, &b, sizeof a) == 0;
}

} // namespace

TEST_CASE("scalar kernels on small inputs") {
    const auto& t = kernels::scalar_table();
    const std::vector<std::int64_t> xs{4, 2, 2, 9, -1};
    CHECK(t.sum_i64(xs.data(), xs.size()) == 16);
    CHECK(t.max_i64(xs.data(), xs.size()) == 9);
    CHECK(t.max_i64(xs.data(), 0) == std::numeric_limits<std::int64_t>::min());
    CHECK(t.sum_i64(xs.data(), 0) == 0);
    const std::vector<double> ds{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(t.sum_f64(ds.data(), ds.size()) == 15.0);
    CHECK(t.sq_dev_sum_f64(ds.data(), ds.size(), 3.0) == 10.0);
}

TEST_CASE("avx2 kernels are bit-identical to scalar") {
    const kernels::KernelTable* v = kernels::avx2_table();
    if (v == nullptr) {
        MESSAGE("AVX2 unavailable; equivalence check skipped");
        return;
    }
    const auto& s = kernels::scalar_table();
    Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = rng.below(70);
        std::vector<std::int64_t> xi(n);
        std::vector<double> xd(n);
        for (std::size_t i = 0; i < n; ++i) {
            xi[i] = static_cast<std::int64_t>(rng.below(1u << 30)) - (1 << 29);
            xd[i] = (rng.uniform() - 0.5) * 1e6;
        }
        const double mean = n ? s.sum_f64(xd.data(), n) / static_cast<double>(n) : 0.0;
        CHECK(s.sum_i64(xi.data(), n) == v->sum_i64(xi.data(), n));
        CHECK(s.max_i64(xi.data(), n) == v->max_i64(xi.data(), n));
        CHECK(same_bits(s.sum_f64(xd.data(), n), v->sum_f64(xd.data(), n)));
        CHECK(same_bits(s.sq_dev_sum_f64(xd.data(), n, mean), v->sq_dev_sum_f64(xd.data(), n, mean)));
    }
}

TEST_CASE("active table reports a backend") {
    const auto name = kernels::backend_name(kernels::active().backend);
    CHECK((name == "scalar" || name == "avx2"));
}
