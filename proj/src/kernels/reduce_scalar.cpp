// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include <limits>

#include "kernels_internal.hpp"

namespace vlbal::kernels::detail {

std::int64_t sum_i64_scalar(const std::int64_t* data, std::size_t n) {
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += data[i];
    }
    return acc;
}

std::int64_t max_i64_scalar(const std::int64_t* data, std::size_t n) {
    std::int64_t best = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = 0; i < n; ++i) {
        if (data[i] > best) {
            best = data[i];
        }
    }
    return best;
}

// Lane order matches the AVX2 kernels: four partial sums over full blocks,
// combined pairwise, then the tail added left to right.
double sum_f64_scalar(const double* data, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (int k = 0; k < 4; ++k) {
            lane[k] += data[i + k];
        }
    }
    double acc = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (; i < n; ++i) {
        acc += data[i];
    }
    return acc;
}

double sq_dev_sum_f64_scalar(const double* data, std::size_t n, double mean) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (int k = 0; k < 4; ++k) {
            const double d = data[i + k] - mean;
            lane[k] += d * d;
        }
    }
    double acc = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (; i < n; ++i) {
        const double d = data[i] - mean;
        acc += d * d;
    }
    return acc;
}

} // namespace vlbal::kernels::detail
