// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include "kernels_internal.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <limits>

namespace vlbal::kernels::detail {

std::int64_t sum_i64_avx2(const std::int64_t* data, std::size_t n) {
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_epi64(acc, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i)));
    }
    alignas(32) std::int64_t lane[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lane), acc);
    std::int64_t total = lane[0] + lane[1] + lane[2] + lane[3];
    for (; i < n; ++i) {
        total += data[i];
    }
    return total;
}

std::int64_t max_i64_avx2(const std::int64_t* data, std::size_t n) {
    constexpr std::int64_t kMin = std::numeric_limits<std::int64_t>::min();
    __m256i best = _mm256_set1_epi64x(kMin);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
        const __m256i gt = _mm256_cmpgt_epi64(x, best);
        best = _mm256_blendv_epi8(best, x, gt);
    }
    alignas(32) std::int64_t lane[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lane), best);
    std::int64_t result = kMin;
    for (std::int64_t v : lane) {
        result = v > result ? v : result;
    }
    for (; i < n; ++i) {
        result = data[i] > result ? data[i] : result;
    }
    return result;
}

namespace {

double combine_lanes(__m256d acc) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

} // namespace

double sum_f64_avx2(const double* data, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(data + i));
    }
    double total = combine_lanes(acc);
    for (; i < n; ++i) {
        total += data[i];
    }
    return total;
}

double sq_dev_sum_f64_avx2(const double* data, std::size_t n, double mean) {
    const __m256d m = _mm256_set1_pd(mean);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(data + i), m);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double total = combine_lanes(acc);
    for (; i < n; ++i) {
        const double d = data[i] - mean;
        total += d * d;
    }
    return total;
}

} // namespace vlbal::kernels::detail

#endif // __AVX2__
