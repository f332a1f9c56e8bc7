// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reduction kernels behind the balance metrics and the partition ranking.
// Every kernel has a scalar reference and an AVX2 variant; the variant is
// picked once at startup from the CPU's feature bits. Floating-point kernels
// accumulate in four interleaved lanes on both paths, so the two backends are
// bit-identical rather than merely close.

#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace vlbal::kernels {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
    Backend backend;
    std::int64_t (*sum_i64)(const std::int64_t* data, std::size_t n);
    std::int64_t (*max_i64)(const std::int64_t* data, std::size_t n);
    double (*sum_f64)(const double* data, std::size_t n);
    double (*sq_dev_sum_f64)(const double* data, std::size_t n, double mean);
};

const KernelTable& scalar_table();

/// nullptr when the AVX2 unit was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_table();

/// The table selected for this process. VLBAL_KERNELS=scalar forces the
/// reference path.
const KernelTable& active();

std::string_view backend_name(Backend backend);

inline std::int64_t sum(std::span<const std::int64_t> xs) {
    return active().sum_i64(xs.data(), xs.size());
}

/// Maximum element; the empty span yields INT64_MIN.
inline std::int64_t max(std::span<const std::int64_t> xs) {
    return active().max_i64(xs.data(), xs.size());
}

inline double sum(std::span<const double> xs) {
    return active().sum_f64(xs.data(), xs.size());
}

/// Sum of squared deviations from `mean`.
inline double sq_dev_sum(std::span<const double> xs, double mean) {
    return active().sq_dev_sum_f64(xs.data(), xs.size(), mean);
}

} // namespace vlbal::kernels
