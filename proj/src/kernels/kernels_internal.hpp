// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "vlbal/kernels.hpp"

namespace vlbal::kernels::detail {

std::int64_t sum_i64_scalar(const std::int64_t* data, std::size_t n);
std::int64_t max_i64_scalar(const std::int64_t* data, std::size_t n);
double sum_f64_scalar(const double* data, std::size_t n);
double sq_dev_sum_f64_scalar(const double* data, std::size_t n, double mean);

std::int64_t sum_i64_avx2(const std::int64_t* data, std::size_t n);
std::int64_t max_i64_avx2(const std::int64_t* data, std::size_t n);
double sum_f64_avx2(const double* data, std::size_t n);
double sq_dev_sum_f64_avx2(const double* data, std::size_t n, double mean);

} // namespace vlbal::kernels::detail
