// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <cstring>

#include "kernels_internal.hpp"

namespace vlbal::kernels {

const KernelTable& scalar_table() {
    static const KernelTable table{
        Backend::Scalar,
        detail::sum_i64_scalar,
        detail::max_i64_scalar,
        detail::sum_f64_scalar,
        detail::sq_dev_sum_f64_scalar,
    };
    return table;
}

const KernelTable* avx2_table() {
#if defined(VLBAL_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
    static const bool supported = __builtin_cpu_supports("avx2");
    static const KernelTable table{
        Backend::Avx2,
        detail::sum_i64_avx2,
        detail::max_i64_avx2,
        detail::sum_f64_avx2,
        detail::sq_dev_sum_f64_avx2,
    };
    return supported ? &table : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() {
    static const KernelTable& chosen = [] () -> const KernelTable& {
        const char* force = std::getenv("VLBAL_KERNELS");
        if (force != nullptr && std::strcmp(force, "scalar") == 0) {
            return scalar_table();
        }
        if (const KernelTable* t = avx2_table()) {
            return *t;
        }
        return scalar_table();
    }();
    return chosen;
}

std::string_view backend_name(Backend backend) {
    switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    }
    return "unknown";
}

} // namespace vlbal::kernels
