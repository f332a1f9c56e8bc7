// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#include "vlbal/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>

namespace vlbal {

std::uint64_t Rng::below(std::uint64_t bound) {
    // Reject the top partial bucket so every residue is equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return x % bound;
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("VLBAL_SEED"); env != nullptr && *env != '\0') {
        try {
            return std::stoull(env);
        } catch (...) {
        }
    }
    return 42;
}

} // namespace vlbal
