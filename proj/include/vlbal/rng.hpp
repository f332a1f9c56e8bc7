// Copyright (c) 2026 The vlbal Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace vlbal {

/// Seedable generator with a platform-independent output stream.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// The standard distributions are not, so bounded integers, uniform doubles
/// and normals are derived here from raw engine output.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, bound). Rejection sampling; `bound` must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Standard normal via Box-Muller (one value per call, no caching).
    double normal();

    /// Fisher-Yates shuffle: for i = n-1 down to 1, swap(i, below(i + 1)).
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Default seed, overridable with the VLBAL_SEED environment variable.
std::uint64_t default_seed();

} // namespace vlbal
