#pragma once

#include <cstdint>
#include <random>

#include "pisac/linalg.hpp"

namespace pisac {

using Rng = std::mt19937_64;

/// Seed of an independent stream derived from a master seed and an index
/// (trial number, sweep point, ...). splitmix64 finalizer over master ^ index.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master ^ (index * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline Rng make_stream(std::uint64_t master, std::uint64_t index) {
    return Rng(stream_seed(master, index));
}

/// Circularly symmetric complex Gaussian CN(0, variance).
inline cplx complex_normal(Rng& rng, double variance = 1.0) {
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

/// rows x cols matrix of i.i.d. CN(0, variance) entries.
inline CMat complex_normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double variance = 1.0) {
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    CMat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double re = n(rng);
            const double im = n(rng);
            m(i, j) = cplx(re, im);
        }
    return m;
}

}  // namespace pisac
