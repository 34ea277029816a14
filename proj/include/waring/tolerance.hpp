#pragma once

#include <cstdint>

#include "waring/real.hpp"

namespace waring {

/// Shared tolerance policy. All thresholds are powers of two derived from a
/// single precision value, so a profile is reproducible from `precision_bits`
/// (and `seed` for the randomized procedures).
///
/// Defaults: p = 256, eps_rank = eps_cluster = 2^{-p/4},
/// eps_residual = 2^{-p/2}.
struct ToleranceProfile {
    unsigned precision_bits = 256;
    long eps_rank_log2 = -64;     // eps_rank = 2^{eps_rank_log2}
    long eps_cluster_log2 = -64;  // eps_cluster = 2^{eps_cluster_log2}
    long eps_residual_log2 = -128;
    std::uint64_t seed = 1;

    ToleranceProfile() = default;

    static ToleranceProfile with_bits(unsigned p, std::uint64_t seed = 1) {
        ToleranceProfile t;
        t.precision_bits = p;
        t.eps_rank_log2 = -static_cast<long>(p / 4);
        t.eps_cluster_log2 = -static_cast<long>(p / 4);
        t.eps_residual_log2 = -static_cast<long>(p / 2);
        t.seed = seed;
        return t;
    }

    mpfr_prec_t prec() const { return static_cast<mpfr_prec_t>(precision_bits); }

    Real eps_rank() const { return Real::pow2(eps_rank_log2, prec()); }
    Real eps_cluster() const { return Real::pow2(eps_cluster_log2, prec()); }
    Real eps_residual() const { return Real::pow2(eps_residual_log2, prec()); }
};

} // namespace waring
