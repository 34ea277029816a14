#pragma once

#include <random>
#include <utility>
#include <vector>

#include "waring/linalg.hpp"
#include "waring/matrix.hpp"

namespace waring {

/// Seeded generators for test instances: Gaussian-rational matrices with
/// small numerators/denominators, invertible conjugators, planted Jordan
/// forms. All determinism flows from the supplied engine.
namespace gen {

inline Rational rational(std::mt19937_64& rng, long max_abs = 10) {
    std::uniform_int_distribution<long> num(-max_abs, max_abs);
    std::uniform_int_distribution<long> den(1, max_abs);
    return Rational(num(rng), den(rng));
}

inline GaussianRational gaussian_rational(std::mt19937_64& rng, long max_abs = 10,
                                          bool allow_imag = true) {
    GaussianRational g(rational(rng, max_abs));
    if (allow_imag && std::uniform_int_distribution<int>(0, 2)(rng) == 0)
        g.im = rational(rng, max_abs);
    return g;
}

inline QMat matrix(std::size_t n, std::mt19937_64& rng, long max_abs = 10, bool allow_imag = true) {
    QMat m(n, n, GaussianRational(0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m.at(i, j) = gaussian_rational(rng, max_abs, allow_imag);
    return m;
}

inline QMat invertible(std::size_t n, std::mt19937_64& rng, long max_abs = 10,
                       bool allow_imag = false) {
    ToleranceProfile tol = ToleranceProfile::with_bits(128);
    for (;;) {
        QMat m = matrix(n, rng, max_abs, allow_imag);
        if (!det(m, tol).is_zero()) return m;
    }
}

/// Jordan matrix from (eigenvalue, size) pairs, in the given order.
inline QMat jordan_matrix(const std::vector<std::pair<long, int>>& blocks) {
    int n = 0;
    for (const auto& b : blocks) n += b.second;
    QMat j(static_cast<std::size_t>(n), static_cast<std::size_t>(n), GaussianRational(0));
    int off = 0;
    for (const auto& [lam, sz] : blocks) {
        for (int i = 0; i < sz; ++i) {
            j.at(static_cast<std::size_t>(off + i), static_cast<std::size_t>(off + i)) =
                GaussianRational(lam);
            if (i + 1 < sz)
                j.at(static_cast<std::size_t>(off + i), static_cast<std::size_t>(off + i + 1)) =
                    GaussianRational(1);
        }
        off += sz;
    }
    return j;
}

inline QMat conjugate(const QMat& j, std::mt19937_64& rng, long max_abs = 3) {
    ToleranceProfile tol = ToleranceProfile::with_bits(128);
    QMat g = invertible(j.n(), rng, max_abs);
    return g * j * inverse(g, tol);
}

} // namespace gen
} // namespace waring
