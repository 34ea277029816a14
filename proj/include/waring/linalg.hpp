#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "waring/matrix.hpp"
#include "waring/poly.hpp"
#include "waring/tolerance.hpp"

namespace waring {

namespace detail {

template <class S>
typename scalar_traits<S>::Mag rank_threshold(const Matrix<S>& m, const ToleranceProfile& tol) {
    if constexpr (scalar_traits<S>::exact) {
        return Rational(0);
    } else {
        return tol.eps_rank() * m.max_abs();
    }
}

} // namespace detail

/// Incremental row span with deterministic elimination; shared by rank-style
/// queries, basis completions and Jordan chain construction. For Complex the
/// dependence decision is thresholded against eps_rank and the magnitude of
/// the incoming vector.
template <class S>
class RowSpan {
  public:
    RowSpan(std::size_t dim, const S& proto, const ToleranceProfile& tol)
        : dim_(dim), proto_(scalar_traits<S>::make(proto, 0)), tol_(tol) {}

    std::size_t size() const { return rows_.size(); }

    /// Adds v if independent from the current span; returns whether it was added.
    bool add(const std::vector<S>& v) {
        std::vector<S> r = reduce(v);
        std::size_t piv;
        if (!pick_pivot(r, scale_of(v), piv)) return false;
        rows_.push_back(std::move(r));
        pivots_.push_back(piv);
        return true;
    }

    bool contains(const std::vector<S>& v) const {
        std::vector<S> r = reduce(v);
        std::size_t piv;
        return !pick_pivot(r, scale_of(v), piv);
    }

    /// Size of the component of v outside the span, relative to |v|;
    /// zero when v lies in the span. Used to pick well-conditioned
    /// candidates deterministically.
    typename scalar_traits<S>::Mag residual_ratio(const std::vector<S>& v) const {
        std::vector<S> r = reduce(v);
        using T = scalar_traits<S>;
        typename T::Mag num = T::mag(proto_);
        for (const auto& x : r) {
            auto a = T::mag(x);
            if (num < a) num = a;
        }
        auto den = scale_of(v);
        if constexpr (T::exact) {
            if (den == Rational(0)) return Rational(0);
        }
        return num / den;
    }

  private:
    using Mag = typename scalar_traits<S>::Mag;

    Mag scale_of(const std::vector<S>& v) const {
        Mag m = scalar_traits<S>::mag(proto_);
        for (const auto& x : v) {
            auto a = scalar_traits<S>::mag(x);
            if (m < a) m = a;
        }
        if constexpr (scalar_traits<S>::exact) {
            return m;
        } else {
            return max(m, Real(1, tol_.prec()));
        }
    }

    std::vector<S> reduce(std::vector<S> v) const {
        if (v.size() != dim_) throw DimensionMismatch("RowSpan vector size");
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const S& lead = rows_[i][pivots_[i]];
            S factor = v[pivots_[i]] / lead;
            for (std::size_t j = 0; j < dim_; ++j) v[j] -= factor * rows_[i][j];
            v[pivots_[i]] = scalar_traits<S>::make(proto_, 0);
        }
        return v;
    }

    bool pick_pivot(const std::vector<S>& r, const Mag& scale, std::size_t& piv) const {
        bool found = false;
        Mag best = scalar_traits<S>::mag(proto_);
        for (std::size_t j = 0; j < dim_; ++j) {
            Mag a = scalar_traits<S>::mag(r[j]);
            if (!found || best < a) {
                best = a;
                piv = j;
                found = true;
            }
        }
        if (!found) return false;
        if constexpr (scalar_traits<S>::exact) {
            return !(best == Rational(0));
        } else {
            return best > tol_.eps_rank() * scale;
        }
    }

    std::size_t dim_;
    S proto_;
    ToleranceProfile tol_;
    std::vector<std::vector<S>> rows_;
    std::vector<std::size_t> pivots_;
};

namespace detail {

/// Row echelon elimination with deterministic pivoting (largest magnitude,
/// lowest row index on ties). Mutates `m`; returns pivot (row, col) pairs.
/// When `band_check` is set, a pivot falling inside
/// [eps_rank*scale, 8*eps_rank*scale) raises IllConditioned.
template <class S>
std::vector<std::pair<std::size_t, std::size_t>> row_echelon(
    Matrix<S>& m, const ToleranceProfile& tol,
    const std::optional<typename scalar_traits<S>::Mag>& scale_override, bool band_check) {
    using T = scalar_traits<S>;
    std::vector<std::pair<std::size_t, std::size_t>> pivots;
    if (m.rows() == 0 || m.cols() == 0) return pivots;

    typename T::Mag scale = scale_override ? *scale_override : m.max_abs();
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t best_i = r;
        typename T::Mag best = T::mag(m.at(r, c));
        for (std::size_t i = r + 1; i < m.rows(); ++i) {
            auto a = T::mag(m.at(i, c));
            if (best < a) {
                best = a;
                best_i = i;
            }
        }
        bool zero_col;
        if constexpr (T::exact) {
            zero_col = (best == Rational(0));
        } else {
            Real lo = tol.eps_rank() * scale;
            if (band_check && best > lo && best < Real(8, tol.prec()) * lo)
                throw IllConditioned("pivot magnitude inside the rank tolerance band");
            zero_col = !(best > lo);
        }
        if (zero_col) {
            for (std::size_t i = r; i < m.rows(); ++i) m.at(i, c) = T::make(m.proto(), 0);
            continue;
        }
        if (best_i != r)
            for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m.at(r, j), m.at(best_i, j));
        for (std::size_t i = r + 1; i < m.rows(); ++i) {
            S f = m.at(i, c) / m.at(r, c);
            m.at(i, c) = T::make(m.proto(), 0);
            for (std::size_t j = c + 1; j < m.cols(); ++j) m.at(i, j) -= f * m.at(r, j);
        }
        pivots.emplace_back(r, c);
        ++r;
    }
    return pivots;
}

} // namespace detail

/// Numerical rank by pivoted elimination. For Complex, the pivot threshold is
/// eps_rank times the matrix max-norm (or the supplied scale), and a pivot in
/// the band [eps, 8*eps) raises IllConditioned.
template <class S>
std::size_t rank(const Matrix<S>& m, const ToleranceProfile& tol,
                 std::optional<typename scalar_traits<S>::Mag> scale_override = {}) {
    Matrix<S> work = m;
    return detail::row_echelon(work, tol, scale_override, true).size();
}

template <class S>
std::size_t nullity(const Matrix<S>& m, const ToleranceProfile& tol,
                    std::optional<typename scalar_traits<S>::Mag> scale_override = {}) {
    return m.n() - rank(m, tol, std::move(scale_override));
}

template <class S>
S det(const Matrix<S>& m, const ToleranceProfile& tol) {
    std::size_t n = m.n();
    Matrix<S> work = m;
    using T = scalar_traits<S>;
    S result = T::make(m.proto(), 1);
    typename T::Mag scale = work.max_abs();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t best_i = c;
        typename T::Mag best = T::mag(work.at(c, c));
        for (std::size_t i = c + 1; i < n; ++i) {
            auto a = T::mag(work.at(i, c));
            if (best < a) {
                best = a;
                best_i = i;
            }
        }
        bool zero;
        if constexpr (T::exact) {
            zero = (best == Rational(0));
        } else {
            zero = !(best > tol.eps_rank() * scale * Real::pow2(-16, tol.prec()));
        }
        if (zero) return T::make(m.proto(), 0);
        if (best_i != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(work.at(c, j), work.at(best_i, j));
            result = -result;
        }
        result *= work.at(c, c);
        for (std::size_t i = c + 1; i < n; ++i) {
            S f = work.at(i, c) / work.at(c, c);
            for (std::size_t j = c; j < n; ++j) work.at(i, j) -= f * work.at(c, j);
        }
    }
    return result;
}

/// Inverse by Gauss-Jordan elimination; throws Singular when rank < n.
template <class S>
Matrix<S> inverse(const Matrix<S>& m, const ToleranceProfile& tol) {
    std::size_t n = m.n();
    using T = scalar_traits<S>;
    Matrix<S> work = m;
    Matrix<S> inv = Matrix<S>::identity(n, m.proto());
    typename T::Mag scale = m.max_abs();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t best_i = c;
        typename T::Mag best = T::mag(work.at(c, c));
        for (std::size_t i = c + 1; i < n; ++i) {
            auto a = T::mag(work.at(i, c));
            if (best < a) {
                best = a;
                best_i = i;
            }
        }
        bool zero;
        if constexpr (T::exact) {
            zero = (best == Rational(0));
        } else {
            zero = !(best > tol.eps_rank() * scale);
        }
        if (zero) throw Singular("matrix is singular");
        if (best_i != c)
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(work.at(c, j), work.at(best_i, j));
                std::swap(inv.at(c, j), inv.at(best_i, j));
            }
        S piv = work.at(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            work.at(c, j) /= piv;
            inv.at(c, j) /= piv;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c) continue;
            S f = work.at(i, c);
            if constexpr (T::exact) {
                if (f.is_zero()) continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                work.at(i, j) -= f * work.at(c, j);
                inv.at(i, j) -= f * inv.at(c, j);
            }
        }
    }
    return inv;
}

/// Basis of the (numerical) kernel, deterministic.
template <class S>
std::vector<std::vector<S>> nullspace(const Matrix<S>& m, const ToleranceProfile& tol,
                                      std::optional<typename scalar_traits<S>::Mag> scale_override = {}) {
    using T = scalar_traits<S>;
    Matrix<S> work = m;
    auto pivots = detail::row_echelon(work, tol, scale_override, false);
    // back-substitute to reduced echelon form
    for (std::size_t t = pivots.size(); t-- > 0;) {
        auto [r, c] = pivots[t];
        S piv = work.at(r, c);
        for (std::size_t j = c; j < work.cols(); ++j) work.at(r, j) /= piv;
        for (std::size_t t2 = 0; t2 < t; ++t2) {
            std::size_t r2 = pivots[t2].first;
            S f = work.at(r2, c);
            for (std::size_t j = c; j < work.cols(); ++j) work.at(r2, j) -= f * work.at(r, j);
        }
    }
    std::vector<bool> is_pivot(work.cols(), false);
    for (auto& [r, c] : pivots) is_pivot[c] = true;
    std::vector<std::vector<S>> basis;
    for (std::size_t f = 0; f < work.cols(); ++f) {
        if (is_pivot[f]) continue;
        std::vector<S> v(work.cols(), T::make(m.proto(), 0));
        v[f] = T::make(m.proto(), 1);
        for (auto& [r, c] : pivots) v[c] = -work.at(r, f);
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Characteristic polynomial of det(zI - M) by the Berkowitz algorithm
/// (division-free; exact over GaussianRational). Returns a_0..a_{n-1}; the
/// leading coefficient is 1 and omitted.
template <class S>
std::vector<S> berkowitz_char_poly(const Matrix<S>& m) {
    using T = scalar_traits<S>;
    std::size_t n = m.n();
    const S zero = T::make(m.proto(), 0);
    const S one = T::make(m.proto(), 1);
    std::vector<S> coeffs = {one, -m.at(0, 0)}; // high -> low for leading 1x1
    for (std::size_t r = 2; r <= n; ++r) {
        // Toeplitz column: t_0 = 1, t_1 = -a_rr, t_j = -R M^{j-2} Cc
        std::vector<S> t = {one, -m.at(r - 1, r - 1)};
        std::vector<S> w(r - 1, zero);
        for (std::size_t i = 0; i < r - 1; ++i) w[i] = m.at(i, r - 1);
        for (std::size_t j = 2; j <= r; ++j) {
            S dot = zero;
            for (std::size_t i = 0; i < r - 1; ++i) dot += m.at(r - 1, i) * w[i];
            t.push_back(-dot);
            if (j < r) {
                std::vector<S> w2(r - 1, zero);
                for (std::size_t i = 0; i < r - 1; ++i) {
                    for (std::size_t l = 0; l < r - 1; ++l) w2[i] += m.at(i, l) * w[l];
                }
                w = std::move(w2);
            }
        }
        std::vector<S> next(r + 1, zero);
        for (std::size_t i = 0; i <= r; ++i)
            for (std::size_t j = 0; j < coeffs.size() && j <= i; ++j)
                next[i] += t[i - j] * coeffs[j];
        coeffs = std::move(next);
    }
    std::vector<S> low(n, zero);
    for (std::size_t i = 0; i < n; ++i) low[i] = coeffs[n - i];
    return low;
}

/// Characteristic polynomial via similarity reduction to upper Hessenberg
/// form followed by the Hessenberg determinant recurrence.
inline std::vector<Complex> hessenberg_char_poly(const CMat& m, const ToleranceProfile& tol) {
    std::size_t n = m.n();
    const mpfr_prec_t p = tol.prec();
    CMat h = m;
    Real tiny = Real::pow2(-static_cast<long>(tol.precision_bits) + 24, p) *
                max(Real(1, p), m.max_abs());
    for (std::size_t c = 0; c + 2 < n; ++c) {
        std::size_t best_i = c + 1;
        Real best = h.at(c + 1, c).abs();
        for (std::size_t i = c + 2; i < n; ++i) {
            Real a = h.at(i, c).abs();
            if (best < a) {
                best = a;
                best_i = i;
            }
        }
        if (!(best > tiny)) {
            for (std::size_t i = c + 1; i < n; ++i) h.at(i, c) = Complex(p);
            continue;
        }
        if (best_i != c + 1) {
            for (std::size_t j = 0; j < n; ++j) std::swap(h.at(c + 1, j), h.at(best_i, j));
            for (std::size_t i = 0; i < n; ++i) std::swap(h.at(i, c + 1), h.at(i, best_i));
        }
        for (std::size_t i = c + 2; i < n; ++i) {
            Complex f = h.at(i, c) / h.at(c + 1, c);
            if (f.is_zero()) continue;
            for (std::size_t j = 0; j < n; ++j) h.at(i, j) -= f * h.at(c + 1, j);
            for (std::size_t r = 0; r < n; ++r) h.at(r, c + 1) += f * h.at(r, i);
            h.at(i, c) = Complex(p);
        }
    }
    // d_r(z) = (z - h_rr) d_{r-1}(z) - sum_i h_{i,r} (prod_{j=i}^{r-1} h_{j+1,j}) d_{i-1}(z)
    std::vector<CPoly> d(n + 1);
    d[0] = {Complex(1, p)};
    for (std::size_t r = 1; r <= n; ++r) {
        CPoly cur(r + 1, Complex(p));
        for (std::size_t i = 0; i < r; ++i) {
            cur[i + 1] += d[r - 1][i];
            cur[i] -= h.at(r - 1, r - 1) * d[r - 1][i];
        }
        Complex prod(1, p);
        for (std::size_t i = r - 1; i-- > 0;) {
            // i is 0-based: term for 1-based index i+1
            prod *= h.at(i + 1, i);
            Complex coef = h.at(i, r - 1) * prod;
            for (std::size_t j = 0; j < d[i].size(); ++j) cur[j] -= coef * d[i][j];
        }
        d[r] = std::move(cur);
    }
    std::vector<Complex> low(n, Complex(p));
    for (std::size_t i = 0; i < n; ++i) low[i] = d[n][i];
    return low;
}

/// Monic characteristic polynomial coefficients a_0..a_{n-1}:
/// chi(z) = z^n + a_{n-1} z^{n-1} + ... + a_0, computed division-free
/// (Berkowitz) on exact input and by Hessenberg reduction on Complex input.
template <class S>
std::vector<S> char_poly(const Matrix<S>& m, const ToleranceProfile& tol) {
    if constexpr (scalar_traits<S>::exact) {
        (void)tol;
        return berkowitz_char_poly(m);
    } else {
        return hessenberg_char_poly(m, tol);
    }
}

/// The shifted-index submatrix T_I: for T with rows t_0..t_{n-1} (so the
/// named row t_i is the 0-based matrix row i) and I inside {1..n-1}, this is
/// (t_{i,j+1})_{i,j in I}; in 0-based matrix terms the principal submatrix
/// on the index set I.
template <class S>
Matrix<S> shift_submatrix(const Matrix<S>& t, std::vector<std::size_t> indices) {
    std::size_t n = t.n();
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    if (indices.empty()) throw IndexOutOfRange("shift_submatrix: empty index set");
    for (auto i : indices)
        if (i < 1 || i >= n) throw IndexOutOfRange("shift_submatrix: index out of {1..n-1}");
    Matrix<S> sub(indices.size(), indices.size(), scalar_traits<S>::make(t.proto(), 0));
    for (std::size_t a = 0; a < indices.size(); ++a)
        for (std::size_t b = 0; b < indices.size(); ++b) sub.at(a, b) = t.at(indices[a], indices[b]);
    return sub;
}

/// Completes an independent family of rows to a basis of F^n by q = n - m
/// vectors whose projections onto the coordinate set `coords` (0-based,
/// |coords| = q) also form a basis of F^q. Deterministic: the target
/// projection is the first standard basis vector outside the current
/// projected span, and the kernel adjustment sweeps w = 0 then the kernel
/// basis in index order.
template <class S>
std::vector<std::vector<S>> constrained_basis_completion(const std::vector<std::vector<S>>& rows,
                                                         std::vector<std::size_t> coords,
                                                         std::size_t n, const S& proto,
                                                         const ToleranceProfile& tol) {
    using T = scalar_traits<S>;
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    std::size_t q = coords.size();
    if (rows.size() + q != n)
        throw PreconditionViolated("constrained_basis_completion: |coords| must be n - #rows");
    for (auto c : coords)
        if (c >= n) throw IndexOutOfRange("constrained_basis_completion: coordinate out of range");

    RowSpan<S> full(n, proto, tol);
    for (const auto& r : rows) {
        if (r.size() != n) throw DimensionMismatch("constrained_basis_completion row size");
        if (!full.add(r)) throw PreconditionViolated("constrained_basis_completion: rows dependent");
    }
    RowSpan<S> proj(q, proto, tol);

    std::vector<bool> in_coords(n, false);
    for (auto c : coords) in_coords[c] = true;
    std::vector<std::size_t> kernel_coords;
    for (std::size_t j = 0; j < n; ++j)
        if (!in_coords[j]) kernel_coords.push_back(j);

    auto project = [&](const std::vector<S>& v) {
        std::vector<S> pv;
        pv.reserve(q);
        for (auto c : coords) pv.push_back(v[c]);
        return pv;
    };
    auto unit = [&](std::size_t dim, std::size_t idx) {
        std::vector<S> v(dim, T::make(proto, 0));
        v[idx] = T::make(proto, 1);
        return v;
    };

    std::vector<std::vector<S>> out;
    for (std::size_t s = 0; s < q; ++s) {
        std::size_t target = q;
        for (std::size_t l = 0; l < q; ++l) {
            if (!proj.contains(unit(q, l))) {
                target = l;
                break;
            }
        }
        if (target == q) throw InternalError("constrained_basis_completion: projected span full early");
        std::vector<S> u = unit(n, coords[target]);
        bool placed = false;
        if (full.add(u)) {
            placed = true;
        } else {
            for (auto kc : kernel_coords) {
                std::vector<S> t = u;
                t[kc] += T::make(proto, 1);
                if (full.add(t)) {
                    u = std::move(t);
                    placed = true;
                    break;
                }
            }
        }
        if (!placed)
            throw InternalError("constrained_basis_completion: infeasible projection (cannot occur)");
        if (!proj.add(project(u)))
            throw InternalError("constrained_basis_completion: projection dependence");
        out.push_back(std::move(u));
    }
    return out;
}

} // namespace waring
