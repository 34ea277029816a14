#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "waring/jordan.hpp"
#include "waring/linalg.hpp"
#include "waring/powers.hpp"

namespace waring {

enum class VerdictTag { Surjective, NotSurjective, Unknown };
enum class VerdictReason { R0AtMostOne, LowDimInequality, MillerObstruction, OpenRegion };

/// Surjectivity verdict for omega(x1,x2) = A1 x1^k + A2 x2^k as a pure
/// function of (n, k, r0) where r0 = nullity(A2):
///   r0 <= 1                  -> Surjective
///   n <= k(r0-1)             -> NotSurjective
///   n in {3,4}, n > k(r0-1)  -> Surjective
///   otherwise                -> Unknown (open region, n >= 5)
struct Verdict {
    VerdictTag tag;
    VerdictReason reason;
    int n, k, r0;

    std::string tag_string() const {
        switch (tag) {
            case VerdictTag::Surjective: return "surjective";
            case VerdictTag::NotSurjective: return "not_surjective";
            default: return "unknown";
        }
    }
    std::string reason_string() const {
        switch (reason) {
            case VerdictReason::R0AtMostOne: return "r0_at_most_one";
            case VerdictReason::LowDimInequality: return "low_dim_inequality";
            case VerdictReason::MillerObstruction: return "miller_obstruction";
            default: return "open_region";
        }
    }
};

inline Verdict verdict(int n, int k, int r0) {
    if (n < 1 || k < 2 || r0 < 0 || r0 > n)
        throw PreconditionViolated("verdict: need n >= 1, k >= 2, 0 <= r0 <= n");
    if (r0 <= 1) return {VerdictTag::Surjective, VerdictReason::R0AtMostOne, n, k, r0};
    if (n <= k * (r0 - 1)) return {VerdictTag::NotSurjective, VerdictReason::MillerObstruction, n, k, r0};
    if (n == 3 || n == 4) return {VerdictTag::Surjective, VerdictReason::LowDimInequality, n, k, r0};
    return {VerdictTag::Unknown, VerdictReason::OpenRegion, n, k, r0};
}

struct ProblemInstance {
    QMat a1;
    QMat a2;
    int k = 2;
    std::optional<QMat> target;
    ToleranceProfile profile;
    int retries = 64;
};

struct ReducedInstance {
    QMat b;                  // A1^{-1} A2 (exact)
    JordanDecomposition dec; // of b; g = P^{-1} satisfies g b g^{-1} = J
    CMat reduced_target;     // g (A1^{-1} C) g^{-1}
    std::optional<QMat> reduced_target_exact; // when the decomposition is exact
    bool has_target = false;
};

enum class SolveStatus { Solved, NotInImage, Unresolved };

struct DecompositionResult {
    SolveStatus status = SolveStatus::Unresolved;
    CMat x1, x2;
    Real residual;
    std::string route;
    std::string certificate;

    std::string status_string() const {
        switch (status) {
            case SolveStatus::Solved: return "solved";
            case SolveStatus::NotInImage: return "not_in_image";
            default: return "unresolved";
        }
    }
};

namespace detail {

template <class S>
std::vector<S> vec_sub(std::vector<S> a, const std::vector<S>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

template <class S>
std::vector<S> vec_scale(std::vector<S> a, const S& f) {
    for (auto& x : a) x = x * f;
    return a;
}

template <class S>
std::vector<S> unit_vec(std::size_t n, std::size_t idx, const S& proto) {
    std::vector<S> v(n, scalar_traits<S>::make(proto, 0));
    v[idx] = scalar_traits<S>::make(proto, 1);
    return v;
}

template <class S>
Matrix<S> shift_matrix(std::size_t n, const S& proto) {
    Matrix<S> j = Matrix<S>::zeros(n, n, proto);
    for (std::size_t i = 0; i + 1 < n; ++i) j.at(i, i + 1) = scalar_traits<S>::make(proto, 1);
    return j;
}

template <class S>
bool entry_is_zero(const S& x, const typename scalar_traits<S>::Mag& scale,
                   const ToleranceProfile& tol) {
    if constexpr (scalar_traits<S>::exact) {
        (void)scale;
        (void)tol;
        return x.is_zero();
    } else {
        return !(scalar_traits<S>::mag(x) > tol.eps_rank() * scale);
    }
}

template <class S>
typename scalar_traits<S>::Mag zero_scale(const Matrix<S>& m, const ToleranceProfile& tol) {
    if constexpr (scalar_traits<S>::exact) {
        (void)tol;
        return m.max_abs();
    } else {
        return max(Real(1, tol.prec()), m.max_abs());
    }
}

/// Solves for the rows of T given desired rows of C - JT. Rows of C - JT
/// decompose as: within a nonzero block, c_i - lambda t_i - t_{i+1} (no
/// t_{i+1} term on the block's last row); within a zero block, c_i - t_{i+1}
/// except the last row, which stays c_i. The first row of each zero block of
/// T is unconstrained and is reported in `free_rows`.
template <class S>
struct TDerivation {
    Matrix<S> t;
    std::vector<int> free_rows;
    std::vector<int> det_rows;
};

template <class S>
TDerivation<S> derive_T(const JordanStructure& st, const Matrix<S>& j, const Matrix<S>& c,
                        const std::vector<std::optional<std::vector<S>>>& desired) {
    std::size_t n = c.n();
    TDerivation<S> out;
    out.t = Matrix<S>::zeros(n, n, c.proto());
    int off = 0;
    for (const auto& blk : st.blocks) {
        int a = off;
        int b = off + blk.size - 1;
        if (!blk.is_zero) {
            for (int i = b; i >= a; --i) {
                if (!desired[static_cast<std::size_t>(i)])
                    throw InternalError("derive_T: missing desired row in invertible block");
                std::vector<S> row = vec_sub(c.row(static_cast<std::size_t>(i)),
                                             *desired[static_cast<std::size_t>(i)]);
                if (i < b) row = vec_sub(std::move(row), out.t.row(static_cast<std::size_t>(i + 1)));
                const S& lam = j.at(static_cast<std::size_t>(i), static_cast<std::size_t>(i));
                for (auto& x : row) x /= lam;
                out.t.set_row(static_cast<std::size_t>(i), row);
                out.det_rows.push_back(i);
            }
        } else {
            for (int i = a; i < b; ++i) {
                if (!desired[static_cast<std::size_t>(i)])
                    throw InternalError("derive_T: missing desired row in zero block");
                out.t.set_row(static_cast<std::size_t>(i + 1),
                              vec_sub(c.row(static_cast<std::size_t>(i)),
                                      *desired[static_cast<std::size_t>(i)]));
                out.det_rows.push_back(i + 1);
            }
            out.free_rows.push_back(a);
        }
        off += blk.size;
    }
    return out;
}

/// Fills the free rows with standard basis vectors so that T becomes
/// invertible; fails (returns false) when the determined rows are dependent.
template <class S>
bool complete_free_rows(TDerivation<S>& td, const ToleranceProfile& tol) {
    std::size_t n = td.t.n();
    RowSpan<S> span(n, td.t.proto(), tol);
    for (int i : td.det_rows)
        if (!span.add(td.t.row(static_cast<std::size_t>(i)))) return false;
    std::size_t next = 0;
    for (int f : td.free_rows) {
        bool placed = false;
        for (; next < n; ++next) {
            auto u = unit_vec(n, next, td.t.proto());
            if (span.add(u)) {
                td.t.set_row(static_cast<std::size_t>(f), u);
                ++next;
                placed = true;
                break;
            }
        }
        if (!placed) return false;
    }
    return true;
}

} // namespace detail

/// Proposition-style construction for invertible B: pick lambda exceeding the
/// spectral radius of C (via 1 + ceil of the infinity norm), so C - lambda I
/// is invertible, then X1 = lambda^{1/k} I and X2^k = B^{-1}(C - lambda I).
template <class S>
std::pair<CMat, CMat> solve_invertible(const Matrix<S>& b, const Matrix<S>& c, int k,
                                       const ToleranceProfile& tol) {
    std::size_t n = b.n();
    const mpfr_prec_t p = tol.prec();
    Integer lam;
    if constexpr (scalar_traits<S>::exact) {
        lam = ceil_rational(c.norm_inf()) + 1;
    } else {
        lam = c.norm_inf().ceil_to_integer() + 1;
    }
    S lam_s = scalar_traits<S>::from_rational(b.proto(), Rational(lam));
    CMat x1 = kth_root_scalar(Complex(lam, p), static_cast<unsigned long>(k)) *
              CMat::identity(n, Complex(p));
    Matrix<S> shifted = c - lam_s * Matrix<S>::identity(n, b.proto());
    Matrix<S> e = inverse(b, tol) * shifted;
    CMat x2 = matrix_kth_root(e, k, tol);
    return {x1, x2};
}

/// The T of the full-nilpotent construction (J = J_{0,n}).
/// If the last row of C is nonzero: select a row-space basis containing the
/// last row, zero the matching t-rows, and fill the rest by the constrained
/// basis completion so that C - JT is invertible while T keeps the
/// shifted-submatrix invertibility needed to be a k-th power.
/// If the last row is zero: an invertible cyclic T that shifts the leading
/// block by a scalar that is not an eigenvalue, leaving one simple zero.
template <class S>
Matrix<S> full_nilpotent_T(const Matrix<S>& c, const ToleranceProfile& tol) {
    std::size_t n = c.n();
    const S proto = scalar_traits<S>::make(c.proto(), 0);
    auto scale = detail::zero_scale(c, tol);

    bool last_zero = true;
    for (std::size_t jcol = 0; jcol < n; ++jcol)
        if (!detail::entry_is_zero(c.at(n - 1, jcol), scale, tol)) {
            last_zero = false;
            break;
        }

    Matrix<S> t = Matrix<S>::zeros(n, n, proto);
    if (!last_zero) {
        RowSpan<S> span(n, proto, tol);
        std::vector<std::size_t> selected;
        if (!span.add(c.row(n - 1))) throw InternalError("full_nilpotent_T: nonzero row rejected");
        selected.push_back(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (span.add(c.row(i))) selected.push_back(i);
        std::sort(selected.begin(), selected.end());
        if (selected.size() == n) return t; // C invertible, T = 0
        std::vector<std::size_t> complement;
        std::vector<bool> in_sel(n, false);
        for (auto i : selected) in_sel[i] = true;
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (!in_sel[i]) complement.push_back(i);
        std::vector<std::vector<S>> rows;
        for (auto i : selected) rows.push_back(c.row(i));
        std::vector<std::size_t> coords;
        for (auto jrow : complement) coords.push_back(jrow + 1);
        auto completion = constrained_basis_completion(rows, coords, n, proto, tol);
        t.set_row(0, detail::unit_vec(n, 0, proto));
        for (std::size_t idx = 0; idx < complement.size(); ++idx)
            t.set_row(complement[idx] + 1, completion[idx]);
        return t;
    }

    if (n == 1) {
        t.at(0, 0) = scalar_traits<S>::make(proto, 1);
        return t;
    }
    Matrix<S> leading = c.block(0, 0, n - 1, n - 1);
    Integer lam;
    if constexpr (scalar_traits<S>::exact) {
        lam = ceil_rational(leading.norm_inf()) + 1;
    } else {
        lam = leading.norm_inf().ceil_to_integer() + 1;
    }
    S lam_s = scalar_traits<S>::from_rational(proto, Rational(lam));
    t.set_row(0, detail::unit_vec(n, n - 1, proto));
    for (std::size_t i = 1; i < n; ++i) t.at(i, i - 1) = lam_s;
    return t;
}

/// C = X1^k + J_{0,n} X2^k for arbitrary C.
template <class S>
std::pair<CMat, CMat> solve_full_nilpotent(const Matrix<S>& c, int k, const ToleranceProfile& tol) {
    std::size_t n = c.n();
    Matrix<S> j = detail::shift_matrix(n, c.proto());
    Matrix<S> t = full_nilpotent_T(c, tol);
    CMat x1 = matrix_kth_root(c - j * t, k, tol);
    CMat x2 = matrix_kth_root(t, k, tol);
    return {x1, x2};
}

/// First mu = lambda^k (integer lambda sweep) with det(C11 - mu J') nonzero;
/// the determinant is a polynomial in mu of degree dim with nonzero leading
/// coefficient, so at most dim integer values can fail.
template <class S>
S choose_mu(const Matrix<S>& c11, const Matrix<S>& jprime, int k, const ToleranceProfile& tol) {
    std::size_t d = jprime.n();
    if (d == 0) return scalar_traits<S>::make(c11.proto(), 1);
    for (long lam = 1; lam <= static_cast<long>(3 * d + 8); ++lam) {
        Integer mu_int = boost::multiprecision::pow(Integer(lam), static_cast<unsigned>(k));
        S mu = scalar_traits<S>::from_rational(c11.proto(), Rational(mu_int));
        Matrix<S> m = c11 - mu * jprime;
        S dt = det(m, tol);
        if constexpr (scalar_traits<S>::exact) {
            if (!dt.is_zero()) return mu;
        } else {
            Real bound = tol.eps_rank() * max(Real(1, tol.prec()), m.max_abs())
                                              .pow_ui(static_cast<unsigned long>(d));
            if (dt.abs() > bound) return mu;
        }
    }
    if constexpr (scalar_traits<S>::exact)
        throw InternalError("choose_mu: sweep exhausted on exact input");
    else
        throw IllConditioned("choose_mu: determinant sweep inconclusive; raise precision");
}

/// r0 = 1 with at least one invertible block: T = [[mu I, (J')^{-1} C12],
/// [0, T']] decouples the invertible part (mu from the determinant sweep)
/// from a full-nilpotent subproblem on C22.
template <class S>
std::pair<CMat, CMat> solve_one_nilpotent_block(const JordanStructure& st, const Matrix<S>& j,
                                                const Matrix<S>& c, int k,
                                                const ToleranceProfile& tol) {
    if (st.r0() != 1 || st.rprime() < 1)
        throw PreconditionViolated("solve_one_nilpotent_block: needs r0 = 1 and r' >= 1");
    st.validate_canonical();
    std::size_t n = c.n();
    std::size_t n0 = static_cast<std::size_t>(st.n0());
    std::size_t d = n - n0;
    Matrix<S> c11 = c.block(0, 0, d, d);
    Matrix<S> c12 = c.block(0, d, d, n0);
    Matrix<S> c22 = c.block(d, d, n0, n0);
    Matrix<S> jp = j.block(0, 0, d, d);
    S mu = choose_mu(c11, jp, k, tol);
    Matrix<S> q = inverse(jp, tol) * c12;
    Matrix<S> tp = full_nilpotent_T(c22, tol);
    Matrix<S> t = Matrix<S>::zeros(n, n, c.proto());
    t.set_block(0, 0, mu * Matrix<S>::identity(d, c.proto()));
    t.set_block(0, d, q);
    t.set_block(d, d, tp);
    CMat x1 = matrix_kth_root(c - j * t, k, tol);
    CMat x2 = matrix_kth_root(t, k, tol);
    return {x1, x2};
}

namespace detail {

template <class S>
struct TailData {
    TailPermutation tp;
    Matrix<S> ctil;
    std::vector<std::vector<S>> fixed_rows; // last r0 rows of C^P
    int m = 0;   // dim W
    int mc = 0;  // rank of C21^P
};

template <class S>
TailData<S> tail_data(const JordanStructure& st, const Matrix<S>& c, const ToleranceProfile& tol) {
    TailPermutation tp = nilpotent_tail_permutation(st);
    TailData<S> td{tp, relabel_matrix(c, tp), {}, 0, 0};
    int n = st.n;
    int r0 = st.r0();
    int nr = n - r0;
    Matrix<S> wmat = Matrix<S>::zeros(static_cast<std::size_t>(r0), static_cast<std::size_t>(n),
                                      c.proto());
    Matrix<S> c21 = Matrix<S>::zeros(static_cast<std::size_t>(r0), static_cast<std::size_t>(nr),
                                     c.proto());
    for (int s = 0; s < r0; ++s) {
        auto row = td.ctil.row(static_cast<std::size_t>(nr + s));
        td.fixed_rows.push_back(row);
        for (int jcol = 0; jcol < n; ++jcol)
            wmat.at(static_cast<std::size_t>(s), static_cast<std::size_t>(jcol)) =
                row[static_cast<std::size_t>(jcol)];
        for (int jcol = 0; jcol < nr; ++jcol)
            c21.at(static_cast<std::size_t>(s), static_cast<std::size_t>(jcol)) =
                row[static_cast<std::size_t>(jcol)];
    }
    auto scale = detail::zero_scale(c, tol);
    std::optional<typename scalar_traits<S>::Mag> ov;
    if constexpr (!scalar_traits<S>::exact) ov = scale;
    td.m = r0 > 0 ? static_cast<int>(rank(wmat, tol, ov)) : 0;
    td.mc = r0 > 0 && nr > 0 ? static_cast<int>(rank(c21, tol, ov)) : 0;
    return td;
}

template <class S>
std::vector<S> pi1(const std::vector<S>& v, int nr) {
    return std::vector<S>(v.begin(), v.begin() + nr);
}

} // namespace detail

/// Lemma-style construction of T for the rank criterion: requires
/// rank(C21^P) = dim(W) = m. The resulting T is invertible and C - JT has
/// nullity r0 - m with nonzero characteristic coefficient a_{r0-m}, so all
/// its zero blocks have size one.
template <class S>
Matrix<S> build_rank_criterion_T(const JordanStructure& st, const Matrix<S>& j, const Matrix<S>& c,
                                 const ToleranceProfile& tol) {
    int n = st.n;
    int r0 = st.r0();
    if (r0 < 1) throw PreconditionViolated("build_rank_criterion_T: needs r0 >= 1");
    auto td = detail::tail_data(st, c, tol);
    int nr = n - r0;
    int m = td.m;
    if (td.mc != m)
        throw PreconditionViolated("build_rank_criterion_T: rank(C21^P) != dim(W)");

    const S proto = scalar_traits<S>::make(c.proto(), 0);
    // indices (relabelled) of fixed rows with independent pi1 projections
    std::vector<int> jsel;
    {
        RowSpan<S> sp(static_cast<std::size_t>(nr), proto, tol);
        for (int s = 0; s < r0 && static_cast<int>(jsel.size()) < m; ++s)
            if (nr > 0 && sp.add(detail::pi1(td.fixed_rows[static_cast<std::size_t>(s)], nr)))
                jsel.push_back(nr + s);
    }
    if (static_cast<int>(jsel.size()) != m)
        throw PreconditionViolated("build_rank_criterion_T: C21^P rank extraction failed");

    // y-completion for rows m..nr-1: unit vectors extending the pi1 span
    std::vector<int> ysel;
    {
        RowSpan<S> sp(static_cast<std::size_t>(nr), proto, tol);
        for (int i = 0; i < m; ++i)
            sp.add(detail::pi1(td.ctil.row(static_cast<std::size_t>(jsel[static_cast<std::size_t>(i)])), nr));
        for (int l = 0; l < nr && static_cast<int>(ysel.size()) < nr - m; ++l)
            if (sp.add(detail::unit_vec(static_cast<std::size_t>(nr), static_cast<std::size_t>(l), proto)))
                ysel.push_back(l);
        if (static_cast<int>(ysel.size()) != nr - m)
            throw InternalError("build_rank_criterion_T: completion shortfall");
    }

    for (int attempt = 0; attempt < 8; ++attempt) {
        std::vector<std::optional<std::vector<S>>> desired(static_cast<std::size_t>(n));
        for (int i = 0; i < nr; ++i) {
            std::vector<S> d;
            if (i < m) {
                d = td.ctil.row(static_cast<std::size_t>(jsel[static_cast<std::size_t>(i)]));
                S eta = scalar_traits<S>::from_rational(
                    proto, Rational(Integer(i + 1) << static_cast<unsigned>(attempt)));
                d[static_cast<std::size_t>(jsel[static_cast<std::size_t>(i)])] += eta;
            } else {
                d = detail::unit_vec(static_cast<std::size_t>(n),
                                     static_cast<std::size_t>(ysel[static_cast<std::size_t>(i - m)]),
                                     proto);
            }
            int orig = td.tp.sigma_inv[static_cast<std::size_t>(i)];
            desired[static_cast<std::size_t>(orig)] = unrelabel_vector(d, td.tp);
        }
        auto deriv = detail::derive_T(st, j, c, desired);
        if (!detail::complete_free_rows(deriv, tol)) continue;
        Matrix<S> t = deriv.t;
        Matrix<S> rem = c - j * t;
        auto cp = char_poly(rem, tol);
        std::size_t idx = static_cast<std::size_t>(r0 - m);
        bool coeff_ok;
        if (idx == static_cast<std::size_t>(n)) {
            coeff_ok = true; // a_n = 1, the monic leading coefficient
        } else if constexpr (scalar_traits<S>::exact) {
            coeff_ok = !cp[idx].is_zero();
        } else {
            Real base = max(Real(1, tol.prec()), rem.max_abs());
            Real bound = tol.eps_rank() * base.pow_ui(static_cast<unsigned long>(n - r0 + m)) *
                         Real(static_cast<long>(n), tol.prec()).pow_ui(static_cast<unsigned long>(n));
            coeff_ok = cp[idx].abs() > bound;
        }
        if (!coeff_ok) continue;
        std::optional<typename scalar_traits<S>::Mag> ov;
        if constexpr (!scalar_traits<S>::exact) ov = detail::zero_scale(rem, tol);
        if (static_cast<int>(rem.n() - rank(rem, tol, ov)) != r0 - m) continue;
        return t;
    }
    throw InternalError("build_rank_criterion_T: construction did not verify");
}

/// Prop-style solve under the rank criterion precondition.
template <class S>
std::pair<CMat, CMat> solve_rank_criterion(const JordanStructure& st, const Matrix<S>& j,
                                           const Matrix<S>& c, int k, const ToleranceProfile& tol) {
    Matrix<S> t = build_rank_criterion_T(st, j, c, tol);
    CMat x1 = matrix_kth_root(c - j * t, k, tol);
    CMat x2 = matrix_kth_root(t, k, tol);
    return {x1, x2};
}

/// Z-set membership test for n = 3, r0 = 2, k >= 3, with the coefficient
/// matrix already in Jordan coordinates: the target is outside the image
/// exactly when it has block form [[mu, u], [0, M]] with M nonzero and
/// M^2 = 0.
template <class S>
std::pair<bool, std::string> membership_n3(const JordanStructure& st, const Matrix<S>& c, int k,
                                           const ToleranceProfile& tol) {
    if (st.n != 3 || st.r0() != 2 || k < 3)
        throw OutOfRegime("membership_n3: needs n = 3, r0 = 2, k >= 3");
    auto scale = detail::zero_scale(c, tol);
    bool block_form = detail::entry_is_zero(c.at(1, 0), scale, tol) &&
                      detail::entry_is_zero(c.at(2, 0), scale, tol);
    if (!block_form) return {true, "first column below (1,1) is nonzero"};
    Matrix<S> m22 = c.block(1, 1, 2, 2);
    bool m_zero = true;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t jc = 0; jc < 2; ++jc)
            if (!detail::entry_is_zero(m22.at(i, jc), scale, tol)) m_zero = false;
    if (m_zero) return {true, "lower 2x2 block vanishes"};
    Matrix<S> sq = m22 * m22;
    auto scale2 = [&]() {
        if constexpr (scalar_traits<S>::exact) {
            return scale;
        } else {
            return scale * scale;
        }
    }();
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t jc = 0; jc < 2; ++jc)
            if (!detail::entry_is_zero(sq.at(i, jc), scale2, tol))
                return {true, "lower 2x2 block is not nilpotent"};
    return {false, "target matches the excluded form [[mu,u],[0,M]] with M != 0, M^2 = 0"};
}

/// Low-dimensional constructive engine for n in {3,4}, r0 = 2. Routes:
/// dim W maximal -> basis completion; rank(C21^P) = dim W -> rank criterion;
/// C21^P = 0 with nilpotent C22^P -> row absorption and Miller witness root;
/// otherwise spectral shift. `image_mode` runs the same machinery inside the
/// non-surjective n = 3 cell for targets outside the excluded set.
template <class S>
std::pair<std::pair<CMat, CMat>, std::string> solve_low_dim(const JordanStructure& st,
                                                            const Matrix<S>& j, const Matrix<S>& c,
                                                            int k, const ToleranceProfile& tol,
                                                            bool image_mode = false) {
    int n = st.n;
    int r0 = st.r0();
    if ((n != 3 && n != 4) || r0 != 2) throw OutOfRegime("solve_low_dim: needs n in {3,4}, r0 = 2");
    if (!image_mode && !(n > k)) throw OutOfRegime("solve_low_dim: not in the surjective regime");
    auto td = detail::tail_data(st, c, tol);
    int nr = n - 2;
    const S proto = scalar_traits<S>::make(c.proto(), 0);

    auto finish = [&](const Matrix<S>& t, const char* route) {
        CMat x1 = matrix_kth_root(c - j * t, k, tol);
        CMat x2 = matrix_kth_root(t, k, tol);
        return std::make_pair(std::make_pair(std::move(x1), std::move(x2)), std::string(route));
    };
    auto try_candidates = [&](const std::vector<std::optional<std::vector<S>>>& desired,
                              const char* route) -> std::optional<std::pair<std::pair<CMat, CMat>, std::string>> {
        auto deriv = detail::derive_T(st, j, c, desired);
        std::vector<Matrix<S>> cands;
        {
            auto with_completion = deriv;
            if (detail::complete_free_rows(with_completion, tol)) cands.push_back(with_completion.t);
        }
        cands.push_back(deriv.t); // free rows left zero
        for (const auto& t : cands) {
            try {
                if (!is_kth_power(t, k, tol).first) continue;
                return finish(t, route);
            } catch (const IllConditioned&) {
                continue;
            }
        }
        return std::nullopt;
    };

    if (td.m == 2) {
        // complete the two fixed rows to a basis with unit vectors
        std::vector<int> units;
        RowSpan<S> sp(static_cast<std::size_t>(n), proto, tol);
        for (const auto& r : td.fixed_rows)
            if (!sp.add(r)) throw InternalError("solve_low_dim: fixed rows not independent");
        for (int l = 0; l < n && static_cast<int>(units.size()) < nr; ++l)
            if (sp.add(detail::unit_vec(static_cast<std::size_t>(n), static_cast<std::size_t>(l), proto)))
                units.push_back(l);
        for (long f = 1; f <= n + 4; ++f) {
            std::vector<std::optional<std::vector<S>>> desired(static_cast<std::size_t>(n));
            for (int i = 0; i < nr; ++i) {
                auto d = detail::vec_scale(
                    detail::unit_vec(static_cast<std::size_t>(n),
                                     static_cast<std::size_t>(units[static_cast<std::size_t>(i)]), proto),
                    scalar_traits<S>::make(proto, f));
                int orig = td.tp.sigma_inv[static_cast<std::size_t>(i)];
                desired[static_cast<std::size_t>(orig)] = unrelabel_vector(d, td.tp);
            }
            if (auto r = try_candidates(desired, "low_dim_completion")) return *r;
        }
        throw InternalError("solve_low_dim: completion route failed");
    }

    if (td.mc == td.m) return {solve_rank_criterion(st, j, c, k, tol), "low_dim_rank_criterion"};

    if (td.mc == 0 && td.m == 1) {
        Matrix<S> m22 = td.ctil.block(static_cast<std::size_t>(nr), static_cast<std::size_t>(nr), 2, 2);
        Matrix<S> sq = m22 * m22;
        auto scale = detail::zero_scale(c, tol);
        auto scale2 = [&]() {
            if constexpr (scalar_traits<S>::exact) {
                return scale;
            } else {
                return scale * scale;
            }
        }();
        bool nilpotent = true;
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t jc = 0; jc < 2; ++jc)
                if (!detail::entry_is_zero(sq.at(i, jc), scale2, tol)) nilpotent = false;
        if (nilpotent) {
            if (image_mode)
                throw InternalError("solve_low_dim: nilpotent C22 inside image mode");
            std::vector<std::optional<std::vector<S>>> desired(static_cast<std::size_t>(n));
            for (int i = 0; i < nr; ++i) {
                int orig = td.tp.sigma_inv[static_cast<std::size_t>(i)];
                desired[static_cast<std::size_t>(orig)] =
                    std::vector<S>(static_cast<std::size_t>(n), scalar_traits<S>::make(proto, 0));
            }
            if (auto r = try_candidates(desired, "low_dim_miller")) return *r;
            throw InternalError("solve_low_dim: Miller absorption route failed");
        }
        for (long s = 1; s <= n + 6; ++s) {
            std::vector<std::optional<std::vector<S>>> desired(static_cast<std::size_t>(n));
            for (int i = 0; i < nr; ++i) {
                auto d = detail::vec_scale(
                    detail::unit_vec(static_cast<std::size_t>(n), static_cast<std::size_t>(i), proto),
                    scalar_traits<S>::make(proto, s));
                int orig = td.tp.sigma_inv[static_cast<std::size_t>(i)];
                desired[static_cast<std::size_t>(orig)] = unrelabel_vector(d, td.tp);
            }
            auto deriv = detail::derive_T(st, j, c, desired);
            if (!detail::complete_free_rows(deriv, tol)) continue;
            return finish(deriv.t, "low_dim_shift");
        }
        throw InternalError("solve_low_dim: spectral shift route failed");
    }

    throw InternalError("solve_low_dim: unreachable subcase");
}

/// Witness family of Prop-4.2 type: in the non-surjective regime
/// n <= k(r0-1), the target with C21^P = 0 and C22^P = J_{0,r0} is outside
/// the image; validated statistically via the Miller obstruction.
struct NonSurjectivityWitness {
    QMat c; // exact 0/1 target in the coordinates of J
    int n = 0;
    int r0 = 0;
    int miller_bound = 0; // ceil(n/k)
};

inline NonSurjectivityWitness non_surjectivity_witness(const JordanStructure& st, int k) {
    int n = st.n;
    int r0 = st.r0();
    if (r0 < 2 || n > k * (r0 - 1))
        throw OutOfRegime("non_surjectivity_witness: needs r0 >= 2 and n <= k(r0-1)");
    TailPermutation tp = nilpotent_tail_permutation(st);
    QMat ctil = QMat::zeros(static_cast<std::size_t>(n), static_cast<std::size_t>(n),
                            GaussianRational(0));
    for (int s = 0; s + 1 < r0; ++s)
        ctil.at(static_cast<std::size_t>(n - r0 + s), static_cast<std::size_t>(n - r0 + s + 1)) =
            GaussianRational(1);
    QMat c = QMat::zeros(static_cast<std::size_t>(n), static_cast<std::size_t>(n), GaussianRational(0));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            c.at(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) =
                ctil.at(static_cast<std::size_t>(tp.sigma[static_cast<std::size_t>(a)]),
                        static_cast<std::size_t>(tp.sigma[static_cast<std::size_t>(b)]));
    return {c, n, r0, (n + k - 1) / k};
}

/// One witness trial: is C - JT a k-th power for the supplied T?
template <class S>
std::pair<bool, Partition> witness_trial(const Matrix<S>& j, const Matrix<S>& c, const Matrix<S>& t,
                                         int k, const ToleranceProfile& tol) {
    auto [ok, w] = is_kth_power(c - j * t, k, tol);
    JordanDecomposition dec = jordan_form(c - j * t, tol);
    return {ok, dec.structure.zero_partition()};
}

inline QMat random_int_matrix(std::size_t n, std::mt19937_64& rng, long lo = -3, long hi = 3) {
    std::uniform_int_distribution<long> dist(lo, hi);
    QMat t(n, n, GaussianRational(0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) t.at(i, j) = GaussianRational(dist(rng));
    return t;
}

/// Seeded random-T search used in the open region: accept T when both T and
/// C - JT are k-th powers.
template <class S>
std::optional<std::pair<CMat, CMat>> random_t_search(const Matrix<S>& j, const Matrix<S>& c, int k,
                                                     int retries, const ToleranceProfile& tol) {
    std::mt19937_64 rng(tol.seed);
    std::size_t n = c.n();
    for (int att = 0; att < retries; ++att) {
        QMat tq = random_int_matrix(n, rng);
        Matrix<S> t = [&]() {
            if constexpr (scalar_traits<S>::exact) {
                return tq;
            } else {
                return to_complex(tq, tol.prec());
            }
        }();
        try {
            if (!is_kth_power(t, k, tol).first) continue;
            if (!is_kth_power(c - j * t, k, tol).first) continue;
            CMat x1 = matrix_kth_root(c - j * t, k, tol);
            CMat x2 = matrix_kth_root(t, k, tol);
            return std::make_pair(std::move(x1), std::move(x2));
        } catch (const IllConditioned&) {
            continue;
        } catch (const NonConvergence&) {
            continue;
        }
    }
    return std::nullopt;
}

/// B = A1^{-1} A2 with its Jordan data and the conjugated target:
/// solving X1~^k + J X2~^k = C~ with C~ = g A1^{-1} C g^{-1}, g = P^{-1},
/// gives X_i = g^{-1} X_i~ g for the original problem.
inline ReducedInstance reduce(const ProblemInstance& inst) {
    const ToleranceProfile& tol = inst.profile;
    if (!inst.a1.is_square() || !inst.a2.is_square() || inst.a1.n() != inst.a2.n())
        throw DimensionMismatch("reduce: A1, A2 must be square of equal size");
    if (inst.k < 2) throw PreconditionViolated("reduce: k >= 2");
    std::size_t n = inst.a1.n();
    if (rank(inst.a1, tol) != n) throw Singular("reduce: A1 is singular");
    ReducedInstance ri;
    ri.b = inverse(inst.a1, tol) * inst.a2;
    ri.dec = jordan_form(ri.b, tol);
    if (static_cast<int>(n - rank(inst.a2, tol)) != ri.dec.structure.r0())
        throw InternalError("reduce: nullity(A2) disagrees with r0 of the Jordan form");
    if (inst.target) {
        if (!inst.target->is_square() || inst.target->n() != n)
            throw DimensionMismatch("reduce: target shape");
        ri.has_target = true;
        QMat d = inverse(inst.a1, tol) * *inst.target;
        if (ri.dec.exact)
            ri.reduced_target_exact = ri.dec.Pinv_exact * d * ri.dec.P_exact;
        ri.reduced_target = ri.dec.P_inv * to_complex(d, tol.prec()) * ri.dec.P;
    }
    return ri;
}

namespace detail {

template <class S>
struct ReducedOutcome {
    SolveStatus status = SolveStatus::Unresolved;
    std::optional<std::pair<CMat, CMat>> xs;
    std::string route;
    std::string certificate;
};

template <class S>
ReducedOutcome<S> solve_reduced(const JordanStructure& st, const Matrix<S>& j, const Matrix<S>& c,
                                int k, int retries, const ToleranceProfile& tol) {
    ReducedOutcome<S> out;
    int n = st.n;
    int r0 = st.r0();
    int n0 = st.n0();
    Verdict v = verdict(n, k, r0);

    if (r0 == 0) {
        out.xs = solve_invertible(j, c, k, tol);
        out.route = "invertible";
        out.status = SolveStatus::Solved;
        return out;
    }
    if (r0 == 1 && n0 == n) {
        out.xs = solve_full_nilpotent(c, k, tol);
        out.route = "full_nilpotent";
        out.status = SolveStatus::Solved;
        return out;
    }
    if (r0 == 1) {
        out.xs = solve_one_nilpotent_block(st, j, c, k, tol);
        out.route = "one_nilpotent_block";
        out.status = SolveStatus::Solved;
        return out;
    }
    if ((n == 3 || n == 4) && v.tag == VerdictTag::Surjective) {
        auto [xs, route] = solve_low_dim(st, j, c, k, tol, false);
        out.xs = xs;
        out.route = route;
        out.status = SolveStatus::Solved;
        return out;
    }
    if (n == 3 && r0 == 2 && v.tag == VerdictTag::NotSurjective) {
        auto [in_image, cert] = membership_n3(st, c, k, tol);
        if (!in_image) {
            out.status = SolveStatus::NotInImage;
            out.certificate = cert;
            out.route = "membership_n3";
            return out;
        }
        auto [xs, route] = solve_low_dim(st, j, c, k, tol, true);
        out.xs = xs;
        out.route = "membership_n3+" + route;
        out.status = SolveStatus::Solved;
        return out;
    }
    // NotSurjective (n >= 4) or the open region: rank criterion, then search.
    // A failed attempt here (precondition, tolerance) is not fatal; the
    // bounded search and an honest Unresolved remain.
    try {
        out.xs = solve_rank_criterion(st, j, c, k, tol);
        out.route = "rank_criterion";
        out.status = SolveStatus::Solved;
        return out;
    } catch (const PreconditionViolated&) {
    } catch (const InternalError&) {
    } catch (const IllConditioned&) {
    } catch (const NonConvergence&) {
    }
    if (auto found = random_t_search(j, c, k, retries, tol)) {
        out.xs = *found;
        out.route = "random_search";
        out.status = SolveStatus::Solved;
        return out;
    }
    out.status = SolveStatus::Unresolved;
    out.route = "exhausted";
    out.certificate = v.tag == VerdictTag::Unknown
                          ? "open region: no construction applies and the bounded search failed"
                          : "non-surjective regime without a membership test";
    return out;
}

} // namespace detail

/// Full pipeline: reduce, route through the constructive engine, undo the
/// conjugations and verify the residual against the original data.
inline DecompositionResult solve(const ProblemInstance& inst) {
    const ToleranceProfile& tol = inst.profile;
    const mpfr_prec_t p = tol.prec();
    if (!inst.target) throw PreconditionViolated("solve: target C is required");
    ReducedInstance ri = reduce(inst);
    const JordanStructure& st = ri.dec.structure;

    DecompositionResult res;
    res.residual = Real(0, p);
    std::optional<std::pair<CMat, CMat>> xs;
    if (ri.dec.exact && ri.reduced_target_exact) {
        auto out = detail::solve_reduced<GaussianRational>(st, ri.dec.J_exact,
                                                           *ri.reduced_target_exact, inst.k,
                                                           inst.retries, tol);
        res.status = out.status;
        res.route = out.route;
        res.certificate = out.certificate;
        xs = out.xs;
    } else {
        auto out = detail::solve_reduced<Complex>(st, ri.dec.J, ri.reduced_target, inst.k,
                                                  inst.retries, tol);
        res.status = out.status;
        res.route = out.route;
        res.certificate = out.certificate;
        xs = out.xs;
    }
    if (res.status != SolveStatus::Solved) return res;
    if (!xs) throw InternalError("solve: solved without solution matrices");

    res.x1 = ri.dec.P * xs->first * ri.dec.P_inv;
    res.x2 = ri.dec.P * xs->second * ri.dec.P_inv;
    CMat a1c = to_complex(inst.a1, p);
    CMat a2c = to_complex(inst.a2, p);
    CMat cc = to_complex(*inst.target, p);
    CMat lhs = a1c * res.x1.pow(static_cast<unsigned long>(inst.k)) +
               a2c * res.x2.pow(static_cast<unsigned long>(inst.k));
    res.residual = (lhs - cc).norm_inf();
    if (!(res.residual <= tol.eps_residual()))
        throw IllConditioned("solve: residual verification failed");
    return res;
}

} // namespace waring
