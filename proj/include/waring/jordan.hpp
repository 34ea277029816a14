#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "waring/linalg.hpp"
#include "waring/matrix.hpp"
#include "waring/partition.hpp"
#include "waring/poly.hpp"

namespace waring {

struct JordanBlock {
    Complex eig;                 // eigenvalue at working precision
    GaussianRational exact_eig;  // meaningful iff `exact`
    bool exact = false;
    bool is_zero = false;
    int size = 0;
};

/// Block data of a Jordan form in canonical order: blocks with nonzero
/// eigenvalue first (sorted by |eig| desc, arg asc, then size desc), zero
/// blocks last with weakly decreasing sizes.
struct JordanStructure {
    std::vector<JordanBlock> blocks;
    int n = 0;

    int r0() const {
        int c = 0;
        for (const auto& b : blocks) c += b.is_zero ? 1 : 0;
        return c;
    }
    int rprime() const { return static_cast<int>(blocks.size()) - r0(); }
    int n0() const {
        int c = 0;
        for (const auto& b : blocks) c += b.is_zero ? b.size : 0;
        return c;
    }
    Partition zero_partition() const {
        std::vector<int> parts;
        for (const auto& b : blocks)
            if (b.is_zero) parts.push_back(b.size);
        return parts.empty() ? Partition() : Partition(parts);
    }
    int block_offset(std::size_t idx) const {
        int o = 0;
        for (std::size_t i = 0; i < idx; ++i) o += blocks[i].size;
        return o;
    }
    void validate_canonical() const {
        bool seen_zero = false;
        int last_zero_size = 0;
        for (const auto& b : blocks) {
            if (b.is_zero) {
                if (seen_zero && b.size > last_zero_size)
                    throw BadOrdering("zero blocks must have weakly decreasing sizes");
                seen_zero = true;
                last_zero_size = b.size;
            } else if (seen_zero) {
                throw BadOrdering("nonzero blocks must precede zero blocks");
            }
        }
    }
};

struct JordanDecomposition {
    JordanStructure structure;
    CMat P;      // B = P J P^{-1}, residual-verified
    CMat P_inv;
    CMat J;
    bool exact = false;  // true when P, J have exact rational counterparts
    QMat P_exact, Pinv_exact, J_exact;
    Real similarity_residual;

    CMat jprime() const {
        int d = structure.n - structure.n0();
        return J.block(0, 0, static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    }
};

inline std::tuple<int, int, int, Partition> zero_stats(const JordanDecomposition& dec) {
    const auto& s = dec.structure;
    return {s.r0(), s.rprime(), s.n0(), s.zero_partition()};
}

/// The permutation sigma of Section-4 style reindexing: conjugating by the
/// returned matrix P moves the last row of each zero block into the final r0
/// positions, i.e. C^P = P^{-1} C P has row (n - r0 + s) equal to row ell_s
/// of C (columns relabelled the same way).
struct TailPermutation {
    std::vector<int> sigma;      // 0-based images
    std::vector<int> sigma_inv;
    std::vector<int> ell;        // 0-based indices of the last row of each zero block
    QMat P;

    int image(int i) const { return sigma[static_cast<std::size_t>(i)]; }
};

inline TailPermutation nilpotent_tail_permutation(const JordanStructure& st) {
    st.validate_canonical();
    int n = st.n;
    int n0 = st.n0();
    int r0 = st.r0();
    TailPermutation tp;
    tp.ell.clear();
    int acc = n - n0;
    for (const auto& b : st.blocks)
        if (b.is_zero) {
            acc += b.size;
            tp.ell.push_back(acc - 1);
        }
    tp.sigma.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        if (i < n - n0) {
            tp.sigma[static_cast<std::size_t>(i)] = i;
            continue;
        }
        auto it = std::find(tp.ell.begin(), tp.ell.end(), i);
        if (it != tp.ell.end()) {
            int s = static_cast<int>(it - tp.ell.begin());
            tp.sigma[static_cast<std::size_t>(i)] = n - r0 + s;
        } else {
            int before = 0;
            for (int l : tp.ell) before += (l < i) ? 1 : 0;
            tp.sigma[static_cast<std::size_t>(i)] = i - before;
        }
    }
    tp.sigma_inv.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) tp.sigma_inv[static_cast<std::size_t>(tp.sigma[static_cast<std::size_t>(i)])] = i;
    tp.P = QMat::zeros(static_cast<std::size_t>(n), static_cast<std::size_t>(n), GaussianRational(0));
    for (int i = 0; i < n; ++i)
        tp.P.at(static_cast<std::size_t>(i), static_cast<std::size_t>(tp.sigma[static_cast<std::size_t>(i)])) =
            GaussianRational(1);
    return tp;
}

/// C^P = P^{-1} C P computed by index relabelling.
template <class S>
Matrix<S> relabel_matrix(const Matrix<S>& c, const TailPermutation& tp) {
    std::size_t n = c.n();
    Matrix<S> r = Matrix<S>::zeros(n, n, c.proto());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            r.at(i, j) = c.at(static_cast<std::size_t>(tp.sigma_inv[i]), static_cast<std::size_t>(tp.sigma_inv[j]));
    return r;
}

/// Relabels a row vector the same way columns of C^P are relabelled.
template <class S>
std::vector<S> relabel_vector(const std::vector<S>& v, const TailPermutation& tp) {
    std::vector<S> r(v.size(), v.empty() ? S() : v[0]);
    for (std::size_t j = 0; j < v.size(); ++j) r[j] = v[static_cast<std::size_t>(tp.sigma_inv[j])];
    return r;
}

template <class S>
std::vector<S> unrelabel_vector(const std::vector<S>& v, const TailPermutation& tp) {
    std::vector<S> r(v.size(), v.empty() ? S() : v[0]);
    for (std::size_t j = 0; j < v.size(); ++j) r[j] = v[static_cast<std::size_t>(tp.sigma[j])];
    return r;
}

namespace detail {

struct EigRec {
    Complex val;
    GaussianRational exact;
    bool is_exact = false;
    bool is_zero = false;
    int mult = 0;
};

/// Rank threshold scale for a power M^j: anchored to the power's own
/// max-norm, with a floor of (eps_residual/eps_rank) * max(1, |M|)^j so that
/// a numerically vanishing power is still recognized as zero.
inline Real power_rank_scale(const Real& base, unsigned long j, const Real& own_maxabs,
                             const ToleranceProfile& tol) {
    Real floor = Real::pow2(tol.eps_residual_log2 - tol.eps_rank_log2, tol.prec()) *
                 base.pow_ui(j);
    return max(own_maxabs, floor);
}

/// Weyr sequence for one eigenvalue: w[j-1] = #blocks of size >= j, obtained
/// from nullities of powers of N = M - lambda I.
template <class S>
std::vector<int> weyr_sequence(const Matrix<S>& n_mat, int alg_mult, const ToleranceProfile& tol) {
    std::size_t n = n_mat.n();
    std::vector<int> weyr;
    int prev = 0;
    Matrix<S> power = Matrix<S>::identity(n, n_mat.proto());
    typename scalar_traits<S>::Mag base = n_mat.max_abs();
    if constexpr (!scalar_traits<S>::exact) base = max(base, Real(1, tol.prec()));
    for (int j = 1; j <= static_cast<int>(n); ++j) {
        power = power * n_mat;
        std::optional<typename scalar_traits<S>::Mag> scale;
        if constexpr (!scalar_traits<S>::exact)
            scale = power_rank_scale(base, static_cast<unsigned long>(j), power.max_abs(), tol);
        int nul = static_cast<int>(n) - static_cast<int>(rank(power, tol, scale));
        int w = nul - prev;
        prev = nul;
        if (w <= 0) break;
        if (!weyr.empty() && w > weyr.back())
            throw IllConditioned("inconsistent Weyr sequence at working tolerance");
        weyr.push_back(w);
        if (nul >= alg_mult) break;
    }
    int total = 0;
    for (int w : weyr) total += w;
    if (total != alg_mult)
        throw IllConditioned("generalized eigenspace dimension disagrees with multiplicity");
    return weyr;
}

/// Jordan chains for nilpotent action N on its generalized eigenspace.
/// Returns chains ordered by decreasing length; chain = [N^{L-1}v, ..., Nv, v].
template <class S>
std::vector<std::vector<std::vector<S>>> eigen_chains(const Matrix<S>& n_mat,
                                                      const std::vector<int>& weyr,
                                                      const ToleranceProfile& tol) {
    std::size_t n = n_mat.n();
    int s = static_cast<int>(weyr.size());
    typename scalar_traits<S>::Mag base = n_mat.max_abs();
    if constexpr (!scalar_traits<S>::exact) base = max(base, Real(1, tol.prec()));

    std::vector<std::vector<std::vector<S>>> kernels(static_cast<std::size_t>(s) + 1);
    Matrix<S> power = Matrix<S>::identity(n, n_mat.proto());
    for (int j = 1; j <= s; ++j) {
        power = power * n_mat;
        std::optional<typename scalar_traits<S>::Mag> scale;
        if constexpr (!scalar_traits<S>::exact)
            scale = power_rank_scale(base, static_cast<unsigned long>(j), power.max_abs(), tol);
        kernels[static_cast<std::size_t>(j)] = nullspace(power, tol, scale);
    }

    auto apply = [&](std::vector<S> v, int times) {
        for (int t = 0; t < times; ++t) {
            std::vector<S> w(n, scalar_traits<S>::make(n_mat.proto(), 0));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) w[i] += n_mat.at(i, j) * v[j];
            v = std::move(w);
        }
        return v;
    };

    std::vector<std::pair<std::vector<S>, int>> tops; // (top vector, length)
    for (int j = s; j >= 1; --j) {
        int want = weyr[static_cast<std::size_t>(j - 1)] - (j < s ? weyr[static_cast<std::size_t>(j)] : 0);
        RowSpan<S> span(n, n_mat.proto(), tol);
        if (j >= 2)
            for (const auto& v : kernels[static_cast<std::size_t>(j - 1)])
                if (!span.add(v)) throw IllConditioned("kernel basis not independent at tolerance");
        for (const auto& [top, len] : tops) {
            if (!span.add(apply(top, len - j)))
                throw IllConditioned("chain representatives dependent at tolerance");
        }
        // Greedy max-residual selection: among the kernel basis, repeatedly
        // take the candidate farthest from the current span. Any candidate
        // that passes the independence test would be correct; the farthest
        // one keeps the transformation well conditioned.
        const auto& cands = kernels[static_cast<std::size_t>(j)];
        std::vector<bool> used(cands.size(), false);
        for (int got = 0; got < want; ++got) {
            std::size_t best = cands.size();
            typename scalar_traits<S>::Mag best_ratio = scalar_traits<S>::mag(
                scalar_traits<S>::make(n_mat.proto(), 0));
            for (std::size_t ci = 0; ci < cands.size(); ++ci) {
                if (used[ci]) continue;
                auto ratio = span.residual_ratio(cands[ci]);
                if (best == cands.size() || best_ratio < ratio) {
                    best = ci;
                    best_ratio = ratio;
                }
            }
            if (best == cands.size() || !span.add(cands[best]))
                throw IllConditioned("could not extract enough Jordan chains at tolerance");
            used[best] = true;
            tops.emplace_back(cands[best], j);
        }
    }

    std::vector<std::vector<std::vector<S>>> chains;
    for (const auto& [top, len] : tops) {
        std::vector<std::vector<S>> chain;
        for (int t = len - 1; t >= 0; --t) chain.push_back(apply(top, t));
        // normalize by the largest entry magnitude across the chain
        typename scalar_traits<S>::Mag big = scalar_traits<S>::mag(
            scalar_traits<S>::make(n_mat.proto(), 0));
        for (const auto& v : chain)
            for (const auto& x : v) {
                auto a = scalar_traits<S>::mag(x);
                if (big < a) big = a;
            }
        bool positive;
        if constexpr (scalar_traits<S>::exact) {
            positive = !(big == Rational(0));
        } else {
            positive = !big.is_zero();
        }
        if (positive) {
            S divisor;
            if constexpr (scalar_traits<S>::exact) {
                divisor = GaussianRational(big);
            } else {
                divisor = Complex(big, Real(0, big.prec()));
            }
            for (auto& v : chain)
                for (auto& x : v) x /= divisor;
        }
        chains.push_back(std::move(chain));
    }
    std::stable_sort(chains.begin(), chains.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return chains;
}

struct EigData {
    EigRec rec;
    std::vector<std::vector<std::vector<Complex>>> chains_c;
    std::vector<std::vector<std::vector<GaussianRational>>> chains_q;
    bool chains_exact = false;
};

inline void sort_eig_order(std::vector<EigData>& eigs, const ToleranceProfile& tol) {
    mpfr_prec_t p = tol.prec();
    auto key = [&](const EigRec& r) {
        Real a = r.val.abs();
        Real im = r.val.imag();
        if (im.is_zero()) im = Real(0, p);
        Real arg = atan2(im, r.val.real());
        return std::make_pair(a, arg);
    };
    std::stable_sort(eigs.begin(), eigs.end(), [&](const EigData& x, const EigData& y) {
        if (x.rec.is_zero != y.rec.is_zero) return !x.rec.is_zero; // nonzero first
        if (x.rec.is_zero) return false;
        auto [ax, gx] = key(x.rec);
        auto [ay, gy] = key(y.rec);
        if (ax != ay) return ay < ax; // |eig| descending
        return gx < gy;               // arg ascending
    });
}

/// Shared tail of both Jordan paths: assembles structure, P, J and verifies
/// the similarity residual.
template <class MatSrc>
JordanDecomposition assemble_jordan(const MatSrc& b, std::vector<EigData> eigs,
                                    const ToleranceProfile& tol) {
    constexpr bool src_exact = std::is_same_v<MatSrc, QMat>;
    const mpfr_prec_t p = tol.prec();
    std::size_t n = b.n();
    sort_eig_order(eigs, tol);

    JordanDecomposition dec;
    dec.structure.n = static_cast<int>(n);
    bool all_exact = src_exact;
    for (const auto& e : eigs)
        if (!e.chains_exact) all_exact = false;

    CMat pmat = CMat::zeros(n, n, Complex(p));
    QMat pmat_q = QMat::zeros(n, n, GaussianRational(0));
    CMat jmat = CMat::zeros(n, n, Complex(p));
    QMat jmat_q = QMat::zeros(n, n, GaussianRational(0));

    std::size_t col = 0;
    for (const auto& e : eigs) {
        std::size_t nchains = e.chains_exact ? e.chains_q.size() : e.chains_c.size();
        for (std::size_t ci = 0; ci < nchains; ++ci) {
            std::size_t len = e.chains_exact ? e.chains_q[ci].size() : e.chains_c[ci].size();
            JordanBlock blk;
            blk.eig = e.rec.val;
            blk.exact = e.rec.is_exact;
            blk.exact_eig = e.rec.exact;
            blk.is_zero = e.rec.is_zero;
            blk.size = static_cast<int>(len);
            dec.structure.blocks.push_back(blk);
            for (std::size_t t = 0; t < len; ++t) {
                for (std::size_t i = 0; i < n; ++i) {
                    if (e.chains_exact) {
                        pmat_q.at(i, col + t) = e.chains_q[ci][t][i];
                        pmat.at(i, col + t) = Complex(e.chains_q[ci][t][i], p);
                    } else {
                        pmat.at(i, col + t) = e.chains_c[ci][t][i];
                    }
                }
                jmat.at(col + t, col + t) = e.rec.val;
                if (all_exact) jmat_q.at(col + t, col + t) = e.rec.exact;
                if (t + 1 < len) {
                    jmat.at(col + t, col + t + 1) = Complex(1, p);
                    if (all_exact) jmat_q.at(col + t, col + t + 1) = GaussianRational(1);
                }
            }
            col += len;
        }
    }
    if (col != n) throw InternalError("jordan_form: block sizes do not sum to n");

    dec.J = jmat;
    dec.P = pmat;
    dec.exact = all_exact;
    if constexpr (src_exact) {
        if (all_exact) {
            dec.J_exact = jmat_q;
            dec.P_exact = pmat_q;
            if (!(b * pmat_q == pmat_q * jmat_q))
                throw InternalError("jordan_form: exact similarity identity failed");
            dec.Pinv_exact = inverse(pmat_q, tol);
            dec.P_inv = to_complex(dec.Pinv_exact, p);
        }
    }
    CMat bc = [&]() {
        if constexpr (src_exact) {
            return to_complex(b, p);
        } else {
            return b;
        }
    }();
    if (!dec.exact) {
        try {
            dec.P_inv = inverse(dec.P, tol);
        } catch (const Singular&) {
            throw IllConditioned("jordan_form: transformation numerically singular");
        }
    }
    dec.similarity_residual = (dec.P * dec.J * dec.P_inv - bc).norm_inf();
#ifdef WARING_DEBUG_JORDAN
    fprintf(stderr, "[jordan] residual=%s exact=%d\n",
            dec.similarity_residual.to_decimal_string(8).c_str(), (int)dec.exact);
#endif
    if (!(dec.similarity_residual <= tol.eps_residual()))
        throw IllConditioned("jordan_form: similarity residual exceeds tolerance");
    return dec;
}

inline void check_separation(const std::vector<EigRec>& recs, const ToleranceProfile& tol) {
    Real lim = Real(4, tol.prec()) * tol.eps_cluster();
    for (std::size_t i = 0; i < recs.size(); ++i) {
        for (std::size_t j = i + 1; j < recs.size(); ++j) {
            bool both_exact = recs[i].is_exact && recs[j].is_exact;
            if (both_exact) continue; // provably distinct values
            if ((recs[i].val - recs[j].val).abs() < lim)
                throw IllConditioned("eigenvalue clusters ambiguous at eps_cluster");
        }
    }
}

} // namespace detail

/// Jordan canonical form of an exact matrix. Eigenvalues come from the exact
/// characteristic polynomial: the power of z is split off exactly, the rest
/// is squarefree-factorized over Q(i), and each factor is solved at working
/// precision with exact recognition of rational roots. Chains for exact
/// eigenvalues are computed in exact arithmetic, so conjugates of Jordan
/// forms with rational eigenvalues round-trip exactly.
inline JordanDecomposition jordan_form(const QMat& b, const ToleranceProfile& tol) {
    std::size_t n = b.n();
    const mpfr_prec_t p = tol.prec();
    std::vector<GaussianRational> low = berkowitz_char_poly(b);
    QPoly full(low.begin(), low.end());
    full.push_back(GaussianRational(1));

    std::size_t zmult = 0;
    while (zmult < n && full[zmult].is_zero()) ++zmult;
    QPoly g(full.begin() + static_cast<long>(zmult), full.end());

    std::vector<detail::EigRec> recs;
    if (zmult > 0) {
        detail::EigRec r;
        r.val = Complex(p);
        r.exact = GaussianRational(0);
        r.is_exact = true;
        r.is_zero = true;
        r.mult = static_cast<int>(zmult);
        recs.push_back(r);
    }
    if (qpoly_degree(g) >= 1) {
        for (const auto& [factor, mult] : qpoly_squarefree(g)) {
            if (qpoly_degree(factor) == 1) {
                detail::EigRec r;
                r.exact = -factor[0] / factor[1];
                r.val = Complex(r.exact, p);
                r.is_exact = true;
                r.mult = mult;
                recs.push_back(r);
                continue;
            }
            CPoly fc = to_complex(factor, p);
            for (const auto& root : poly_roots(fc, tol)) {
                detail::EigRec r;
                r.val = root;
                r.mult = mult;
                Rational re_q, im_q;
                if (rational_reconstruct(root.real(), re_q) && rational_reconstruct(root.imag(), im_q)) {
                    GaussianRational cand(re_q, im_q);
                    if (qpoly_eval(factor, cand).is_zero()) {
                        r.exact = cand;
                        r.is_exact = true;
                        r.val = Complex(cand, p);
                    }
                }
                recs.push_back(r);
            }
        }
    }
    int total = 0;
    for (const auto& r : recs) total += r.mult;
    if (total != static_cast<int>(n)) throw InternalError("jordan_form: eigenvalue multiplicities");
    for (const auto& r : recs)
        if (!r.is_zero && !r.is_exact && r.val.abs() <= tol.eps_cluster())
            throw IllConditioned("nonzero eigenvalue indistinguishable from zero at eps_cluster");
    detail::check_separation(recs, tol);

    std::vector<detail::EigData> eigs;
    CMat bc = to_complex(b, p);
    for (const auto& r : recs) {
        detail::EigData e;
        e.rec = r;
        if (r.is_exact) {
            QMat nq = b - r.exact * QMat::identity(n, GaussianRational(0));
            auto weyr = detail::weyr_sequence(nq, r.mult, tol);
            e.chains_q = detail::eigen_chains(nq, weyr, tol);
            e.chains_exact = true;
        } else {
            CMat nc = bc - r.val * CMat::identity(n, Complex(p));
            auto weyr = detail::weyr_sequence(nc, r.mult, tol);
            e.chains_c = detail::eigen_chains(nc, weyr, tol);
        }
        eigs.push_back(std::move(e));
    }
    return detail::assemble_jordan(b, std::move(eigs), tol);
}

/// Jordan canonical form of an approximate matrix. Eigenvalue locations come
/// from the characteristic polynomial roots clustered at eps_cluster; the
/// algebraic multiplicity of 0 is determined by the thresholded rank of M^n
/// so that r0 always equals the numerical nullity.
inline JordanDecomposition jordan_form(const CMat& m, const ToleranceProfile& tol) {
    std::size_t n = m.n();
    const mpfr_prec_t p = tol.prec();
    std::vector<Complex> low = hessenberg_char_poly(m, tol);
    CPoly full(low.begin(), low.end());
    full.emplace_back(1, p);
    std::vector<Complex> roots = poly_roots(full, tol);

    std::size_t zmult = 0;
    if (rank(m, tol) < n) {
        Real base = max(Real(1, p), m.max_abs());
        CMat mp = m.pow(static_cast<unsigned long>(n));
        zmult = n - rank(mp, tol,
                         std::optional<Real>(detail::power_rank_scale(
                             base, static_cast<unsigned long>(n), mp.max_abs(), tol)));
    }
    std::vector<std::size_t> order(roots.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t bb) { return roots[a].abs() < roots[bb].abs(); });
    std::vector<Complex> nonzero_roots;
    for (std::size_t i = zmult; i < order.size(); ++i) nonzero_roots.push_back(roots[order[i]]);
    for (const auto& r : nonzero_roots)
        if (r.abs() <= tol.eps_cluster())
            throw IllConditioned("root near zero contradicts numerical rank");

    // single-linkage clustering at radius eps_cluster
    std::size_t k = nonzero_roots.size();
    std::vector<std::size_t> parent(k);
    for (std::size_t i = 0; i < k; ++i) parent[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if ((nonzero_roots[i] - nonzero_roots[j]).abs() <= tol.eps_cluster())
                parent[find(i)] = find(j);
    std::vector<detail::EigRec> recs;
    if (zmult > 0) {
        detail::EigRec r;
        r.val = Complex(p);
        r.is_zero = true;
        r.mult = static_cast<int>(zmult);
        recs.push_back(r);
    }
    auto cpoly_derivative = [&](const CPoly& f) {
        CPoly d;
        for (std::size_t i = 1; i < f.size(); ++i) d.push_back(Complex(static_cast<long>(i), p) * f[i]);
        return d;
    };
    // A cluster mean of multiplicity m is only accurate to ~eps^{1/m}; the
    // (m-1)-th derivative has a well-conditioned simple root at the cluster
    // center, so polish the center with Newton on it.
    auto refine_center = [&](Complex z, int mult) {
        CPoly f = full;
        for (int t = 0; t + 1 < mult; ++t) f = cpoly_derivative(f);
        CPoly fd = cpoly_derivative(f);
        for (int it = 0; it < 512; ++it) {
            Complex fv = cpoly_eval(f, z);
            Complex dv = cpoly_eval(fd, z);
            if (dv.is_zero()) break;
            Complex step = fv / dv;
            z -= step;
            if (step.abs() <= Real::pow2(-static_cast<long>(tol.precision_bits) - 8, p) *
                                  max(Real(1, p), z.abs()))
                break;
        }
        return z;
    };
    // Roots of an m-fold eigenvalue come out of the solver spread ~eps^{1/m},
    // possibly wider than the clustering radius, so clusters only locate
    // candidates. The algebraic multiplicity at a candidate comes from the
    // thresholded rank of (M - cI)^n, which tolerates off-center candidates;
    // refining at that multiplicity is then well conditioned. Iterate the
    // two steps to a fixed point and deduplicate coincident candidates.
    auto alg_mult_at = [&](const Complex& c) -> int {
        CMat shifted = m - c * CMat::identity(n, Complex(p));
        Real sbase = max(Real(1, p), shifted.max_abs());
        CMat pw = shifted.pow(static_cast<unsigned long>(n));
        return static_cast<int>(n) -
               static_cast<int>(rank(pw, tol,
                                     std::optional<Real>(detail::power_rank_scale(
                                         sbase, static_cast<unsigned long>(n), pw.max_abs(), tol))));
    };
    std::vector<std::pair<Complex, int>> resolved;
    for (std::size_t i = 0; i < k; ++i) {
        if (find(i) != i) continue;
        Complex sum(p);
        int cnt = 0;
        for (std::size_t j = 0; j < k; ++j)
            if (find(j) == i) {
                sum += nonzero_roots[j];
                ++cnt;
            }
        Complex c = sum * Complex(Rational(1, cnt), p);
        int mult = cnt;
        bool stable = false;
        for (std::size_t round = 0; round < n + 2; ++round) {
            c = refine_center(c, mult);
            int m2 = alg_mult_at(c);
            if (m2 <= 0) break;
            if (m2 == mult) {
                stable = true;
                break;
            }
            mult = m2;
        }
        if (!stable) throw IllConditioned("eigenvalue multiplicity did not stabilize at tolerance");
        resolved.emplace_back(c, mult);
    }
    for (const auto& [center, mult] : resolved) {
        bool dup = false;
        for (const auto& r : recs) {
            if (r.is_zero) continue;
            if ((r.val - center).abs() <= tol.eps_cluster()) {
                if (r.mult != mult)
                    throw IllConditioned("coincident eigenvalue candidates disagree on multiplicity");
                dup = true;
                break;
            }
        }
        if (dup) continue;
        detail::EigRec r;
        r.val = center;
        r.mult = mult;
        recs.push_back(r);
    }
    int total = 0;
    for (const auto& r : recs) total += r.mult;
    if (total != static_cast<int>(n))
        throw IllConditioned("jordan_form: eigenvalue multiplicities do not sum to n at tolerance");
    detail::check_separation(recs, tol);

    std::vector<detail::EigData> eigs;
    for (const auto& r : recs) {
        detail::EigData e;
        e.rec = r;
        CMat nc = m - r.val * CMat::identity(n, Complex(p));
        auto weyr = detail::weyr_sequence(nc, r.mult, tol);
        e.chains_c = detail::eigen_chains(nc, weyr, tol);
        eigs.push_back(std::move(e));
    }
    return detail::assemble_jordan(m, std::move(eigs), tol);
}

} // namespace waring
