#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "waring/jordan.hpp"
#include "waring/partition.hpp"

namespace waring {

/// Jordan structure of J_{0,n}^k: for n > k, (k - m) blocks of size
/// floor(n/k) and m blocks of size ceil(n/k) where m = n mod k; for n <= k
/// the power vanishes, giving n blocks of size 1.
inline Partition miller_power(int n, int k) {
    if (n < 1 || k < 2) throw PreconditionViolated("miller_power: need n >= 1, k >= 2");
    if (n <= k) return Partition(std::vector<int>(static_cast<std::size_t>(n), 1));
    int m = n % k;
    std::vector<int> parts;
    for (int i = 0; i < m; ++i) parts.push_back(n / k + 1);
    for (int i = 0; i < k - m; ++i) parts.push_back(n / k);
    return Partition(std::move(parts));
}

/// Blockwise Miller image of a nilpotent partition.
inline Partition partition_power(const Partition& p, int k) {
    std::vector<int> parts;
    for (int part : p.parts) {
        Partition mp = miller_power(part, k);
        parts.insert(parts.end(), mp.parts.begin(), mp.parts.end());
    }
    return parts.empty() ? Partition() : Partition(std::move(parts));
}

/// Exhaustive witness search: the lexicographically largest partition p of
/// the same weight with partition_power(p, k) == target, if any.
inline std::optional<Partition> kth_power_witness(const Partition& target, int k) {
    int w = target.weight();
    if (w > 16) throw PreconditionViolated("kth_power_witness: weight exceeds desk bound 16");
    if (w == 0) return Partition();
    std::optional<Partition> best;
    for (const Partition& cand : all_partitions(w)) {
        if (partition_power(cand, k) != target) continue;
        if (!best || lex_less(*best, cand)) best = cand;
    }
    return best;
}

/// A matrix is a k-th power iff the zero part of its Jordan structure is a
/// blockwise Miller image; the invertible part never obstructs.
template <class S>
std::pair<bool, std::optional<Partition>> is_kth_power(const Matrix<S>& m, int k,
                                                       const ToleranceProfile& tol) {
    if (k < 2) throw PreconditionViolated("is_kth_power: k >= 2");
    JordanDecomposition dec = jordan_form(m, tol);
    Partition zp = dec.structure.zero_partition();
    if (zp.empty()) return {true, Partition()};
    auto w = kth_power_witness(zp, k);
    return {w.has_value(), w};
}

namespace detail {

/// Exact nilpotent k-th root in Jordan coordinates: an integer 0/1 matrix Y
/// with Y^k equal to the direct sum of J_{0,m_s} over the target partition.
/// Built from the witness partition by reading off the Jordan chains of the
/// k-th power of its shift matrix (each chain is a residue class mod k).
inline QMat nilpotent_root_block(const Partition& target, const Partition& witness, int k) {
    int n0 = target.weight();
    if (witness.weight() != n0) throw InternalError("nilpotent_root_block: weight mismatch");

    struct ChainRec {
        int len;
        std::vector<int> idx; // 0-based coordinates in witness space
    };
    std::vector<ChainRec> chains;
    int offset = 0;
    for (int w : witness.parts) {
        for (int c = 1; c <= std::min(k, w); ++c) {
            ChainRec rec;
            for (int i = c; i <= w; i += k) rec.idx.push_back(offset + i - 1);
            rec.len = static_cast<int>(rec.idx.size());
            chains.push_back(std::move(rec));
        }
        offset += w;
    }
    std::stable_sort(chains.begin(), chains.end(),
                     [](const ChainRec& a, const ChainRec& b) { return a.len > b.len; });
    if (chains.size() != target.parts.size())
        throw InternalError("nilpotent_root_block: chain count mismatch");
    for (std::size_t s = 0; s < chains.size(); ++s)
        if (chains[s].len != target.parts[s])
            throw InternalError("nilpotent_root_block: witness does not map to target");

    std::size_t n = static_cast<std::size_t>(n0);
    QMat q = QMat::zeros(n, n, GaussianRational(0));
    int col = 0;
    for (const auto& ch : chains)
        for (int i = 0; i < ch.len; ++i)
            q.at(static_cast<std::size_t>(ch.idx[static_cast<std::size_t>(i)]),
                 static_cast<std::size_t>(col++)) = GaussianRational(1);

    QMat z = QMat::zeros(n, n, GaussianRational(0));
    offset = 0;
    for (int w : witness.parts) {
        for (int i = 0; i + 1 < w; ++i)
            z.at(static_cast<std::size_t>(offset + i), static_cast<std::size_t>(offset + i + 1)) =
                GaussianRational(1);
        offset += w;
    }
    // Y = Q^T Z Q (Q is a permutation)
    QMat qt = QMat::zeros(n, n, GaussianRational(0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) qt.at(i, j) = q.at(j, i);
    QMat y = qt * z * q;

    QMat target_mat = QMat::zeros(n, n, GaussianRational(0));
    offset = 0;
    for (int mpart : target.parts) {
        for (int i = 0; i + 1 < mpart; ++i)
            target_mat.at(static_cast<std::size_t>(offset + i),
                          static_cast<std::size_t>(offset + i + 1)) = GaussianRational(1);
        offset += mpart;
    }
    if (!(y.pow(static_cast<unsigned long>(k)) == target_mat))
        throw InternalError("nilpotent_root_block: Y^k != target");
    return y;
}

/// Root of an invertible Jordan block J_{lambda,m}: the principal primary
/// function lambda^{1/k} (I + S/lambda)^{1/k} with the binomial series
/// truncated by nilpotency, so it is exact apart from scalar rounding.
inline CMat invertible_block_root(const Complex& lambda, int size, int k, mpfr_prec_t p) {
    CMat r = CMat::zeros(static_cast<std::size_t>(size), static_cast<std::size_t>(size), Complex(p));
    Complex alpha = kth_root_scalar(lambda, static_cast<unsigned long>(k));
    Rational binom(1);
    Complex lam_pow(1, p);
    for (int j = 0; j < size; ++j) {
        if (j > 0) {
            binom *= (Rational(1, k) - Rational(j - 1));
            binom /= Rational(j);
            lam_pow *= lambda;
        }
        Complex coef = alpha * Complex(binom, p) / lam_pow;
        for (int i = 0; i + j < size; ++i)
            r.at(static_cast<std::size_t>(i), static_cast<std::size_t>(i + j)) = coef;
    }
    return r;
}

} // namespace detail

/// Matrix k-th root: Jordan-decompose, take principal primary-function roots
/// of the invertible blocks, assemble the nilpotent part from the exhaustive
/// Miller witness, conjugate back, and verify the residual.
template <class S>
CMat matrix_kth_root(const Matrix<S>& m, int k, const ToleranceProfile& tol) {
    if (k < 2) throw PreconditionViolated("matrix_kth_root: k >= 2");
    const mpfr_prec_t p = tol.prec();
    std::size_t n = m.n();
    JordanDecomposition dec = jordan_form(m, tol);
    Partition zp = dec.structure.zero_partition();
    std::optional<Partition> witness;
    if (!zp.empty()) {
        witness = kth_power_witness(zp, k);
        if (!witness)
            throw NotAPowerError("matrix_kth_root: zero-block structure " + zp.to_string() +
                                 " is not a k-th power for k=" + std::to_string(k));
    }

    CMat root_j = CMat::zeros(n, n, Complex(p));
    std::size_t off = 0;
    for (const auto& blk : dec.structure.blocks) {
        if (blk.is_zero) break;
        CMat rb = detail::invertible_block_root(blk.eig, blk.size, k, p);
        root_j.set_block(off, off, rb);
        off += static_cast<std::size_t>(blk.size);
    }
    if (!zp.empty()) {
        QMat y = detail::nilpotent_root_block(zp, *witness, k);
        root_j.set_block(off, off, to_complex(y, p));
    }

    CMat x = dec.P * root_j * dec.P_inv;
    CMat mc = [&]() {
        if constexpr (scalar_traits<S>::exact) {
            return to_complex(m, p);
        } else {
            return m;
        }
    }();
    Real res = (x.pow(static_cast<unsigned long>(k)) - mc).norm_inf();
    if (!(res <= tol.eps_residual()))
        throw IllConditioned("matrix_kth_root: residual exceeds tolerance");
    return x;
}

} // namespace waring
