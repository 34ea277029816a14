#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "waring/complex.hpp"
#include "waring/errors.hpp"
#include "waring/rational.hpp"
#include "waring/tolerance.hpp"

namespace waring {

/// Coefficients stored low degree -> high degree.
template <class S>
using Poly = std::vector<S>;

using QPoly = Poly<GaussianRational>;
using CPoly = Poly<Complex>;

inline void qpoly_trim(QPoly& p) {
    while (!p.empty() && p.back().is_zero()) p.pop_back();
}

inline int qpoly_degree(const QPoly& p) {
    for (std::size_t i = p.size(); i-- > 0;)
        if (!p[i].is_zero()) return static_cast<int>(i);
    return -1;
}

inline QPoly qpoly_derivative(const QPoly& p) {
    QPoly d;
    for (std::size_t i = 1; i < p.size(); ++i)
        d.push_back(GaussianRational(Rational(static_cast<long>(i))) * p[i]);
    qpoly_trim(d);
    return d;
}

inline GaussianRational qpoly_eval(const QPoly& p, const GaussianRational& x) {
    GaussianRational acc;
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
}

inline QPoly qpoly_mul(const QPoly& a, const QPoly& b) {
    if (a.empty() || b.empty()) return {};
    QPoly r(a.size() + b.size() - 1, GaussianRational(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    qpoly_trim(r);
    return r;
}

inline QPoly qpoly_sub(const QPoly& a, const QPoly& b) {
    QPoly r = a;
    if (b.size() > r.size()) r.resize(b.size(), GaussianRational(0));
    for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    qpoly_trim(r);
    return r;
}

/// Exact division with remainder; requires a nonzero divisor.
inline std::pair<QPoly, QPoly> qpoly_divmod(const QPoly& a, const QPoly& b) {
    int db = qpoly_degree(b);
    if (db < 0) throw Singular("polynomial division by zero");
    QPoly rem = a;
    qpoly_trim(rem);
    int dr = qpoly_degree(rem);
    if (dr < db) return {{}, rem};
    QPoly quo(static_cast<std::size_t>(dr - db + 1), GaussianRational(0));
    const GaussianRational& lead = b[static_cast<std::size_t>(db)];
    while ((dr = qpoly_degree(rem)) >= db) {
        GaussianRational c = rem[static_cast<std::size_t>(dr)] / lead;
        std::size_t shift = static_cast<std::size_t>(dr - db);
        quo[shift] = c;
        for (int i = 0; i <= db; ++i)
            rem[shift + static_cast<std::size_t>(i)] -= c * b[static_cast<std::size_t>(i)];
        rem[static_cast<std::size_t>(dr)] = GaussianRational(0);
    }
    qpoly_trim(rem);
    return {quo, rem};
}

inline QPoly qpoly_monic(QPoly p) {
    qpoly_trim(p);
    if (p.empty()) return p;
    GaussianRational lead = p.back();
    for (auto& c : p) c /= lead;
    return p;
}

/// Monic gcd via the Euclidean algorithm (exact over Q(i)).
inline QPoly qpoly_gcd(QPoly a, QPoly b) {
    qpoly_trim(a);
    qpoly_trim(b);
    while (!b.empty()) {
        QPoly r = qpoly_divmod(a, b).second;
        a = std::move(b);
        b = qpoly_monic(std::move(r));
    }
    return qpoly_monic(std::move(a));
}

/// Yun's squarefree decomposition of a monic polynomial over a field of
/// characteristic zero: returns pairwise-coprime monic squarefree factors
/// with multiplicities such that f = prod factor^multiplicity.
inline std::vector<std::pair<QPoly, int>> qpoly_squarefree(const QPoly& f_in) {
    QPoly f = qpoly_monic(f_in);
    std::vector<std::pair<QPoly, int>> out;
    if (qpoly_degree(f) < 1) return out;
    QPoly fp = qpoly_derivative(f);
    QPoly a0 = qpoly_gcd(f, fp);
    QPoly b = qpoly_divmod(f, a0).first;
    QPoly c = qpoly_divmod(fp, a0).first;
    QPoly d = qpoly_sub(c, qpoly_derivative(b));
    int i = 1;
    while (qpoly_degree(b) > 0) {
        QPoly ai = qpoly_gcd(b, d);
        if (qpoly_degree(ai) > 0) out.emplace_back(ai, i);
        b = qpoly_divmod(b, ai).first;
        c = qpoly_divmod(d, ai).first;
        d = qpoly_sub(c, qpoly_derivative(b));
        ++i;
    }
    return out;
}

inline Complex cpoly_eval(const CPoly& p, const Complex& x) {
    Complex acc(x.prec());
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
}

inline CPoly to_complex(const QPoly& p, mpfr_prec_t prec) {
    CPoly r;
    r.reserve(p.size());
    for (const auto& c : p) r.emplace_back(c, prec);
    return r;
}

/// All d roots (with multiplicity) of a monic polynomial of degree d >= 1,
/// by the Durand-Kerner simultaneous iteration at the profile precision.
/// Each returned root r satisfies |poly(r)| <= eps_rank * (1 + max|coeff|)^d;
/// otherwise NonConvergence is thrown.
inline std::vector<Complex> poly_roots(const CPoly& monic, const ToleranceProfile& tol) {
    if (monic.size() < 2) throw PreconditionViolated("poly_roots: degree must be >= 1");
    const mpfr_prec_t p = tol.prec();
    const std::size_t d = monic.size() - 1;
    if (!(monic.back() == Complex(1, monic.back().prec())))
        throw PreconditionViolated("poly_roots: polynomial must be monic");

    CPoly f;
    f.reserve(monic.size());
    for (const auto& c : monic) f.emplace_back(Real(c.real()) + Real(0, p), Real(c.imag()) + Real(0, p));

    Real maxa(0, p);
    for (std::size_t i = 0; i < d; ++i) maxa = max(maxa, f[i].abs());
    Real radius = Real(1, p) + maxa;

    if (d == 1) return {-f[0]};

    std::vector<Complex> z;
    z.reserve(d);
    Real two_pi = Real(2, p) * atan2(Real(0, p), Real(-1, p));
    for (std::size_t j = 0; j < d; ++j) {
        Real theta = two_pi * Real(static_cast<long>(j), p) / Real(static_cast<long>(d), p) +
                     Real(2, p) / Real(5, p);
        z.emplace_back(radius * cos(theta), radius * sin(theta));
    }

    Real stop = Real::pow2(-static_cast<long>(tol.precision_bits) + 16, p) *
                radius.pow_ui(static_cast<unsigned long>(d)) * Real(static_cast<long>(d), p);
    const int maxit = 4 * (static_cast<int>(tol.precision_bits) + 64);
    Real best_res = Real(1, p) + radius.pow_ui(static_cast<unsigned long>(d));
    int stale = 0;

    for (int it = 0; it < maxit; ++it) {
        for (std::size_t j = 0; j < d; ++j) {
            Complex num = cpoly_eval(f, z[j]);
            Complex den(1, p);
            for (std::size_t l = 0; l < d; ++l) {
                if (l == j) continue;
                den *= (z[j] - z[l]);
            }
            if (den.is_zero()) {
                z[j] += Complex(radius * Real::pow2(-static_cast<long>(j) - 5, p), Real(0, p));
                continue;
            }
            z[j] -= num / den;
        }
        Real res(0, p);
        for (std::size_t j = 0; j < d; ++j) res = max(res, cpoly_eval(f, z[j]).abs());
        if (res <= stop) break;
        if (res < best_res) {
            best_res = res;
            stale = 0;
        } else if (++stale > 32) {
            break;
        }
    }

    // Newton polish: DK stops on a coefficient-scaled residual, which for
    // large coefficients leaves simple roots short of full precision.
    CPoly deriv;
    for (std::size_t i = 1; i <= d; ++i)
        deriv.push_back(Complex(static_cast<long>(i), p) * f[i]);
    Real step_floor = Real::pow2(-static_cast<long>(tol.precision_bits) - 4, p);
    for (std::size_t j = 0; j < d; ++j) {
        for (int it = 0; it < 64; ++it) {
            Complex fv = cpoly_eval(f, z[j]);
            Complex dv = cpoly_eval(deriv, z[j]);
            if (dv.is_zero()) break;
            Complex step = fv / dv;
            z[j] -= step;
            if (step.abs() <= step_floor * max(Real(1, p), z[j].abs())) break;
        }
    }

    Real bound = tol.eps_rank() * (Real(1, p) + maxa).pow_ui(static_cast<unsigned long>(d));
    for (std::size_t j = 0; j < d; ++j) {
        if (!(cpoly_eval(f, z[j]).abs() <= bound))
            throw NonConvergence("poly_roots: residual target not met; raise precision");
    }
    return z;
}

/// Reconstructs a small-denominator rational close to x, if one exists
/// within 2^{-prec/2}; used to recognize exact eigenvalues.
inline bool rational_reconstruct(const Real& x, Rational& out, long max_den_bits = 48) {
    mpfr_prec_t p = x.prec();
    Real limit = Real::pow2(-static_cast<long>(p) / 2, p);
    Integer den_bound = Integer(1) << max_den_bits;

    // continued fraction expansion of x
    Real cur = x;
    Integer h0(0), h1(1), k0(1), k1(0); // convergents
    for (int steps = 0; steps < 200; ++steps) {
        mpz_t zfloor;
        mpz_init(zfloor);
        mpfr_get_z(zfloor, cur.raw(), MPFR_RNDD);
        Integer a(zfloor);
        mpz_clear(zfloor);
        Integer h2 = a * h1 + h0;
        Integer k2 = a * k1 + k0;
        if (k2 > den_bound) break;
        h0 = h1; h1 = h2; k0 = k1; k1 = k2;
        Rational cand(h1, k1);
        Real diff = (x - Real(cand, p)).abs();
        if (diff <= limit) {
            out = cand;
            return true;
        }
        Real frac = cur - Real(a, p);
        if (frac.is_zero()) break;
        cur = Real(1, p) / frac;
    }
    return false;
}

} // namespace waring
