#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "waring/linalg.hpp"
#include "waring/random_gen.hpp"

using namespace waring;

namespace {
const ToleranceProfile tol = ToleranceProfile::with_bits(256);
const mpfr_prec_t P = 256;
const GaussianRational q0(0);

// Brute-force characteristic coefficients: a_i = (-1)^{n-i} * (sum of
// principal minors of size n-i), used as the oracle for char_poly.
std::vector<GaussianRational> char_poly_minor_oracle(const QMat& m) {
    std::size_t n = m.n();
    std::vector<GaussianRational> coeffs(n, q0);
    for (std::size_t sz = 1; sz <= n; ++sz) {
        GaussianRational sum(0);
        std::vector<std::size_t> idx(sz);
        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t start) {
            if (pos == sz) {
                QMat sub(sz, sz, q0);
                for (std::size_t a = 0; a < sz; ++a)
                    for (std::size_t b = 0; b < sz; ++b) sub.at(a, b) = m.at(idx[a], idx[b]);
                sum += det(sub, tol);
                return;
            }
            for (std::size_t i = start; i < n; ++i) {
                idx[pos] = i;
                rec(pos + 1, i + 1);
            }
        };
        rec(0, 0);
        // minors of size sz contribute to the coefficient of z^{n-sz}
        coeffs[n - sz] = GaussianRational(sz % 2 == 0 ? 1 : -1) * sum;
    }
    return coeffs;
}
} // namespace

TEST_CASE("rank on canonical inputs") {
    REQUIRE(rank(QMat::identity(3, q0), tol) == 3);
    REQUIRE(rank(QMat::zeros(4, 4, q0), tol) == 0);
    QMat j3 = gen::jordan_matrix({{0, 3}});
    REQUIRE(rank(j3, tol) == 2);
    REQUIRE(nullity(j3, tol) == 1);
}

TEST_CASE("rank + nullity = n", "[property]") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 60; ++t) {
        std::size_t n = 1 + t % 5;
        QMat m = gen::matrix(n, rng, 6);
        if (t % 3 == 0) {
            // plant rank deficiency
            for (std::size_t j = 0; j < n; ++j) m.at(n - 1, j) = m.at(0, j);
        }
        REQUIRE(rank(m, tol) + nullity(m, tol) == n);
        CMat mc = to_complex(m, P);
        REQUIRE(rank(mc, tol) == rank(m, tol));
    }
}

TEST_CASE("rank raises IllConditioned inside the pivot band") {
    CMat m = CMat::zeros(2, 2, Complex(P));
    m.at(0, 0) = Complex(1, P);
    m.at(1, 1) = Complex(Real(3, P) * tol.eps_rank(), Real(0, P));
    REQUIRE_THROWS_AS(rank(m, tol), IllConditioned);
}

TEST_CASE("char_poly on canonical inputs") {
    QMat d = qmat_from_ints(2, {1, 0, 0, 2});
    auto cp = char_poly(d, tol);
    REQUIRE(cp[0] == GaussianRational(2));
    REQUIRE(cp[1] == GaussianRational(-3));
    for (std::size_t n = 2; n <= 6; ++n) {
        QMat j = gen::jordan_matrix({{0, static_cast<int>(n)}});
        for (const auto& c : char_poly(j, tol)) REQUIRE(c.is_zero());
    }
}

TEST_CASE("char_poly matches the principal-minor oracle", "[property]") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 25; ++t) {
        std::size_t n = 1 + t % 5;
        QMat m = gen::matrix(n, rng, 5);
        REQUIRE(char_poly(m, tol) == char_poly_minor_oracle(m));
    }
}

TEST_CASE("hessenberg path agrees with the exact path on rational input") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 15; ++t) {
        std::size_t n = 2 + t % 4;
        QMat m = gen::matrix(n, rng, 5);
        auto exact = char_poly(m, tol);
        auto approx = char_poly(to_complex(m, P), tol);
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE((approx[i] - Complex(exact[i], P)).abs() <= tol.eps_residual());
    }
}

TEST_CASE("shifted-submatrix charpoly factorization (Lemma-style T)") {
    // T = (t_0, t_1, t_2, t_3) with t_0 = e_1, one zero row (m = 1),
    // nonzero named rows t_1, t_3: chi_T(z) = z^m (z-1) chi_{T_I}(z).
    QMat t = QMat::zeros(4, 4, q0);
    t.at(0, 0) = GaussianRational(1);
    t.at(1, 0) = GaussianRational(2);
    t.at(1, 1) = GaussianRational(3);
    t.at(1, 3) = GaussianRational(-1);
    t.at(3, 1) = GaussianRational(5);
    t.at(3, 3) = GaussianRational(7);
    QMat ti = shift_submatrix(t, {1, 3});
    REQUIRE(ti.at(0, 0) == GaussianRational(3));
    REQUIRE(ti.at(0, 1) == GaussianRational(-1));
    REQUIRE(ti.at(1, 0) == GaussianRational(5));
    REQUIRE(ti.at(1, 1) == GaussianRational(7));

    auto sub = char_poly(ti, tol); // z^2 + s1 z + s0
    // expand z^1 (z-1)(z^2 + s1 z + s0)
    QPoly expect = qpoly_mul(QPoly{q0, GaussianRational(1)}, // z
                             qpoly_mul(QPoly{GaussianRational(-1), GaussianRational(1)},
                                       QPoly{sub[0], sub[1], GaussianRational(1)}));
    auto full = char_poly(t, tol);
    full.push_back(GaussianRational(1));
    REQUIRE(QPoly(full.begin(), full.end()) == expect);
}

TEST_CASE("shift_submatrix bounds") {
    QMat t = gen::jordan_matrix({{1, 3}});
    REQUIRE(shift_submatrix(t, {1}).at(0, 0) == GaussianRational(1)); // entry t_{1,2}
    REQUIRE_THROWS_AS(shift_submatrix(t, {}), IndexOutOfRange);
    REQUIRE_THROWS_AS(shift_submatrix(t, {0}), IndexOutOfRange);
    REQUIRE_THROWS_AS(shift_submatrix(t, {3}), IndexOutOfRange);
}

TEST_CASE("inverse") {
    REQUIRE(inverse(QMat::identity(3, q0), tol) == QMat::identity(3, q0));
    QMat d = qmat_from_ints(2, {2, 0, 0, 4});
    QMat di = inverse(d, tol);
    REQUIRE(di.at(0, 0) == GaussianRational(Rational(1, 2)));
    REQUIRE(di.at(1, 1) == GaussianRational(Rational(1, 4)));
    std::mt19937_64 rng(14);
    QMat m = gen::invertible(5, rng, 6, true);
    REQUIRE(m * inverse(m, tol) == QMat::identity(5, q0));
    CMat mc = to_complex(m, P);
    Real res = (mc * inverse(mc, tol) - CMat::identity(5, Complex(P))).norm_inf();
    REQUIRE(res <= tol.eps_residual());
    REQUIRE_THROWS_AS(inverse(QMat::zeros(2, 2, q0), tol), Singular);
}

TEST_CASE("constrained basis completion examples") {
    SECTION("rows = {e1} in F^2, projection onto coordinate 2") {
        std::vector<std::vector<GaussianRational>> rows = {{GaussianRational(1), q0}};
        auto out = constrained_basis_completion(rows, {std::size_t(1)}, 2, q0, tol);
        REQUIRE(out.size() == 1);
        REQUIRE(out[0][1] == GaussianRational(1)); // projection must be nonzero, forced up to scale
    }
    SECTION("no rows in F^3: all coordinates, permutation-like output") {
        // q = n - #rows forces the projection onto all three coordinates
        auto out = constrained_basis_completion({}, {std::size_t(0), std::size_t(1), std::size_t(2)},
                                                3, q0, tol);
        REQUIRE(out.size() == 3);
        QMat full(3, 3, q0);
        for (std::size_t i = 0; i < 3; ++i) full.set_row(i, out[i]);
        REQUIRE(rank(full, tol) == 3);
        REQUIRE_THROWS_AS(
            constrained_basis_completion({}, {std::size_t(1), std::size_t(2)}, 3, q0, tol),
            PreconditionViolated);
    }
    SECTION("rows = {e1+e2} in F^3, projection onto coordinates {2,3}") {
        std::vector<std::vector<GaussianRational>> rows = {
            {GaussianRational(1), GaussianRational(1), q0}};
        auto out = constrained_basis_completion(rows, {std::size_t(1), std::size_t(2)}, 3, q0, tol);
        REQUIRE(out.size() == 2);
        QMat full(3, 3, q0);
        full.set_row(0, rows[0]);
        full.set_row(1, out[0]);
        full.set_row(2, out[1]);
        REQUIRE(rank(full, tol) == 3);
        QMat proj(2, 2, q0);
        proj.at(0, 0) = out[0][1];
        proj.at(0, 1) = out[0][2];
        proj.at(1, 0) = out[1][1];
        proj.at(1, 1) = out[1][2];
        REQUIRE(rank(proj, tol) == 2);
    }
    SECTION("dependent rows are rejected") {
        std::vector<std::vector<GaussianRational>> rows = {{GaussianRational(1), q0},
                                                           {GaussianRational(2), q0}};
        REQUIRE_THROWS_AS(constrained_basis_completion(rows, {}, 2, q0, tol),
                          PreconditionViolated);
    }
}

TEST_CASE("constrained basis completion satisfies both rank conditions", "[property]") {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t n = 2 + trial % 7; // up to 8
        std::uniform_int_distribution<std::size_t> mm(0, n - 1);
        std::size_t m = mm(rng);
        // random independent rows
        std::vector<std::vector<GaussianRational>> rows;
        {
            RowSpan<GaussianRational> span(n, q0, tol);
            while (rows.size() < m) {
                QMat cand = gen::matrix(n, rng, 4);
                auto v = cand.row(0);
                if (span.add(v)) rows.push_back(v);
            }
        }
        // random coordinate set of size n - m
        std::vector<std::size_t> coords;
        {
            std::vector<std::size_t> all(n);
            for (std::size_t i = 0; i < n; ++i) all[i] = i;
            std::shuffle(all.begin(), all.end(), rng);
            coords.assign(all.begin(), all.begin() + static_cast<long>(n - m));
        }
        auto out = constrained_basis_completion(rows, coords, n, q0, tol);
        REQUIRE(out.size() == n - m);
        QMat full(n, n, q0);
        for (std::size_t i = 0; i < m; ++i) full.set_row(i, rows[i]);
        for (std::size_t i = 0; i < out.size(); ++i) full.set_row(m + i, out[i]);
        REQUIRE(rank(full, tol) == n);
        std::sort(coords.begin(), coords.end());
        QMat proj(out.size(), out.size(), q0);
        for (std::size_t i = 0; i < out.size(); ++i)
            for (std::size_t j = 0; j < coords.size(); ++j) proj.at(i, j) = out[i][coords[j]];
        REQUIRE(rank(proj, tol) == out.size());
    }
}
