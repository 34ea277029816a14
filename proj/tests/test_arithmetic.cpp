#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "waring/complex.hpp"
#include "waring/poly.hpp"
#include "waring/rational.hpp"
#include "waring/tolerance.hpp"

using namespace waring;

namespace {
const ToleranceProfile tol = ToleranceProfile::with_bits(256);
const mpfr_prec_t P = 256;
} // namespace

TEST_CASE("gaussian rational field arithmetic is exact") {
    GaussianRational a(Rational(1, 2), Rational(3, 4));
    GaussianRational b(Rational(-2, 3), Rational(1, 5));
    REQUIRE((a + b) - b == a);
    REQUIRE((a * b) / b == a);
    REQUIRE(a * a.conj() == GaussianRational(a.norm()));
    REQUIRE_THROWS_AS(a / GaussianRational(0), Singular);
}

TEST_CASE("gaussian rational text grammar") {
    REQUIRE(parse_gaussian_rational("3") == GaussianRational(3));
    REQUIRE(parse_gaussian_rational("-1/2i") == GaussianRational(Rational(0), Rational(-1, 2)));
    REQUIRE(parse_gaussian_rational("2+1i") == GaussianRational(Rational(2), Rational(1)));
    REQUIRE(parse_gaussian_rational("1/2+3i") == GaussianRational(Rational(1, 2), Rational(3)));
    REQUIRE(parse_gaussian_rational("1/2-3/7i") == GaussianRational(Rational(1, 2), Rational(-3, 7)));
    REQUIRE(parse_gaussian_rational("0") == GaussianRational(0));
    REQUIRE(parse_gaussian_rational("-i") == GaussianRational(Rational(0), Rational(-1)));

    REQUIRE(to_string(GaussianRational(Rational(1, 2), Rational(3))) == "1/2+3i");
    REQUIRE(to_string(GaussianRational(0)) == "0");
    REQUIRE(to_string(GaussianRational(Rational(0), Rational(-1, 2))) == "-1/2i");

    REQUIRE_THROWS_AS(parse_gaussian_rational(""), ParseError);
    REQUIRE_THROWS_AS(parse_gaussian_rational("1/0"), ParseError);
    REQUIRE_THROWS_AS(parse_gaussian_rational("1+2"), ParseError);
    REQUIRE_THROWS_AS(parse_gaussian_rational("2i+1"), ParseError);
    REQUIRE_THROWS_AS(parse_gaussian_rational("1x"), ParseError);
}

TEST_CASE("parse/print roundtrip is bit-exact", "[property]") {
    std::mt19937_64 rng(31415);
    std::uniform_int_distribution<long> num(-1000, 1000), den(1, 999);
    for (int t = 0; t < 300; ++t) {
        GaussianRational z(Rational(num(rng), den(rng)), Rational(num(rng), den(rng)));
        REQUIRE(parse_gaussian_rational(to_string(z)) == z);
    }
}

TEST_CASE("kth_root_scalar principal branch") {
    // identity case
    Complex one(1, P);
    REQUIRE((kth_root_scalar(one, 5) - one).abs() <= Real::pow2(-250, P));
    // principal square root of -1 is +i
    Complex r = kth_root_scalar(Complex(-1, P), 2);
    REQUIRE((r - Complex(Real(0, P), Real(1, P))).abs() <= Real::pow2(-250, P));
    // integer cube
    Complex c = kth_root_scalar(Complex(8, P), 3);
    REQUIRE((c - Complex(2, P)).abs() <= Real::pow2(-248, P));
    // root of zero
    REQUIRE(kth_root_scalar(Complex(P), 4).is_zero());
}

TEST_CASE("kth_root_scalar relative error bound", "[property]") {
    std::mt19937_64 rng(2718);
    std::uniform_int_distribution<long> coef(-1000, 1000), den(1, 100);
    std::uniform_int_distribution<unsigned long> kk(1, 6);
    for (int t = 0; t < 1000; ++t) {
        Complex z(Rational(coef(rng), den(rng)), P);
        z = Complex(z.real(), Real(Rational(coef(rng), den(rng)), P));
        if (z.is_zero()) continue;
        unsigned long k = kk(rng);
        Complex r = kth_root_scalar(z, k);
        Real errbound = Real(static_cast<long>(k), P) * Real::pow2(2 - 256, P) * z.abs();
        REQUIRE((r.pow_ui(k) - z).abs() <= errbound);
    }
}

TEST_CASE("poly_roots on small polynomials") {
    SECTION("z^2 - 1") {
        CPoly f = {Complex(-1, P), Complex(0, P), Complex(1, P)};
        auto roots = poly_roots(f, tol);
        REQUIRE(roots.size() == 2);
        Real d0 = (roots[0] - Complex(1, P)).abs() * (roots[0] + Complex(1, P)).abs();
        Real d1 = (roots[1] - Complex(1, P)).abs() * (roots[1] + Complex(1, P)).abs();
        REQUIRE(d0 <= Real::pow2(-200, P));
        REQUIRE(d1 <= Real::pow2(-200, P));
    }
    SECTION("z^3 has the triple root 0") {
        CPoly f = {Complex(0, P), Complex(0, P), Complex(0, P), Complex(1, P)};
        for (const auto& r : poly_roots(f, tol)) REQUIRE(r.abs() <= tol.eps_cluster());
    }
    SECTION("z^2 - 3z + 2, verified by back-substitution") {
        CPoly f = {Complex(2, P), Complex(-3, P), Complex(1, P)};
        auto roots = poly_roots(f, tol);
        for (const auto& r : roots) REQUIRE(cpoly_eval(f, r).abs() <= Real::pow2(-240, P));
        Real sum = (roots[0] + roots[1] - Complex(3, P)).abs();
        Real prod = (roots[0] * roots[1] - Complex(2, P)).abs();
        REQUIRE(sum <= Real::pow2(-240, P));
        REQUIRE(prod <= Real::pow2(-240, P));
    }
    SECTION("preconditions") {
        REQUIRE_THROWS_AS(poly_roots(CPoly{Complex(1, P)}, tol), PreconditionViolated);
        REQUIRE_THROWS_AS(poly_roots(CPoly{Complex(1, P), Complex(2, P)}, tol),
                          PreconditionViolated);
    }
}

TEST_CASE("poly_roots recovers planted rational roots", "[property]") {
    std::mt19937_64 rng(999);
    std::uniform_int_distribution<long> num(-8, 8), den(1, 6);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t d = 2 + trial % 5;
        std::vector<GaussianRational> planted;
        QPoly poly = {GaussianRational(1)};
        for (std::size_t i = 0; i < d; ++i) {
            GaussianRational r(Rational(num(rng), den(rng)), Rational(num(rng), den(rng)));
            planted.push_back(r);
            poly = qpoly_mul(poly, QPoly{-r, GaussianRational(1)});
        }
        auto roots = poly_roots(to_complex(poly, P), tol);
        for (const auto& want : planted) {
            Complex w(want, P);
            bool hit = false;
            for (const auto& got : roots)
                if ((got - w).abs() <= tol.eps_cluster()) hit = true;
            REQUIRE(hit);
        }
    }
}

TEST_CASE("yun squarefree decomposition") {
    // (z-1)^2 (z-2)
    QPoly f = qpoly_mul(qpoly_mul(QPoly{GaussianRational(-1), GaussianRational(1)},
                                  QPoly{GaussianRational(-1), GaussianRational(1)}),
                        QPoly{GaussianRational(-2), GaussianRational(1)});
    auto factors = qpoly_squarefree(f);
    REQUIRE(factors.size() == 2);
    // multiplicity-1 factor: z-2, multiplicity-2 factor: z-1
    REQUIRE(factors[0].second == 1);
    REQUIRE(factors[0].first == QPoly{GaussianRational(-2), GaussianRational(1)});
    REQUIRE(factors[1].second == 2);
    REQUIRE(factors[1].first == QPoly{GaussianRational(-1), GaussianRational(1)});
}

TEST_CASE("tolerance profile defaults") {
    ToleranceProfile t = ToleranceProfile::with_bits(256);
    REQUIRE(t.precision_bits == 256);
    REQUIRE(t.eps_rank_log2 == -64);
    REQUIRE(t.eps_cluster_log2 == -64);
    REQUIRE(t.eps_residual_log2 == -128);
}

TEST_CASE("rational reconstruction recognizes small rationals") {
    Rational out;
    REQUIRE(rational_reconstruct(Real(Rational(-22, 7), P), out));
    REQUIRE(out == Rational(-22, 7));
    Real sqrt2 = Real(2, P).sqrt();
    REQUIRE_FALSE(rational_reconstruct(sqrt2, out));
}
