#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "waring/decomposer.hpp"
#include "waring/random_gen.hpp"

using namespace waring;

namespace {
const ToleranceProfile tol = ToleranceProfile::with_bits(256);
const mpfr_prec_t P = 256;
const GaussianRational q0(0);

ProblemInstance instance(QMat a1, QMat a2, QMat c, int k) {
    ProblemInstance inst;
    inst.a1 = std::move(a1);
    inst.a2 = std::move(a2);
    inst.target = std::move(c);
    inst.k = k;
    inst.profile = tol;
    return inst;
}

Real external_residual(const ProblemInstance& inst, const DecompositionResult& r) {
    CMat lhs = to_complex(inst.a1, P) * r.x1.pow(static_cast<unsigned long>(inst.k)) +
               to_complex(inst.a2, P) * r.x2.pow(static_cast<unsigned long>(inst.k));
    return (lhs - to_complex(*inst.target, P)).norm_inf();
}
} // namespace

TEST_CASE("verdict decision table") {
    REQUIRE(verdict(3, 3, 2).tag == VerdictTag::NotSurjective);
    REQUIRE(verdict(4, 3, 2).tag == VerdictTag::Surjective);
    REQUIRE(verdict(4, 2, 3).tag == VerdictTag::NotSurjective);
    REQUIRE(verdict(5, 2, 3).tag == VerdictTag::Unknown);
    REQUIRE(verdict(5, 2, 3).reason == VerdictReason::OpenRegion);
    REQUIRE(verdict(6, 2, 1).reason == VerdictReason::R0AtMostOne);
    REQUIRE(verdict(3, 2, 2).reason == VerdictReason::LowDimInequality);
    REQUIRE(verdict(3, 4, 2).reason == VerdictReason::MillerObstruction);
    REQUIRE_THROWS_AS(verdict(3, 1, 0), PreconditionViolated);
    REQUIRE_THROWS_AS(verdict(3, 2, 4), PreconditionViolated);
}

TEST_CASE("reduce") {
    SECTION("A1 = I and A2 already in Jordan form") {
        ProblemInstance inst = instance(QMat::identity(3, q0),
                                        gen::jordan_matrix({{2, 1}, {0, 2}}),
                                        QMat::identity(3, q0), 2);
        ReducedInstance ri = reduce(inst);
        REQUIRE(ri.b == inst.a2);
        REQUIRE(ri.dec.exact);
        REQUIRE(ri.dec.structure.r0() == 1);
        REQUIRE(ri.reduced_target_exact);
    }
    SECTION("B = A1^{-1} A2 with scalar A1") {
        ProblemInstance inst = instance(qmat_from_ints(2, {2, 0, 0, 2}),
                                        gen::jordan_matrix({{0, 2}}), QMat::zeros(2, 2, q0), 2);
        ReducedInstance ri = reduce(inst);
        REQUIRE(ri.b.at(0, 1) == GaussianRational(Rational(1, 2)));
        REQUIRE(ri.dec.structure.blocks.size() == 1);
        REQUIRE(ri.dec.structure.blocks[0].size == 2);
        REQUIRE(ri.dec.structure.blocks[0].is_zero);
    }
    SECTION("random conjugated pair carries a verified similarity") {
        std::mt19937_64 rng(300);
        QMat a1 = gen::invertible(4, rng);
        QMat a2 = gen::conjugate(gen::jordan_matrix({{1, 2}, {0, 2}}), rng);
        ProblemInstance inst = instance(a1, a2, gen::matrix(4, rng), 2);
        ReducedInstance ri = reduce(inst);
        REQUIRE(ri.dec.similarity_residual <= tol.eps_residual());
        REQUIRE(ri.dec.structure.r0() == 1);
    }
    SECTION("singular A1 is rejected") {
        ProblemInstance inst = instance(QMat::zeros(2, 2, q0), QMat::identity(2, q0),
                                        QMat::zeros(2, 2, q0), 2);
        REQUIRE_THROWS_AS(reduce(inst), Singular);
    }
}

TEST_CASE("solve_invertible recipe") {
    SECTION("B = I2, C = 0: X1 = I, X2^2 = -I") {
        auto [x1, x2] = solve_invertible(QMat::identity(2, q0), QMat::zeros(2, 2, q0), 2, tol);
        REQUIRE((x1 - CMat::identity(2, Complex(P))).norm_inf() <= Real::pow2(-250, P));
        Real res = (x2.pow(2) + CMat::identity(2, Complex(P))).norm_inf();
        REQUIRE(res <= tol.eps_residual());
    }
    SECTION("B = diag(1,2), C = diag(3,3): lambda = 4") {
        QMat b = qmat_from_ints(2, {1, 0, 0, 2});
        QMat c = qmat_from_ints(2, {3, 0, 0, 3});
        auto [x1, x2] = solve_invertible(b, c, 2, tol);
        // X2^2 = B^{-1}(C - 4I) = diag(-1, -1/2)
        CMat want = to_complex(qmat_from_ints(2, {-1, 0, 0, 0}), P);
        want.at(1, 1) = Complex(Rational(-1, 2), P);
        REQUIRE((x2.pow(2) - want).norm_inf() <= tol.eps_residual());
    }
    SECTION("random invertible 4x4, k = 3") {
        std::mt19937_64 rng(301);
        QMat b = gen::invertible(4, rng, 5, true);
        QMat c = gen::matrix(4, rng);
        auto [x1, x2] = solve_invertible(b, c, 3, tol);
        CMat lhs = x1.pow(3) + to_complex(b, P) * x2.pow(3);
        REQUIRE((lhs - to_complex(c, P)).norm_inf() <= tol.eps_residual());
    }
}

TEST_CASE("full nilpotent construction") {
    SECTION("C = 0, n = 2, k = 2 pins the documented T") {
        QMat t = full_nilpotent_T(QMat::zeros(2, 2, q0), tol);
        REQUIRE(t == qmat_from_ints(2, {0, 1, 1, 0}));
        QMat j = gen::jordan_matrix({{0, 2}});
        QMat rem = QMat::zeros(2, 2, q0) - j * t;
        REQUIRE(rem == qmat_from_ints(2, {-1, 0, 0, 0}));
        auto [x1, x2] = solve_full_nilpotent(QMat::zeros(2, 2, q0), 2, tol);
        REQUIRE((x1.pow(2) + to_complex(j, P) * x2.pow(2)).norm_inf() <= tol.eps_residual());
    }
    SECTION("C = I3, k = 2 (nonzero last row)") {
        auto [x1, x2] = solve_full_nilpotent(QMat::identity(3, q0), 2, tol);
        CMat lhs = x1.pow(2) + to_complex(gen::jordan_matrix({{0, 3}}), P) * x2.pow(2);
        REQUIRE((lhs - CMat::identity(3, Complex(P))).norm_inf() <= tol.eps_residual());
    }
    SECTION("random 4x4 with zero last row, k = 3") {
        std::mt19937_64 rng(302);
        QMat c = gen::matrix(4, rng);
        for (std::size_t j = 0; j < 4; ++j) c.at(3, j) = q0;
        auto [x1, x2] = solve_full_nilpotent(c, 3, tol);
        CMat lhs = x1.pow(3) + to_complex(gen::jordan_matrix({{0, 4}}), P) * x2.pow(3);
        REQUIRE((lhs - to_complex(c, P)).norm_inf() <= tol.eps_residual());
    }
}

TEST_CASE("choose_mu determinant sweep") {
    QMat c11 = QMat::zeros(1, 1, q0);
    QMat jp = QMat::identity(1, q0);
    REQUIRE(choose_mu(c11, jp, 2, tol) == GaussianRational(1));
    // det(1 - mu) = 0 at mu = 1, so the sweep moves to lambda = 2, mu = 4
    REQUIRE(choose_mu(QMat::identity(1, q0), jp, 2, tol) == GaussianRational(4));
    std::mt19937_64 rng(303);
    QMat c3 = gen::matrix(3, rng);
    QMat jp3 = qmat_from_ints(3, {1, 0, 0, 0, 2, 0, 0, 0, 3});
    GaussianRational mu = choose_mu(c3, jp3, 2, tol);
    REQUIRE_FALSE(det(c3 - mu * jp3, tol).is_zero());
}

TEST_CASE("solve_one_nilpotent_block") {
    SECTION("J = (1) + J_{0,2}, C = 0") {
        QMat j = gen::jordan_matrix({{1, 1}, {0, 2}});
        auto st = jordan_form(j, tol).structure;
        auto [x1, x2] = solve_one_nilpotent_block(st, j, QMat::zeros(3, 3, q0), 2, tol);
        REQUIRE((x1.pow(2) + to_complex(j, P) * x2.pow(2)).norm_inf() <= tol.eps_residual());
    }
    SECTION("J = (2) + (3) + J_{0,1}, random C, k = 3") {
        std::mt19937_64 rng(304);
        QMat j = gen::jordan_matrix({{2, 1}, {3, 1}, {0, 1}});
        auto st = jordan_form(j, tol).structure;
        QMat c = gen::matrix(3, rng);
        auto [x1, x2] = solve_one_nilpotent_block(st, j, c, 3, tol);
        CMat lhs = x1.pow(3) + to_complex(j, P) * x2.pow(3);
        REQUIRE((lhs - to_complex(c, P)).norm_inf() <= tol.eps_residual());
    }
    SECTION("full nilpotent input is rejected; the dispatcher routes it") {
        QMat j = gen::jordan_matrix({{0, 3}});
        auto st = jordan_form(j, tol).structure;
        REQUIRE_THROWS_AS(solve_one_nilpotent_block(st, j, QMat::zeros(3, 3, q0), 2, tol),
                          PreconditionViolated);
        auto r = solve(instance(QMat::identity(3, q0), j, QMat::identity(3, q0), 2));
        REQUIRE(r.route == "full_nilpotent");
        REQUIRE(r.status == SolveStatus::Solved);
    }
}

TEST_CASE("rank criterion construction") {
    SECTION("m = r0: C - JT becomes invertible") {
        QMat j = gen::jordan_matrix({{0, 2}, {0, 2}});
        auto st = jordan_form(j, tol).structure;
        // fixed rows (l-positions 1 and 3) with independent leading parts
        QMat c = QMat::zeros(4, 4, q0);
        c.at(1, 0) = GaussianRational(1);
        c.at(1, 3) = GaussianRational(1);
        c.at(3, 1) = GaussianRational(1);
        c.at(3, 2) = GaussianRational(2);
        QMat t = build_rank_criterion_T(st, j, c, tol);
        REQUIRE(rank(t, tol) == 4);
        REQUIRE_FALSE(det(c - j * t, tol).is_zero());
    }
    SECTION("m = 0: nullity r0 with all zero blocks of size 1") {
        QMat j = gen::jordan_matrix({{0, 2}, {0, 2}});
        auto st = jordan_form(j, tol).structure;
        QMat c = QMat::zeros(4, 4, q0);
        c.at(0, 0) = GaussianRational(3); // rows at l-positions stay zero
        QMat t = build_rank_criterion_T(st, j, c, tol);
        QMat rem = c - j * t;
        REQUIRE(nullity(rem, tol) == 2);
        auto dec = jordan_form(rem, tol);
        REQUIRE(dec.structure.zero_partition() == Partition({1, 1}));
    }
    SECTION("n = 4, J_{0,2}+J_{0,2}, one independent bottom row: a_1 != 0, nullity 1") {
        QMat j = gen::jordan_matrix({{0, 2}, {0, 2}});
        auto st = jordan_form(j, tol).structure;
        QMat c = QMat::zeros(4, 4, q0);
        // rows 2 and 4 are the fixed rows; give row 2 a nonzero leading part
        c.at(1, 0) = GaussianRational(2);
        c.at(1, 3) = GaussianRational(1);
        QMat t = build_rank_criterion_T(st, j, c, tol);
        QMat rem = c - j * t;
        auto cp = char_poly(rem, tol);
        REQUIRE_FALSE(cp[1].is_zero());
        REQUIRE(nullity(rem, tol) == 1);
    }
    SECTION("violated precondition") {
        QMat j = gen::jordan_matrix({{0, 2}, {0, 1}});
        auto st = jordan_form(j, tol).structure;
        // W is spanned by a row living purely in the C22 block: rank(C21) = 0 != 1
        QMat c = QMat::zeros(3, 3, q0);
        c.at(1, 2) = GaussianRational(1);
        REQUIRE_THROWS_AS(build_rank_criterion_T(st, j, c, tol), PreconditionViolated);
    }
}

TEST_CASE("solve_rank_criterion decomposes the zero target") {
    QMat j = gen::jordan_matrix({{0, 2}, {0, 2}});
    auto st = jordan_form(j, tol).structure;
    auto [x1, x2] = solve_rank_criterion(st, j, QMat::zeros(4, 4, q0), 2, tol);
    REQUIRE((x1.pow(2) + to_complex(j, P) * x2.pow(2)).norm_inf() <= tol.eps_residual());
}

TEST_CASE("membership in the n = 3 excluded set") {
    QMat j = gen::jordan_matrix({{0, 2}, {0, 1}});
    auto st = jordan_form(j, tol).structure;
    SECTION("E_23 is excluded") {
        QMat e23 = QMat::zeros(3, 3, q0);
        e23.at(1, 2) = GaussianRational(1);
        auto [in_image, cert] = membership_n3(st, e23, 3, tol);
        REQUIRE_FALSE(in_image);
    }
    SECTION("the identity is in the image") {
        REQUIRE(membership_n3(st, QMat::identity(3, q0), 3, tol).first);
    }
    SECTION("nonzero (2,1) entry breaks the block form") {
        QMat c = QMat::zeros(3, 3, q0);
        c.at(1, 0) = GaussianRational(1);
        c.at(1, 2) = GaussianRational(1);
        REQUIRE(membership_n3(st, c, 3, tol).first);
    }
    SECTION("regime checks") {
        REQUIRE_THROWS_AS(membership_n3(st, QMat::identity(3, q0), 2, tol), OutOfRegime);
    }
}

TEST_CASE("non-surjectivity witness") {
    SECTION("n = 3, k = 3") {
        QMat j = gen::jordan_matrix({{0, 2}, {0, 1}});
        auto st = jordan_form(j, tol).structure;
        NonSurjectivityWitness w = non_surjectivity_witness(st, 3);
        REQUIRE(w.r0 == 2);
        REQUIRE(w.miller_bound == 1);
        REQUIRE(w.c.at(1, 2) == GaussianRational(1));
        std::mt19937_64 rng(306);
        for (int t = 0; t < 25; ++t) {
            QMat tm = random_int_matrix(3, rng);
            auto [power, zp] = witness_trial(j, w.c, tm, 3, tol);
            REQUIRE_FALSE(power);
            REQUIRE(zp.parts.front() >= w.r0); // the Miller obstruction in action
        }
    }
    SECTION("n = 4, k = 2, r0 = 3") {
        QMat j = gen::jordan_matrix({{0, 2}, {0, 1}, {0, 1}});
        auto st = jordan_form(j, tol).structure;
        NonSurjectivityWitness w = non_surjectivity_witness(st, 2);
        std::mt19937_64 rng(307);
        for (int t = 0; t < 25; ++t) {
            QMat tm = random_int_matrix(4, rng);
            REQUIRE_FALSE(witness_trial(j, w.c, tm, 2, tol).first);
        }
    }
    SECTION("regime violation") {
        QMat j = gen::jordan_matrix({{0, 2}, {0, 2}});
        auto st = jordan_form(j, tol).structure;
        REQUIRE_THROWS_AS(non_surjectivity_witness(st, 2), OutOfRegime);
    }
}

TEST_CASE("low-dimensional engine") {
    SECTION("n = 3, k = 2, C = E_23 (only excluded for k >= 3)") {
        QMat j = gen::jordan_matrix({{0, 2}, {0, 1}});
        QMat e23 = QMat::zeros(3, 3, q0);
        e23.at(1, 2) = GaussianRational(1);
        auto r = solve(instance(QMat::identity(3, q0), j, e23, 2));
        REQUIRE(r.status == SolveStatus::Solved);
        REQUIRE(r.residual <= tol.eps_residual());
    }
    SECTION("n = 4, k = 3, J_{0,3}+J_{0,1}, C = 0") {
        QMat j = gen::jordan_matrix({{0, 3}, {0, 1}});
        auto r = solve(instance(QMat::identity(4, q0), j, QMat::zeros(4, 4, q0), 3));
        REQUIRE(r.status == SolveStatus::Solved);
    }
    SECTION("n = 4, k = 2, two invertible blocks and two zero blocks") {
        std::mt19937_64 rng(308);
        QMat j = gen::jordan_matrix({{1, 1}, {2, 1}, {0, 1}, {0, 1}});
        auto r = solve(instance(QMat::identity(4, q0), j, gen::matrix(4, rng), 2));
        REQUIRE(r.status == SolveStatus::Solved);
        REQUIRE(r.residual <= tol.eps_residual());
    }
    SECTION("out of regime") {
        QMat j = gen::jordan_matrix({{0, 2}, {0, 1}});
        auto st = jordan_form(j, tol).structure;
        REQUIRE_THROWS_AS(solve_low_dim(st, j, QMat::identity(3, q0), 3, tol, false), OutOfRegime);
    }
}

TEST_CASE("solve dispatcher end to end") {
    std::mt19937_64 rng(309);
    SECTION("invertible route") {
        auto r = solve(instance(QMat::identity(3, q0), QMat::identity(3, q0), gen::matrix(3, rng), 2));
        REQUIRE(r.status == SolveStatus::Solved);
        REQUIRE(r.route == "invertible");
    }
    SECTION("excluded target reported with a certificate") {
        QMat e23 = QMat::zeros(3, 3, q0);
        e23.at(1, 2) = GaussianRational(1);
        auto r = solve(instance(QMat::identity(3, q0), gen::jordan_matrix({{0, 2}, {0, 1}}), e23, 3));
        REQUIRE(r.status == SolveStatus::NotInImage);
        REQUIRE_FALSE(r.certificate.empty());
    }
    SECTION("open region: solved or an honest unresolved") {
        QMat a2 = gen::jordan_matrix({{1, 1}, {0, 2}, {0, 2}});
        auto r = solve(instance(QMat::identity(5, q0), a2, gen::matrix(5, rng), 2));
        REQUIRE((r.status == SolveStatus::Solved || r.status == SolveStatus::Unresolved));
        if (r.status == SolveStatus::Solved) REQUIRE(r.residual <= tol.eps_residual());
    }
    SECTION("A2 = 0: image is the set of k-th powers scaled by A1") {
        QMat zero = QMat::zeros(3, 3, q0);
        auto r = solve(instance(QMat::identity(3, q0), zero, QMat::identity(3, q0), 2));
        REQUIRE(r.status == SolveStatus::Solved); // I = I^2 + 0
        // degenerate corner: both A2 and C zero (r0 = n, m = 0)
        auto rz = solve(instance(QMat::identity(3, q0), zero, zero, 2));
        REQUIRE(rz.status == SolveStatus::Solved);
        REQUIRE(rz.residual <= tol.eps_residual());
    }
}

TEST_CASE("solved results verify externally", "[property]") {
    std::mt19937_64 rng(310);
    const std::vector<std::vector<std::pair<long, int>>> shapes = {
        {{2, 1}, {1, 1}, {0, 1}}, {{0, 3}}, {{0, 2}, {0, 1}}, {{1, 2}, {0, 2}}};
    for (int t = 0; t < 16; ++t) {
        const auto& shape = shapes[static_cast<std::size_t>(t) % shapes.size()];
        std::size_t n = 0;
        for (const auto& b : shape) n += static_cast<std::size_t>(b.second);
        ProblemInstance inst = instance(gen::invertible(n, rng),
                                        gen::conjugate(gen::jordan_matrix(shape), rng),
                                        gen::matrix(n, rng), 2 + t % 2);
        int r0 = static_cast<int>(n - rank(inst.a2, tol));
        if (verdict(static_cast<int>(n), inst.k, r0).tag != VerdictTag::Surjective) continue;
        DecompositionResult r = solve(inst);
        REQUIRE(r.status == SolveStatus::Solved);
        REQUIRE(external_residual(inst, r) <= tol.eps_residual());
    }
}

TEST_CASE("solve is deterministic for fixed inputs and profile") {
    std::mt19937_64 rng(311);
    ProblemInstance inst = instance(QMat::identity(3, q0),
                                    gen::jordan_matrix({{0, 2}, {0, 1}}), gen::matrix(3, rng), 2);
    DecompositionResult r1 = solve(inst);
    DecompositionResult r2 = solve(inst);
    REQUIRE(r1.route == r2.route);
    REQUIRE(r1.residual == r2.residual);
    REQUIRE(r1.x1.at(0, 0) == r2.x1.at(0, 0));
}
