#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "waring/powers.hpp"
#include "waring/random_gen.hpp"

using namespace waring;

namespace {
const ToleranceProfile tol = ToleranceProfile::with_bits(256);
const mpfr_prec_t P = 256;

// Independent oracle: block structure of J_{0,n}^k from exact ranks of powers.
Partition rank_of_powers_oracle(int n, int k) {
    QMat e = gen::jordan_matrix({{0L, n}}).pow(static_cast<unsigned long>(k));
    std::vector<int> weyr;
    int prev = 0;
    QMat power = QMat::identity(static_cast<std::size_t>(n), GaussianRational(0));
    for (int j = 1; j <= n; ++j) {
        power = power * e;
        int nul = n - static_cast<int>(rank(power, tol));
        if (nul - prev <= 0) break;
        weyr.push_back(nul - prev);
        prev = nul;
    }
    std::vector<int> parts;
    for (std::size_t i = 0; i < weyr.size(); ++i) {
        int count = (i + 1 < weyr.size()) ? weyr[i] - weyr[i + 1] : weyr[i];
        for (int c = 0; c < count; ++c) parts.push_back(static_cast<int>(i) + 1);
    }
    return parts.empty() ? Partition() : Partition(parts);
}
} // namespace

TEST_CASE("miller_power formula") {
    REQUIRE(miller_power(5, 2) == Partition({3, 2}));
    REQUIRE(miller_power(4, 3) == Partition({2, 1, 1}));
    REQUIRE(miller_power(3, 5) == Partition({1, 1, 1}));
    REQUIRE_THROWS_AS(miller_power(0, 2), PreconditionViolated);
    REQUIRE_THROWS_AS(miller_power(3, 1), PreconditionViolated);
}

TEST_CASE("miller_power equals the rank-of-powers oracle", "[property]") {
    for (int k = 2; k <= 6; ++k)
        for (int n = 1; n <= 12; ++n) REQUIRE(miller_power(n, k) == rank_of_powers_oracle(n, k));
}

TEST_CASE("partition_power") {
    REQUIRE(partition_power(Partition({4}), 2) == Partition({2, 2}));
    REQUIRE(partition_power(Partition({2, 2}), 2) == Partition({1, 1, 1, 1}));
    REQUIRE(partition_power(Partition({5, 3}), 2) == Partition({3, 2, 2, 1}));
    // blockwise formula vs explicit matrix, [5,3] squared
    QMat m = gen::jordan_matrix({{0, 5}, {0, 3}}).pow(2);
    auto dec = jordan_form(m, tol);
    REQUIRE(dec.structure.zero_partition() == Partition({3, 2, 2, 1}));
}

TEST_CASE("kth_power_witness") {
    auto w = kth_power_witness(Partition({2, 2}), 2);
    REQUIRE(w);
    REQUIRE(*w == Partition({4}));
    REQUIRE_FALSE(kth_power_witness(Partition({2}), 3));
    auto w2 = kth_power_witness(Partition({1, 1, 1}), 2);
    REQUIRE(w2);
    REQUIRE(*w2 == Partition({2, 1}));
    REQUIRE_THROWS_AS(kth_power_witness(Partition({17}), 2), PreconditionViolated);
}

TEST_CASE("witness absence matches the ceiling bound", "[property]") {
    // one-sided check: a target whose largest part exceeds ceil(weight/k)
    // can never be a blockwise Miller image of a partition of that weight
    for (int w = 1; w <= 12; ++w) {
        for (int k = 2; k <= 5; ++k) {
            for (const Partition& target : all_partitions(w)) {
                if (target.parts.front() > (w + k - 1) / k)
                    REQUIRE_FALSE(kth_power_witness(target, k));
            }
        }
    }
}

TEST_CASE("is_kth_power") {
    REQUIRE(is_kth_power(QMat::identity(3, GaussianRational(0)), 4, tol).first);
    REQUIRE_FALSE(is_kth_power(gen::jordan_matrix({{0, 2}}), 3, tol).first);
    auto [ok, w] = is_kth_power(gen::jordan_matrix({{0, 2}, {0, 2}}), 2, tol);
    REQUIRE(ok);
    REQUIRE(w);
    REQUIRE(*w == Partition({4}));
}

TEST_CASE("matrix_kth_root on closed-form cases") {
    SECTION("identity") {
        CMat x = matrix_kth_root(QMat::identity(2, GaussianRational(0)), 5, tol);
        Real res = (x - CMat::identity(2, Complex(P))).norm_inf();
        REQUIRE(res <= Real::pow2(-250, P));
    }
    SECTION("diag(4,9) has principal square root diag(2,3)") {
        CMat x = matrix_kth_root(qmat_from_ints(2, {4, 0, 0, 9}), 2, tol);
        REQUIRE((x.at(0, 0) - Complex(2, P)).abs() <= Real::pow2(-248, P));
        REQUIRE((x.at(1, 1) - Complex(3, P)).abs() <= Real::pow2(-248, P));
        REQUIRE(x.at(0, 1).abs() <= Real::pow2(-248, P));
    }
    SECTION("J_{1,2} has square root [[1,1/2],[0,1]]") {
        CMat x = matrix_kth_root(qmat_from_ints(2, {1, 1, 0, 1}), 2, tol);
        REQUIRE((x.at(0, 1) - Complex(Rational(1, 2), P)).abs() <= Real::pow2(-248, P));
        Real res = (x.pow(2) - to_complex(qmat_from_ints(2, {1, 1, 0, 1}), P)).norm_inf();
        REQUIRE(res <= tol.eps_residual());
    }
    SECTION("nilpotent root through the witness: J_{0,2}+J_{0,2} <- J_{0,4}") {
        QMat m = gen::jordan_matrix({{0, 2}, {0, 2}});
        CMat x = matrix_kth_root(m, 2, tol);
        REQUIRE((x.pow(2) - to_complex(m, P)).norm_inf() <= tol.eps_residual());
    }
    SECTION("non-powers are rejected") {
        REQUIRE_THROWS_AS(matrix_kth_root(gen::jordan_matrix({{0, 2}}), 2, tol), NotAPowerError);
    }
}

TEST_CASE("kth root roundtrip", "[property]") {
    std::mt19937_64 rng(200);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t n = 2 + static_cast<std::size_t>(trial % 4);
        int k = 2 + trial % 4;
        QMat m = gen::invertible(n, rng, 8, true);
        CMat x = matrix_kth_root(m, k, tol);
        REQUIRE((x.pow(static_cast<unsigned long>(k)) - to_complex(m, P)).norm_inf() <=
                tol.eps_residual());
    }
}

TEST_CASE("roots of singular powers", "[property]") {
    // squares of matrices with nontrivial zero structure are recognized and
    // re-rooted with a verified residual
    std::mt19937_64 rng(201);
    const std::vector<std::vector<std::pair<long, int>>> shapes = {
        {{0, 4}}, {{2, 1}, {0, 3}}, {{0, 3}, {0, 2}}, {{-1, 2}, {0, 2}}};
    for (int trial = 0; trial < 12; ++trial) {
        const auto& shape = shapes[static_cast<std::size_t>(trial) % shapes.size()];
        QMat y = gen::conjugate(gen::jordan_matrix(shape), rng);
        int k = 2 + trial % 2;
        QMat m = y.pow(static_cast<unsigned long>(k));
        auto [ok, w] = is_kth_power(m, k, tol);
        REQUIRE(ok);
        CMat x = matrix_kth_root(m, k, tol);
        REQUIRE((x.pow(static_cast<unsigned long>(k)) - to_complex(m, P)).norm_inf() <=
                tol.eps_residual());
    }
}
