#pragma once

#include <chrono>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "waring/decomposer.hpp"
#include "waring/random_gen.hpp"

namespace waring::selftest {

struct CriterionResult {
    std::string name;
    bool passed = false;
    std::string detail;
    long ms = 0;
};

namespace detail {

using Check = std::pair<bool, std::string>;

inline ToleranceProfile profile() { return ToleranceProfile::with_bits(256); }
inline Real residual_bound() { return Real::pow2(-128, 256); }

inline Check table_n3() {
    for (int k = 2; k <= 5; ++k) {
        for (int r0 = 0; r0 <= 2; ++r0) {
            VerdictTag expect = (r0 <= 1 || k == 2) ? VerdictTag::Surjective
                                                    : VerdictTag::NotSurjective;
            if (verdict(3, k, r0).tag != expect)
                return {false, "cell k=" + std::to_string(k) + " r0=" + std::to_string(r0)};
        }
    }
    return {true, "12 cells"};
}

inline Check table_n4() {
    for (int k = 2; k <= 5; ++k) {
        for (int r0 = 0; r0 <= 3; ++r0) {
            VerdictTag expect;
            if (r0 <= 1) expect = VerdictTag::Surjective;
            else if (r0 == 2) expect = k <= 3 ? VerdictTag::Surjective : VerdictTag::NotSurjective;
            else expect = VerdictTag::NotSurjective;
            if (verdict(4, k, r0).tag != expect)
                return {false, "cell k=" + std::to_string(k) + " r0=" + std::to_string(r0)};
        }
    }
    return {true, "16 cells"};
}

/// Exact rank-of-powers oracle for the block structure of J_{0,n}^k.
inline Partition nilpotent_power_structure_oracle(int n, int k) {
    ToleranceProfile tol = profile();
    QMat j = gen::jordan_matrix({{0L, n}});
    QMat e = j.pow(static_cast<unsigned long>(k));
    std::vector<int> weyr;
    int prev = 0;
    QMat power = QMat::identity(static_cast<std::size_t>(n), GaussianRational(0));
    for (int t = 1; t <= n; ++t) {
        power = power * e;
        int nul = n - static_cast<int>(rank(power, tol));
        int w = nul - prev;
        prev = nul;
        if (w <= 0) break;
        weyr.push_back(w);
    }
    std::vector<int> parts;
    for (std::size_t i = 0; i < weyr.size(); ++i) {
        int count = (i + 1 < weyr.size()) ? weyr[i] - weyr[i + 1] : weyr[i];
        for (int c = 0; c < count; ++c) parts.push_back(static_cast<int>(i) + 1);
    }
    return parts.empty() ? Partition() : Partition(parts);
}

inline Check miller_oracle() {
    for (int k = 2; k <= 6; ++k)
        for (int n = 1; n <= 12; ++n)
            if (!(miller_power(n, k) == nilpotent_power_structure_oracle(n, k)))
                return {false, "n=" + std::to_string(n) + " k=" + std::to_string(k)};
    return {true, "66 pairs"};
}

inline Check constructive_r0_le_1() {
    ToleranceProfile tol = profile();
    std::mt19937_64 rng(0x5eed0004);
    const std::vector<std::vector<std::pair<long, int>>> shapes = {
        {{1, 1}}, {{0, 1}}, {{2, 1}, {1, 1}}, {{0, 2}}, {{3, 2}}, {{-1, 1}, {0, 2}},
        {{0, 3}}, {{2, 1}, {-2, 1}, {0, 1}}, {{1, 2}, {3, 1}, {0, 1}}, {{0, 4}},
        {{2, 2}, {0, 2}}, {{1, 1}, {2, 1}, {3, 1}, {0, 2}}, {{0, 5}},
        {{-3, 2}, {2, 1}, {0, 2}}, {{1, 3}, {0, 2}}, {{2, 5}}};
    for (int trial = 0; trial < 200; ++trial) {
        const auto& shape = shapes[static_cast<std::size_t>(trial) % shapes.size()];
        std::size_t n = 0;
        for (const auto& b : shape) n += static_cast<std::size_t>(b.second);
        ProblemInstance inst;
        inst.a1 = (trial % 3 == 0) ? QMat::identity(n, GaussianRational(0)) : gen::invertible(n, rng);
        inst.a2 = gen::conjugate(gen::jordan_matrix(shape), rng);
        inst.k = 2 + trial % 3;
        inst.target = gen::matrix(n, rng);
        inst.profile = tol;
        try {
            DecompositionResult r = solve(inst);
            if (r.status != SolveStatus::Solved || !(r.residual <= residual_bound()))
                return {false, "trial " + std::to_string(trial) + ": " + r.status_string()};
        } catch (const Error& e) {
            return {false, "trial " + std::to_string(trial) + ": " + e.what()};
        }
    }
    return {true, "200 instances solved"};
}

inline QMat z_form_target(std::mt19937_64& rng) {
    // [[mu, u], [0, M]] with M nonzero and M^2 = 0
    Rational a = gen::rational(rng, 3);
    Rational b = gen::rational(rng, 3);
    if (b == 0) b = Rational(1);
    QMat c = QMat::zeros(3, 3, GaussianRational(0));
    c.at(0, 0) = gen::gaussian_rational(rng, 5, false);
    c.at(0, 1) = gen::gaussian_rational(rng, 5, false);
    c.at(0, 2) = gen::gaussian_rational(rng, 5, false);
    c.at(1, 1) = GaussianRational(a);
    c.at(1, 2) = GaussianRational(b);
    c.at(2, 1) = GaussianRational(-a * a / b);
    c.at(2, 2) = GaussianRational(-a);
    return c;
}

inline Check surjective_cell_n3_k2() {
    ToleranceProfile tol = profile();
    std::mt19937_64 rng(0x5eed0005);
    const std::vector<std::vector<std::pair<long, int>>> forms = {{{0, 2}, {0, 1}},
                                                                  {{4, 1}, {0, 1}, {0, 1}}};
    auto run_one = [&](const QMat& a2, const QMat& c, const char* what) -> Check {
        ProblemInstance inst;
        inst.a1 = QMat::identity(3, GaussianRational(0));
        inst.a2 = a2;
        inst.k = 2;
        inst.target = c;
        inst.profile = tol;
        try {
            DecompositionResult r = solve(inst);
            if (r.status != SolveStatus::Solved || !(r.residual <= residual_bound()))
                return {false, std::string(what) + ": " + r.status_string()};
        } catch (const Error& e) {
            return {false, std::string(what) + ": " + e.what()};
        }
        return {true, ""};
    };
    for (int trial = 0; trial < 100; ++trial) {
        QMat a2 = gen::jordan_matrix(forms[static_cast<std::size_t>(trial % 2)]);
        Check c = run_one(a2, gen::matrix(3, rng), "random");
        if (!c.first) return c;
    }
    for (const auto& form : forms) {
        QMat a2 = gen::jordan_matrix(form);
        // C22 nilpotent, C21 = 0, dim W = 1 (the Miller absorption case)
        Check c1 = run_one(a2, z_form_target(rng), "crafted nilpotent C22");
        if (!c1.first) return c1;
        // dim W = 0: last two rows zero
        QMat c = QMat::zeros(3, 3, GaussianRational(0));
        c.at(0, 0) = GaussianRational(2);
        c.at(0, 2) = GaussianRational(Rational(1, 3));
        Check c2 = run_one(a2, c, "crafted dim W = 0");
        if (!c2.first) return c2;
        // dim W = 1 with rank(C21) = 1
        QMat c3m = QMat::zeros(3, 3, GaussianRational(0));
        c3m.at(1, 0) = GaussianRational(1);
        c3m.at(1, 2) = GaussianRational(2);
        c3m.at(0, 1) = GaussianRational(5);
        Check c3 = run_one(a2, c3m, "crafted rank(C21) = dim W = 1");
        if (!c3.first) return c3;
        // dim W = 2
        QMat c4m = gen::matrix(3, rng);
        c4m.at(1, 0) = GaussianRational(1);
        c4m.at(1, 1) = GaussianRational(0);
        c4m.at(2, 2) = GaussianRational(1);
        Check c4 = run_one(a2, c4m, "crafted dim W = 2");
        if (!c4.first) return c4;
    }
    return {true, "100 random + crafted cases"};
}

inline Check nonsurjective_cell_n3() {
    ToleranceProfile tol = profile();
    std::mt19937_64 rng(0x5eed0006);
    const std::vector<std::vector<std::pair<long, int>>> forms = {{{0, 2}, {0, 1}},
                                                                  {{4, 1}, {0, 1}, {0, 1}}};
    int not_in_image = 0, in_image = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int k = 3 + trial % 3;
        QMat a2 = gen::jordan_matrix(forms[static_cast<std::size_t>(trial % 2)]);
        QMat c = QMat::zeros(3, 3, GaussianRational(0));
        if (trial == 0) {
            c.at(1, 2) = GaussianRational(1); // E_23, the canonical excluded target
        } else if (trial % 5 == 0) {
            c = z_form_target(rng);
        } else {
            c = gen::matrix(3, rng);
        }
        ProblemInstance inst;
        inst.a1 = QMat::identity(3, GaussianRational(0));
        inst.a2 = a2;
        inst.k = k;
        inst.target = c;
        inst.profile = tol;
        DecompositionResult r;
        try {
            r = solve(inst);
        } catch (const Error& e) {
            return {false, "trial " + std::to_string(trial) + ": " + e.what()};
        }
        if (r.status == SolveStatus::NotInImage) {
            ++not_in_image;
            std::mt19937_64 trng(0xabc000 + static_cast<unsigned>(trial));
            for (int t = 0; t < 100; ++t) {
                QMat tmat = random_int_matrix(3, trng);
                if (witness_trial(a2, c, tmat, k, tol).first)
                    return {false, "trial " + std::to_string(trial) +
                                       ": excluded target became a k-th power"};
            }
        } else if (r.status == SolveStatus::Solved) {
            ++in_image;
            if (!(r.residual <= residual_bound()))
                return {false, "trial " + std::to_string(trial) + ": residual"};
        } else {
            return {false, "trial " + std::to_string(trial) + ": unresolved"};
        }
    }
    if (not_in_image == 0) return {false, "no excluded targets sampled"};
    return {true, std::to_string(in_image) + " in image, " + std::to_string(not_in_image) +
                      " excluded x 100 trials each"};
}

inline Check cells_n4() {
    ToleranceProfile tol = profile();
    std::mt19937_64 rng(0x5eed0007);
    const std::vector<std::vector<std::pair<long, int>>> forms = {
        {{0, 3}, {0, 1}}, {{5, 1}, {0, 2}, {0, 1}}, {{0, 2}, {0, 2}},
        {{2, 1}, {3, 1}, {0, 1}, {0, 1}}};
    // surjective cells: r0 = 2, k in {2,3}
    for (int k = 2; k <= 3; ++k) {
        for (std::size_t fi = 0; fi < forms.size(); ++fi) {
            QMat a2 = gen::jordan_matrix(forms[fi]);
            JordanStructure st = jordan_form(a2, tol).structure;
            TailPermutation tp = nilpotent_tail_permutation(st);
            auto run_one = [&](const QMat& c, const std::string& what) -> Check {
                ProblemInstance inst;
                inst.a1 = QMat::identity(4, GaussianRational(0));
                inst.a2 = a2;
                inst.k = k;
                inst.target = c;
                inst.profile = tol;
                try {
                    DecompositionResult r = solve(inst);
                    if (r.status != SolveStatus::Solved || !(r.residual <= residual_bound()))
                        return {false, what + ": " + r.status_string()};
                } catch (const Error& e) {
                    return {false, what + ": " + e.what()};
                }
                return {true, ""};
            };
            std::string cell = "form " + std::to_string(fi) + " k=" + std::to_string(k);
            for (int trial = 0; trial < 100; ++trial) {
                Check c = run_one(gen::matrix(4, rng), cell + " random " + std::to_string(trial));
                if (!c.first) return c;
            }
            // crafted subcases assembled in relabelled coordinates
            auto pull_back = [&](const QMat& ctil) {
                QMat c = QMat::zeros(4, 4, GaussianRational(0));
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b)
                        c.at(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) =
                            ctil.at(static_cast<std::size_t>(tp.sigma[static_cast<std::size_t>(a)]),
                                    static_cast<std::size_t>(tp.sigma[static_cast<std::size_t>(b)]));
                return c;
            };
            {
                // C21^P = 0, C22^P nilpotent (Miller absorption)
                QMat ctil = QMat::zeros(4, 4, GaussianRational(0));
                ctil.at(2, 3) = GaussianRational(1);
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 4; ++j)
                        ctil.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                            gen::gaussian_rational(rng, 5, false);
                Check c = run_one(pull_back(ctil), cell + " nilpotent C22");
                if (!c.first) return c;
            }
            {
                // C21^P = 0, C22^P = diag(nu, 0)
                QMat ctil = QMat::zeros(4, 4, GaussianRational(0));
                ctil.at(2, 2) = GaussianRational(7);
                ctil.at(0, 1) = GaussianRational(1);
                Check c = run_one(pull_back(ctil), cell + " non-nilpotent C22");
                if (!c.first) return c;
            }
            {
                // dim W = 0
                QMat ctil = QMat::zeros(4, 4, GaussianRational(0));
                ctil.at(0, 0) = GaussianRational(Rational(3, 2));
                ctil.at(1, 3) = GaussianRational(-2);
                Check c = run_one(pull_back(ctil), cell + " dim W = 0");
                if (!c.first) return c;
            }
            {
                // rank(C21^P) = dim W = 1
                QMat ctil = QMat::zeros(4, 4, GaussianRational(0));
                ctil.at(2, 0) = GaussianRational(1);
                ctil.at(2, 3) = GaussianRational(2);
                ctil.at(0, 2) = GaussianRational(4);
                Check c = run_one(pull_back(ctil), cell + " rank criterion");
                if (!c.first) return c;
            }
        }
    }
    // non-surjective cells: witness families with the statistical check
    struct Cell {
        std::vector<std::pair<long, int>> form;
        int k;
    };
    const std::vector<Cell> ns_cells = {{{{0, 3}, {0, 1}}, 4},
                                        {{{0, 2}, {0, 2}}, 5},
                                        {{{5, 1}, {0, 2}, {0, 1}}, 4},
                                        {{{0, 2}, {0, 1}, {0, 1}}, 2},
                                        {{{5, 1}, {0, 1}, {0, 1}, {0, 1}}, 3},
                                        {{{0, 1}, {0, 1}, {0, 1}, {0, 1}}, 2}};
    for (std::size_t ci = 0; ci < ns_cells.size(); ++ci) {
        QMat jm = gen::jordan_matrix(ns_cells[ci].form);
        JordanStructure st = jordan_form(jm, tol).structure;
        NonSurjectivityWitness w = non_surjectivity_witness(st, ns_cells[ci].k);
        std::mt19937_64 trng(0xdef000 + static_cast<unsigned>(ci));
        for (int t = 0; t < 100; ++t) {
            QMat tmat = random_int_matrix(4, trng);
            if (witness_trial(jm, w.c, tmat, ns_cells[ci].k, tol).first)
                return {false, "witness cell " + std::to_string(ci) + " trial " + std::to_string(t)};
        }
    }
    return {true, "8 surjective cells x (100 random + 4 crafted); 6 witness cells x 100 trials"};
}

inline Check root_roundtrip() {
    ToleranceProfile tol = profile();
    std::mt19937_64 rng(0x5eed0008);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + static_cast<std::size_t>(trial % 5);
        int k = 2 + trial % 4;
        QMat m = gen::invertible(n, rng, 10, true);
        try {
            CMat x = matrix_kth_root(m, k, tol);
            Real res = (x.pow(static_cast<unsigned long>(k)) - to_complex(m, tol.prec())).norm_inf();
            if (!(res <= residual_bound()))
                return {false, "trial " + std::to_string(trial) + ": residual"};
        } catch (const Error& e) {
            return {false, "trial " + std::to_string(trial) + ": " + e.what()};
        }
    }
    return {true, "200 roots verified"};
}

inline Check jordan_roundtrip() {
    ToleranceProfile tol = profile();
    std::mt19937_64 rng(0x5eed0009);
    const std::vector<std::vector<std::pair<long, int>>> shapes = {
        {{0, 6}}, {{0, 4}, {0, 2}}, {{-2, 3}, {0, 3}}, {{1, 2}, {1, 2}, {0, 2}},
        {{3, 2}, {-3, 2}, {0, 1}, {0, 1}}, {{2, 6}}, {{-1, 4}, {2, 1}},
        {{0, 3}, {0, 2}, {0, 1}}, {{1, 1}, {2, 1}, {3, 1}, {-3, 1}, {0, 2}}, {{2, 3}, {2, 2}}};
    for (int trial = 0; trial < 100; ++trial) {
        const auto& shape = shapes[static_cast<std::size_t>(trial) % shapes.size()];
        QMat b = gen::conjugate(gen::jordan_matrix(shape), rng);
        try {
            JordanDecomposition dec = jordan_form(b, tol);
            std::vector<std::pair<GaussianRational, int>> planted, got;
            for (const auto& [lam, sz] : shape) planted.emplace_back(GaussianRational(lam), sz);
            for (const auto& blk : dec.structure.blocks) {
                if (!blk.exact) return {false, "trial " + std::to_string(trial) + ": inexact eig"};
                got.emplace_back(blk.exact_eig, blk.size);
            }
            auto key = [](const std::pair<GaussianRational, int>& p) {
                return to_string(p.first) + "#" + std::to_string(p.second);
            };
            std::vector<std::string> a, bkeys;
            for (const auto& x : planted) a.push_back(key(x));
            for (const auto& x : got) bkeys.push_back(key(x));
            std::sort(a.begin(), a.end());
            std::sort(bkeys.begin(), bkeys.end());
            if (a != bkeys) return {false, "trial " + std::to_string(trial) + ": structure mismatch"};
            if (!(dec.similarity_residual <= residual_bound()))
                return {false, "trial " + std::to_string(trial) + ": residual"};
        } catch (const Error& e) {
            return {false, "trial " + std::to_string(trial) + ": " + e.what()};
        }
    }
    return {true, "100 planted structures recovered"};
}

inline Check conjugation_equivariance() {
    ToleranceProfile tol = profile();
    std::mt19937_64 rng(0x5eed000a);
    for (int trial = 0; trial < 50; ++trial) {
        ProblemInstance inst;
        inst.profile = tol;
        std::size_t n;
        switch (trial % 5) {
            case 0:
                n = 3;
                inst.a2 = gen::conjugate(gen::jordan_matrix({{2, 1}, {0, 2}}), rng);
                inst.k = 2;
                inst.target = gen::matrix(n, rng);
                break;
            case 1:
                n = 3;
                inst.a2 = gen::jordan_matrix({{0, 2}, {0, 1}});
                inst.k = 3;
                inst.target = z_form_target(rng);
                break;
            case 2:
                n = 3;
                inst.a2 = gen::jordan_matrix({{0, 2}, {0, 1}});
                inst.k = 4;
                inst.target = gen::matrix(n, rng);
                break;
            case 3:
                n = 4;
                inst.a2 = gen::jordan_matrix({{0, 2}, {0, 2}});
                inst.k = 2;
                inst.target = gen::matrix(n, rng);
                break;
            default:
                n = 4;
                inst.a2 = gen::jordan_matrix({{3, 1}, {0, 2}, {0, 1}});
                inst.k = 3;
                inst.target = gen::matrix(n, rng);
                break;
        }
        inst.a1 = QMat::identity(n, GaussianRational(0));
        QMat g = gen::invertible(n, rng, 3);
        QMat gi = inverse(g, tol);
        ProblemInstance conj;
        conj.a1 = g * inst.a1 * gi;
        conj.a2 = g * inst.a2 * gi;
        conj.k = inst.k;
        conj.target = g * (*inst.target) * gi;
        conj.profile = tol;
        try {
            DecompositionResult r1 = solve(inst);
            DecompositionResult r2 = solve(conj);
            if (r1.status != r2.status)
                return {false, "trial " + std::to_string(trial) + ": " + r1.status_string() +
                                   " vs " + r2.status_string()};
        } catch (const Error& e) {
            return {false, "trial " + std::to_string(trial) + ": " + e.what()};
        }
    }
    return {true, "50 conjugated pairs agree"};
}

} // namespace detail

/// Runs every acceptance criterion; `sink` (when set) receives each result
/// as it completes.
inline std::vector<CriterionResult> run_acceptance(
    const std::function<void(const CriterionResult&)>& sink = nullptr) {
    using namespace std::chrono;
    std::vector<std::pair<std::string, std::function<detail::Check()>>> criteria = {
        {"table_n3_reproduction", detail::table_n3},
        {"table_n4_reproduction", detail::table_n4},
        {"miller_oracle_equivalence", detail::miller_oracle},
        {"constructive_r0_le_1", detail::constructive_r0_le_1},
        {"surjective_cell_n3_k2", detail::surjective_cell_n3_k2},
        {"nonsurjective_cell_n3", detail::nonsurjective_cell_n3},
        {"cells_n4", detail::cells_n4},
        {"kth_root_roundtrip", detail::root_roundtrip},
        {"jordan_roundtrip", detail::jordan_roundtrip},
        {"conjugation_equivariance", detail::conjugation_equivariance},
    };
    std::vector<CriterionResult> results;
    for (auto& [name, fn] : criteria) {
        CriterionResult res;
        res.name = name;
        auto t0 = steady_clock::now();
        try {
            auto [ok, detail_msg] = fn();
            res.passed = ok;
            res.detail = detail_msg;
        } catch (const std::exception& e) {
            res.passed = false;
            res.detail = std::string("exception: ") + e.what();
        }
        res.ms = duration_cast<milliseconds>(steady_clock::now() - t0).count();
        if (sink) sink(res);
        results.push_back(std::move(res));
    }
    return results;
}

} // namespace waring::selftest
