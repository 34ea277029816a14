#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "waring/decomposer.hpp"
#include "waring/io.hpp"
#include "waring/selftest.hpp"

namespace waring::cli {

constexpr int exit_ok = 0;
constexpr int exit_negative = 2;  // NotInImage / false / not a k-th power
constexpr int exit_unresolved = 3;
constexpr int exit_usage = 64;
constexpr int exit_internal = 70;

namespace detail {

inline QMat load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open matrix file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_matrix_document(ss.str());
}

inline unsigned default_precision() {
    if (const char* env = std::getenv("WARING_PRECISION")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 64 && v <= 65536) return static_cast<unsigned>(v);
    }
    return 256;
}

struct CommonOpts {
    unsigned precision = default_precision();
    std::uint64_t seed = 1;
    bool deterministic = false;

    ToleranceProfile profile() const { return ToleranceProfile::with_bits(precision, seed); }
};

inline void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--precision", o.precision, "working precision in bits")
        ->check(CLI::Range(64u, 65536u));
    cmd->add_option("--seed", o.seed, "seed for randomized procedures");
    cmd->add_flag("--deterministic", o.deterministic,
                  "omit timing fields for byte-identical output");
}

inline json base_report(const std::string& command, const CommonOpts& o) {
    json r;
    r["command"] = command;
    r["parameters"] = json{{"precision_bits", o.precision}, {"seed", o.seed}};
    return r;
}

inline void emit(std::ostream& out, json& report, const CommonOpts& o,
                 const std::chrono::steady_clock::time_point& t0) {
    if (!o.deterministic) {
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        report["elapsed_ms"] = ms;
    }
    out << report.dump(2) << "\n";
}

} // namespace detail

/// Dispatches one CLI invocation; `args` excludes the program name.
/// Exit codes: 0 success/true, 2 negative result (not in image / not a
/// power), 3 unresolved or unknown, 64 usage or parse error, 70 internal
/// or uncertifiable computation.
inline int run_command(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"surjectivity and decomposition of A1 X1^k + A2 X2^k on n x n matrices"};
    app.require_subcommand(1);

    detail::CommonOpts vo, so, jo, ro, po, co, to;

    auto* vcmd = app.add_subcommand("verdict", "surjectivity verdict from (n, k, r0)");
    int vn = 0, vk = 0, vr0 = 0;
    vcmd->add_option("--n", vn, "matrix dimension")->required()->check(CLI::Range(1, 64));
    vcmd->add_option("--k", vk, "power")->required()->check(CLI::Range(2, 4096));
    vcmd->add_option("--r0", vr0, "nullity of A2")->required()->check(CLI::Range(0, 64));
    detail::add_common(vcmd, vo);

    auto* scmd = app.add_subcommand("solve", "decompose C = A1 X1^k + A2 X2^k");
    std::string a1_path, a2_path, target_path;
    int sk = 0, retries = 64;
    scmd->add_option("--a1", a1_path, "matrix document for A1 (invertible)")->required();
    scmd->add_option("--a2", a2_path, "matrix document for A2")->required();
    scmd->add_option("--target", target_path, "matrix document for C")->required();
    scmd->add_option("--k", sk, "power")->required()->check(CLI::Range(2, 4096));
    scmd->add_option("--retries", retries, "random-T search budget in the open region")
        ->check(CLI::Range(0, 100000));
    detail::add_common(scmd, so);

    auto* jcmd = app.add_subcommand("jordan", "Jordan canonical form of a matrix");
    std::string jpath;
    jcmd->add_option("--matrix", jpath, "matrix document")->required();
    detail::add_common(jcmd, jo);

    auto* rcmd = app.add_subcommand("root", "matrix k-th root");
    std::string rpath;
    int rk = 0;
    rcmd->add_option("--matrix", rpath, "matrix document")->required();
    rcmd->add_option("--k", rk, "power")->required()->check(CLI::Range(2, 4096));
    detail::add_common(rcmd, ro);

    auto* pcmd = app.add_subcommand("ispower", "test whether a matrix is a k-th power");
    std::string ppath;
    int pk = 0;
    pcmd->add_option("--matrix", ppath, "matrix document")->required();
    pcmd->add_option("--k", pk, "power")->required()->check(CLI::Range(2, 4096));
    detail::add_common(pcmd, po);

    auto* ccmd = app.add_subcommand("certify",
                                    "non-surjectivity witness target with a statistical check");
    std::string ca2_path;
    int ck = 0, trials = 100;
    ccmd->add_option("--a2", ca2_path, "matrix document for A2")->required();
    ccmd->add_option("--k", ck, "power")->required()->check(CLI::Range(2, 4096));
    ccmd->add_option("--trials", trials, "number of random-T trials")->check(CLI::Range(1, 100000));
    detail::add_common(ccmd, co);

    auto* tcmd = app.add_subcommand("selftest", "run the acceptance suite");
    detail::add_common(tcmd, to);

    try {
        std::vector<const char*> argv;
        argv.push_back("waring");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return exit_usage;
    }

    auto t0 = std::chrono::steady_clock::now();
    try {
        if (vcmd->parsed()) {
            Verdict v = verdict(vn, vk, vr0);
            json report = detail::base_report("verdict", vo);
            report["parameters"]["n"] = vn;
            report["parameters"]["k"] = vk;
            report["parameters"]["r0"] = vr0;
            report["verdict"] = v.tag_string();
            report["reason"] = v.reason_string();
            detail::emit(out, report, vo, t0);
            return v.tag == VerdictTag::Unknown ? exit_unresolved : exit_ok;
        }
        if (scmd->parsed()) {
            ProblemInstance inst;
            inst.a1 = detail::load_matrix(a1_path);
            inst.a2 = detail::load_matrix(a2_path);
            inst.target = detail::load_matrix(target_path);
            inst.k = sk;
            inst.retries = retries;
            inst.profile = so.profile();
            DecompositionResult r = solve(inst);
            int n = static_cast<int>(inst.a1.n());
            int r0 = static_cast<int>(n - rank(inst.a2, inst.profile));
            json report = detail::base_report("solve", so);
            report["parameters"]["n"] = n;
            report["parameters"]["k"] = sk;
            report["parameters"]["r0"] = r0;
            report["parameters"]["retries"] = retries;
            report["verdict"] = verdict(n, sk, r0).tag_string();
            report["status"] = r.status_string();
            report["route"] = r.route;
            if (r.status == SolveStatus::Solved) {
                report["residual"] = r.residual.to_decimal_string(12);
                report["x1"] = complex_matrix_document(r.x1, so.precision);
                report["x2"] = complex_matrix_document(r.x2, so.precision);
            }
            if (!r.certificate.empty()) report["certificate"] = r.certificate;
            detail::emit(out, report, so, t0);
            if (r.status == SolveStatus::Solved) return exit_ok;
            return r.status == SolveStatus::NotInImage ? exit_negative : exit_unresolved;
        }
        if (jcmd->parsed()) {
            QMat m = detail::load_matrix(jpath);
            ToleranceProfile tol = jo.profile();
            JordanDecomposition dec = jordan_form(m, tol);
            json blocks = json::array();
            for (const auto& b : dec.structure.blocks) {
                json blk;
                blk["eigenvalue"] = b.exact ? to_string(b.exact_eig) : b.eig.to_string(12);
                blk["exact"] = b.exact;
                blk["size"] = b.size;
                blk["zero"] = b.is_zero;
                blocks.push_back(std::move(blk));
            }
            json report = detail::base_report("jordan", jo);
            report["parameters"]["n"] = m.n();
            report["structure"] = json{{"blocks", std::move(blocks)},
                                       {"r0", dec.structure.r0()},
                                       {"r_prime", dec.structure.rprime()},
                                       {"n0", dec.structure.n0()},
                                       {"zero_partition", dec.structure.zero_partition().parts}};
            report["similarity_residual"] = dec.similarity_residual.to_decimal_string(12);
            report["p"] = complex_matrix_document(dec.P, jo.precision);
            report["j"] = complex_matrix_document(dec.J, jo.precision);
            detail::emit(out, report, jo, t0);
            return exit_ok;
        }
        if (rcmd->parsed()) {
            QMat m = detail::load_matrix(rpath);
            ToleranceProfile tol = ro.profile();
            json report = detail::base_report("root", ro);
            report["parameters"]["n"] = m.n();
            report["parameters"]["k"] = rk;
            try {
                CMat x = matrix_kth_root(m, rk, tol);
                Real res =
                    (x.pow(static_cast<unsigned long>(rk)) - to_complex(m, tol.prec())).norm_inf();
                report["x"] = complex_matrix_document(x, ro.precision);
                report["residual"] = res.to_decimal_string(12);
                detail::emit(out, report, ro, t0);
                return exit_ok;
            } catch (const NotAPowerError& e) {
                report["error"] = "not_a_kth_power";
                report["what"] = e.what();
                detail::emit(out, report, ro, t0);
                return exit_negative;
            }
        }
        if (pcmd->parsed()) {
            QMat m = detail::load_matrix(ppath);
            ToleranceProfile tol = po.profile();
            auto [ok, witness] = is_kth_power(m, pk, tol);
            JordanDecomposition dec = jordan_form(m, tol);
            json report = detail::base_report("ispower", po);
            report["parameters"]["n"] = m.n();
            report["parameters"]["k"] = pk;
            report["is_kth_power"] = ok;
            report["zero_partition"] = dec.structure.zero_partition().parts;
            if (ok && witness)
                report["witness"] = witness->parts;
            detail::emit(out, report, po, t0);
            return ok ? exit_ok : exit_negative;
        }
        if (ccmd->parsed()) {
            QMat a2 = detail::load_matrix(ca2_path);
            ToleranceProfile tol = co.profile();
            JordanDecomposition dec = jordan_form(a2, tol);
            NonSurjectivityWitness w = non_surjectivity_witness(dec.structure, ck);
            std::mt19937_64 rng(tol.seed);
            bool all_non_power = true;
            int min_largest_block = w.n + 1;
            for (int t = 0; t < trials; ++t) {
                QMat tmat = random_int_matrix(a2.n(), rng);
                std::pair<bool, Partition> res;
                if (dec.exact) {
                    res = witness_trial(dec.J_exact, w.c, tmat, ck, tol);
                } else {
                    res = witness_trial(dec.J, to_complex(w.c, tol.prec()),
                                        to_complex(tmat, tol.prec()), ck, tol);
                }
                if (res.first) all_non_power = false;
                if (!res.second.parts.empty())
                    min_largest_block = std::min(min_largest_block, res.second.parts[0]);
            }
            json report = detail::base_report("certify", co);
            report["parameters"]["n"] = w.n;
            report["parameters"]["k"] = ck;
            report["parameters"]["r0"] = w.r0;
            report["parameters"]["trials"] = trials;
            report["witness"] = rational_matrix_document(w.c);
            report["in_jordan_coordinates"] = true;
            report["miller_bound"] = w.miller_bound;
            report["min_largest_zero_block"] = min_largest_block;
            report["all_non_power"] = all_non_power;
            detail::emit(out, report, co, t0);
            return all_non_power ? exit_ok : exit_internal;
        }
        if (tcmd->parsed()) {
            json criteria = json::array();
            bool all = true;
            auto results = selftest::run_acceptance([&](const selftest::CriterionResult& r) {
                err << (r.passed ? "PASS" : "FAIL") << " " << r.name;
                if (!r.detail.empty()) err << " (" << r.detail << ")";
                err << "\n";
            });
            for (const auto& r : results) {
                json c;
                c["name"] = r.name;
                c["passed"] = r.passed;
                c["detail"] = r.detail;
                if (!to.deterministic) c["elapsed_ms"] = r.ms;
                criteria.push_back(std::move(c));
                all = all && r.passed;
            }
            json report = detail::base_report("selftest", to);
            report["criteria"] = std::move(criteria);
            report["all_passed"] = all;
            detail::emit(out, report, to, t0);
            return all ? exit_ok : exit_internal;
        }
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return exit_usage;
    } catch (const DimensionMismatch& e) {
        err << "dimension mismatch: " << e.what() << "\n";
        return exit_usage;
    } catch (const OutOfRegime& e) {
        err << "out of regime: " << e.what() << "\n";
        return exit_usage;
    } catch (const PreconditionViolated& e) {
        err << "precondition violated: " << e.what() << "\n";
        return exit_usage;
    } catch (const Singular& e) {
        err << "singular input: " << e.what() << "\n";
        return exit_usage;
    } catch (const Error& e) {
        err << "computation failed: " << e.what() << "\n";
        return exit_internal;
    }
    return exit_usage;
}

} // namespace waring::cli
