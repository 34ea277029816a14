// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. The same criteria back the CLI `selftest` subcommand.

#include <cstdio>

#include "waring/selftest.hpp"

int main() {
    bool all = true;
    auto results = waring::selftest::run_acceptance([](const waring::selftest::CriterionResult& r) {
        std::printf("%s %s (%ld ms)%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.ms,
                    r.detail.empty() ? "" : ": ", r.detail.c_str());
        std::fflush(stdout);
    });
    for (const auto& r : results) all = all && r.passed;
    std::printf("%s\n", all ? "acceptance: all criteria passed" : "acceptance: FAILURES");
    return all ? 0 : 1;
}
