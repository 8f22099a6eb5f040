// Acceptance gate: runs the numerical verification suite once with the fixed
// default seed and prints one PASS/FAIL line per criterion. Exits nonzero if
// any criterion fails.
#include <cstdio>

#include "filsim/verify.hpp"

int main() {
    const filsim::VerifyReport report = filsim::run_verification();
    std::fputs(filsim::render_report(report).c_str(), stdout);
    return report.all_pass() ? 0 : 1;
}
