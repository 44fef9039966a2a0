// Acceptance suite: runs every check in the battery, one criterion per line,
// and exits nonzero if any fails. Criterion numbering follows the registry
// order (contraction covers the contraction + monotonicity pair).

#include <cstdio>

#include "matest/checks.hpp"

int main() {
    using namespace matest;
    bool all_pass = true;
    int criterion = 0;
    for (const auto& name : check_names()) {
        CheckResult res = run_check(name);
        ++criterion;
        std::printf("%s criterion-%d %s (%.1fs) %s\n", res.pass ? "PASS" : "FAIL", criterion,
                    res.name.c_str(), res.seconds, res.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && res.pass;
    }
    std::printf("%s\n", all_pass ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL");
    return all_pass ? 0 : 1;
}
