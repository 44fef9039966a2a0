#pragma once

// The theory-check battery behind `matest check` and the acceptance suite.
// Each check pins its tolerances in code and reports pass/fail with a detail
// line; `check --all` green is the repository's definition of done.

#include <string>
#include <vector>

namespace matest {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

// Registry order matches the acceptance criteria numbering.
const std::vector<std::string>& check_names();

CheckResult run_check(const std::string& name);

std::vector<CheckResult> run_all_checks(bool print_progress = false);

}  // namespace matest
