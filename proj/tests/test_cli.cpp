#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#ifndef MATEST_BIN
#error "MATEST_BIN must point at the CLI executable"
#endif
#ifndef MATEST_SOURCE_DIR
#error "MATEST_SOURCE_DIR must point at the repository root"
#endif

namespace {

int run_cmd(const std::string& args, const std::filesystem::path& stdout_file = {}) {
    std::string cmd = std::string(MATEST_BIN) + " " + args;
    if (!stdout_file.empty())
        cmd += " > " + stdout_file.string() + " 2>&1";
    else
        cmd += " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::filesystem::path& file) {
    std::ifstream in(file);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("solve smoke run reaches the gap certificate") {
    const auto trace = std::filesystem::temp_directory_path() / "matest_cli_trace.csv";
    const int rc = run_cmd(
        "solve --kind covariance --structure toeplitz --varrho 0.5 --p 50 --solver ladmm "
        "--trace " +
        trace.string());
    CHECK(rc == 0);
    std::ifstream in(trace);
    REQUIRE(in.good());
    std::string line, last;
    std::getline(in, line);  // header
    CHECK(line.rfind("iter,f,d,gap", 0) == 0);
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    // gap is the fourth column of the final row
    size_t pos = 0;
    for (int c = 0; c < 3; ++c) pos = last.find(',', pos) + 1;
    const double gap = std::stod(last.substr(pos));
    CHECK(gap <= 1e-7);
    std::filesystem::remove(trace);
}

TEST_CASE("check --suite reduction prints PASS") {
    const auto out = std::filesystem::temp_directory_path() / "matest_cli_check.txt";
    const int rc = run_cmd("check --suite reduction", out);
    CHECK(rc == 0);
    CHECK(slurp(out).rfind("PASS reduction", 0) == 0);
    std::filesystem::remove(out);
}

TEST_CASE("unknown flags exit with usage code 1") {
    CHECK(run_cmd("solve --no-such-flag") == 1);
    CHECK(run_cmd("frobnicate") == 1);
    CHECK(run_cmd("check --suite no-such-suite") == 1);
}

TEST_CASE("bench runs the smoke plan end to end") {
    const auto outdir = std::filesystem::temp_directory_path() / "matest_cli_bench";
    std::filesystem::remove_all(outdir);
    const std::string plan = std::string(MATEST_SOURCE_DIR) + "/plans/smoke.json";
    const int rc = run_cmd("bench --plan " + plan + " --out " + outdir.string());
    CHECK(rc == 0);
    REQUIRE(std::filesystem::exists(outdir / "results.csv"));
    std::ifstream in(outdir / "results.csv");
    int data_rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#' && line.rfind("structure,", 0) != 0) ++data_rows;
    CHECK(data_rows == 2);  // 1 structure x 1 p x 1 seed x 2 solvers

    const auto report = std::filesystem::temp_directory_path() / "matest_cli_report.txt";
    CHECK(run_cmd("report --results " + (outdir / "results.csv").string(), report) == 0);
    CHECK(slurp(report).find("toeplitz") != std::string::npos);
    std::filesystem::remove(report);
    std::filesystem::remove_all(outdir);
}

TEST_CASE("generate writes loadable instance directories") {
    const auto outdir = std::filesystem::temp_directory_path() / "matest_cli_gen";
    std::filesystem::remove_all(outdir);
    const std::string plan = std::string(MATEST_SOURCE_DIR) + "/plans/smoke.json";
    CHECK(run_cmd("generate --plan " + plan + " --out " + outdir.string()) == 0);
    int dirs = 0;
    for (const auto& entry : std::filesystem::directory_iterator(outdir)) {
        ++dirs;
        CHECK(std::filesystem::exists(entry.path() / "spec.json"));
        CHECK(std::filesystem::exists(entry.path() / "truth.bin"));
        CHECK(std::filesystem::exists(entry.path() / "s.bin"));
        CHECK(std::filesystem::exists(entry.path() / "meta.json"));
    }
    CHECK(dirs == 1);
    std::filesystem::remove_all(outdir);
}

}  // TEST_SUITE
