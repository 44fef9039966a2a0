#pragma once

// Experiment plans and the benchmark harness behind the CLI: instance
// generation/persistence, per-run solver dispatch, results.csv, trace and
// figure-substrate emission, and schedule (de)serialization.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "matest/baselines.hpp"
#include "matest/generators.hpp"
#include "matest/lbo.hpp"
#include "matest/metrics.hpp"
#include "matest/solvers.hpp"

namespace matest {

enum class SolverId { Admm, Ladmm, Lbo, Tosa, Pfbs, Fista, Proxgrad, Spg };

const char* to_string(SolverId id);
std::optional<SolverId> solver_from_string(const std::string& name);
bool solver_supports(SolverId id, ProblemKind kind);

// Optional per-run parameter overrides; unset fields fall back to defaults.
struct RunOverrides {
    std::optional<double> lambda;
    std::optional<double> eps;
    std::optional<double> rho;
    std::optional<double> phi1;
    std::optional<double> phi2;
    std::optional<double> step;
    std::optional<double> tol_gap;
    std::optional<double> tol_primal;
    std::optional<double> tol_dual;
    std::optional<int> max_iter;
    std::optional<int> record_every;
    std::optional<int> stages;  // LBO learned stages (canonical schedule)
    std::optional<std::string> schedule_file;  // trained LBO schedule JSON
};

struct ExperimentPlan {
    std::string name = "plan";
    std::vector<StructureSpec> structures;
    std::vector<Eigen::Index> p_grid;
    int n = 500;
    std::vector<SolverId> solvers;
    std::vector<std::uint64_t> seeds = {1};
    RunOverrides overrides;
    std::filesystem::path output_dir = "out";
    bool emit_figures = false;
    int jobs = 1;
};

// Structure <-> JSON. Grid entries may omit "side", in which case it is
// derived from p at expansion time.
StructureSpec structure_from_json(const std::string& json_text, Eigen::Index p);
std::string structure_to_json(const StructureSpec& spec);

ExperimentPlan load_plan(const std::filesystem::path& file);

// Instance persistence: a directory holding spec.json, truth.bin, s.bin and
// meta.json (seed, n).
void save_instance(const std::filesystem::path& dir, const StructureSpec& spec,
                   const Instance& inst);
Instance load_instance(const std::filesystem::path& dir, StructureSpec* spec_out = nullptr);

// Problem documents: {kind, p, n, lambda, eps, s: <matrix file reference>}.
void save_problem(const std::filesystem::path& file, const SplitProblem& prob,
                  const std::filesystem::path& matrix_file);
SplitProblem load_problem(const std::filesystem::path& file);

// Stage-parameter schedules: {K, mode, stages: [{alpha, beta, gamma}, ...]}.
void save_schedule(const std::filesystem::path& file, const StageParams& sp);
StageParams load_schedule(const std::filesystem::path& file);

// Content hash for trained-schedule caching, over (kind, p, lambda, tag).
std::string schedule_cache_key(ProblemKind kind, Eigen::Index p, double lambda,
                               const std::string& generator_tag);

struct RunOutcome {
    std::string structure;
    double param = 0;
    Eigen::Index p = 0;
    int n = 0;
    std::uint64_t seed = 0;
    std::string solver;
    double seconds = 0;
    int iters = 0;
    double frob_err = 0;
    double nuclear = 0;
    double gap_final = 0;
    std::string status;
};

// Solve one instance with one solver. Never throws for solver-side failures;
// those come back as status strings.
RunOutcome run_single(const Instance& inst, SolverId solver, const RunOverrides& overrides,
                      RunTrace* trace_out = nullptr, Mat* estimate_out = nullptr);

// Expand the plan grid, run each cell in a worker pool, and write
// results.csv (plus per-run figure substrates when requested).
// MATEST_SEED, when set, replaces the plan's seed list.
std::filesystem::path run_plan(const ExperimentPlan& plan);

void write_results_csv(const std::filesystem::path& file, const std::vector<RunOutcome>& rows);
std::vector<RunOutcome> read_results_csv(const std::filesystem::path& file);

// Aggregate results into a per-(structure, param, p) table, one line per
// solver column group, written to the returned string.
std::string format_report(const std::vector<RunOutcome>& rows);

// Deterministic per-cell seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace matest
