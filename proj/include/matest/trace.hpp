#pragma once

// Per-iteration solver trace and its CSV export
// (header: iter,f,d,gap,primal_res,dual_res,energy,seconds).

#include <filesystem>
#include <string>
#include <vector>

namespace matest {

enum class SolveStatus { Converged, GapConverged, MaxIter, Diverged };

const char* to_string(SolveStatus s);

enum class Phase { None, Learned, Tail };

struct TraceRow {
    int iter = 0;
    double f = 0;
    double d = 0;
    double gap = 0;
    double primal_res = 0;
    double dual_res = 0;
    double energy = 0;  // NaN when no reference triple exists
    double seconds = 0;
    Phase phase = Phase::None;
};

struct RunTrace {
    std::vector<TraceRow> rows;
    SolveStatus status = SolveStatus::MaxIter;
    int iters = 0;
    double seconds = 0;

    const TraceRow& last() const { return rows.back(); }
    double final_gap() const { return rows.empty() ? 0.0 : rows.back().gap; }
};

// NaN fields are written as empty cells. A phase column is appended only when
// some row carries a phase marker (reparameterized runs).
void write_trace_csv(const std::filesystem::path& file, const RunTrace& trace);

}  // namespace matest
