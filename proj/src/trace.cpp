#include "matest/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "matest/errors.hpp"

namespace matest {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::GapConverged: return "gap_converged";
        case SolveStatus::MaxIter: return "max_iter";
        case SolveStatus::Diverged: return "diverged";
    }
    return "unknown";
}

namespace {

void put(std::ofstream& out, double v) {
    if (std::isnan(v)) return;  // absent field
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

}  // namespace

void write_trace_csv(const std::filesystem::path& file, const RunTrace& trace) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    bool with_phase = false;
    for (const auto& r : trace.rows)
        if (r.phase != Phase::None) with_phase = true;
    out << "iter,f,d,gap,primal_res,dual_res,energy,seconds";
    if (with_phase) out << ",phase";
    out << "\n";
    for (const auto& r : trace.rows) {
        out << r.iter << ',';
        put(out, r.f); out << ',';
        put(out, r.d); out << ',';
        put(out, r.gap); out << ',';
        put(out, r.primal_res); out << ',';
        put(out, r.dual_res); out << ',';
        put(out, r.energy); out << ',';
        put(out, r.seconds);
        if (with_phase)
            out << ',' << (r.phase == Phase::Learned ? "learned"
                           : r.phase == Phase::Tail  ? "tail"
                                                     : "");
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + file.string());
}

}  // namespace matest
