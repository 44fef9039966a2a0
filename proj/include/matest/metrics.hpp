#pragma once

// Evaluation of an estimate against its instance: Frobenius error to truth,
// nuclear norm of the estimate, final gap, solve time, off-diagonal support
// precision/recall, and iteration count.

#include "matest/errors.hpp"
#include "matest/generators.hpp"
#include "matest/symcore.hpp"
#include "matest/trace.hpp"

namespace matest {

struct EvalReport {
    double frob_err = 0;
    double nuclear = 0;
    double gap_final = 0;
    double seconds = 0;
    double support_precision = 1;
    double support_recall = 1;
    int iters = 0;
};

// Support threshold default 1e-6: solver tolerances sit at or below 1e-6, so
// surviving entries are decisively nonzero.
inline EvalReport evaluate(const Mat& est, const Instance& inst, const RunTrace& trace,
                           double support_threshold = 1e-6) {
    if (est.rows() != inst.truth.rows()) throw DimMismatch("evaluate: dim mismatch");
    EvalReport rep;
    rep.frob_err = (est - inst.truth).norm();
    rep.nuclear = nuclear_norm(est);
    rep.gap_final = trace.final_gap();
    rep.seconds = trace.seconds;
    rep.iters = trace.iters;

    long both = 0, est_only = 0, truth_only = 0;
    for (Eigen::Index j = 0; j < est.cols(); ++j)
        for (Eigen::Index i = 0; i < est.rows(); ++i) {
            if (i == j) continue;
            const bool e = std::abs(est(i, j)) > support_threshold;
            const bool t = std::abs(inst.truth(i, j)) > support_threshold;
            both += e && t;
            est_only += e && !t;
            truth_only += !e && t;
        }
    rep.support_precision = (both + est_only) == 0 ? 1.0 : double(both) / double(both + est_only);
    rep.support_recall = (both + truth_only) == 0 ? 1.0 : double(both) / double(both + truth_only);
    return rep;
}

}  // namespace matest
