#pragma once

// ADMM and linearized ADMM for both problem kinds via the unified iteration
//   X <- prox_{F/(rho phi1)}(X - (1/phi1)(X - Y + V/rho))
//   Y <- prox_{G/(rho phi2)}(Y - (1/phi2)(Y - X+ - V/rho))
//   V <- V + rho (X+ - Y+)
// with residual/gap stopping and trace recording.

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "matest/errors.hpp"
#include "matest/problems.hpp"
#include "matest/prox.hpp"
#include "matest/trace.hpp"

namespace matest {

struct SolverConfig {
    double rho = 1.0;
    double phi1 = 1.5;  // proximal parameter of the X step; > 1 for the convergence guarantee
    double phi2 = 1.5;  // proximal parameter of the Y step
    int max_iter = 20000;
    double tol_primal = 1e-6;
    double tol_dual = 1e-6;
    double tol_gap = 1e-7;
    int record_every = 1;
    bool backtrack_phi = false;  // start at phi = 1, grow x1.5 on majorization failure

    void validate() const {
        if (!(rho > 0)) throw InvalidArgument("SolverConfig: rho must be positive");
        if (!(phi1 >= 1) || !(phi2 >= 1))
            throw InvalidArgument("SolverConfig: phi1, phi2 must be >= 1");
        if (max_iter < 1 || record_every < 1)
            throw InvalidArgument("SolverConfig: max_iter and record_every must be positive");
        if (!(tol_primal > 0) || !(tol_dual > 0) || !(tol_gap > 0))
            throw InvalidArgument("SolverConfig: tolerances must be positive");
    }
};

struct SolveResult {
    IterateState state;
    RunTrace trace;
};

namespace detail {

// One plain LADMM sweep in place; returns the ADMM-style dual residual
// rho * ||Y+ - Y||_F.
inline double ladmm_step(const SplitProblem& prob, double rho, double phi1, double phi2,
                         IterateState& st) {
    Mat mx = st.x - (st.x - st.y + st.v / rho) / phi1;
    st.x = (prob.kind == ProblemKind::Covariance)
               ? prox_cov_f(mx, prob.s, 1.0 / (rho * phi1), prob.eps)
               : prox_logdet_g(mx, prob.s, 1.0 / (rho * phi1), prob.eps);
    Mat my = st.y - (st.y - st.x - st.v / rho) / phi2;
    Mat ynew = soft_threshold_offdiag(my, prob.lambda / (rho * phi2));
    const double dual_res = rho * (ynew - st.y).norm();
    st.y = std::move(ynew);
    st.v += rho * (st.x - st.y);
    return dual_res;
}

inline double lyapunov_energy(const IterateState& st, const IterateState& ref, double phi1,
                              double rho) {
    return (phi1 - 1.0) * (st.x - ref.x).squaredNorm() + (st.y - ref.y).squaredNorm() +
           (st.v - ref.v).squaredNorm() / (rho * rho);
}

// Shared trace recording: objective, feasible dual value, gap, residuals,
// Lyapunov energy against an optional reference triple, elapsed seconds.
class Recorder {
  public:
    Recorder(const SplitProblem& prob, double tol_gap, double phi1, double rho,
             const IterateState* ref)
        : prob_(prob), tol_gap_(tol_gap), phi1_(phi1), rho_(rho), ref_(ref),
          t0_(std::chrono::steady_clock::now()) {}

    // Returns true when the recorded gap is at or below the gap tolerance.
    bool record(int iter, const IterateState& st, double primal_res, double dual_res,
                Phase phase = Phase::None, bool with_energy = true) {
        TraceRow row;
        row.iter = iter;
        row.f = primal_objective(prob_, st.x);
        row.d = dual_objective(prob_, dual_feasible_from_iterate(prob_, st));
        row.gap = row.f - row.d;
        row.primal_res = primal_res;
        row.dual_res = dual_res;
        row.energy = (ref_ && with_energy) ? lyapunov_energy(st, *ref_, phi1_, rho_)
                                           : std::numeric_limits<double>::quiet_NaN();
        row.seconds = elapsed();
        row.phase = phase;
        trace.rows.push_back(row);
        return row.gap <= tol_gap_;
    }

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

    RunTrace take(SolveStatus status, int iters) {
        trace.status = status;
        trace.iters = iters;
        trace.seconds = elapsed();
        return std::move(trace);
    }

    RunTrace trace;

  private:
    const SplitProblem& prob_;
    double tol_gap_;
    double phi1_;
    double rho_;
    const IterateState* ref_;
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

// Covariance default: the floor projection of S. Precision default: a scaled
// identity matched to the magnitude of diag(S). Both are feasible for F.
inline IterateState default_init(const SplitProblem& prob) {
    IterateState st;
    if (prob.kind == ProblemKind::Covariance) {
        st.x = psd_floor_project(prob.s, prob.eps);
    } else {
        const double scale = std::max(1.0, 1.0 / prob.s.diagonal().mean());
        st.x = scale * Mat::Identity(prob.dim(), prob.dim());
    }
    st.y = st.x;
    st.v = Mat::Zero(prob.dim(), prob.dim());
    return st;
}

// Classical ADMM for the covariance problem: floor-projected quadratic step,
// off-diagonal soft-threshold at lambda/rho, dual ascent.
inline SolveResult admm_covariance(const SplitProblem& prob, const SolverConfig& cfg,
                                   IterateState st, const IterateState* ref = nullptr) {
    cfg.validate();
    if (prob.kind != ProblemKind::Covariance)
        throw InvalidArgument("admm_covariance: wrong problem kind");
    detail::Recorder rec(prob, cfg.tol_gap, cfg.phi1, cfg.rho, ref);
    rec.record(0, st, (st.x - st.y).norm(), std::numeric_limits<double>::quiet_NaN());
    SolveStatus status = SolveStatus::MaxIter;
    int k = 0;
    while (k < cfg.max_iter) {
        ++k;
        st.x = psd_floor_project(((prob.s + cfg.rho * st.y - st.v) / (1.0 + cfg.rho)).eval(),
                                 prob.eps);
        Mat ynew = soft_threshold_offdiag((st.x + st.v / cfg.rho).eval(), prob.lambda / cfg.rho);
        const double dual_res = cfg.rho * (ynew - st.y).norm();
        st.y = std::move(ynew);
        st.v += cfg.rho * (st.x - st.y);
        const double primal_res = (st.x - st.y).norm();

        const bool due = (k % cfg.record_every == 0) || k == cfg.max_iter;
        const bool resid_ok = primal_res <= cfg.tol_primal && dual_res <= cfg.tol_dual;
        if (due || resid_ok) {
            const bool gap_ok = rec.record(k, st, primal_res, dual_res);
            if (gap_ok) { status = SolveStatus::GapConverged; break; }
            if (resid_ok) { status = SolveStatus::Converged; break; }
        }
    }
    return SolveResult{std::move(st), rec.take(status, k)};
}

// Classical ADMM for the precision problem: spectral log-det step with
// t = 1/rho, off-diagonal soft-threshold, dual ascent.
inline SolveResult admm_precision(const SplitProblem& prob, const SolverConfig& cfg,
                                  IterateState st, const IterateState* ref = nullptr) {
    cfg.validate();
    if (prob.kind != ProblemKind::Precision)
        throw InvalidArgument("admm_precision: wrong problem kind");
    detail::Recorder rec(prob, cfg.tol_gap, cfg.phi1, cfg.rho, ref);
    rec.record(0, st, (st.x - st.y).norm(), std::numeric_limits<double>::quiet_NaN());
    SolveStatus status = SolveStatus::MaxIter;
    int k = 0;
    while (k < cfg.max_iter) {
        ++k;
        st.x = prox_logdet_g((st.y - st.v / cfg.rho).eval(), prob.s, 1.0 / cfg.rho, prob.eps);
        Mat ynew = soft_threshold_offdiag((st.x + st.v / cfg.rho).eval(), prob.lambda / cfg.rho);
        const double dual_res = cfg.rho * (ynew - st.y).norm();
        st.y = std::move(ynew);
        st.v += cfg.rho * (st.x - st.y);
        const double primal_res = (st.x - st.y).norm();

        const bool due = (k % cfg.record_every == 0) || k == cfg.max_iter;
        const bool resid_ok = primal_res <= cfg.tol_primal && dual_res <= cfg.tol_dual;
        if (due || resid_ok) {
            const bool gap_ok = rec.record(k, st, primal_res, dual_res);
            if (gap_ok) { status = SolveStatus::GapConverged; break; }
            if (resid_ok) { status = SolveStatus::Converged; break; }
        }
    }
    return SolveResult{std::move(st), rec.take(status, k)};
}

// Linearized ADMM in the unified split form; specializes by problem kind
// through the choice of the X-step prox.
inline SolveResult ladmm_unified(const SplitProblem& prob, const SolverConfig& cfg,
                                 IterateState st, const IterateState* ref = nullptr) {
    cfg.validate();
    detail::Recorder rec(prob, cfg.tol_gap, cfg.phi1, cfg.rho, ref);
    rec.record(0, st, (st.x - st.y).norm(), std::numeric_limits<double>::quiet_NaN());
    SolveStatus status = SolveStatus::MaxIter;
    double phi1 = cfg.backtrack_phi ? 1.0 : cfg.phi1;
    double phi2 = cfg.backtrack_phi ? 1.0 : cfg.phi2;
    int k = 0;
    while (k < cfg.max_iter) {
        ++k;
        for (;;) {
            Mat mx = st.x - (st.x - st.y + st.v / cfg.rho) / phi1;
            Mat xnew = (prob.kind == ProblemKind::Covariance)
                           ? prox_cov_f(mx, prob.s, 1.0 / (cfg.rho * phi1), prob.eps)
                           : prox_logdet_g(mx, prob.s, 1.0 / (cfg.rho * phi1), prob.eps);
            if (cfg.backtrack_phi) {
                // The majorized surrogate must upper-bound the true augmented
                // increment at the new point; the coupling is exactly quadratic
                // with curvature rho, so this can only fail for phi1 < 1.
                const Mat r = st.x - st.y + st.v / cfg.rho;
                const double truth =
                    0.5 * cfg.rho *
                    ((xnew - st.y + st.v / cfg.rho).squaredNorm() - r.squaredNorm());
                const double surrogate = cfg.rho * inner(r, xnew - st.x) +
                                         0.5 * cfg.rho * phi1 * (xnew - st.x).squaredNorm();
                if (surrogate + 1e-12 < truth) { phi1 *= 1.5; continue; }
            }
            st.x = std::move(xnew);
            break;
        }
        Mat my = st.y - (st.y - st.x - st.v / cfg.rho) / phi2;
        Mat ynew = soft_threshold_offdiag(my, prob.lambda / (cfg.rho * phi2));
        const double dual_res = cfg.rho * (ynew - st.y).norm();
        st.y = std::move(ynew);
        st.v += cfg.rho * (st.x - st.y);
        const double primal_res = (st.x - st.y).norm();

        const bool due = (k % cfg.record_every == 0) || k == cfg.max_iter;
        const bool resid_ok = primal_res <= cfg.tol_primal && dual_res <= cfg.tol_dual;
        if (due || resid_ok) {
            const bool gap_ok = rec.record(k, st, primal_res, dual_res);
            if (gap_ok) { status = SolveStatus::GapConverged; break; }
            if (resid_ok) { status = SolveStatus::Converged; break; }
        }
    }
    return SolveResult{std::move(st), rec.take(status, k)};
}

// Gap-threshold early stopping: first recorded iterate whose duality gap is at
// or below c^2 |support| log(p) / n, the statistically motivated level.
inline std::optional<int> early_stop_statistical(const RunTrace& trace, const SplitProblem& prob,
                                                 int support_size, double c) {
    if (trace.rows.empty()) throw InvalidArgument("early_stop_statistical: empty trace");
    const double threshold =
        c * c * double(support_size) * std::log(double(prob.dim())) / double(prob.n);
    for (const auto& row : trace.rows)
        if (row.gap <= threshold) return row.iter;
    return std::nullopt;
}

}  // namespace matest
