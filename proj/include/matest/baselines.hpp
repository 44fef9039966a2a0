#pragma once

// First-order comparison solvers.
//
// Covariance: three-operator (Davis-Yin) splitting, proximal forward-backward
// splitting, and FISTA. The composite backward step in PFBS/FISTA is the exact
// l1,off prox followed by the cone projection, which is inexact when the floor
// binds; the cross-solver tolerances account for that.
//
// Precision: proximal gradient with backtracking line search, and spectral
// projected gradient with Barzilai-Borwein steps and a nonmonotone acceptance
// rule over the last bb_memory objective values.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

#include "matest/errors.hpp"
#include "matest/problems.hpp"
#include "matest/prox.hpp"
#include "matest/solvers.hpp"
#include "matest/trace.hpp"

namespace matest {

struct BaselineConfig {
    double step = 1.0;  // initial step size gamma
    int max_iter = 20000;
    double tol_gap = 1e-7;
    int bb_memory = 10;             // nonmonotone window M for SPG
    double backtrack_factor = 0.5;  // in (0, 1)
    int record_every = 1;
    bool fista_restart = false;  // gradient-based momentum restart, off by default

    void validate() const {
        if (!(step > 0)) throw InvalidArgument("BaselineConfig: step must be positive");
        if (max_iter < 1 || record_every < 1)
            throw InvalidArgument("BaselineConfig: max_iter and record_every must be positive");
        if (!(tol_gap > 0)) throw InvalidArgument("BaselineConfig: tol_gap must be positive");
        if (bb_memory < 0) throw InvalidArgument("BaselineConfig: bb_memory must be nonnegative");
        if (!(backtrack_factor > 0) || !(backtrack_factor < 1))
            throw InvalidArgument("BaselineConfig: backtrack_factor must lie in (0,1)");
    }
};

struct BaselineResult {
    Mat estimate;
    RunTrace trace;
};

// Momentum sequence t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2.
inline double fista_t_next(double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

namespace detail {

// Covariance baselines carry no multiplier; S - Sigma is the natural
// stand-in, which the dual construction negates and clips.
inline IterateState cov_iterate(const SplitProblem& prob, const Mat& sigma) {
    return IterateState{sigma, sigma, (prob.s - sigma).eval()};
}

class BaselineRecorder {
  public:
    BaselineRecorder(const SplitProblem& prob, const BaselineConfig& cfg)
        : prob_(prob), cfg_(cfg), t0_(std::chrono::steady_clock::now()) {}

    // Records the row and reports the stopping decision. Divergence is
    // declared when the objective exceeds 10x its initial magnitude.
    bool record(int iter, const IterateState& st, double primal_res, double dual_res) {
        TraceRow row;
        row.iter = iter;
        row.f = primal_objective(prob_, st.x);
        row.d = dual_objective(prob_, dual_feasible_from_iterate(prob_, st));
        row.gap = row.f - row.d;
        row.primal_res = primal_res;
        row.dual_res = dual_res;
        row.energy = std::numeric_limits<double>::quiet_NaN();
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        trace.rows.push_back(row);
        if (iter == 0) f0_ = row.f;
        if (row.f > 10.0 * (std::abs(f0_) + 1.0)) {
            diverged_ = true;
            return true;
        }
        return row.gap <= cfg_.tol_gap;
    }

    RunTrace take(int iters) {
        trace.status = diverged_ ? SolveStatus::Diverged
                       : (!trace.rows.empty() && trace.rows.back().gap <= cfg_.tol_gap)
                           ? SolveStatus::GapConverged
                           : SolveStatus::MaxIter;
        trace.iters = iters;
        trace.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        return std::move(trace);
    }

    RunTrace trace;

  private:
    const SplitProblem& prob_;
    const BaselineConfig& cfg_;
    std::chrono::steady_clock::time_point t0_;
    double f0_ = 0;
    bool diverged_ = false;
};

}  // namespace detail

// Davis-Yin splitting over h = 1/2 ||. - S||_F^2 (L = 1), g1 = lambda ||.||_1,off,
// g2 = ind{. >= eps I}:
//   xB = prox_{g g2}(z),  xA = prox_{g g1}(2 xB - z - g grad_h(xB)),  z += xA - xB.
// Requires step in (0, 2); returns xB at termination.
inline BaselineResult tosa_covariance(const SplitProblem& prob, const BaselineConfig& cfg,
                                      Mat init) {
    cfg.validate();
    if (prob.kind != ProblemKind::Covariance)
        throw InvalidArgument("tosa_covariance: wrong problem kind");
    if (!(cfg.step > 0) || !(cfg.step < 2))
        throw InvalidArgument("tosa_covariance: step must lie in (0, 2)");
    const double g = cfg.step;
    detail::BaselineRecorder rec(prob, cfg);
    Mat z = std::move(init);
    Mat xb = psd_floor_project(z, prob.eps);
    rec.record(0, detail::cov_iterate(prob, xb), 0.0,
               std::numeric_limits<double>::quiet_NaN());
    int k = 0;
    bool stop = false;
    while (k < cfg.max_iter && !stop) {
        ++k;
        Mat xa = soft_threshold_offdiag((2.0 * xb - z - g * (xb - prob.s)).eval(),
                                        g * prob.lambda);
        const double fp_res = (xa - xb).norm();
        z += xa - xb;
        xb = psd_floor_project(z, prob.eps);
        if (k % cfg.record_every == 0 || k == cfg.max_iter)
            stop = rec.record(k, detail::cov_iterate(prob, xb), fp_res, fp_res / g);
    }
    return BaselineResult{std::move(xb), rec.take(k)};
}

// Forward-backward splitting: gradient step on the quadratic, exact l1,off
// prox, then cone projection. Requires step <= 1 (L = 1).
inline BaselineResult pfbs_covariance(const SplitProblem& prob, const BaselineConfig& cfg,
                                      Mat init) {
    cfg.validate();
    if (prob.kind != ProblemKind::Covariance)
        throw InvalidArgument("pfbs_covariance: wrong problem kind");
    if (!(cfg.step <= 1.0)) throw InvalidArgument("pfbs_covariance: step must be <= 1");
    const double g = cfg.step;
    detail::BaselineRecorder rec(prob, cfg);
    Mat sigma = std::move(init);
    rec.record(0, detail::cov_iterate(prob, sigma), 0.0,
               std::numeric_limits<double>::quiet_NaN());
    int k = 0;
    bool stop = false;
    while (k < cfg.max_iter && !stop) {
        ++k;
        Mat next = psd_floor_project(
            soft_threshold_offdiag((sigma - g * (sigma - prob.s)).eval(), g * prob.lambda),
            prob.eps);
        const double move = (next - sigma).norm() / g;
        sigma = std::move(next);
        if (k % cfg.record_every == 0 || k == cfg.max_iter)
            stop = rec.record(k, detail::cov_iterate(prob, sigma), move, move);
    }
    return BaselineResult{std::move(sigma), rec.take(k)};
}

// FISTA: the PFBS backward step applied at the extrapolated point with
// Nesterov momentum; optional gradient-based restart (off by default).
inline BaselineResult fista_covariance(const SplitProblem& prob, const BaselineConfig& cfg,
                                       Mat init) {
    cfg.validate();
    if (prob.kind != ProblemKind::Covariance)
        throw InvalidArgument("fista_covariance: wrong problem kind");
    if (!(cfg.step <= 1.0)) throw InvalidArgument("fista_covariance: step must be <= 1");
    const double g = cfg.step;
    detail::BaselineRecorder rec(prob, cfg);
    Mat sigma = std::move(init);
    Mat prev = sigma;
    Mat y = sigma;
    double t = 1.0;
    rec.record(0, detail::cov_iterate(prob, sigma), 0.0,
               std::numeric_limits<double>::quiet_NaN());
    int k = 0;
    bool stop = false;
    while (k < cfg.max_iter && !stop) {
        ++k;
        prev = sigma;
        sigma = psd_floor_project(
            soft_threshold_offdiag((y - g * (y - prob.s)).eval(), g * prob.lambda), prob.eps);
        const double tn = fista_t_next(t);
        if (cfg.fista_restart && inner(y - sigma, sigma - prev) > 0) {
            t = 1.0;
            y = sigma;
        } else {
            y = sigma + ((t - 1.0) / tn) * (sigma - prev);
            t = tn;
        }
        const double move = (sigma - prev).norm() / g;
        if (k % cfg.record_every == 0 || k == cfg.max_iter)
            stop = rec.record(k, detail::cov_iterate(prob, sigma), move, move);
    }
    return BaselineResult{std::move(sigma), rec.take(k)};
}

namespace detail {

struct PrecPoint {
    Mat theta;
    Mat inv;
    double logdet = 0;
    double dmin = 0;
};

inline PrecPoint prec_point(const Mat& theta) {
    EigenDecomp ed = sym_eig(theta);
    PrecPoint pt;
    pt.theta = theta;
    pt.inv = ed.q * ed.d.cwiseInverse().asDiagonal() * ed.q.transpose();
    pt.inv = ((pt.inv + pt.inv.transpose()) * 0.5).eval();
    pt.logdet = ed.d.array().log().sum();
    pt.dmin = ed.d.minCoeff();
    return pt;
}

inline double prec_smooth(const SplitProblem& prob, const PrecPoint& pt) {
    return inner(prob.s, pt.theta) - pt.logdet;
}

inline IterateState prec_iterate(const SplitProblem& prob, const PrecPoint& pt) {
    // Multiplier stand-in: the smooth gradient S - Theta^{-1}.
    return IterateState{pt.theta, pt.theta, (prob.s - pt.inv).eval()};
}

}  // namespace detail

// Proximal gradient with backtracking: gradient S - Theta^{-1}, off-diagonal
// soft-threshold, step halved while the candidate loses positive definiteness
// (lambda_min <= eps/2) or the smooth descent condition fails.
inline BaselineResult proxgrad_precision(const SplitProblem& prob, const BaselineConfig& cfg,
                                         Mat init) {
    cfg.validate();
    if (prob.kind != ProblemKind::Precision)
        throw InvalidArgument("proxgrad_precision: wrong problem kind");
    detail::BaselineRecorder rec(prob, cfg);
    detail::PrecPoint cur = detail::prec_point(init);
    if (cur.dmin <= 0)
        throw NotPositiveDefinite("proxgrad_precision: init not positive definite");
    rec.record(0, detail::prec_iterate(prob, cur), 0.0,
               std::numeric_limits<double>::quiet_NaN());
    double g = cfg.step;
    int k = 0;
    bool stop = false;
    while (k < cfg.max_iter && !stop) {
        ++k;
        Mat grad = prob.s - cur.inv;
        const double fs = detail::prec_smooth(prob, cur);
        detail::PrecPoint cand;
        int halvings = 0;
        for (;; ++halvings) {
            if (halvings > 60)
                throw LineSearchStalled("proxgrad_precision: 60 halvings exhausted");
            cand = detail::prec_point(
                soft_threshold_offdiag((cur.theta - g * grad).eval(), g * prob.lambda));
            if (cand.dmin <= prob.eps / 2) {
                g *= cfg.backtrack_factor;
                continue;
            }
            const double quad = fs + inner(grad, cand.theta - cur.theta) +
                                (cand.theta - cur.theta).squaredNorm() / (2.0 * g);
            if (detail::prec_smooth(prob, cand) > quad + 1e-12) {
                g *= cfg.backtrack_factor;
                continue;
            }
            break;
        }
        const double move = (cand.theta - cur.theta).norm() / g;
        cur = std::move(cand);
        if (k % cfg.record_every == 0 || k == cfg.max_iter)
            stop = rec.record(k, detail::prec_iterate(prob, cur), move, move);
    }
    return BaselineResult{std::move(cur.theta), rec.take(k)};
}

// Spectral projected gradient: Barzilai-Borwein steps safeguarded into
// [1e-8, 1e8], acceptance against the max of the last bb_memory objective
// values, and the same proximal/positive-definiteness safeguard as proxgrad.
inline BaselineResult spg_precision(const SplitProblem& prob, const BaselineConfig& cfg,
                                    Mat init) {
    cfg.validate();
    if (prob.kind != ProblemKind::Precision)
        throw InvalidArgument("spg_precision: wrong problem kind");
    detail::BaselineRecorder rec(prob, cfg);
    detail::PrecPoint cur = detail::prec_point(init);
    if (cur.dmin <= 0)
        throw NotPositiveDefinite("spg_precision: init not positive definite");
    rec.record(0, detail::prec_iterate(prob, cur), 0.0,
               std::numeric_limits<double>::quiet_NaN());

    const int window = std::max(1, cfg.bb_memory);
    std::deque<double> recent{primal_objective(prob, cur.theta)};
    Mat grad = prob.s - cur.inv;
    double bb = cfg.step;
    int k = 0;
    bool stop = false;
    while (k < cfg.max_iter && !stop) {
        ++k;
        double g = std::clamp(bb, 1e-8, 1e8);
        detail::PrecPoint cand;
        int halvings = 0;
        const double fmax = *std::max_element(recent.begin(), recent.end());
        for (;; ++halvings) {
            if (halvings > 60) throw LineSearchStalled("spg_precision: 60 halvings exhausted");
            cand = detail::prec_point(
                soft_threshold_offdiag((cur.theta - g * grad).eval(), g * prob.lambda));
            if (cand.dmin <= prob.eps / 2 || primal_objective(prob, cand.theta) > fmax) {
                g *= cfg.backtrack_factor;
                continue;
            }
            break;
        }
        Mat gnew = prob.s - cand.inv;
        const Mat dtheta = cand.theta - cur.theta;
        const double denom = inner(dtheta, gnew - grad);
        bb = denom > 0 ? dtheta.squaredNorm() / denom : 1e8;
        const double move = dtheta.norm() / g;
        cur = std::move(cand);
        grad = std::move(gnew);
        recent.push_back(primal_objective(prob, cur.theta));
        if (int(recent.size()) > window) recent.pop_front();
        if (k % cfg.record_every == 0 || k == cfg.max_iter)
            stop = rec.record(k, detail::prec_iterate(prob, cur), move, move);
    }
    return BaselineResult{std::move(cur.theta), rec.take(k)};
}

}  // namespace matest
