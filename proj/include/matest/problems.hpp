#pragma once

// The unified split problem  min F(X) + G(Y)  s.t.  X = Y  with
//   Covariance:  F(X) = 1/2 ||X - S||_F^2 + ind{X >= eps I},  G = lambda ||.||_1,off
//   Precision:   F(X) = Tr(SX) - log det X + ind{X >= eps I}, G = lambda ||.||_1,off
// plus primal/dual objectives, feasible dual points built from iterates, the
// duality gap, and KKT residuals.

#include <cmath>
#include <tuple>

#include "matest/errors.hpp"
#include "matest/symcore.hpp"
#include "matest/types.hpp"

namespace matest {

enum class ProblemKind { Covariance, Precision };

struct SplitProblem {
    ProblemKind kind = ProblemKind::Covariance;
    Mat s;               // sample covariance
    double lambda = 0;   // off-diagonal l1 penalty
    double eps = 1e-4;   // eigenvalue floor
    int n = 1;           // sample count, used by lambda defaults and stopping rules

    Eigen::Index dim() const { return s.rows(); }
};

// lambda = 2 sqrt(log p / n), the scaling suggested by entrywise concentration.
inline double default_lambda(Eigen::Index p, int n) {
    return 2.0 * std::sqrt(std::log(double(p)) / double(n));
}

inline SplitProblem make_problem(ProblemKind kind, const Mat& s, int n, double lambda = -1,
                                 double eps = 1e-4) {
    SplitProblem prob;
    prob.kind = kind;
    prob.s = symmetrized(s);
    prob.n = n;
    prob.lambda = lambda >= 0 ? lambda : default_lambda(s.rows(), n);
    prob.eps = eps;
    if (!(prob.eps > 0)) throw InvalidArgument("SplitProblem: eps must be positive");
    if (prob.n < 1) throw InvalidArgument("SplitProblem: n must be positive");
    return prob;
}

// f1(M) = 1/2 ||M - S||_F^2 + lambda ||M||_1,off
// f2(M) = Tr(SM) - log det M + lambda ||M||_1,off   (requires M > 0)
inline double primal_objective(const SplitProblem& prob, const Mat& m) {
    if (m.rows() != prob.dim()) throw DimMismatch("primal_objective: dim mismatch");
    if (prob.kind == ProblemKind::Covariance)
        return 0.5 * (m - prob.s).squaredNorm() + prob.lambda * l1_offdiag(m);
    EigenDecomp ed = sym_eig(m);
    if (ed.d.minCoeff() <= 0)
        throw NotPositiveDefinite("primal_objective: precision iterate not positive definite");
    const double logdet = ed.d.array().log().sum();
    return inner(prob.s, m) - logdet + prob.lambda * l1_offdiag(m);
}

// Covariance dual (paper convention): d1(L) = -<L,S> - 1/2 ||L||_F^2, whose
// analytic maximizer is L = -S. Precision dual: d2(Xi) = log det(S - Xi) + p,
// valid for S - Xi > 0 and |xi_ij| <= lambda off the diagonal.
inline double dual_objective(const SplitProblem& prob, const Mat& dualvar) {
    if (dualvar.rows() != prob.dim()) throw DimMismatch("dual_objective: dim mismatch");
    if (prob.kind == ProblemKind::Covariance)
        return -inner(dualvar, prob.s) - 0.5 * dualvar.squaredNorm();
    EigenDecomp ed = sym_eig((prob.s - dualvar).eval());
    if (ed.d.minCoeff() <= 0)
        throw InfeasibleDual("dual_objective: S - Xi not positive definite");
    return ed.d.array().log().sum() + double(prob.dim());
}

// Feasible dual point built from the current iterate.
//
// Covariance: the KKT multiplier satisfies V* = S - X* on the interior, and
// the paper's d1 takes the opposite sign, so the candidate is -V with
// off-diagonals clipped to [-lambda, lambda] and the diagonal zeroed (both
// no-ops at a KKT point where the floor is inactive).
//
// Precision: Xi = S - X^{-1} with off-diagonals clipped to [-lambda, lambda]
// and the diagonal zeroed (the conjugate of the off-diagonal penalty admits no
// diagonal slack; at a KKT point (S - X^{-1})_ii = 0 so this is a no-op);
// if S - Xi fails to be positive definite, shrink Xi toward 0 by halving.
inline Mat dual_feasible_from_iterate(const SplitProblem& prob, const IterateState& st) {
    if (prob.kind == ProblemKind::Covariance) {
        Mat cand = -st.v;
        for (Eigen::Index j = 0; j < cand.cols(); ++j)
            for (Eigen::Index i = 0; i < cand.rows(); ++i) {
                if (i == j)
                    cand(i, j) = 0.0;
                else
                    cand(i, j) = std::clamp(cand(i, j), -prob.lambda, prob.lambda);
            }
        return cand;
    }
    EigenDecomp ed = sym_eig(st.x);
    if (ed.d.minCoeff() <= 0)
        throw NotPositiveDefinite("dual_feasible_from_iterate: X not positive definite");
    Mat xinv = ed.q * ed.d.cwiseInverse().asDiagonal() * ed.q.transpose();
    Mat cand = prob.s - ((xinv + xinv.transpose()) * 0.5);
    for (Eigen::Index j = 0; j < cand.cols(); ++j)
        for (Eigen::Index i = 0; i < cand.rows(); ++i) {
            if (i == j)
                cand(i, j) = 0.0;
            else
                cand(i, j) = std::clamp(cand(i, j), -prob.lambda, prob.lambda);
        }
    for (int halving = 0; halving <= 60; ++halving) {
        if (min_eigenvalue((prob.s - cand).eval()) > 0) return cand;
        cand *= 0.5;
    }
    throw DualConstructionFailed("dual_feasible_from_iterate: halving cap reached");
}

inline double duality_gap(const SplitProblem& prob, const Mat& m, const Mat& dualvar) {
    return primal_objective(prob, m) - dual_objective(prob, dualvar);
}

struct KktResidual {
    double primal = 0;   // ||X - Y||_F
    double dual = 0;     // dist of -(V + grad of smooth F at X) to the normal cone
    double subgrad = 0;  // dist of V to the subdifferential of lambda ||.||_1,off at Y
};

namespace detail {

// Distance of R := V + grad F_smooth(X) to -N_K(X), K = {X >= eps I}.
// With Q_a spanning the active eigenspace (eigenvalues at the floor), the
// normal cone is {-Q_a W Q_a^T : W >= 0}; the distance reduces to replacing
// the active-active block of R by its projection residual onto -PSD.
inline double stationarity_distance(const Mat& r, const Mat& x, double eps) {
    EigenDecomp ed = sym_eig(x);
    const double atol = 1e-8 * std::max(1.0, ed.d.cwiseAbs().maxCoeff());
    Eigen::Index nact = 0;
    while (nact < ed.d.size() && ed.d[nact] <= eps + atol) ++nact;
    if (nact == 0) return r.norm();
    Mat qa = ed.q.leftCols(nact);
    Mat raa = qa.transpose() * r * qa;
    raa = ((raa + raa.transpose()) * 0.5).eval();
    // -(R + Q_a W Q_a^T) minimized over W >= 0: keep only the PSD-infeasible
    // part of -R_aa, i.e. the positive eigenvalues of R_aa survive.
    EigenDecomp eaa = sym_eig(raa);
    const double offblock = r.squaredNorm() - raa.squaredNorm();
    const double active = eaa.d.cwiseMax(0.0).squaredNorm();
    return std::sqrt(std::max(0.0, offblock) + active);
}

}  // namespace detail

// KKT conditions of the split problem: X = Y, -V in dF(X), V in dG(Y).
inline KktResidual kkt_residual(const SplitProblem& prob, const IterateState& st) {
    KktResidual res;
    res.primal = (st.x - st.y).norm();

    Mat grad;
    if (prob.kind == ProblemKind::Covariance) {
        grad = st.x - prob.s;
    } else {
        EigenDecomp ed = sym_eig(st.x);
        if (ed.d.minCoeff() <= 0)
            throw NotPositiveDefinite("kkt_residual: X not positive definite");
        Mat xinv = ed.q * ed.d.cwiseInverse().asDiagonal() * ed.q.transpose();
        grad = prob.s - ((xinv + xinv.transpose()) * 0.5);
    }
    res.dual = detail::stationarity_distance((st.v + grad).eval(), st.x, prob.eps);

    double sq = 0;
    for (Eigen::Index j = 0; j < st.y.cols(); ++j)
        for (Eigen::Index i = 0; i < st.y.rows(); ++i) {
            const double v = st.v(i, j);
            double viol;
            if (i == j)
                viol = std::abs(v);
            else if (st.y(i, j) == 0.0)
                viol = std::max(0.0, std::abs(v) - prob.lambda);
            else
                viol = std::abs(v - prob.lambda * (st.y(i, j) > 0 ? 1.0 : -1.0));
            sq += viol * viol;
        }
    res.subgrad = std::sqrt(sq);
    return res;
}

}  // namespace matest
