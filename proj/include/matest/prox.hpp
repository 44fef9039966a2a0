#pragma once

// Proximal operators of the covariance fit term, the log-det term, and the
// off-diagonal l1 penalty, plus their weighted (Hadamard-metric) variants.
//
// All step sizes enter as t = 1/(rho*phi) so the splitting solvers, the
// baselines, and the reparameterized solver share one interface.

#include <cmath>

#include "matest/errors.hpp"
#include "matest/symcore.hpp"
#include "matest/types.hpp"

namespace matest {

// Entrywise soft-threshold of the off-diagonal, diagonal untouched:
//   out_ij = sgn(b_ij) max(|b_ij| - tau, 0)  for i != j,  out_ii = b_ii.
inline Mat soft_threshold_offdiag(const Mat& b, double tau) {
    if (tau < 0) throw InvalidArgument("soft_threshold_offdiag: negative threshold");
    if (tau == 0) return b;
    Mat out = b.unaryExpr([tau](double v) {
        const double m = std::abs(v) - tau;
        return m > 0 ? (v > 0 ? m : -m) : 0.0;
    });
    out.diagonal() = b.diagonal();
    return out;
}

// prox of f(X) = 1/2 ||X - S||_F^2 + indicator{X >= eps I} at M with step t:
//   argmin_{X >= eps I} 1/2 ||X-S||^2 + 1/(2t) ||X-M||^2
// The unconstrained minimizer is the convex combination (t S + M)/(1+t);
// the constraint is enforced spectrally.
inline Mat prox_cov_f(const Mat& m, const Mat& s, double t, double eps) {
    if (!(t > 0)) throw InvalidArgument("prox_cov_f: step must be positive");
    if (m.rows() != s.rows()) throw DimMismatch("prox_cov_f: dim mismatch");
    return psd_floor_project(((t * s + m) / (1.0 + t)).eval(), eps);
}

// prox of g(X) = Tr(SX) - log det X + indicator{X >= eps I} at M with step t.
// Closed form: eigendecompose M - t S = Q diag(d_i) Q^T and map
//   d_i -> max((d_i + sqrt(d_i^2 + 4t)) / 2, eps).
inline Mat prox_logdet_g(const Mat& m, const Mat& s, double t, double eps) {
    if (!(t > 0)) throw InvalidArgument("prox_logdet_g: step must be positive");
    if (!(eps > 0)) throw InvalidArgument("prox_logdet_g: eps must be positive");
    if (m.rows() != s.rows()) throw DimMismatch("prox_logdet_g: dim mismatch");
    EigenDecomp ed = sym_eig((m - t * s).eval());
    Vec mapped(ed.d.size());
    for (Eigen::Index i = 0; i < ed.d.size(); ++i) {
        const double d = ed.d[i];
        mapped[i] = std::max(0.5 * (d + std::sqrt(d * d + 4.0 * t)), eps);
    }
    Mat out = ed.q * mapped.asDiagonal() * ed.q.transpose();
    return ((out + out.transpose()) * 0.5).eval();
}

// Entrywise-positive proximal weight with its recorded bounds c1 <= w_ij <= c2.
struct WeightMat {
    Mat w;
    double cmin = 0;
    double cmax = 0;
    bool scalar = false;

    static WeightMat from_scalar(double t, Eigen::Index p) {
        if (!(t > 0)) throw InvalidArgument("WeightMat: weight must be positive");
        WeightMat wm;
        wm.w = Mat::Constant(p, p, t);
        wm.cmin = wm.cmax = t;
        wm.scalar = true;
        return wm;
    }
    static WeightMat from_matrix(const Mat& w) {
        WeightMat wm;
        wm.w = symmetrized(w);
        wm.cmin = wm.w.minCoeff();
        wm.cmax = wm.w.maxCoeff();
        if (!(wm.cmin > 0)) throw InvalidArgument("WeightMat: weights must be entrywise positive");
        wm.scalar = (wm.cmin == wm.cmax);
        return wm;
    }
};

enum class ProxKind { CovF, LogDetG, L1Off };

namespace detail {

// Weighted covariance prox with non-scalar weights: the objective is a
// quadratic with entrywise-diagonal Hessian 1 + 1/w restricted to the cone
// {X >= eps I}. A damped projected fixed-point iteration on the stationarity
// residual (X - S) + (1/w).(X - M) contracts to the unique minimizer.
inline Mat weighted_prox_cov(const Mat& m, const Mat& s, double eps, const WeightMat& wm) {
    const Mat winv = wm.w.cwiseInverse();
    const double lip = 1.0 + 1.0 / wm.cmin;
    const double mu = 1.0 + 1.0 / wm.cmax;
    double tau = 2.0 / (lip + mu);

    auto objective = [&](const Mat& x) {
        return 0.5 * (x - s).squaredNorm() +
               0.5 * winv.cwiseProduct((x - m).cwiseAbs2()).sum();
    };

    Mat x = psd_floor_project(((wm.w.cwiseProduct(s) + m).cwiseQuotient(wm.w + Mat::Ones(m.rows(), m.cols()))).eval(), eps);
    double fx = objective(x);
    for (int it = 0; it < 200; ++it) {
        Mat grad = (x - s) + winv.cwiseProduct(x - m);
        Mat xn = psd_floor_project((x - tau * grad).eval(), eps);
        if ((xn - x).norm() / tau <= 1e-9) return xn;
        const double fn = objective(xn);
        if (fn > fx + 1e-14 * (1.0 + std::abs(fx))) {
            tau *= 0.5;  // damp on non-decrease, fixed point unchanged
            continue;
        }
        x = std::move(xn);
        fx = fn;
    }
    throw NoConvergence("weighted_prox: covariance inner solve exceeded 200 iterations");
}

// Weighted log-det prox with non-scalar weights: damped projected gradient on
//   Tr(SX) - log det X + 1/2 ||(1/sqrt(w)).(X - M)||_F^2  over {X >= eps I}.
inline Mat weighted_prox_logdet(const Mat& m, const Mat& s, double eps, const WeightMat& wm) {
    const Mat winv = wm.w.cwiseInverse();

    // Track the eigendecomposition of the current iterate so log det, the
    // inverse, and the local curvature bound come from one factorization.
    struct Point {
        Mat x;
        Mat xinv;
        double logdet;
        double dmin;
    };
    auto make_point = [&](const Mat& raw) {
        EigenDecomp ed = sym_eig(raw);
        Vec dc = ed.d.cwiseMax(eps);
        Point pt;
        pt.x = ed.q * dc.asDiagonal() * ed.q.transpose();
        pt.x = ((pt.x + pt.x.transpose()) * 0.5).eval();
        pt.xinv = ed.q * dc.cwiseInverse().asDiagonal() * ed.q.transpose();
        pt.logdet = dc.array().log().sum();
        pt.dmin = dc.minCoeff();
        return pt;
    };
    auto objective = [&](const Point& pt) {
        return inner(s, pt.x) - pt.logdet +
               0.5 * winv.cwiseProduct((pt.x - m).cwiseAbs2()).sum();
    };

    Point cur = make_point(m);
    double fc = objective(cur);
    double damping = 1.0;
    for (int it = 0; it < 200; ++it) {
        // Local smoothness: hess(-log det) at X is bounded by 1/dmin^2 on the
        // segment toward the cone, plus the 1/w metric curvature.
        const double lip = 1.0 / (cur.dmin * cur.dmin) + 1.0 / wm.cmin;
        const double tau = damping / lip;
        Mat grad = s - cur.xinv + winv.cwiseProduct(cur.x - m);
        Point cand = make_point((cur.x - tau * grad).eval());
        if ((cand.x - cur.x).norm() / tau <= 1e-9) return cand.x;
        const double fn = objective(cand);
        if (fn > fc + 1e-14 * (1.0 + std::abs(fc))) {
            damping *= 0.5;
            if (damping < 1e-12) throw NoConvergence("weighted_prox: log-det step collapsed");
            continue;
        }
        cur = std::move(cand);
        fc = fn;
        damping = std::min(1.0, damping * 2.0);
    }
    throw NoConvergence("weighted_prox: log-det inner solve exceeded 200 iterations");
}

}  // namespace detail

// Weighted proximal map prox_{w,F}(M) = argmin F(X) + 1/2 ||(1/sqrt(w)).(X-M)||_F^2.
// Scalar weights reduce exactly to the plain operators above; the L1Off case is
// separable and exact for any weights; the two spectral cases with non-scalar
// weights run the damped inner solvers to residual 1e-9.
inline Mat weighted_prox(ProxKind kind, const Mat& m, const Mat& s, double lambda, double eps,
                         const WeightMat& wm) {
    if (!(wm.cmin > 0)) throw InvalidArgument("weighted_prox: weights must be positive");
    if (wm.w.rows() != m.rows()) throw DimMismatch("weighted_prox: weight dim mismatch");
    switch (kind) {
        case ProxKind::L1Off: {
            Mat out(m.rows(), m.cols());
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                for (Eigen::Index i = 0; i < m.rows(); ++i) {
                    if (i == j) {
                        out(i, j) = m(i, j);
                        continue;
                    }
                    const double tau = lambda * wm.w(i, j);
                    const double v = m(i, j);
                    const double mag = std::abs(v) - tau;
                    out(i, j) = mag > 0 ? (v > 0 ? mag : -mag) : 0.0;
                }
            return out;
        }
        case ProxKind::CovF:
            if (wm.scalar) return prox_cov_f(m, s, wm.cmin, eps);
            return detail::weighted_prox_cov(m, s, eps, wm);
        case ProxKind::LogDetG:
            if (wm.scalar) return prox_logdet_g(m, s, wm.cmin, eps);
            return detail::weighted_prox_logdet(m, s, eps, wm);
    }
    throw InvalidArgument("weighted_prox: unknown kind");
}

}  // namespace matest
