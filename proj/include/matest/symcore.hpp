#pragma once

// Dense symmetric-matrix kernels: validated construction, eigendecomposition,
// spectral floor projection, and the norms reported by the benchmark harness.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "matest/errors.hpp"
#include "matest/types.hpp"

namespace matest {

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
    return a.allFinite();
}

// Relative asymmetry max_ij |a_ij - a_ji| / max(1, |a_ij|).
template <typename Derived>
double asymmetry(const Eigen::MatrixBase<Derived>& a) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i) {
            const double d = std::abs(double(a(i, j)) - double(a(j, i)));
            worst = std::max(worst, d / std::max(1.0, std::abs(double(a(i, j)))));
        }
    return worst;
}

// Symmetrized copy (A + A^T)/2. Rejects non-finite entries and asymmetry
// beyond 1e-6 relative; eigensolvers silently amplify anything larger.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& a,
                                                  double tol = 1e-6) {
    if (a.rows() != a.cols()) throw DimMismatch("symmetrized: matrix not square");
    if (a.rows() < 1) throw InvalidArgument("symmetrized: empty matrix");
    if (!a.allFinite()) throw NonFinite("symmetrized: non-finite entry");
    if (asymmetry(a) > tol) throw InvalidArgument("symmetrized: input asymmetric beyond tolerance");
    return ((a + a.transpose()) * typename Derived::Scalar(0.5)).eval();
}

// Eigendecomposition A = Q diag(d) Q^T, eigenvalues ascending.
struct EigenDecomp {
    Mat q;  // orthogonal, columns are eigenvectors
    Vec d;  // ascending
};

// Deterministic symmetric eigendecomposition (Eigen's selfadjoint solver,
// which already returns ascending eigenvalues).
inline EigenDecomp sym_eig(const Mat& a) {
    if (!a.allFinite()) throw NonFinite("sym_eig: non-finite entry");
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    if (es.info() != Eigen::Success) throw NoConvergence("sym_eig: eigensolver did not converge");
    return EigenDecomp{es.eigenvectors(), es.eigenvalues()};
}

// Nearest (Frobenius) point of the cone {A >= eps I}: clip eigenvalues at eps.
inline Mat psd_floor_project(const Mat& a, double eps) {
    if (!(eps > 0)) throw InvalidArgument("psd_floor_project: eps must be positive");
    EigenDecomp ed = sym_eig(a);
    if (ed.d.minCoeff() >= eps) return a;
    Vec clipped = ed.d.cwiseMax(eps);
    Mat out = ed.q * clipped.asDiagonal() * ed.q.transpose();
    return ((out + out.transpose()) * 0.5).eval();
}

template <typename Derived>
double frob_norm(const Eigen::MatrixBase<Derived>& a) {
    return a.norm();
}

// <A,B> = Tr(A^T B), the Frobenius inner product.
template <typename DerivedA, typename DerivedB>
double inner(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimMismatch("inner: dimension mismatch");
    return a.cwiseProduct(b).sum();
}

// Sum of singular values; for symmetric input these are |eigenvalues|.
inline double nuclear_norm(const Mat& a) {
    return sym_eig(a).d.cwiseAbs().sum();
}

inline double min_eigenvalue(const Mat& a) { return sym_eig(a).d.minCoeff(); }

// Off-diagonal l1 norm, sum_{i != j} |a_ij|.
template <typename Derived>
double l1_offdiag(const Eigen::MatrixBase<Derived>& a) {
    double s = a.cwiseAbs().sum();
    s -= a.diagonal().cwiseAbs().sum();
    return s;
}

// Entrywise max norm ||A||_inf = max_ij |a_ij|.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
    return a.cwiseAbs().maxCoeff();
}

}  // namespace matest
