#pragma once

#include <Eigen/Dense>

namespace matest {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Default scalar type used throughout the solver layer.
using Mat = DenseMatrix<double>;
using Vec = DenseVector<double>;

// Iterate triple omega = (X, Y, V) evolved by every splitting solver.
// X carries the constrained block, Y the penalized block, V the multiplier.
struct IterateState {
    Mat x;
    Mat y;
    Mat v;

    Eigen::Index dim() const { return x.rows(); }
};

}  // namespace matest
