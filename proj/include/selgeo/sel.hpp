#pragma once

#include <Eigen/Core>

#include "selgeo/step.hpp"

namespace selgeo {

/// Orthonormal basis of the subspace of R^m orthogonal to the all-ones
/// vector: columns 2..m of the Householder reflector that maps e_1 to
/// 1_m / sqrt(m). Deterministic and O(m^2). Requires m >= 2.
Eigen::MatrixXd simplex_basis(int m);

/// k x k label-encoding block. With S = sum_j delta_j^{-2}:
///   Xi[c,c] = delta_c^{-1} (1 - delta_c^{-2} / S)
///   Xi[c,j] = -delta_c^{-1} delta_j^{-2} / S          (c != j)
/// Every column satisfies sum_c Xi[c,j] / delta_c = 0. Requires delta > 0.
Eigen::MatrixXd build_xi(const Eigen::VectorXd& delta);

/// k x n simplex-encoding label matrix: columns of Xi replicated alpha * R
/// times for majority classes and alpha times for minorities.
struct SelMatrix {
    Eigen::MatrixXd z;          // k x n
    Eigen::VectorXi col_class;  // n, class of each column
    Eigen::VectorXd delta;      // k
    int k_maj = 0;

    int k() const { return static_cast<int>(z.rows()); }
    long n() const { return z.cols(); }
};

SelMatrix build_sel(const StepSetting& setting);

}  // namespace selgeo
