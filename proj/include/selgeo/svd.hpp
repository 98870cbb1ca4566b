#pragma once

#include <Eigen/Core>

#include "selgeo/sel.hpp"
#include "selgeo/step.hpp"

namespace selgeo {

/// The compact k-class factors V, Lambda, U of a SEL matrix. The closed form
/// keeps its block order in lambda (k_maj - 1 majority values, one mixed
/// value, k_min - 1 minority values); the numerical route sorts descending.
struct SelFactors {
    Eigen::MatrixXd v;       // k x (k-1), orthonormal columns
    Eigen::VectorXd lambda;  // k-1, positive
    Eigen::MatrixXd u;       // k x (k-1); row c carries weight = column count of class c
};

/// Closed-form factors for the two-group structure with real-valued imbalance
/// r > 0 (replication enters only through row weights, so r need not be
/// rational here). delta_ratio = delta_maj / delta_minor. The factors are
/// scaled for the given alpha and delta_minor: lambda carries sqrt(alpha) /
/// delta_minor and u carries 1 / sqrt(alpha) relative to the unit convention.
SelFactors closed_form_factors(int k, double rho, double r, double delta_ratio,
                               double delta_minor = 1.0, int alpha = 1);

/// Full compact SVD, with the replication-expanded right factor.
struct SelSvd {
    Eigen::MatrixXd v;          // k x (k-1)
    Eigen::VectorXd lambda;     // k-1
    Eigen::MatrixXd u;          // k x (k-1)
    Eigen::MatrixXd u_otimes;   // n x (k-1), orthonormal columns
    Eigen::VectorXi col_class;  // n
    Eigen::VectorXd delta;      // k
    int k_maj = 0;

    int k() const { return static_cast<int>(v.rows()); }
    long n() const { return u_otimes.rows(); }
    Eigen::MatrixXd reconstruct() const;  // V diag(lambda) U_otimes^T
};

/// Exact factors from the closed-form block formulas.
SelSvd closed_form_svd(const StepSetting& setting);

/// Dense-SVD oracle for closed_form_svd. Keeps the k-1 leading singular
/// values; throws when the numerical rank is not k-1 (cutoff 1e-9 * sigma_1)
/// or the reconstruction residual exceeds 1e-10 * |Z|_F.
SelSvd numerical_svd(const SelMatrix& sel);

/// n x k dual certificate U_otimes V^T; spectral norm 1, B D^{-1} 1_k = 0.
Eigen::MatrixXd b_star(const SelSvd& svd);

struct SignAgreement {
    bool strictly_positive = false;
    double min_product = 0.0;
};

/// Element-wise sign test of b against Z^T: true iff every entry of the
/// Hadamard product b .* Z^T is strictly positive.
SignAgreement check_sign_agreement(const Eigen::MatrixXd& b, const SelMatrix& sel);

/// Sum of singular values of the SEL matrix (numerical route).
double nuclear_norm(const SelMatrix& sel);

}  // namespace selgeo
