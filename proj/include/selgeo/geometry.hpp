#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include <Eigen/Core>

#include "selgeo/svd.hpp"

namespace selgeo {

/// Predicted Gram matrices of a geometry: classifier Gram W^T W, mean-embedding
/// Gram M^T M, and the cross Gram W^T M.
struct GramTriple {
    Eigen::MatrixXd wtw;  // k x k
    Eigen::MatrixXd mtm;  // k x k
    Eigen::MatrixXd wtm;  // k x k
};

/// Scalar descriptors of a two-group geometry. Within-group cosines need at
/// least two classes in the group and are absent otherwise.
struct GeometryStats {
    double w_norm_ratio_sq = 1.0;  // |w_maj|^2 / |w_min|^2
    double h_norm_ratio_sq = 1.0;
    std::optional<double> cos_w_maj_maj;
    std::optional<double> cos_w_min_min;
    double cos_w_maj_min = 0.0;
    std::optional<double> cos_h_maj_maj;
    std::optional<double> cos_h_min_min;
    double cos_h_maj_min = 0.0;
    double align_maj = 0.0;  // cos(w_maj, h_maj)
    double align_min = 0.0;
};

/// Grams of the CS-SVM optimum under the classifier-side loss:
/// W^T W = V L V^T, M^T M = U L U^T, W^T M = Xi (unit scale split).
GramTriple predict_cdt_grams(const StepSetting& setting);

/// Grams of the CS-SVM optimum under the feature-side loss. The scaled pair
/// (W, M D) follows the delta=1 geometry at effective ratio
/// r_tilde = R (delta_minor/delta_maj)^2; this returns the un-scaled (W, M).
/// The closed form is evaluated directly, so r_tilde may be irrational.
GramTriple predict_ldt_grams(const StepSetting& setting);

/// The (W, M D) Grams of the LDT optimum (the delta=1 reduced geometry).
GramTriple predict_ldt_reduced_grams(const StepSetting& setting);

/// Extract norms/cosines from Gram matrices using the first two majority and
/// first two minority classes, after checking that all within-group entries
/// agree pairwise within 1e-9 (throws std::runtime_error otherwise).
GeometryStats stats_from_grams(const GramTriple& grams, const StepSetting& setting);

/// Closed-form norms and angles (rho = 1/2 convention; depends on delta only
/// through Delta = delta_maj / delta_minor).
struct GroupStats {
    double norm_sq_maj = 0.0;
    double norm_sq_min = 0.0;
    double cos_maj_maj = 0.0;
    double cos_min_min = 0.0;
    double cos_maj_min = 0.0;
};
GroupStats cdt_classifier_stats(const StepSetting& setting);
GroupStats cdt_embedding_stats(const StepSetting& setting);

/// (cos(w_maj, h_maj), cos(w_min, h_min)) for the CDT optimum.
std::pair<double, double> cdt_alignment(const StepSetting& setting);

struct LdtStats {
    double w_norm_ratio_sq = 0.0;
    double h_norm_ratio_sq = 0.0;
    double cos_w_maj_maj = 0.0;
    double cos_w_min_min = 0.0;
};
LdtStats ldt_stats(const StepSetting& setting);

/// Limits of the within-group cosines as R -> infinity with Delta = R^gamma.
/// Values at a breakpoint gamma are the breakpoint column itself.
struct AsymptoticAngles {
    double cos_w_min_min = 0.0;
    double cos_w_maj_maj = 0.0;
    double cos_h_min_min = 0.0;
    double cos_h_maj_maj = 0.0;
};
AsymptoticAngles asymptotic_angles(LossKind loss, double gamma, int k);

/// Explicit parameters realizing an SVD-described geometry in dimension d:
/// W = Rot^T L^(1/2) V^T and H = Rot^T L^(1/2) U_otimes^T for a seeded partial
/// orthonormal Rot. All embeddings within a class coincide by construction.
struct Realization {
    Eigen::MatrixXd w;       // d x k
    Eigen::MatrixXd h;       // d x n
    Eigen::VectorXi labels;  // n
};
Realization construct_realization(const SelSvd& svd, int d, std::uint64_t seed);

/// LDT optimum on the original dataset: realize the reduced geometry, map the
/// means back through D^{-1}, and replicate per original class counts.
Realization construct_ldt_realization(const StepSetting& setting, int d, std::uint64_t seed);

/// Mean class means of W and M against the loss-specific centering identity;
/// returns residual norms normalized by the mean column norm.
std::pair<double, double> centering_check(const Eigen::MatrixXd& w, const Eigen::MatrixXd& m,
                                          const Eigen::VectorXd& delta, LossKind loss);

/// Flat CSV row for GeometryStats; schema:
/// gamma,R,k,rho,loss,w_norm_ratio_sq,h_norm_ratio_sq,cos_w_maj_maj,
/// cos_w_min_min,cos_w_maj_min,cos_h_maj_maj,cos_h_min_min,cos_h_maj_min,
/// align_maj,align_min
extern const char* const kGeometryCsvHeader;
std::string geometry_csv_row(double gamma, double r, int k, double rho, LossKind loss,
                             const GeometryStats& stats);

}  // namespace selgeo
