#pragma once

#include <string>

#include <Eigen/Core>

#include "selgeo/sel.hpp"
#include "selgeo/step.hpp"

namespace selgeo {

/// All n*(k-1) margin values of the max-margin constraint set, with summary
/// statistics. A constraint is active when |margin - 1| < active_tol.
struct MarginReport {
    Eigen::VectorXd values;
    double min = 0.0;
    double max = 0.0;
    long n_active = 0;
    long n_total = 0;
    double active_tol = 1e-8;

    std::string to_json() const;  // {"min":..,"max":..,"n_active":..,"n_total":..}
};

/// Margin of sample i against class c != y_i:
///   CDT: (delta_y w_y - delta_c w_c)^T h_i
///   LDT: delta_y (w_y - w_c)^T h_i
/// CE is evaluated as CDT (identical at delta = 1).
MarginReport margins(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                     const Eigen::VectorXi& labels, const Eigen::VectorXd& delta, LossKind loss,
                     double active_tol = 1e-8);

/// 0.5 |W|_F^2 + 0.5 |H|_F^2.
double objective(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h);

/// Reduction of the feature-side problem to a weighted delta=1 problem with
/// effective ratio r_tilde = R (delta_minor/delta_maj)^2, per-class counts
/// (alpha r_tilde, ..., alpha, ...) and embedding weight
/// beta^2 = n_min / (alpha delta_minor^2). When r_tilde is irrational the
/// counts are real-valued and `rational` is false (alpha = 1).
struct ReducedProblem {
    double r_tilde = 1.0;
    bool rational = false;
    Rational r_tilde_rational{1, 1};
    std::int64_t alpha = 1;
    double beta_sq = 1.0;
    Eigen::VectorXd class_counts;  // k
};
ReducedProblem reduce_ldt(const StepSetting& setting);

/// Constraint family of the toy two-class hard-margin problems.
enum class BinaryConstraint {
    Plain,       // v_i w^T x_i >= 1
    WeightedVs,  // v_i delta_{v_i} w^T x_i >= 1
    CdtPair,     // (delta_{y_i} w_{y_i} - delta_c w_c)^T x_i >= 1
    LdtPair,     // delta_{y_i} (w_{y_i} - w_c)^T x_i >= 1
};

struct BinarySolution {
    Eigen::MatrixXd w;  // d x 1 (Plain / WeightedVs) or d x 2 (pair problems)
    double dual_objective = 0.0;
    double primal_objective = 0.0;
    double gap = 0.0;
    long iterations = 0;
};

/// Hard-margin solver via projected gradient ascent on the dual QP with step
/// 1/L, run until the duality gap falls below 1e-8 * max(1, dual); throws
/// after the iteration cap (non-separable data never reaches the gap).
/// labels hold classes 1/2; class 1 maps to v = +1. delta1/delta2 follow the
/// class order (for WeightedVs: delta_{+1} = delta1, delta_{-1} = delta2).
BinarySolution solve_binary_margin(const Eigen::MatrixXd& points, const Eigen::VectorXi& labels,
                                   BinaryConstraint kind, double delta1 = 1.0, double delta2 = 1.0);

/// Checks the closed relations between the four toy solutions on one dataset:
/// (a) w1_ldt - w2_ldt parallel to the delta-matched two-sided solution,
/// (b) w1_cdt - w2_cdt parallel to the plain solution,
/// (c) the centering identities w1_ldt + w2_ldt = 0 and
///     w1_cdt/delta1 + w2_cdt/delta2 = 0.
struct BinaryLemmaReport {
    double cos_ldt_vs = 0.0;
    double cos_cdt_plain = 0.0;
    double ldt_center_residual = 0.0;
    double cdt_center_residual = 0.0;
    bool pass = false;
};
BinaryLemmaReport verify_binary_lemma(const Eigen::MatrixXd& points, const Eigen::VectorXi& labels,
                                      double delta1, double delta2);

}  // namespace selgeo
