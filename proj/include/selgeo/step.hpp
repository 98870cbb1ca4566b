#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "selgeo/rational.hpp"

namespace selgeo {

/// Which cross-entropy parameterization a quantity refers to. CE is the
/// delta = 1 special case on which CDT and LDT coincide.
enum class LossKind { CDT, LDT, CE };

std::string loss_name(LossKind loss);
LossKind loss_from_name(const std::string& name);

/// Two-group experiment configuration: the first (1 - rho) * k classes are
/// majorities with R * n_min samples each, the remaining rho * k classes are
/// minorities with n_min samples. The per-class hyperparameters delta share
/// the same two-level structure (delta_maj on majorities, delta_minor on
/// minorities); when gamma is set, delta_maj / delta_minor = R^gamma.
struct StepSetting {
    int k = 2;
    double rho = 0.5;
    Rational R{1, 1};
    int n_min = 1;
    int alpha = 1;  // SEL column replication factor; alpha * R must be integral
    double delta_maj = 1.0;
    double delta_minor = 1.0;
    std::optional<double> gamma;

    int k_maj() const { return k - k_min(); }
    int k_min() const;
    double r_value() const { return R.value(); }

    /// Delta = delta_maj / delta_minor; the geometry depends on delta only
    /// through this ratio.
    double ratio() const { return delta_maj / delta_minor; }

    /// Number of SEL-matrix columns, n = alpha * k * (R * (1 - rho) + rho).
    long n_cols() const;

    /// Dataset size with per-class counts (R * n_min, ..., n_min, ...).
    long n_samples() const;
    long samples_in_class(int c) const;
    bool is_majority(int c) const { return c < k_maj(); }

    /// Per-class delta vector. With normalized = true the vector is rescaled
    /// so its entries sum to k (the convention used for training runs).
    Eigen::VectorXd delta(bool normalized = false) const;

    /// Class label of every sample, in the canonical ordering (majorities
    /// first, samples of a class contiguous).
    Eigen::VectorXi sample_labels() const;

    /// Throws std::invalid_argument when any structural invariant fails:
    /// rho*k and (1-rho)*k integral, alpha*R integral, positive deltas, and
    /// delta_maj/delta_minor = R^gamma (to 1e-12) when gamma is set.
    void validate() const;

    /// delta_minor = 1, delta_maj = R^gamma, alpha defaulted to the smallest
    /// integer that makes alpha * R integral.
    static StepSetting from_gamma(int k, double rho, Rational R, double gamma, int n_min = 1);
};

}  // namespace selgeo
