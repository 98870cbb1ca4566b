#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "selgeo/step.hpp"

namespace selgeo {

/// Gaussian-mixture embedding model: test embeddings of class c are
/// N(mu_c, sigma_c^2 I), classified by argmax_c w_c^T h.
struct GmmModel {
    Eigen::MatrixXd means;     // d x k
    Eigen::MatrixXd w;         // d x k
    Eigen::VectorXd sigma_sq;  // k
    int k_maj = 0;
};

struct GmmConfig {
    long samples_per_class = 200000;
    std::uint64_t seed = 1;
    double alpha_var = 1.0;    // sigma_c^2 proportional to 1/n_c^alpha_var
    double snr_target = 25.0;  // |mu_maj|^2/s_maj^2 + |mu_min|^2/s_min^2
    int d = 0;                 // 0 = k-1
    int workers = 4;           // partition count; fixed for determinism
};

/// Per-group variances (1, R^alpha_var) up to the common SNR factor.
std::pair<double, double> sigma_profile(double r, double alpha_var);

/// Scale all means by one factor so that
/// |mu_maj|^2 / s_maj^2 + |mu_min|^2 / s_min^2 = target exactly.
GmmModel snr_normalize(GmmModel model, double target);

struct GmmErrors {
    double balanced = 0.0;
    double maj_avg = 0.0;
    double min_avg = 0.0;
    double std_error = 0.0;  // (1/k) sqrt(sum p(1-p)/N)
    Eigen::VectorXd per_class;
    long samples_per_class = 0;
};

/// Monte Carlo estimate of the balanced error: a draw from class y errs when
/// max_{c != y} (w_c - w_y)^T h >= 0 (ties count as errors). Deterministic
/// for fixed (seed, workers): class/worker substreams, integer reduction.
GmmErrors balanced_error(const GmmModel& model, const GmmConfig& config);

/// Geometry realization for a loss at the setting, with the variance profile
/// applied and means rescaled to the SNR target. d defaults to k-1.
GmmModel build_gmm_model(LossKind loss, const StepSetting& setting, const GmmConfig& config);

struct GmmSweepRow {
    LossKind loss = LossKind::CDT;
    double gamma = 0.0;
    std::optional<double> beta;
    double alpha_var = 1.0;
    double r = 1.0;
    int k = 2;
    GmmErrors errors;
    std::uint64_t seed = 0;
};

/// One row per gamma: realize the geometry, normalize, estimate errors.
/// The template provides (k, rho, R, n_min); delta is rebuilt per gamma.
std::vector<GmmSweepRow> sweep_gamma(LossKind loss, const std::vector<double>& gammas,
                                     const StepSetting& base, const GmmConfig& config);

/// Majority classifier columns scaled by R^(beta*gamma); minority untouched.
Eigen::MatrixXd rldt_rescale(const Eigen::MatrixXd& w, const StepSetting& setting, double beta);

/// Post-hoc rescaling sweep on the feature-side geometry at the setting's
/// gamma, one row per beta (common random numbers across rows).
std::vector<GmmSweepRow> rldt_sweep(const StepSetting& setting, const std::vector<double>& betas,
                                    const GmmConfig& config);

extern const char* const kGmmCsvHeader;
std::string gmm_csv_row(const GmmSweepRow& row);

}  // namespace selgeo
