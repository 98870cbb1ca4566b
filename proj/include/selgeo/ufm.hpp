#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "selgeo/step.hpp"

namespace selgeo {

/// Trainable state of the unconstrained features model: k classifiers and one
/// free embedding per training sample.
struct UfmParams {
    Eigen::MatrixXd w;  // d x k
    Eigen::MatrixXd h;  // d x n
};

struct TrainConfig {
    StepSetting setting;
    int d = 20;
    double lr = 0.5;
    int epochs = 6000;
    int batch = 5;  // 0 = full batch
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::CDT;
    bool normalize_delta = true;  // rescale delta so sum(delta) = k
    int log_interval = 50;
    double init_std = 0.01;  // Gaussian initialization scale for W and H
};

struct TraceRow {
    int epoch = 0;
    double loss = 0.0;
    double train_error = 0.0;
    double gramdist_w = 0.0;
    double gramdist_m = 0.0;
    double nc = 0.0;
    double center_w = 0.0;
    double center_m = 0.0;
};

struct TrainResult {
    UfmParams params;
    std::vector<TraceRow> trace;
    bool diverged = false;
    int last_epoch = 0;
};

/// Sum over samples of log(1 + sum_{c != y_i} exp(-margin_ic)), with the
/// margin of the given loss kind; evaluated with log-sum-exp stabilization.
double ufm_loss(const UfmParams& params, const Eigen::VectorXi& labels,
                const Eigen::VectorXd& delta, LossKind loss);

/// Analytic gradient of ufm_loss summed over the index subset (all samples
/// when `subset` is empty). dw/dh are overwritten (dh only at subset columns).
void ufm_grad(const UfmParams& params, const Eigen::VectorXi& labels,
              const Eigen::VectorXd& delta, LossKind loss, Eigen::MatrixXd& dw,
              Eigen::MatrixXd& dh, const std::vector<long>& subset = {});

/// Deterministic (S)GD run; diverged is set (with the last finite logged
/// state) when the loss stops being finite.
TrainResult train(const TrainConfig& config);

/// Frobenius distance of the Frobenius-normalized Grams, in [0, 2].
double gram_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a_star);

/// Per-class means of the embedding columns.
Eigen::MatrixXd class_means(const Eigen::MatrixXd& h, const Eigen::VectorXi& labels, int k);

/// Subtract the loss-specific center from every column: the plain mean of the
/// class means for the classifier-side loss, the delta-weighted mean
/// (sum_c delta_c mu_c) / (sum_c delta_c) for the feature-side loss.
Eigen::MatrixXd center_embeddings(const Eigen::MatrixXd& m, const Eigen::VectorXd& delta,
                                  LossKind loss);

/// Mean within-class squared deviation over mean squared class-mean norm;
/// zero iff every embedding equals its class mean.
double nc_metric(const Eigen::MatrixXd& h, const Eigen::VectorXi& labels);

extern const char* const kTraceCsvHeader;
std::string trace_csv_row(const TraceRow& row);

}  // namespace selgeo
