#include "selgeo/ufm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "selgeo/csv.hpp"
#include "selgeo/geometry.hpp"
#include "selgeo/rng.hpp"
#include "selgeo/svd.hpp"

namespace selgeo {

namespace {

void check_shapes(const UfmParams& p, const Eigen::VectorXi& labels, const Eigen::VectorXd& delta) {
    if (p.w.rows() != p.h.rows()) throw std::invalid_argument("ufm: W/H row mismatch");
    if (p.h.cols() != labels.size()) throw std::invalid_argument("ufm: H/labels mismatch");
    if ((delta.array() <= 0.0).any()) throw std::invalid_argument("ufm: delta must be positive");
    if (labels.size() > 0 && (labels.minCoeff() < 0 || labels.maxCoeff() >= delta.size()))
        throw std::invalid_argument("ufm: label out of range");
}

}  // namespace

double ufm_loss(const UfmParams& params, const Eigen::VectorXi& labels,
                const Eigen::VectorXd& delta, LossKind loss) {
    check_shapes(params, labels, delta);
    const int k = static_cast<int>(params.w.cols());
    const bool feature_side = loss == LossKind::LDT;
    double total = 0.0;
    Eigen::VectorXd z(k);

    for (long i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        const Eigen::VectorXd logits = params.w.transpose() * params.h.col(i);
        const double own = delta[y] * logits[y];
        double zmax = 0.0;  // the implicit exp(0) of the "1 +" term
        for (int c = 0; c < k; ++c) {
            if (c == y) continue;
            const double margin =
                feature_side ? own - delta[y] * logits[c] : own - delta[c] * logits[c];
            z[c] = -margin;
            zmax = std::max(zmax, z[c]);
        }
        double acc = std::exp(-zmax);
        for (int c = 0; c < k; ++c)
            if (c != y) acc += std::exp(z[c] - zmax);
        total += zmax + std::log(acc);
    }
    return total;
}

void ufm_grad(const UfmParams& params, const Eigen::VectorXi& labels,
              const Eigen::VectorXd& delta, LossKind loss, Eigen::MatrixXd& dw,
              Eigen::MatrixXd& dh, const std::vector<long>& subset) {
    check_shapes(params, labels, delta);
    const int k = static_cast<int>(params.w.cols());
    const bool feature_side = loss == LossKind::LDT;
    dw.setZero(params.w.rows(), params.w.cols());
    dh.setZero(params.h.rows(), params.h.cols());
    Eigen::VectorXd z(k), coef(k);

    const long count = subset.empty() ? labels.size() : static_cast<long>(subset.size());
    for (long idx = 0; idx < count; ++idx) {
        const long i = subset.empty() ? idx : subset[idx];
        const int y = labels[i];
        const Eigen::VectorXd logits = params.w.transpose() * params.h.col(i);
        const double own = delta[y] * logits[y];
        double zmax = 0.0;
        for (int c = 0; c < k; ++c) {
            if (c == y) continue;
            const double margin =
                feature_side ? own - delta[y] * logits[c] : own - delta[c] * logits[c];
            z[c] = -margin;
            zmax = std::max(zmax, z[c]);
        }
        double denom = std::exp(-zmax);
        for (int c = 0; c < k; ++c)
            if (c != y) denom += std::exp(z[c] - zmax);

        // s_c = exp(-margin_c) / (1 + sum exp(-margin)); d loss / d margin_c = -s_c.
        double s_sum = 0.0;
        for (int c = 0; c < k; ++c) {
            if (c == y) continue;
            const double s = std::exp(z[c] - zmax) / denom;
            s_sum += s;
            coef[c] = s * (feature_side ? delta[y] : delta[c]);
        }
        dw.col(y) -= delta[y] * s_sum * params.h.col(i);
        dh.col(i) -= delta[y] * s_sum * params.w.col(y);
        for (int c = 0; c < k; ++c) {
            if (c == y) continue;
            dw.col(c) += coef[c] * params.h.col(i);
            dh.col(i) += coef[c] * params.w.col(c);
        }
    }
}

double gram_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a_star) {
    const double na = a.norm(), ns = a_star.norm();
    if (na == 0.0 || ns == 0.0) throw std::invalid_argument("gram_distance: zero matrix");
    if (a.rows() != a_star.rows() || a.cols() != a_star.cols())
        throw std::invalid_argument("gram_distance: shape mismatch");
    return (a / na - a_star / ns).norm();
}

Eigen::MatrixXd class_means(const Eigen::MatrixXd& h, const Eigen::VectorXi& labels, int k) {
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(h.rows(), k);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        means.col(labels[i]) += h.col(i);
        counts[labels[i]] += 1.0;
    }
    if ((counts.array() == 0.0).any())
        throw std::invalid_argument("class_means: every class needs at least one sample");
    for (int c = 0; c < k; ++c) means.col(c) /= counts[c];
    return means;
}

Eigen::MatrixXd center_embeddings(const Eigen::MatrixXd& m, const Eigen::VectorXd& delta,
                                  LossKind loss) {
    if (m.cols() != delta.size())
        throw std::invalid_argument("center_embeddings: column count must equal k");
    Eigen::VectorXd center;
    if (loss == LossKind::LDT)
        center = (m * delta) / delta.sum();
    else
        center = m.rowwise().mean();
    return m.colwise() - center;
}

double nc_metric(const Eigen::MatrixXd& h, const Eigen::VectorXi& labels) {
    const int k = labels.maxCoeff() + 1;
    const Eigen::MatrixXd means = class_means(h, labels, k);
    double within = 0.0;
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        within += (h.col(i) - means.col(labels[i])).squaredNorm();
    within /= static_cast<double>(labels.size());
    const double scale = means.colwise().squaredNorm().mean();
    if (scale == 0.0) return within == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return within / scale;
}

namespace {

double train_error(const UfmParams& p, const Eigen::VectorXi& labels) {
    const Eigen::MatrixXd logits = p.w.transpose() * p.h;
    long wrong = 0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        Eigen::Index arg = 0;
        logits.col(i).maxCoeff(&arg);
        if (arg != labels[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

struct GramTargets {
    Eigen::MatrixXd wtw;
    Eigen::MatrixXd mtm;
};

GramTargets make_targets(const StepSetting& s, LossKind loss, const Eigen::VectorXd& delta) {
    GramTargets t;
    if (loss == LossKind::LDT) {
        const double ratio = s.ratio();
        const SelFactors f =
            closed_form_factors(s.k, s.rho, s.r_value() / (ratio * ratio), 1.0);
        t.wtw = f.v * f.lambda.asDiagonal() * f.v.transpose();
        const Eigen::VectorXd inv = delta.cwiseInverse();
        t.mtm = inv.asDiagonal() * (f.u * f.lambda.asDiagonal() * f.u.transpose()) *
                inv.asDiagonal();
    } else {
        const SelFactors f = closed_form_factors(s.k, s.rho, s.r_value(), s.ratio());
        t.wtw = f.v * f.lambda.asDiagonal() * f.v.transpose();
        t.mtm = f.u * f.lambda.asDiagonal() * f.u.transpose();
    }
    return t;
}

}  // namespace

TrainResult train(const TrainConfig& config) {
    config.setting.validate();
    if (!(config.lr > 0.0)) throw std::invalid_argument("train: learning rate must be positive");
    if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    const StepSetting& s = config.setting;
    if (config.d < s.k - 1) throw std::invalid_argument("train: d must be >= k-1");

    const Eigen::VectorXi labels = s.sample_labels();
    const long n = labels.size();
    const Eigen::VectorXd delta = s.delta(config.normalize_delta);
    const GramTargets targets = make_targets(s, config.loss, delta);

    rng::Stream init_stream(rng::mix(config.seed, 0x1));
    TrainResult result;
    result.params.w = init_stream.gaussian(config.d, s.k, config.init_std);
    result.params.h = init_stream.gaussian(config.d, n, config.init_std);

    const long batch = config.batch <= 0 ? n : std::min<long>(config.batch, n);
    std::vector<long> order(n);
    std::iota(order.begin(), order.end(), 0);

    Eigen::MatrixXd dw, dh;
    UfmParams last_logged = result.params;

    const auto log_row = [&](int epoch) {
        TraceRow row;
        row.epoch = epoch;
        row.loss = ufm_loss(result.params, labels, delta, config.loss);
        row.train_error = train_error(result.params, labels);
        const Eigen::MatrixXd means = class_means(result.params.h, labels, s.k);
        const Eigen::MatrixXd centered = center_embeddings(means, delta, config.loss);
        row.gramdist_w = gram_distance(result.params.w.transpose() * result.params.w, targets.wtw);
        row.gramdist_m = gram_distance(centered.transpose() * centered, targets.mtm);
        row.nc = nc_metric(result.params.h, labels);
        const auto centers = centering_check(result.params.w, means, delta, config.loss);
        row.center_w = centers.first;
        row.center_m = centers.second;
        result.trace.push_back(row);
    };

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        if (batch < n) {
            rng::Stream shuffle_stream(rng::mix(config.seed, 0x2, static_cast<std::uint64_t>(epoch)));
            for (long i = n - 1; i > 0; --i) {
                const long j = static_cast<long>(shuffle_stream.next_raw() %
                                                 static_cast<std::uint64_t>(i + 1));
                std::swap(order[i], order[j]);
            }
        }
        for (long start = 0; start < n; start += batch) {
            const long stop = std::min(start + batch, n);
            std::vector<long> subset(order.begin() + start, order.begin() + stop);
            ufm_grad(result.params, labels, delta, config.loss, dw, dh, subset);
            const double scale = config.lr / static_cast<double>(stop - start);
            if (config.weight_decay > 0.0) {
                result.params.w *= 1.0 - config.lr * config.weight_decay;
                result.params.h *= 1.0 - config.lr * config.weight_decay;
            }
            result.params.w -= scale * dw;
            for (long j : subset) result.params.h.col(j) -= scale * dh.col(j);
        }

        const bool last = epoch == config.epochs;
        if (epoch % config.log_interval == 0 || last) {
            const double check = ufm_loss(result.params, labels, delta, config.loss);
            if (!std::isfinite(check)) {
                result.diverged = true;
                result.params = last_logged;
                result.last_epoch = result.trace.empty() ? 0 : result.trace.back().epoch;
                return result;
            }
            log_row(epoch);
            last_logged = result.params;
            result.last_epoch = epoch;
        }
    }
    return result;
}

const char* const kTraceCsvHeader =
    "epoch,loss,train_error,gramdist_w,gramdist_m,nc,center_w,center_m";

std::string trace_csv_row(const TraceRow& row) {
    return csv::join_row({std::to_string(row.epoch), csv::fmt(row.loss),
                          csv::fmt(row.train_error), csv::fmt(row.gramdist_w),
                          csv::fmt(row.gramdist_m), csv::fmt(row.nc), csv::fmt(row.center_w),
                          csv::fmt(row.center_m)});
}

}  // namespace selgeo
