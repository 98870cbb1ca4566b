#include "selgeo/gmm.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "selgeo/csv.hpp"
#include "selgeo/geometry.hpp"
#include "selgeo/rng.hpp"
#include "selgeo/svd.hpp"

namespace selgeo {

std::pair<double, double> sigma_profile(double r, double alpha_var) {
    if (!(r >= 1.0)) throw std::invalid_argument("sigma_profile: r must be >= 1");
    if (alpha_var < 0.0) throw std::invalid_argument("sigma_profile: alpha_var must be >= 0");
    return {1.0, std::pow(r, alpha_var)};
}

GmmModel snr_normalize(GmmModel model, double target) {
    if (!(target > 0.0)) throw std::invalid_argument("snr_normalize: target must be positive");
    const int k = static_cast<int>(model.means.cols());
    if (model.k_maj < 1 || model.k_maj >= k)
        throw std::invalid_argument("snr_normalize: invalid majority split");
    const double current = model.means.col(0).squaredNorm() / model.sigma_sq[0] +
                           model.means.col(model.k_maj).squaredNorm() /
                               model.sigma_sq[model.k_maj];
    if (!(current > 0.0)) throw std::invalid_argument("snr_normalize: zero means");
    model.means *= std::sqrt(target / current);
    return model;
}

GmmErrors balanced_error(const GmmModel& model, const GmmConfig& config) {
    const int k = static_cast<int>(model.w.cols());
    const int d = static_cast<int>(model.w.rows());
    if (model.means.rows() != d || model.means.cols() != k || model.sigma_sq.size() != k)
        throw std::invalid_argument("balanced_error: inconsistent model shapes");
    if (config.samples_per_class < 1)
        throw std::invalid_argument("balanced_error: need at least one sample");
    const long n = config.samples_per_class;
    const int workers = std::max(1, config.workers);

    Eigen::VectorXd per_class(k);
    for (int y = 0; y < k; ++y) {
        // Difference classifiers against class y; error event is
        // max_c (w_c - w_y)^T h >= 0.
        Eigen::MatrixXd diff(k - 1, d);
        Eigen::VectorXd base(k - 1);
        int row = 0;
        for (int c = 0; c < k; ++c) {
            if (c == y) continue;
            diff.row(row) = (model.w.col(c) - model.w.col(y)).transpose();
            base[row] = diff.row(row).dot(model.means.col(y));
            ++row;
        }
        const double sigma = std::sqrt(model.sigma_sq[y]);

        std::vector<long> wrong(workers, 0);
        const auto run_worker = [&](int wi) {
            const long chunk = n / workers + (wi < n % workers ? 1 : 0);
            rng::Stream stream(rng::mix(config.seed, static_cast<std::uint64_t>(y),
                                        static_cast<std::uint64_t>(wi)));
            Eigen::VectorXd z(d);
            long bad = 0;
            for (long i = 0; i < chunk; ++i) {
                for (int j = 0; j < d; ++j) z[j] = stream.normal();
                const double worst = (base + sigma * (diff * z)).maxCoeff();
                if (worst >= 0.0) ++bad;
            }
            wrong[wi] = bad;
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int wi = 0; wi < workers; ++wi) pool.emplace_back(run_worker, wi);
        for (auto& t : pool) t.join();

        long total_wrong = 0;
        for (long b : wrong) total_wrong += b;
        per_class[y] = static_cast<double>(total_wrong) / static_cast<double>(n);
    }

    GmmErrors err;
    err.per_class = per_class;
    err.samples_per_class = n;
    err.balanced = per_class.mean();
    err.maj_avg = per_class.head(model.k_maj).mean();
    err.min_avg = per_class.tail(k - model.k_maj).mean();
    double var_sum = 0.0;
    for (int y = 0; y < k; ++y) var_sum += per_class[y] * (1.0 - per_class[y]) / n;
    err.std_error = std::sqrt(var_sum) / k;
    return err;
}

GmmModel build_gmm_model(LossKind loss, const StepSetting& setting, const GmmConfig& config) {
    setting.validate();
    const int k = setting.k;
    const int d = config.d > 0 ? config.d : k - 1;
    if (d < k - 1) throw std::invalid_argument("build_gmm_model: d must be >= k-1");
    const std::uint64_t rot_seed = rng::mix(config.seed, 0x6e0u);

    GmmModel model;
    model.k_maj = setting.k_maj();
    SelFactors f;
    if (loss == LossKind::LDT) {
        const double ratio = setting.ratio();
        f = closed_form_factors(k, setting.rho, setting.r_value() / (ratio * ratio), 1.0);
    } else {
        f = closed_form_factors(k, setting.rho, setting.r_value(), setting.ratio());
    }
    // Realize in d dimensions through a seeded partial rotation (shared across
    // calls with the same seed so sweeps are comparable row to row).
    rng::Stream stream(rot_seed);
    Eigen::MatrixXd g = stream.gaussian(d, k - 1);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k - 1);
    const Eigen::MatrixXd rfac = qr.matrixQR().topRows(k - 1).triangularView<Eigen::Upper>();
    for (int j = 0; j < k - 1; ++j)
        if (rfac(j, j) < 0.0) q.col(j) = -q.col(j);

    const Eigen::VectorXd sq = f.lambda.cwiseSqrt();
    model.w = q * (sq.asDiagonal() * f.v.transpose());
    model.means = q * (sq.asDiagonal() * f.u.transpose());
    if (loss == LossKind::LDT)
        model.means = model.means * setting.delta().cwiseInverse().asDiagonal();

    const auto [s_maj, s_min] = sigma_profile(setting.r_value(), config.alpha_var);
    model.sigma_sq.resize(k);
    for (int c = 0; c < k; ++c) model.sigma_sq[c] = setting.is_majority(c) ? s_maj : s_min;
    return snr_normalize(std::move(model), config.snr_target);
}

std::vector<GmmSweepRow> sweep_gamma(LossKind loss, const std::vector<double>& gammas,
                                     const StepSetting& base, const GmmConfig& config) {
    if (gammas.empty()) throw std::invalid_argument("sweep_gamma: empty gamma list");
    std::vector<GmmSweepRow> rows;
    rows.reserve(gammas.size());
    for (double gamma : gammas) {
        const StepSetting setting =
            StepSetting::from_gamma(base.k, base.rho, base.R, gamma, base.n_min);
        const GmmModel model = build_gmm_model(loss, setting, config);
        GmmSweepRow row;
        row.loss = loss;
        row.gamma = gamma;
        row.alpha_var = config.alpha_var;
        row.r = setting.r_value();
        row.k = setting.k;
        row.errors = balanced_error(model, config);
        row.seed = config.seed;
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd rldt_rescale(const Eigen::MatrixXd& w, const StepSetting& setting, double beta) {
    const double r = setting.r_value();
    const double gamma =
        setting.gamma.has_value()
            ? *setting.gamma
            : (r == 1.0 ? 0.0 : std::log(setting.ratio()) / std::log(r));
    const double factor = std::pow(r, beta * gamma);
    Eigen::MatrixXd out = w;
    for (int c = 0; c < setting.k_maj(); ++c) out.col(c) *= factor;
    return out;
}

std::vector<GmmSweepRow> rldt_sweep(const StepSetting& setting, const std::vector<double>& betas,
                                    const GmmConfig& config) {
    if (betas.empty()) throw std::invalid_argument("rldt_sweep: empty beta list");
    const GmmModel model = build_gmm_model(LossKind::LDT, setting, config);
    const double gamma = setting.gamma.value_or(
        setting.r_value() == 1.0 ? 0.0
                                 : std::log(setting.ratio()) / std::log(setting.r_value()));
    std::vector<GmmSweepRow> rows;
    rows.reserve(betas.size());
    for (double beta : betas) {
        GmmModel scaled = model;
        scaled.w = rldt_rescale(model.w, setting, beta);
        GmmSweepRow row;
        row.loss = LossKind::LDT;
        row.gamma = gamma;
        row.beta = beta;
        row.alpha_var = config.alpha_var;
        row.r = setting.r_value();
        row.k = setting.k;
        row.errors = balanced_error(scaled, config);
        row.seed = config.seed;
        rows.push_back(std::move(row));
    }
    return rows;
}

const char* const kGmmCsvHeader =
    "loss,gamma,beta,alpha_var,R,k,err_balanced,err_maj,err_min,stderr,n_samples,seed";

std::string gmm_csv_row(const GmmSweepRow& row) {
    return csv::join_row({loss_name(row.loss), csv::fmt(row.gamma), csv::fmt(row.beta),
                          csv::fmt(row.alpha_var), csv::fmt(row.r), std::to_string(row.k),
                          csv::fmt(row.errors.balanced), csv::fmt(row.errors.maj_avg),
                          csv::fmt(row.errors.min_avg), csv::fmt(row.errors.std_error),
                          std::to_string(row.errors.samples_per_class),
                          std::to_string(row.seed)});
}

}  // namespace selgeo
