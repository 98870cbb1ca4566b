#include "selgeo/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "selgeo/csv.hpp"
#include "selgeo/rng.hpp"

namespace selgeo {

namespace {

Eigen::MatrixXd gram(const Eigen::MatrixXd& basis, const Eigen::VectorXd& lambda) {
    return basis * lambda.asDiagonal() * basis.transpose();
}

double ldt_r_tilde(const StepSetting& s) {
    const double d = s.ratio();
    return s.r_value() / (d * d);
}

// Seeded partial orthonormal matrix of shape (k-1) x d with Rot Rot^T = I,
// from the QR factorization of a Gaussian draw; column signs fixed by the
// R-factor diagonal so the result is a deterministic function of the seed.
Eigen::MatrixXd random_rotation(int rows, int d, std::uint64_t seed) {
    rng::Stream stream(seed);
    const Eigen::MatrixXd g = stream.gaussian(d, rows);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, rows);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
    for (int j = 0; j < rows; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q.transpose();
}

void check_close(double value, double ref, const char* what) {
    if (std::abs(value - ref) > 1e-9 * std::max(1.0, std::abs(ref)))
        throw std::runtime_error(std::string("stats_from_grams: geometry is not two-group "
                                             "symmetric in ") +
                                 what);
}

}  // namespace

GramTriple predict_cdt_grams(const StepSetting& setting) {
    setting.validate();
    const SelFactors f =
        closed_form_factors(setting.k, setting.rho, setting.r_value(), setting.ratio(),
                            setting.delta_minor, setting.alpha);
    GramTriple g;
    g.wtw = gram(f.v, f.lambda);
    g.mtm = gram(f.u, f.lambda);
    g.wtm = build_xi(setting.delta());
    return g;
}

GramTriple predict_ldt_reduced_grams(const StepSetting& setting) {
    setting.validate();
    const SelFactors f = closed_form_factors(setting.k, setting.rho, ldt_r_tilde(setting), 1.0);
    GramTriple g;
    g.wtw = gram(f.v, f.lambda);
    g.mtm = gram(f.u, f.lambda);
    g.wtm = build_xi(Eigen::VectorXd::Ones(setting.k));
    return g;
}

GramTriple predict_ldt_grams(const StepSetting& setting) {
    GramTriple g = predict_ldt_reduced_grams(setting);
    const Eigen::VectorXd inv_delta = setting.delta().cwiseInverse();
    // M = (M D) D^{-1}: un-scale the reduced-geometry means.
    g.mtm = inv_delta.asDiagonal() * g.mtm * inv_delta.asDiagonal();
    g.wtm = g.wtm * inv_delta.asDiagonal();
    return g;
}

GeometryStats stats_from_grams(const GramTriple& grams, const StepSetting& setting) {
    const int k = setting.k;
    const int m = setting.k_maj();
    if (grams.wtw.rows() != k || grams.mtm.rows() != k || grams.wtm.rows() != k)
        throw std::invalid_argument("stats_from_grams: Gram size does not match setting");

    // Every reported value must be shared by the whole group; verify before
    // reading off representatives.
    for (const auto* g : {&grams.wtw, &grams.mtm}) {
        const char* what = (g == &grams.wtw) ? "classifier Gram" : "embedding Gram";
        for (int c = 0; c < k; ++c) {
            const int rep = c < m ? 0 : m;
            check_close((*g)(c, c), (*g)(rep, rep), what);
            for (int j = 0; j < c; ++j) {
                const bool cm = c < m, jm = j < m;
                if (cm && jm)
                    check_close((*g)(j, c), m >= 2 ? (*g)(0, 1) : 0.0, what);
                else if (!cm && !jm)
                    check_close((*g)(j, c), (*g)(m, m + 1), what);
                else
                    check_close((*g)(j, c), (*g)(0, m), what);
            }
        }
    }
    for (int c = 0; c < k; ++c)
        check_close(grams.wtm(c, c), grams.wtm(c < m ? 0 : m, c < m ? 0 : m), "cross Gram");

    GeometryStats st;
    const double w_maj = grams.wtw(0, 0), w_min = grams.wtw(m, m);
    const double h_maj = grams.mtm(0, 0), h_min = grams.mtm(m, m);
    st.w_norm_ratio_sq = w_maj / w_min;
    st.h_norm_ratio_sq = h_maj / h_min;
    if (m >= 2) {
        st.cos_w_maj_maj = grams.wtw(0, 1) / w_maj;
        st.cos_h_maj_maj = grams.mtm(0, 1) / h_maj;
    }
    if (k - m >= 2) {
        st.cos_w_min_min = grams.wtw(m, m + 1) / w_min;
        st.cos_h_min_min = grams.mtm(m, m + 1) / h_min;
    }
    st.cos_w_maj_min = grams.wtw(0, m) / std::sqrt(w_maj * w_min);
    st.cos_h_maj_min = grams.mtm(0, m) / std::sqrt(h_maj * h_min);
    st.align_maj = grams.wtm(0, 0) / std::sqrt(w_maj * h_maj);
    st.align_min = grams.wtm(m, m) / std::sqrt(w_min * h_min);
    return st;
}

namespace {
void require_half_split(const StepSetting& s, const char* who) {
    if (s.k_maj() != s.k_min())
        throw std::invalid_argument(std::string(who) + ": closed forms assume rho = 1/2");
}
}  // namespace

GroupStats cdt_classifier_stats(const StepSetting& setting) {
    require_half_split(setting, "cdt_classifier_stats");
    const double k = setting.k;
    const double r = setting.r_value();
    const double d = setting.ratio();
    const double sr = std::sqrt(r), sr1 = std::sqrt(r + 1.0);
    const double a3 = std::pow(std::sqrt(1.0 + d * d), 3);        // (sqrt(1+D^2))^3
    const double a3inv = std::pow(std::sqrt(1.0 + 1.0 / (d * d)), -3.0);

    GroupStats g;
    g.norm_sq_maj = (sr / d) * (1.0 - 2.0 / k) + 2.0 * d * d * sr1 / (k * a3);
    g.norm_sq_min = (1.0 - 2.0 / k) + 2.0 * sr1 / (k * a3);
    g.cos_maj_maj = (-2.0 * sr + 2.0 * sr1 * a3inv) / ((k - 2.0) * sr + 2.0 * sr1 * a3inv);
    g.cos_min_min = (-2.0 + 2.0 * sr1 / a3) / (k - 2.0 + 2.0 * sr1 / a3);
    g.cos_maj_min = -2.0 * d * sr1 / (k * a3 * std::sqrt(g.norm_sq_maj * g.norm_sq_min));
    return g;
}

GroupStats cdt_embedding_stats(const StepSetting& setting) {
    require_half_split(setting, "cdt_embedding_stats");
    const double k = setting.k;
    const double r = setting.r_value();
    const double d = setting.ratio();
    const double sr = std::sqrt(r), sr1 = std::sqrt(r + 1.0);
    const double b = sr1 * std::sqrt(1.0 + d * d);                 // sqrt(R+1) sqrt(1+D^2)
    const double binv = sr1 * std::sqrt(1.0 + 1.0 / (d * d));      // sqrt(R+1) sqrt(1+D^-2)

    GroupStats g;
    g.norm_sq_maj = (1.0 - 2.0 / k) / (d * sr) + 2.0 / (k * b);
    g.norm_sq_min = (1.0 - 2.0 / k) + 2.0 / (k * b);
    g.cos_maj_maj = (-2.0 * binv + 2.0 * sr) / ((k - 2.0) * binv + 2.0 * sr);
    g.cos_min_min = (-2.0 * b + 2.0) / ((k - 2.0) * b + 2.0);
    g.cos_maj_min = -2.0 / (k * b * std::sqrt(g.norm_sq_maj * g.norm_sq_min));
    return g;
}

std::pair<double, double> cdt_alignment(const StepSetting& setting) {
    require_half_split(setting, "cdt_alignment");
    const double k = setting.k;
    const double d = setting.ratio();
    const GroupStats w = cdt_classifier_stats(setting);
    const GroupStats h = cdt_embedding_stats(setting);
    const double maj = (k * d * d + (k - 2.0)) /
                       (k * d * (d * d + 1.0) * std::sqrt(w.norm_sq_maj * h.norm_sq_maj));
    const double din2 = 1.0 / (d * d);
    const double min = (k * din2 + (k - 2.0)) /
                       (k * (din2 + 1.0) * std::sqrt(w.norm_sq_min * h.norm_sq_min));
    return {maj, min};
}

LdtStats ldt_stats(const StepSetting& setting) {
    require_half_split(setting, "ldt_stats");
    const double k = setting.k;
    const double r = setting.r_value();
    const double d = setting.ratio();
    const double sr = std::sqrt(r);
    const double s = std::sqrt((r + d * d) / 2.0);

    LdtStats g;
    g.w_norm_ratio_sq = ((k - 2.0) * sr + s) / ((k - 2.0) * d + s);
    g.h_norm_ratio_sq = ((k - 2.0) / sr + 1.0 / s) / ((k - 2.0) * d + d * d / s);
    g.cos_w_maj_maj = (-2.0 * sr + s) / ((k - 2.0) * sr + s);
    g.cos_w_min_min = (-2.0 * d + s) / ((k - 2.0) * d + s);
    return g;
}

AsymptoticAngles asymptotic_angles(LossKind loss, double gamma, int k) {
    if (k < 4) throw std::invalid_argument("asymptotic_angles: k must be >= 4");
    const double kk = k;
    const double sq2 = std::sqrt(2.0);
    const double collapse = -2.0 / (kk - 2.0);
    const double w_half = (1.0 - 2.0 * sq2) / (1.0 + sq2 * (kk - 2.0));
    const double h_half = (2.0 - 2.0 * sq2) / (2.0 + sq2 * (kk - 2.0));
    const double etf = -1.0 / (kk - 1.0);

    if (loss == LossKind::CE) gamma = 0.0;  // delta = 1 forces Delta = R^0
    AsymptoticAngles a;
    if (loss == LossKind::LDT) {
        if (gamma < 0.5) {
            a.cos_w_min_min = 1.0;
            a.cos_w_maj_maj = w_half;
            a.cos_h_min_min = collapse;
            a.cos_h_maj_maj = h_half;
        } else if (gamma == 0.5) {
            a.cos_w_min_min = a.cos_w_maj_maj = a.cos_h_min_min = a.cos_h_maj_maj = etf;
        } else {
            a.cos_w_min_min = w_half;
            a.cos_w_maj_maj = 1.0;
            a.cos_h_min_min = h_half;
            a.cos_h_maj_maj = collapse;
        }
        return a;
    }

    // Classifier-side loss (and the delta = 1 special case).
    if (gamma < 1.0 / 6.0)
        a.cos_w_min_min = 1.0;
    else if (gamma == 1.0 / 6.0)
        a.cos_w_min_min = 0.0;
    else
        a.cos_w_min_min = collapse;
    if (gamma < 0.0)
        a.cos_w_maj_maj = collapse;
    else if (gamma == 0.0)
        a.cos_w_maj_maj = w_half;
    else
        a.cos_w_maj_maj = 0.0;
    // The embedding limits follow from the finite-R angle formulas: the
    // minority cosine tends to -2/(k-2) for every gamma, the majority cosine
    // to -2/(k-2), h_half, 0 for gamma <, =, > 0.
    a.cos_h_min_min = collapse;
    if (gamma < 0.0)
        a.cos_h_maj_maj = collapse;
    else if (gamma == 0.0)
        a.cos_h_maj_maj = h_half;
    else
        a.cos_h_maj_maj = 0.0;
    return a;
}

Realization construct_realization(const SelSvd& svd, int d, std::uint64_t seed) {
    const int k = svd.k();
    if (d < k - 1) throw std::invalid_argument("construct_realization: d must be >= k-1");
    const Eigen::MatrixXd rot = random_rotation(k - 1, d, seed);
    const Eigen::VectorXd sq = svd.lambda.cwiseSqrt();
    Realization real;
    real.w = rot.transpose() * (sq.asDiagonal() * svd.v.transpose());
    real.h = rot.transpose() * (sq.asDiagonal() * svd.u_otimes.transpose());
    real.labels = svd.col_class;
    return real;
}

Realization construct_ldt_realization(const StepSetting& setting, int d, std::uint64_t seed) {
    setting.validate();
    const int k = setting.k;
    if (d < k - 1) throw std::invalid_argument("construct_ldt_realization: d must be >= k-1");
    const SelFactors f = closed_form_factors(k, setting.rho, ldt_r_tilde(setting), 1.0);
    const Eigen::MatrixXd rot = random_rotation(k - 1, d, seed);
    const Eigen::VectorXd sq = f.lambda.cwiseSqrt();
    Eigen::MatrixXd w = rot.transpose() * (sq.asDiagonal() * f.v.transpose());
    Eigen::MatrixXd means =
        (rot.transpose() * (sq.asDiagonal() * f.u.transpose())) *
        setting.delta().cwiseInverse().asDiagonal();

    Realization real;
    real.labels = setting.sample_labels();
    real.h.resize(d, real.labels.size());
    for (Eigen::Index i = 0; i < real.labels.size(); ++i)
        real.h.col(i) = means.col(real.labels[i]);

    // Normalize the joint scale so the smallest margin is exactly 1 (the
    // margin scales with s^2 when both factors scale with s).
    double min_margin = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd delta = setting.delta();
    const Eigen::MatrixXd wt_m = w.transpose() * means;
    for (int y = 0; y < k; ++y)
        for (int c = 0; c < k; ++c)
            if (c != y) min_margin = std::min(min_margin, delta[y] * (wt_m(y, y) - wt_m(c, y)));
    if (!(min_margin > 0.0))
        throw std::runtime_error("construct_ldt_realization: non-positive margin");
    const double s = 1.0 / std::sqrt(min_margin);
    real.w = s * w;
    real.h *= s;
    return real;
}

std::pair<double, double> centering_check(const Eigen::MatrixXd& w, const Eigen::MatrixXd& m,
                                          const Eigen::VectorXd& delta, LossKind loss) {
    if (w.cols() != delta.size() || m.cols() != delta.size())
        throw std::invalid_argument("centering_check: column counts must equal k");
    const auto mean_col_norm = [](const Eigen::MatrixXd& a) {
        double s = 0.0;
        for (Eigen::Index c = 0; c < a.cols(); ++c) s += a.col(c).norm();
        return std::max(s / static_cast<double>(a.cols()), 1e-300);
    };
    Eigen::VectorXd w_sum, m_sum;
    if (loss == LossKind::LDT) {
        w_sum = w.rowwise().sum();
        m_sum = m * delta;
    } else {
        w_sum = w * delta.cwiseInverse();
        m_sum = m.rowwise().sum();
    }
    return {w_sum.norm() / mean_col_norm(w), m_sum.norm() / mean_col_norm(m)};
}

const char* const kGeometryCsvHeader =
    "gamma,R,k,rho,loss,w_norm_ratio_sq,h_norm_ratio_sq,cos_w_maj_maj,cos_w_min_min,"
    "cos_w_maj_min,cos_h_maj_maj,cos_h_min_min,cos_h_maj_min,align_maj,align_min";

std::string geometry_csv_row(double gamma, double r, int k, double rho, LossKind loss,
                             const GeometryStats& stats) {
    return csv::join_row({csv::fmt(gamma), csv::fmt(r), std::to_string(k), csv::fmt(rho),
                          loss_name(loss), csv::fmt(stats.w_norm_ratio_sq),
                          csv::fmt(stats.h_norm_ratio_sq), csv::fmt(stats.cos_w_maj_maj),
                          csv::fmt(stats.cos_w_min_min), csv::fmt(stats.cos_w_maj_min),
                          csv::fmt(stats.cos_h_maj_maj), csv::fmt(stats.cos_h_min_min),
                          csv::fmt(stats.cos_h_maj_min), csv::fmt(stats.align_maj),
                          csv::fmt(stats.align_min)});
}

}  // namespace selgeo
