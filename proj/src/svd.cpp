#include "selgeo/svd.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace selgeo {

SelFactors closed_form_factors(int k, double rho, double r, double delta_ratio,
                               double delta_minor, int alpha) {
    if (k < 2) throw std::invalid_argument("closed_form_factors: k must be >= 2");
    if (!(r > 0.0)) throw std::invalid_argument("closed_form_factors: r must be positive");
    if (!(delta_ratio > 0.0) || !(delta_minor > 0.0))
        throw std::invalid_argument("closed_form_factors: delta must be positive");

    const int m_min = static_cast<int>(std::lround(rho * k));
    const int m_maj = k - m_min;
    if (m_min < 1 || m_maj < 1)
        throw std::invalid_argument("closed_form_factors: both groups must be non-empty");
    const double rho_min = static_cast<double>(m_min) / k;
    const double rho_maj = static_cast<double>(m_maj) / k;
    const double delta = delta_ratio;

    SelFactors f;
    f.v = Eigen::MatrixXd::Zero(k, k - 1);
    f.u = Eigen::MatrixXd::Zero(k, k - 1);
    f.lambda.resize(k - 1);

    // Majority block: columns 0 .. m_maj-2.
    if (m_maj >= 2) {
        const Eigen::MatrixXd p = simplex_basis(m_maj);
        f.v.block(0, 0, m_maj, m_maj - 1) = p;
        f.u.block(0, 0, m_maj, m_maj - 1) = p / std::sqrt(r);
        f.lambda.head(m_maj - 1).setConstant(std::sqrt(r) / delta);
    }
    // Mixed direction: column m_maj-1.
    {
        const double v_norm = 1.0 / std::sqrt(k * (rho_maj + rho_min * delta * delta));
        const double u_norm = 1.0 / std::sqrt(k * (rho_maj + r * rho_min));
        const double maj_min = std::sqrt(rho_min / rho_maj);
        const double min_maj = std::sqrt(rho_maj / rho_min);
        f.v.col(m_maj - 1).head(m_maj).setConstant(-delta * maj_min * v_norm);
        f.v.col(m_maj - 1).tail(m_min).setConstant(min_maj * v_norm);
        f.u.col(m_maj - 1).head(m_maj).setConstant(-maj_min * u_norm);
        f.u.col(m_maj - 1).tail(m_min).setConstant(min_maj * u_norm);
        f.lambda[m_maj - 1] =
            std::sqrt((rho_maj + r * rho_min) / (rho_maj + rho_min * delta * delta));
    }
    // Minority block: columns m_maj .. k-2.
    if (m_min >= 2) {
        const Eigen::MatrixXd p = simplex_basis(m_min);
        f.v.block(m_maj, m_maj, m_min, m_min - 1) = p;
        f.u.block(m_maj, m_maj, m_min, m_min - 1) = p;
        f.lambda.tail(m_min - 1).setConstant(1.0);
    }

    // General alpha and delta_minor only rescale the factors: Xi is
    // 1-homogeneous in 1/delta, and replicating every column alpha times
    // multiplies singular values by sqrt(alpha).
    f.lambda *= std::sqrt(static_cast<double>(alpha)) / delta_minor;
    f.u /= std::sqrt(static_cast<double>(alpha));
    return f;
}

Eigen::MatrixXd SelSvd::reconstruct() const {
    return v * lambda.asDiagonal() * u_otimes.transpose();
}

SelSvd closed_form_svd(const StepSetting& setting) {
    setting.validate();
    const SelFactors f =
        closed_form_factors(setting.k, setting.rho, setting.r_value(), setting.ratio(),
                            setting.delta_minor, setting.alpha);
    SelSvd svd;
    svd.v = f.v;
    svd.lambda = f.lambda;
    svd.u = f.u;
    svd.delta = setting.delta();
    svd.k_maj = setting.k_maj();

    const long alpha_r = static_cast<long>(setting.alpha) * setting.R.num / setting.R.den;
    svd.u_otimes.resize(setting.n_cols(), setting.k - 1);
    svd.col_class.resize(setting.n_cols());
    long pos = 0;
    for (int c = 0; c < setting.k; ++c) {
        const long reps = setting.is_majority(c) ? alpha_r : setting.alpha;
        for (long i = 0; i < reps; ++i) {
            svd.u_otimes.row(pos) = f.u.row(c);
            svd.col_class[pos] = c;
            ++pos;
        }
    }
    return svd;
}

SelSvd numerical_svd(const SelMatrix& sel) {
    const int k = sel.k();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sel.z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double cutoff = 1e-9 * sigma[0];
    int rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma[i] > cutoff) ++rank;
    if (rank != k - 1)
        throw std::runtime_error("numerical_svd: numerical rank " + std::to_string(rank) +
                                 " != k-1 = " + std::to_string(k - 1));

    SelSvd out;
    out.v = svd.matrixU().leftCols(k - 1);
    out.lambda = sigma.head(k - 1);
    out.u_otimes = svd.matrixV().leftCols(k - 1);
    out.col_class = sel.col_class;
    out.delta = sel.delta;
    out.k_maj = sel.k_maj;
    // Rows of the right factor are equal within a class; pick each class's first.
    out.u.resize(k, k - 1);
    for (long i = 0; i < sel.n(); ++i) out.u.row(sel.col_class[i]) = out.u_otimes.row(i);

    const double resid = (out.reconstruct() - sel.z).norm();
    if (resid > 1e-10 * sel.z.norm())
        throw std::runtime_error("numerical_svd: reconstruction residual too large");
    return out;
}

Eigen::MatrixXd b_star(const SelSvd& svd) { return svd.u_otimes * svd.v.transpose(); }

SignAgreement check_sign_agreement(const Eigen::MatrixXd& b, const SelMatrix& sel) {
    if (b.rows() != sel.n() || b.cols() != sel.k())
        throw std::invalid_argument("check_sign_agreement: shape mismatch");
    SignAgreement res;
    res.min_product = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < b.rows(); ++i)
        for (Eigen::Index c = 0; c < b.cols(); ++c)
            res.min_product = std::min(res.min_product, b(i, c) * sel.z(c, i));
    res.strictly_positive = res.min_product > 0.0;
    return res;
}

double nuclear_norm(const SelMatrix& sel) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sel.z);
    return svd.singularValues().sum();
}

}  // namespace selgeo
