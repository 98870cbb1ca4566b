#include "selgeo/sel.hpp"

#include <stdexcept>

namespace selgeo {

Eigen::MatrixXd simplex_basis(int m) {
    if (m < 2) throw std::invalid_argument("simplex_basis: m must be >= 2");
    // Householder reflector Q = I - 2 v v^T / |v|^2 with v = e_1 - 1_m/sqrt(m).
    // Column 1 of Q is 1_m/sqrt(m); columns 2..m span its orthogonal complement.
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
    Eigen::VectorXd v = Eigen::VectorXd::Constant(m, -inv_sqrt_m);
    v[0] += 1.0;
    const double scale = 2.0 / v.squaredNorm();
    Eigen::MatrixXd p(m, m - 1);
    for (int j = 1; j < m; ++j) {
        p.col(j - 1) = -scale * v[j] * v;
        p(j, j - 1) += 1.0;
    }
    return p;
}

Eigen::MatrixXd build_xi(const Eigen::VectorXd& delta) {
    const auto k = delta.size();
    if (k < 1) throw std::invalid_argument("build_xi: empty delta");
    if ((delta.array() <= 0.0).any())
        throw std::invalid_argument("build_xi: delta entries must be positive");
    const Eigen::ArrayXd inv_sq = delta.array().inverse().square();
    const double s = inv_sq.sum();
    Eigen::MatrixXd xi(k, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        for (Eigen::Index j = 0; j < k; ++j) {
            if (c == j)
                xi(c, j) = (1.0 - inv_sq[c] / s) / delta[c];
            else
                xi(c, j) = -(inv_sq[j] / s) / delta[c];
        }
    }
    return xi;
}

SelMatrix build_sel(const StepSetting& setting) {
    setting.validate();
    const Eigen::VectorXd delta = setting.delta();
    const Eigen::MatrixXd xi = build_xi(delta);
    const long alpha_r = static_cast<long>(setting.alpha) * setting.R.num / setting.R.den;

    SelMatrix sel;
    sel.delta = delta;
    sel.k_maj = setting.k_maj();
    sel.z.resize(setting.k, setting.n_cols());
    sel.col_class.resize(setting.n_cols());
    long pos = 0;
    for (int c = 0; c < setting.k; ++c) {
        const long reps = setting.is_majority(c) ? alpha_r : setting.alpha;
        for (long r = 0; r < reps; ++r) {
            sel.z.col(pos) = xi.col(c);
            sel.col_class[pos] = c;
            ++pos;
        }
    }
    return sel;
}

}  // namespace selgeo
