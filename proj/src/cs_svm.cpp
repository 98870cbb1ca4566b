#include "selgeo/cs_svm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "selgeo/csv.hpp"

namespace selgeo {

MarginReport margins(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                     const Eigen::VectorXi& labels, const Eigen::VectorXd& delta, LossKind loss,
                     double active_tol) {
    const int k = static_cast<int>(w.cols());
    if (h.cols() != labels.size() || w.rows() != h.rows() || delta.size() != k)
        throw std::invalid_argument("margins: inconsistent shapes");
    const long n = labels.size();

    MarginReport rep;
    rep.active_tol = active_tol;
    rep.n_total = n * (k - 1);
    rep.values.resize(rep.n_total);
    rep.min = std::numeric_limits<double>::infinity();
    rep.max = -rep.min;

    const Eigen::MatrixXd logits = w.transpose() * h;  // k x n
    long pos = 0;
    for (long i = 0; i < n; ++i) {
        const int y = labels[i];
        const double own = delta[y] * logits(y, i);
        for (int c = 0; c < k; ++c) {
            if (c == y) continue;
            const double m = (loss == LossKind::LDT) ? own - delta[y] * logits(c, i)
                                                     : own - delta[c] * logits(c, i);
            rep.values[pos++] = m;
            rep.min = std::min(rep.min, m);
            rep.max = std::max(rep.max, m);
            if (std::abs(m - 1.0) < active_tol) ++rep.n_active;
        }
    }
    return rep;
}

std::string MarginReport::to_json() const {
    return "{\"min\":" + csv::fmt(min) + ",\"max\":" + csv::fmt(max) +
           ",\"n_active\":" + std::to_string(n_active) +
           ",\"n_total\":" + std::to_string(n_total) + "}";
}

double objective(const Eigen::MatrixXd& w, const Eigen::MatrixXd& h) {
    return 0.5 * w.squaredNorm() + 0.5 * h.squaredNorm();
}

ReducedProblem reduce_ldt(const StepSetting& setting) {
    setting.validate();
    ReducedProblem red;
    const double ratio = setting.ratio();
    red.r_tilde = setting.r_value() / (ratio * ratio);
    // A genuinely rational r_tilde (rational R and Delta^2) hits a small
    // denominator at machine precision; true irrationals cannot get below
    // 1e-12 with denominators this small.
    const auto rat = Rational::approximate(red.r_tilde, 10000, 1e-12);
    if (rat.has_value()) {
        red.rational = true;
        red.r_tilde_rational = *rat;
        red.alpha = rat->smallest_alpha();
    } else {
        red.rational = false;
        red.alpha = 1;
    }
    red.beta_sq = static_cast<double>(setting.n_min) /
                  (static_cast<double>(red.alpha) * setting.delta_minor * setting.delta_minor);
    red.class_counts.resize(setting.k);
    for (int c = 0; c < setting.k; ++c)
        red.class_counts[c] = setting.is_majority(c)
                                  ? static_cast<double>(red.alpha) * red.r_tilde
                                  : static_cast<double>(red.alpha);
    return red;
}

namespace {

// Stack the constraint rows of the chosen family into A, so every problem
// becomes: min 0.5 |w|^2 subject to A w >= 1.
Eigen::MatrixXd constraint_matrix(const Eigen::MatrixXd& x, const Eigen::VectorXi& labels,
                                  BinaryConstraint kind, double d1, double d2) {
    const long n = x.cols();
    const long d = x.rows();
    const bool pair = kind == BinaryConstraint::CdtPair || kind == BinaryConstraint::LdtPair;
    Eigen::MatrixXd a(n, pair ? 2 * d : d);
    for (long i = 0; i < n; ++i) {
        const bool first = labels[i] == 1;
        const double v = first ? 1.0 : -1.0;
        switch (kind) {
            case BinaryConstraint::Plain:
                a.row(i) = v * x.col(i).transpose();
                break;
            case BinaryConstraint::WeightedVs:
                a.row(i) = v * (first ? d1 : d2) * x.col(i).transpose();
                break;
            case BinaryConstraint::CdtPair:
                a.row(i).head(d) = (first ? d1 : -d1) * x.col(i).transpose();
                a.row(i).tail(d) = (first ? -d2 : d2) * x.col(i).transpose();
                break;
            case BinaryConstraint::LdtPair: {
                const double dy = first ? d1 : d2;
                a.row(i).head(d) = (first ? dy : -dy) * x.col(i).transpose();
                a.row(i).tail(d) = (first ? -dy : dy) * x.col(i).transpose();
                break;
            }
        }
    }
    return a;
}

}  // namespace

BinarySolution solve_binary_margin(const Eigen::MatrixXd& points, const Eigen::VectorXi& labels,
                                   BinaryConstraint kind, double delta1, double delta2) {
    if (points.cols() != labels.size())
        throw std::invalid_argument("solve_binary_margin: points/labels mismatch");
    if (points.cols() < 2) throw std::invalid_argument("solve_binary_margin: need >= 2 points");
    if (!(delta1 > 0.0 && delta2 > 0.0))
        throw std::invalid_argument("solve_binary_margin: delta must be positive");

    const Eigen::MatrixXd a = constraint_matrix(points, labels, kind, delta1, delta2);
    const long n = a.rows();
    const Eigen::MatrixXd q = a * a.transpose();

    // Lipschitz constant of the dual gradient via power iteration on Q.
    Eigen::VectorXd pv = Eigen::VectorXd::Ones(n).normalized();
    double lip = 1.0;
    for (int it = 0; it < 100; ++it) {
        pv = (q * pv);
        const double nn = pv.norm();
        if (nn < 1e-300) break;
        pv /= nn;
        lip = nn;
    }
    const double step = 1.0 / std::max(lip, 1e-12);

    const long max_iters = 100000;
    const double gap_tol = 1e-8;
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(n);
    BinarySolution sol;
    for (long it = 1; it <= max_iters; ++it) {
        lam += step * (Eigen::VectorXd::Ones(n) - q * lam);
        lam = lam.cwiseMax(0.0);
        if (it % 50 == 0 || it == max_iters) {
            const double dual = lam.sum() - 0.5 * lam.dot(q * lam);
            const Eigen::VectorXd wv = a.transpose() * lam;
            const double min_margin = (a * wv).minCoeff();
            if (min_margin > 0.0) {
                const double primal = 0.5 * wv.squaredNorm() / (min_margin * min_margin);
                const double gap = primal - dual;
                if (gap <= gap_tol * std::max(1.0, std::abs(dual))) {
                    const Eigen::VectorXd wf = wv / min_margin;
                    sol.dual_objective = dual;
                    sol.primal_objective = primal;
                    sol.gap = gap;
                    sol.iterations = it;
                    if (kind == BinaryConstraint::CdtPair || kind == BinaryConstraint::LdtPair) {
                        const long d = points.rows();
                        sol.w.resize(d, 2);
                        sol.w.col(0) = wf.head(d);
                        sol.w.col(1) = wf.tail(d);
                    } else {
                        sol.w = wf;
                    }
                    return sol;
                }
            }
        }
    }
    throw std::runtime_error(
        "solve_binary_margin: no certificate after iteration cap (data may not be separable)");
}

BinaryLemmaReport verify_binary_lemma(const Eigen::MatrixXd& points, const Eigen::VectorXi& labels,
                                      double delta1, double delta2) {
    const auto cosine = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return a.dot(b) / (a.norm() * b.norm());
    };

    const BinarySolution plain =
        solve_binary_margin(points, labels, BinaryConstraint::Plain);
    const BinarySolution vs =
        solve_binary_margin(points, labels, BinaryConstraint::WeightedVs, delta1, delta2);
    const BinarySolution cdt =
        solve_binary_margin(points, labels, BinaryConstraint::CdtPair, delta1, delta2);
    const BinarySolution ldt =
        solve_binary_margin(points, labels, BinaryConstraint::LdtPair, delta1, delta2);

    BinaryLemmaReport rep;
    const Eigen::VectorXd ldt_dir = ldt.w.col(0) - ldt.w.col(1);
    const Eigen::VectorXd cdt_dir = cdt.w.col(0) - cdt.w.col(1);
    rep.cos_ldt_vs = cosine(ldt_dir, vs.w.col(0));
    rep.cos_cdt_plain = cosine(cdt_dir, plain.w.col(0));
    rep.ldt_center_residual =
        (ldt.w.col(0) + ldt.w.col(1)).norm() / std::max(ldt_dir.norm(), 1e-300);
    rep.cdt_center_residual = (cdt.w.col(0) / delta1 + cdt.w.col(1) / delta2).norm() /
                              std::max(cdt_dir.norm(), 1e-300);
    rep.pass = rep.cos_ldt_vs >= 1.0 - 1e-6 && rep.cos_cdt_plain >= 1.0 - 1e-6 &&
               rep.ldt_center_residual < 1e-6 && rep.cdt_center_residual < 1e-6;
    return rep;
}

}  // namespace selgeo
