#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "selgeo/geometry.hpp"
#include "selgeo/ufm.hpp"
#include "test_support.hpp"

using namespace selgeo;

namespace {

StepSetting grid_setting(int k, std::int64_t r, double gamma, double rho = 0.5) {
    return StepSetting::from_gamma(k, rho, Rational(r, 1), gamma);
}

bool close(double a, double b, double tol = 1e-10) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("balanced uniform case predicts the maximally separated frame") {
    const StepSetting s = grid_setting(10, 1, 0.0);
    const GramTriple g = predict_cdt_grams(s);
    const Eigen::MatrixXd etf =
        Eigen::MatrixXd::Identity(10, 10) - Eigen::MatrixXd::Constant(10, 10, 0.1);
    CHECK((g.wtw - etf).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g.mtm - etf).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g.wtm - etf).cwiseAbs().maxCoeff() < 1e-12);

    const GeometryStats st = stats_from_grams(g, s);
    CHECK(close(st.w_norm_ratio_sq, 1.0));
    CHECK(close(*st.cos_w_maj_maj, -1.0 / 9.0));
    CHECK(close(*st.cos_h_min_min, -1.0 / 9.0));
    CHECK(close(st.cos_w_maj_min, -1.0 / 9.0));
    CHECK(close(st.align_maj, 1.0));
    CHECK(close(st.align_min, 1.0));
}

TEST_CASE("classifier Gram spectrum matches the singular values") {
    const GramTriple g = predict_cdt_grams(grid_setting(4, 4, 0.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.wtw);
    Eigen::VectorXd want(4);
    want << 0.0, 1.0, std::sqrt(2.5), 2.0;
    CHECK((eig.eigenvalues() - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Gram invariants on the grid") {
    for (const auto& s : selgeo::testing::spec_grid()) {
        for (const GramTriple& g : {predict_cdt_grams(s), predict_ldt_grams(s)}) {
            CHECK((g.wtw - g.wtw.transpose()).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((g.mtm - g.mtm.transpose()).cwiseAbs().maxCoeff() < 1e-12);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ew(g.wtw), em(g.mtm);
            CHECK(ew.eigenvalues().minCoeff() > -1e-10);
            CHECK(em.eigenvalues().minCoeff() > -1e-10);
            // rank k-1: smallest eigenvalue ~0, second smallest bounded away
            CHECK(std::abs(ew.eigenvalues()[0]) < 1e-10 * ew.eigenvalues().maxCoeff());
            CHECK(ew.eigenvalues()[1] > 1e-8 * ew.eigenvalues().maxCoeff());
        }
        // Cross Gram of the classifier-side loss is the encoding block itself.
        CHECK((predict_cdt_grams(s).wtm - build_xi(s.delta())).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("perfect alignment at delta ratio sqrt(R)") {
    const StepSetting s = grid_setting(10, 10, 0.5);
    const GeometryStats st = stats_from_grams(predict_cdt_grams(s), s);
    CHECK(close(st.align_maj, 1.0));
    CHECK(close(st.align_min, 1.0));
    const auto [maj, min] = cdt_alignment(s);
    CHECK(close(maj, 1.0));
    CHECK(close(min, 1.0));
}

TEST_CASE("feature-side loss at sqrt(R) reduces to the balanced frame") {
    for (std::int64_t r : {1, 2, 5, 10}) {
        const StepSetting s = grid_setting(10, r, 0.5);
        const GeometryStats st = stats_from_grams(predict_ldt_reduced_grams(s), s);
        CHECK(close(st.w_norm_ratio_sq, 1.0));
        CHECK(close(st.h_norm_ratio_sq, 1.0));
        for (double c : {*st.cos_w_maj_maj, *st.cos_w_min_min, st.cos_w_maj_min,
                         *st.cos_h_maj_maj, *st.cos_h_min_min, st.cos_h_maj_min})
            CHECK(close(c, -1.0 / 9.0));
        // Un-scaled classifier stats are unchanged by the mean rescaling.
        const LdtStats ldt = ldt_stats(s);
        CHECK(close(ldt.cos_w_min_min, -1.0 / 9.0));
        CHECK(close(ldt.w_norm_ratio_sq, 1.0));
    }
}

TEST_CASE("the two losses coincide at uniform delta") {
    const StepSetting s = grid_setting(6, 5, 0.0);
    const GramTriple cdt = predict_cdt_grams(s);
    const GramTriple ldt = predict_ldt_grams(s);
    CHECK((cdt.wtw - ldt.wtw).cwiseAbs().maxCoeff() == 0.0);
    CHECK((cdt.mtm - ldt.mtm).cwiseAbs().maxCoeff() == 0.0);
    CHECK((cdt.wtm - ldt.wtm).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("stats extraction flags asymmetric geometry") {
    const StepSetting s = grid_setting(10, 5, 0.5);
    GramTriple g = predict_cdt_grams(s);
    g.wtw(0, 1) += 1e-3;
    g.wtw(1, 0) += 1e-3;
    CHECK_THROWS_AS(stats_from_grams(g, s), std::runtime_error);
}

TEST_CASE("closed-form statistics agree with the Gram route on the grid") {
    for (const auto& s : selgeo::testing::spec_grid()) {
        if (s.k_maj() != s.k_min()) continue;  // closed forms assume the even split
        const GeometryStats cdt = stats_from_grams(predict_cdt_grams(s), s);
        const GroupStats wstats = cdt_classifier_stats(s);
        const GroupStats hstats = cdt_embedding_stats(s);
        const auto [amaj, amin] = cdt_alignment(s);

        CHECK(close(wstats.norm_sq_maj / wstats.norm_sq_min, cdt.w_norm_ratio_sq));
        CHECK(close(hstats.norm_sq_maj / hstats.norm_sq_min, cdt.h_norm_ratio_sq));
        CHECK(close(wstats.cos_maj_min, cdt.cos_w_maj_min));
        CHECK(close(hstats.cos_maj_min, cdt.cos_h_maj_min));
        CHECK(close(amaj, cdt.align_maj));
        CHECK(close(amin, cdt.align_min));
        if (s.k >= 4) {
            CHECK(close(wstats.cos_maj_maj, *cdt.cos_w_maj_maj));
            CHECK(close(wstats.cos_min_min, *cdt.cos_w_min_min));
            CHECK(close(hstats.cos_maj_maj, *cdt.cos_h_maj_maj));
            CHECK(close(hstats.cos_min_min, *cdt.cos_h_min_min));
        }

        const GeometryStats ldt = stats_from_grams(predict_ldt_grams(s), s);
        const LdtStats lstats = ldt_stats(s);
        CHECK(close(lstats.w_norm_ratio_sq, ldt.w_norm_ratio_sq));
        CHECK(close(lstats.h_norm_ratio_sq, ldt.h_norm_ratio_sq));
        if (s.k >= 4) {
            CHECK(close(lstats.cos_w_maj_maj, *ldt.cos_w_maj_maj));
            CHECK(close(lstats.cos_w_min_min, *ldt.cos_w_min_min));
        }
    }
}

TEST_CASE("absolute norms also match the unit-scale closed forms") {
    // The Gram route uses the alpha = 1, delta_minor = 1 scale, which is the
    // convention of the printed norm formulas.
    const StepSetting s = grid_setting(10, 10, 0.5);
    const GramTriple g = predict_cdt_grams(s);
    CHECK(close(g.wtw(0, 0), cdt_classifier_stats(s).norm_sq_maj));
    CHECK(close(g.mtm(9, 9), cdt_embedding_stats(s).norm_sq_min));
}

TEST_CASE("geometry depends on delta only through the ratio") {
    StepSetting a = grid_setting(6, 5, 0.5);
    StepSetting b = a;
    b.delta_maj *= 17.0;
    b.delta_minor *= 17.0;
    const GeometryStats sa = stats_from_grams(predict_cdt_grams(a), a);
    const GeometryStats sb = stats_from_grams(predict_cdt_grams(b), b);
    CHECK(close(sa.w_norm_ratio_sq, sb.w_norm_ratio_sq, 1e-12));
    CHECK(close(*sa.cos_w_min_min, *sb.cos_w_min_min, 1e-12));
    CHECK(close(sa.align_maj, sb.align_maj, 1e-12));
    const GeometryStats la = stats_from_grams(predict_ldt_grams(a), a);
    const GeometryStats lb = stats_from_grams(predict_ldt_grams(b), b);
    CHECK(close(la.h_norm_ratio_sq, lb.h_norm_ratio_sq, 1e-12));
    CHECK(close(*la.cos_h_maj_maj, *lb.cos_h_maj_maj, 1e-12));
}

TEST_CASE("limiting angles: tabulated entries") {
    const int k = 10;
    SUBCASE("feature-side loss") {
        const AsymptoticAngles mid = asymptotic_angles(LossKind::LDT, 0.5, k);
        CHECK(close(mid.cos_w_min_min, -1.0 / 9.0));
        CHECK(close(mid.cos_w_maj_maj, -1.0 / 9.0));
        CHECK(close(mid.cos_h_min_min, -1.0 / 9.0));
        const AsymptoticAngles low = asymptotic_angles(LossKind::LDT, 0.25, k);
        CHECK(close(low.cos_w_min_min, 1.0));
        const AsymptoticAngles high = asymptotic_angles(LossKind::LDT, 1.0, k);
        CHECK(close(high.cos_w_maj_maj, 1.0));
        CHECK(close(high.cos_h_maj_maj, -2.0 / 8.0));
    }
    SUBCASE("classifier-side loss") {
        CHECK(close(asymptotic_angles(LossKind::CDT, 1.0 / 6.0, k).cos_w_min_min, 0.0));
        CHECK(close(asymptotic_angles(LossKind::CDT, -1.0, k).cos_w_maj_maj, -0.25));
        const double sq2 = std::sqrt(2.0);
        CHECK(close(asymptotic_angles(LossKind::CDT, 0.0, k).cos_w_maj_maj,
                    (1.0 - 2.0 * sq2) / (1.0 + 8.0 * sq2)));
        CHECK(close(asymptotic_angles(LossKind::CDT, 0.3, k).cos_w_min_min, -0.25));
    }
    SUBCASE("k below 4 is rejected") {
        CHECK_THROWS_AS(asymptotic_angles(LossKind::CDT, 0.0, 2), std::invalid_argument);
    }
}

TEST_CASE("finite-R angles approach the limits monotonically in the tail") {
    const int k = 10;
    // Each probe sits inside one gamma regime (or exactly at a breakpoint) per
    // row; rows whose regime the probe does not represent are masked off.
    // Every entry of both limit tables is covered by some probe.
    struct Probe {
        LossKind loss;
        double gamma;
        bool w_min, w_maj, h_min, h_maj;
    };
    const std::vector<Probe> probes = {
        {LossKind::CDT, -0.5, true, true, true, true},
        {LossKind::CDT, 0.0, false, true, true, true},
        {LossKind::CDT, 1.0 / 6.0, true, false, false, false},
        {LossKind::CDT, 0.5, true, true, true, true},
        {LossKind::LDT, -0.5, true, true, true, true},
        {LossKind::LDT, 0.5, true, true, true, true},
        {LossKind::LDT, 1.5, true, true, true, true},
    };
    for (const auto& probe : probes) {
        const AsymptoticAngles limit = asymptotic_angles(probe.loss, probe.gamma, k);
        std::vector<double> dev_w_min, dev_w_maj, dev_h_min, dev_h_maj;
        for (double r : {1e2, 1e4, 1e6, 1e8}) {
            const double delta = std::pow(r, probe.gamma);
            SelFactors f;
            Eigen::VectorXd inv = Eigen::VectorXd::Ones(k);
            if (probe.loss == LossKind::LDT) {
                f = closed_form_factors(k, 0.5, r / (delta * delta), 1.0);
                inv.head(k / 2).setConstant(1.0 / delta);
            } else {
                f = closed_form_factors(k, 0.5, r, delta);
            }
            const Eigen::MatrixXd wtw = f.v * f.lambda.asDiagonal() * f.v.transpose();
            const Eigen::MatrixXd mtm =
                inv.asDiagonal() * (f.u * f.lambda.asDiagonal() * f.u.transpose()) *
                inv.asDiagonal();
            dev_w_maj.push_back(std::abs(wtw(0, 1) / wtw(0, 0) - limit.cos_w_maj_maj));
            dev_w_min.push_back(
                std::abs(wtw(k / 2, k / 2 + 1) / wtw(k / 2, k / 2) - limit.cos_w_min_min));
            dev_h_maj.push_back(std::abs(mtm(0, 1) / mtm(0, 0) - limit.cos_h_maj_maj));
            dev_h_min.push_back(
                std::abs(mtm(k / 2, k / 2 + 1) / mtm(k / 2, k / 2) - limit.cos_h_min_min));
        }
        const std::vector<std::pair<bool, std::vector<double>>> tracked = {
            {probe.w_min, dev_w_min},
            {probe.w_maj, dev_w_maj},
            {probe.h_min, dev_h_min},
            {probe.h_maj, dev_h_maj}};
        for (const auto& [enabled, dev] : tracked) {
            if (!enabled) continue;
            CHECK(dev.back() < 1e-3);
            // Monotone in the tail, up to the floating-point noise floor.
            CHECK(dev[2] >= dev[3] - 1e-12);
            CHECK(dev[1] >= dev[2] - 1e-12);
        }
    }
}

TEST_CASE("realizations") {
    const StepSetting s = grid_setting(6, 5, 0.5);
    const SelSvd svd = closed_form_svd(s);

    SUBCASE("Grams match the factor products, any dimension") {
        for (int d : {5, 9}) {
            const Realization real = construct_realization(svd, d, 42);
            CHECK((real.w.transpose() * real.w -
                   svd.v * svd.lambda.asDiagonal() * svd.v.transpose())
                      .cwiseAbs()
                      .maxCoeff() < 1e-10);
            CHECK((real.w.transpose() * real.h - svd.reconstruct()).cwiseAbs().maxCoeff() <
                  1e-10);
        }
    }
    SUBCASE("two seeds differ but share Grams") {
        const Realization a = construct_realization(svd, 8, 1);
        const Realization b = construct_realization(svd, 8, 2);
        CHECK((a.w - b.w).cwiseAbs().maxCoeff() > 1e-3);
        CHECK((a.w.transpose() * a.w - b.w.transpose() * b.w).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("same seed reproduces bitwise") {
        const Realization a = construct_realization(svd, 8, 7);
        const Realization b = construct_realization(svd, 8, 7);
        CHECK((a.w - b.w).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a.h - b.h).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("within-class embeddings are identical") {
        const Realization real = construct_realization(svd, 5, 3);
        CHECK(nc_metric(real.h, real.labels) < 1e-24);
    }
    SUBCASE("dimension below k-1 is rejected") {
        CHECK_THROWS_AS(construct_realization(svd, 4, 0), std::invalid_argument);
    }
}

TEST_CASE("centering identities") {
    const StepSetting s = grid_setting(6, 5, 0.5);
    SUBCASE("classifier-side optimum") {
        const Realization real = construct_realization(closed_form_svd(s), 6, 11);
        const Eigen::MatrixXd means = class_means(real.h, real.labels, s.k);
        const auto [rw, rm] = centering_check(real.w, means, s.delta(), LossKind::CDT);
        CHECK(rw < 1e-10);
        CHECK(rm < 1e-10);
    }
    SUBCASE("feature-side optimum") {
        const Realization real = construct_ldt_realization(s, 6, 11);
        const Eigen::MatrixXd means = class_means(real.h, real.labels, s.k);
        const auto [rw, rm] = centering_check(real.w, means, s.delta(), LossKind::LDT);
        CHECK(rw < 1e-10);
        CHECK(rm < 1e-10);
    }
    SUBCASE("broken centering is visible") {
        const Realization real = construct_realization(closed_form_svd(s), 6, 11);
        Eigen::MatrixXd w = real.w;
        w.colwise() += Eigen::VectorXd::Ones(6).eval();
        const Eigen::MatrixXd means = class_means(real.h, real.labels, s.k);
        const auto [rw, rm] = centering_check(w, means, s.delta(), LossKind::CDT);
        CHECK(rw > 1e-2);
        CHECK(rm < 1e-10);
    }
}

TEST_CASE("geometry csv row shape") {
    const StepSetting s = grid_setting(10, 10, 0.5);
    const GeometryStats st = stats_from_grams(predict_cdt_grams(s), s);
    const std::string row = geometry_csv_row(0.5, 10.0, 10, 0.5, LossKind::CDT, st);
    CHECK(std::count(row.begin(), row.end(), ',') == 14);
    CHECK(row.find("cdt") != std::string::npos);
    const std::string header(kGeometryCsvHeader);
    CHECK(std::count(header.begin(), header.end(), ',') == 14);
}
