#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>

#include <Eigen/Dense>

#include "selgeo/sel.hpp"
#include "selgeo/rng.hpp"
#include "test_support.hpp"

using namespace selgeo;

namespace {

// Independent oracle: evaluate the encoding formula in exact fractions for
// integer-valued delta. Entries are (num/den) with den = delta_c * S_num,
// where S = S_num / S_den over the common denominator of the delta squares.
struct Frac {
    std::int64_t num = 0, den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

Frac xi_entry_exact(const std::vector<std::int64_t>& delta, int c, int j) {
    // S = sum_j 1/delta_j^2 = S_num / L with L = lcm of squares; work with
    // P = prod delta^2 instead (small k keeps everything in range).
    std::int64_t p = 1;
    for (auto d : delta) p *= d * d;
    std::int64_t s_num = 0;  // S = s_num / p
    for (auto d : delta) s_num += p / (d * d);
    // diagonal: (1 - (p/dc^2)/s_num) / dc ; off-diagonal: -(p/dj^2)/s_num / dc
    const std::int64_t dc = delta[c];
    if (c == j) {
        const std::int64_t inner_num = s_num - p / (dc * dc);
        return {inner_num, s_num * dc};
    }
    const std::int64_t dj = delta[j];
    return {-(p / (dj * dj)), s_num * dc};
}

}  // namespace

TEST_CASE("encoding block for uniform delta") {
    // delta = 1_3: diagonal 1 - 1/k, off-diagonal -1/k.
    const Eigen::MatrixXd xi = build_xi(Eigen::VectorXd::Ones(3));
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < 3; ++j)
            CHECK(xi(c, j) == doctest::Approx(c == j ? 2.0 / 3.0 : -1.0 / 3.0).epsilon(1e-15));

    // Any uniform delta = c just rescales the centering projector by 1/c.
    for (double c : {0.25, 1.0, 7.5}) {
        const int k = 5;
        const Eigen::MatrixXd m = build_xi(Eigen::VectorXd::Constant(k, c));
        const Eigen::MatrixXd want =
            (Eigen::MatrixXd::Identity(k, k) -
             Eigen::MatrixXd::Constant(k, k, 1.0 / k)) /
            c;
        CHECK((m - want).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("encoding block for k=2, delta=(2,1) against the exact-fraction oracle") {
    Eigen::VectorXd delta(2);
    delta << 2.0, 1.0;
    const Eigen::MatrixXd xi = build_xi(delta);
    const std::vector<std::int64_t> d = {2, 1};
    for (int c = 0; c < 2; ++c)
        for (int j = 0; j < 2; ++j)
            CHECK(xi(c, j) == doctest::Approx(xi_entry_exact(d, c, j).value()).epsilon(1e-15));
    // Frozen values from the oracle: [[2/5, -2/5], [-1/5, 1/5]].
    CHECK(xi(0, 0) == doctest::Approx(0.4));
    CHECK(xi(0, 1) == doctest::Approx(-0.4));
    CHECK(xi(1, 0) == doctest::Approx(-0.2));
    CHECK(xi(1, 1) == doctest::Approx(0.2));
}

TEST_CASE("encoding block rejects non-positive delta") {
    Eigen::VectorXd delta(3);
    delta << 1.0, 0.0, 2.0;
    CHECK_THROWS_AS(build_xi(delta), std::invalid_argument);
    delta << 1.0, -2.0, 2.0;
    CHECK_THROWS_AS(build_xi(delta), std::invalid_argument);
}

TEST_CASE("weighted column sums vanish for random delta") {
    rng::Stream stream(1234);
    for (int trial = 0; trial < 25; ++trial) {
        const int k = 2 + static_cast<int>(stream.next_raw() % 9);
        Eigen::VectorXd delta(k);
        for (int c = 0; c < k; ++c) delta[c] = 0.1 + 3.0 * stream.uniform();
        const Eigen::MatrixXd xi = build_xi(delta);
        const Eigen::VectorXd resid = xi.transpose() * delta.cwiseInverse();
        CHECK(resid.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("delta scaling changes the block by 1/c and nothing else") {
    rng::Stream stream(99);
    Eigen::VectorXd delta(6);
    for (int c = 0; c < 6; ++c) delta[c] = 0.2 + stream.uniform();
    const Eigen::MatrixXd base = build_xi(delta);
    for (double c : {0.5, 2.0, 13.0}) {
        const Eigen::MatrixXd scaled = build_xi(c * delta);
        CHECK((scaled * c - base).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("replicated label matrix for k=2, rho=1/2, R=2") {
    StepSetting s;
    s.k = 2;
    s.rho = 0.5;
    s.R = Rational(2, 1);
    const SelMatrix sel = build_sel(s);
    REQUIRE(sel.n() == 3);
    Eigen::MatrixXd want(2, 3);
    want << 0.5, 0.5, -0.5, -0.5, -0.5, 0.5;
    CHECK((sel.z - want).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(sel.col_class[0] == 0);
    CHECK(sel.col_class[1] == 0);
    CHECK(sel.col_class[2] == 1);
}

TEST_CASE("balanced case has no replication") {
    StepSetting s;
    s.k = 4;
    s.rho = 0.5;
    s.R = Rational(1, 1);
    const SelMatrix sel = build_sel(s);
    CHECK(sel.n() == 4);
    CHECK((sel.z - build_xi(s.delta())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("label matrix annihilates the delta-weighted ones vector on the grid") {
    for (const auto& s : selgeo::testing::spec_grid()) {
        const SelMatrix sel = build_sel(s);
        const Eigen::VectorXd resid = sel.z.transpose() * s.delta().cwiseInverse();
        CHECK(resid.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(sel.n() == s.n_cols());
    }
}

TEST_CASE("setting validation") {
    StepSetting s;
    s.k = 4;
    s.rho = 0.5;
    s.R = Rational(5, 2);
    s.alpha = 1;  // alpha*R not integral
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.alpha = 2;
    CHECK_NOTHROW(s.validate());
    CHECK(s.n_cols() == 2 * 5 + 2 * 2);

    StepSetting bad = s;
    bad.rho = 0.3;  // 1.2 minority classes
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    StepSetting gamma_bad = StepSetting::from_gamma(4, 0.5, Rational(4, 1), 0.5);
    CHECK(gamma_bad.delta_maj == doctest::Approx(2.0));
    gamma_bad.delta_maj = 3.0;
    CHECK_THROWS_AS(gamma_bad.validate(), std::invalid_argument);
}

TEST_CASE("rational helpers") {
    CHECK(Rational(10, 4).num == 5);
    CHECK(Rational(10, 4).den == 2);
    CHECK(Rational(5, 2).smallest_alpha() == 2);
    CHECK(Rational(3, 1).integral_multiple(1));
    CHECK_FALSE(Rational(5, 2).integral_multiple(3));
    const auto r = Rational::approximate(2.5);
    REQUIRE(r.has_value());
    CHECK(*r == Rational(5, 2));
    const auto five = Rational::approximate(10.0 / 2.0);
    REQUIRE(five.has_value());
    CHECK(*five == Rational(5, 1));
    CHECK_FALSE(Rational::approximate(std::sqrt(2.0), 100, 1e-12).has_value());
}

TEST_CASE("simplex basis properties") {
    SUBCASE("m = 2 is the unique unit complement up to sign") {
        const Eigen::MatrixXd p = simplex_basis(2);
        REQUIRE(p.rows() == 2);
        REQUIRE(p.cols() == 1);
        CHECK(std::abs(std::abs(p(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-15);
        CHECK(p(0, 0) == doctest::Approx(-p(1, 0)));
    }
    SUBCASE("orthonormal, annihilates ones, centering projector") {
        for (int m : {2, 3, 5, 9, 17}) {
            const Eigen::MatrixXd p = simplex_basis(m);
            CHECK((p.transpose() * p - Eigen::MatrixXd::Identity(m - 1, m - 1))
                      .cwiseAbs()
                      .maxCoeff() < 1e-14);
            CHECK((p.transpose() * Eigen::VectorXd::Ones(m)).cwiseAbs().maxCoeff() < 1e-14);
            const Eigen::MatrixXd proj = p * p.transpose();
            const Eigen::MatrixXd want = Eigen::MatrixXd::Identity(m, m) -
                                         Eigen::MatrixXd::Constant(m, m, 1.0 / m);
            CHECK((proj - want).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
    SUBCASE("m = 5 centering entries") {
        const Eigen::MatrixXd proj = simplex_basis(5) * simplex_basis(5).transpose();
        CHECK(proj(0, 0) == doctest::Approx(0.8));
        CHECK(proj(2, 4) == doctest::Approx(-0.2));
    }
    SUBCASE("deterministic across calls") {
        const Eigen::MatrixXd a = simplex_basis(7);
        const Eigen::MatrixXd b = simplex_basis(7);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("rejects m < 2") { CHECK_THROWS_AS(simplex_basis(1), std::invalid_argument); }
}
