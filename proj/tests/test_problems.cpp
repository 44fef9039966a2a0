#include <doctest.h>

#include <cmath>

#include "matest/problems.hpp"
#include "test_util.hpp"

using namespace matest;

namespace {

SplitProblem cov_problem(const Mat& s, double lambda, int n = 500) {
    return make_problem(ProblemKind::Covariance, s, n, lambda);
}

SplitProblem prec_problem(const Mat& s, double lambda, int n = 500) {
    return make_problem(ProblemKind::Precision, s, n, lambda);
}

}  // namespace

TEST_SUITE("problems") {

TEST_CASE("primal objective trivial cases") {
    testutil::Rng rng(1);
    Mat s = testutil::random_spd(rng, 4, 0.5, 2.0);
    CHECK(primal_objective(cov_problem(s, 0.0), s) == doctest::Approx(0.0));

    const Eigen::Index p = 5;
    Mat eye = Mat::Identity(p, p);
    CHECK(primal_objective(prec_problem(eye, 0.7), eye) == doctest::Approx(double(p)));
}

TEST_CASE("covariance primal equals direct summation") {
    testutil::Rng rng(8);
    Mat s = testutil::random_symmetric(rng, 3);
    Mat m = testutil::random_symmetric(rng, 3);
    const double lambda = 0.4;
    double want = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            want += 0.5 * (m(i, j) - s(i, j)) * (m(i, j) - s(i, j));
            if (i != j) want += lambda * std::abs(m(i, j));
        }
    CHECK(primal_objective(cov_problem(s, lambda), m) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("precision primal requires positive definiteness") {
    Mat s = Mat::Identity(3, 3);
    Mat m = Mat::Identity(3, 3);
    m(2, 2) = -0.5;
    CHECK_THROWS_AS(primal_objective(prec_problem(s, 0.1), m), NotPositiveDefinite);
}

TEST_CASE("dual objective trivial cases") {
    testutil::Rng rng(2);
    Mat s = testutil::random_spd(rng, 4, 0.5, 2.0);
    CHECK(dual_objective(cov_problem(s, 0.1), Mat::Zero(4, 4)) == doctest::Approx(0.0));

    // Precision at Xi = 0, S = I: log det(I) + p.
    const Eigen::Index p = 6;
    CHECK(dual_objective(prec_problem(Mat::Identity(p, p), 0.1), Mat::Zero(p, p)) ==
          doctest::Approx(double(p)));

    Mat xi = 2.0 * Mat::Identity(p, p);  // S - Xi negative definite
    CHECK_THROWS_AS(dual_objective(prec_problem(Mat::Identity(p, p), 0.1), xi), InfeasibleDual);
}

TEST_CASE("covariance dual is maximized at -S") {
    testutil::Rng rng(3);
    Mat s = testutil::random_spd(rng, 5, 0.5, 2.0);
    SplitProblem prob = cov_problem(s, 0.2);
    const double best = dual_objective(prob, (-s).eval());
    CHECK(best == doctest::Approx(0.5 * s.squaredNorm()));
    for (int trial = 0; trial < 1000; ++trial) {
        Mat lam = testutil::random_symmetric(rng, 5, 2.0);
        CHECK(dual_objective(prob, lam) <= best + 1e-10);
    }
}

TEST_CASE("covariance dual candidate is the negated multiplier inside the box") {
    testutil::Rng rng(4);
    Mat s = testutil::random_spd(rng, 4, 0.5, 2.0);
    SplitProblem prob = cov_problem(s, 0.5);
    IterateState st;
    st.x = st.y = s;
    st.v = testutil::random_symmetric(rng, 4, 0.1);
    st.v.diagonal().setZero();
    Mat cand = dual_feasible_from_iterate(prob, st);
    CHECK((cand + st.v).norm() <= 1e-15);  // clip is a no-op for small V

    // Off-diagonals beyond lambda are clipped, diagonal zeroed.
    st.v = Mat::Constant(4, 4, 3.0);
    cand = dual_feasible_from_iterate(prob, st);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(cand(i, j) == (i == j ? 0.0 : -0.5));
}

TEST_CASE("duality gap vanishes at hand-solved optima") {
    testutil::Rng rng(5);
    Mat s = testutil::random_spd(rng, 4, 0.5, 2.0);
    // Covariance, lambda = 0, optimum X = S with multiplier V = 0.
    SplitProblem prob = cov_problem(s, 0.0);
    IterateState st{s, s, Mat::Zero(4, 4)};
    CHECK(duality_gap(prob, st.x, dual_feasible_from_iterate(prob, st)) ==
          doctest::Approx(0.0).epsilon(1e-12));

    // Precision, S = I: optimum Theta = I, Xi = 0.
    const Eigen::Index p = 5;
    SplitProblem prec = prec_problem(Mat::Identity(p, p), 0.3);
    CHECK(duality_gap(prec, Mat::Identity(p, p), Mat::Zero(p, p)) == doctest::Approx(0.0));
}

TEST_CASE("weak duality holds for box-feasible duals") {
    testutil::Rng rng(6);
    Mat s = testutil::random_spd(rng, 5, 0.5, 2.0);
    SplitProblem prob = cov_problem(s, 0.3);
    for (int trial = 0; trial < 200; ++trial) {
        Mat m = testutil::random_symmetric(rng, 5);
        IterateState st{m, m, testutil::random_symmetric(rng, 5, 2.0)};
        Mat cand = dual_feasible_from_iterate(prob, st);
        CHECK(duality_gap(prob, m, cand) >= -1e-8);
    }
}

TEST_CASE("primal objective is convex along segments") {
    testutil::Rng rng(7);
    Mat s = testutil::random_spd(rng, 4, 0.5, 2.0);
    SplitProblem cov = cov_problem(s, 0.3);
    SplitProblem prec = prec_problem(s, 0.3);
    for (int trial = 0; trial < 50; ++trial) {
        Mat a = testutil::random_symmetric(rng, 4);
        Mat b = testutil::random_symmetric(rng, 4);
        CHECK(primal_objective(cov, ((a + b) * 0.5).eval()) <=
              0.5 * primal_objective(cov, a) + 0.5 * primal_objective(cov, b) + 1e-9);
        Mat pa = testutil::random_spd(rng, 4, 0.3, 2.0);
        Mat pb = testutil::random_spd(rng, 4, 0.3, 2.0);
        CHECK(primal_objective(prec, ((pa + pb) * 0.5).eval()) <=
              0.5 * primal_objective(prec, pa) + 0.5 * primal_objective(prec, pb) + 1e-9);
    }
}

TEST_CASE("kkt residual at a hand-solved 2x2 covariance optimum") {
    // S = [[1, .5], [.5, 1]], lambda = 0.3: the floor never binds, so the
    // optimum is the soft-threshold of S with multiplier V = S - X.
    Mat s(2, 2);
    s << 1, 0.5, 0.5, 1;
    SplitProblem prob = cov_problem(s, 0.3);
    Mat x(2, 2);
    x << 1, 0.2, 0.2, 1;
    Mat v(2, 2);
    v << 0, 0.3, 0.3, 0;
    KktResidual res = kkt_residual(prob, IterateState{x, x, v});
    CHECK(res.primal <= 1e-8);
    CHECK(res.dual <= 1e-8);
    CHECK(res.subgrad <= 1e-8);
}

TEST_CASE("kkt residual vanishes at the unconstrained minimum") {
    testutil::Rng rng(9);
    Mat s = testutil::random_spd(rng, 4, 0.5, 2.0);
    SplitProblem prob = cov_problem(s, 0.0);
    KktResidual res = kkt_residual(prob, IterateState{s, s, Mat::Zero(4, 4)});
    CHECK(res.primal == 0.0);
    CHECK(res.dual <= 1e-12);
    CHECK(res.subgrad == 0.0);

    // Residuals are nonnegative by construction.
    IterateState st{testutil::random_symmetric(rng, 4), testutil::random_symmetric(rng, 4),
                    testutil::random_symmetric(rng, 4)};
    res = kkt_residual(prob, st);
    CHECK(res.primal >= 0.0);
    CHECK(res.dual >= 0.0);
    CHECK(res.subgrad >= 0.0);
}

TEST_CASE("default lambda follows the concentration scaling") {
    testutil::Rng rng(10);
    Mat s = testutil::random_spd(rng, 25, 0.5, 2.0);
    SplitProblem prob = make_problem(ProblemKind::Covariance, s, 400);
    CHECK(prob.lambda == doctest::Approx(2.0 * std::sqrt(std::log(25.0) / 400.0)));
}

}  // TEST_SUITE
