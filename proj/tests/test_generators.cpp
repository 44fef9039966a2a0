#include <doctest.h>

#include <cmath>

#include "matest/generators.hpp"
#include "matest/metrics.hpp"
#include "test_util.hpp"

using namespace matest;

TEST_SUITE("generators") {

TEST_CASE("toeplitz structure") {
    Mat id = make_truth(Toeplitz{0.0}, 4, 1);
    CHECK((id - Mat::Identity(4, 4)).norm() == 0.0);

    Mat t = make_truth(Toeplitz{0.5}, 3, 1);
    Mat want(3, 3);
    want << 1, 0.5, 0.25, 0.5, 1, 0.5, 0.25, 0.5, 1;
    CHECK((t - want).norm() == 0.0);

    CHECK_THROWS_AS(make_truth(Toeplitz{1.0}, 3, 1), InvalidArgument);
}

TEST_CASE("grid structure is strictly diagonally dominant") {
    Mat g = make_truth(Grid{3}, 9, 1);
    for (Eigen::Index i = 0; i < 9; ++i) {
        double off = 0;
        for (Eigen::Index j = 0; j < 9; ++j)
            if (i != j) off += std::abs(g(i, j));
        CHECK(off <= 0.8 + 1e-15);
        CHECK(g(i, i) > off);
    }
    // Right-boundary nodes have no horizontal neighbor.
    CHECK(g(2, 3) == 0.0);
    CHECK_THROWS_AS(make_truth(Grid{3}, 8, 1), InvalidArgument);
}

TEST_CASE("banded structures") {
    Mat b1 = make_truth(Banded{2}, 6, 1);
    CHECK(b1(0, 2) == 0.2);
    CHECK(b1(0, 3) == 0.0);
    Mat b2 = make_truth(Banded{4}, 10, 1);
    CHECK(b2(0, 4) == 0.2);
    CHECK(b2(0, 5) == 0.0);
    CHECK_THROWS_AS(make_truth(Banded{3}, 6, 1), InvalidArgument);
    CHECK(min_eigenvalue(b2) >= 0.04);
}

TEST_CASE("block structure carries exact within and cross values") {
    Block spec{5, 0.7, 0.1, 0.3};
    Mat b = make_truth(spec, 20, 3);
    bool saw_cross = false;
    for (Eigen::Index i = 0; i < 20; ++i)
        for (Eigen::Index j = i + 1; j < 20; ++j) {
            const bool same = (i / 5) == (j / 5);
            if (same) {
                CHECK(b(i, j) == doctest::Approx(0.7));
            } else if (b(i, j) != 0.0) {
                CHECK(b(i, j) == doctest::Approx(0.1));
                saw_cross = true;
            }
        }
    CHECK(saw_cross);
    CHECK(min_eigenvalue(b) >= 0.04);
}

TEST_CASE("sparse structure is loaded to positive definiteness") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        Mat s = make_truth(SparseRandom{0.5}, 30, seed);
        CHECK(min_eigenvalue(s) >= 0.04);
        CHECK((s - s.transpose()).norm() == 0.0);
        for (Eigen::Index i = 0; i < 30; ++i) CHECK(s(i, i) >= 0.5);
    }
}

TEST_CASE("factor structure has exactly m spiked eigenvalues") {
    Factor spec{3, 1.0, 0.04};
    Mat f = make_truth(spec, 40, 9);
    Vec d = sym_eig(f).d;
    int spiked = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (d[i] > spec.sigma_n + 2 * spec.sigma_n) ++spiked;
    CHECK(spiked == spec.m);
    CHECK(d.minCoeff() == doctest::Approx(spec.sigma_n));
}

TEST_CASE("sampling is deterministic given the seed") {
    Mat truth = make_truth(Toeplitz{0.5}, 6, 1);
    Instance a = sample_instance(truth, ProblemKind::Covariance, 50, 42);
    Instance b = sample_instance(truth, ProblemKind::Covariance, 50, 42);
    CHECK((a.sample_cov - b.sample_cov).norm() == 0.0);
    Instance c = sample_instance(truth, ProblemKind::Covariance, 50, 43);
    CHECK((a.sample_cov - c.sample_cov).norm() > 0.0);
}

TEST_CASE("large-sample covariance concentrates on the truth") {
    Mat truth = make_truth(Toeplitz{0.5}, 5, 1);
    Instance inst = sample_instance(truth, ProblemKind::Covariance, 100000, 7);
    CHECK(max_abs(inst.sample_cov - truth) <= 0.05);
}

TEST_CASE("precision sampling draws from the inverse covariance") {
    Mat theta = make_truth(Banded{2}, 6, 1);
    Instance inst = sample_instance(theta, ProblemKind::Precision, 200000, 11);
    EigenDecomp ed = sym_eig(theta);
    Mat sigma = ed.q * ed.d.cwiseInverse().asDiagonal() * ed.q.transpose();
    CHECK(max_abs(inst.sample_cov - sigma) <= 0.05);

    Mat singular = Mat::Zero(3, 3);
    CHECK_THROWS_AS(sample_instance(singular, ProblemKind::Precision, 10, 1),
                    NumericError);
}

TEST_CASE("sample covariance is unbiased over repeated seeds") {
    Mat truth = make_truth(Toeplitz{0.5}, 4, 1);
    const int n = 100, reps = 200;
    Mat mean = Mat::Zero(4, 4);
    for (int r = 0; r < reps; ++r)
        mean += sample_instance(truth, ProblemKind::Covariance, n, 1000 + r).sample_cov;
    mean /= double(reps);
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) {
            const double var =
                (truth(i, i) * truth(j, j) + truth(i, j) * truth(i, j)) / double(n);
            const double se = std::sqrt(var / double(reps));
            CHECK(std::abs(mean(i, j) - truth(i, j)) <= 3 * se);
        }
}

TEST_CASE("concentration experiment enforces the repetition floor") {
    CHECK_THROWS_AS(concentration_experiment(Toeplitz{0.5}, {10}, {50}, 10, 1), InvalidArgument);
    auto rows = concentration_experiment(Toeplitz{0.5}, {10}, {50, 200}, 30, 1);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].median_err > rows[1].median_err);  // larger n, smaller error
    CHECK(rows[0].ratio > 0);
}

}  // TEST_SUITE

TEST_SUITE("metrics") {

TEST_CASE("evaluate on the exact truth") {
    Mat truth = make_truth(Toeplitz{0.5}, 5, 1);
    Instance inst = sample_instance(truth, ProblemKind::Covariance, 100, 3);
    RunTrace trace;
    TraceRow row;
    row.iter = 17;
    row.gap = 1e-9;
    trace.rows.push_back(row);
    trace.iters = 17;
    trace.seconds = 0.5;
    EvalReport rep = evaluate(truth, inst, trace);
    CHECK(rep.frob_err == 0.0);
    CHECK(rep.support_precision == 1.0);
    CHECK(rep.support_recall == 1.0);
    CHECK(rep.nuclear == doctest::Approx(nuclear_norm(truth)));
    CHECK(rep.gap_final == 1e-9);
    CHECK(rep.iters == 17);
}

TEST_CASE("diagonal estimate has zero recall against a toeplitz truth") {
    Mat truth = make_truth(Toeplitz{0.5}, 5, 1);
    Instance inst = sample_instance(truth, ProblemKind::Covariance, 100, 3);
    EvalReport rep = evaluate(Mat::Identity(5, 5), inst, RunTrace{});
    CHECK(rep.support_recall == 0.0);
    CHECK(rep.support_precision == 1.0);  // no predicted positives
}

TEST_CASE("nuclear norm of a psd estimate equals its trace") {
    testutil::Rng rng(51);
    Mat truth = make_truth(Toeplitz{0.3}, 6, 1);
    Instance inst = sample_instance(truth, ProblemKind::Covariance, 100, 3);
    Mat est = testutil::random_spd(rng, 6, 0.2, 2.0);
    EvalReport rep = evaluate(est, inst, RunTrace{});
    CHECK(rep.nuclear == doctest::Approx(est.trace()).epsilon(1e-8));
}

TEST_CASE("frobenius error obeys the triangle sanity bound") {
    testutil::Rng rng(52);
    Mat truth = make_truth(Toeplitz{0.3}, 5, 1);
    Instance inst = sample_instance(truth, ProblemKind::Covariance, 100, 3);
    for (int trial = 0; trial < 20; ++trial) {
        Mat a = testutil::random_symmetric(rng, 5);
        Mat b = testutil::random_symmetric(rng, 5);
        EvalReport ra = evaluate(a, inst, RunTrace{});
        EvalReport rb = evaluate(b, inst, RunTrace{});
        CHECK(std::abs(ra.frob_err - rb.frob_err) <= (a - b).norm() + 1e-12);
    }
    CHECK_THROWS_AS(evaluate(Mat::Zero(3, 3), inst, RunTrace{}), DimMismatch);
}

}  // TEST_SUITE
