#include <doctest.h>

#include <cmath>

#include "matest/lbo.hpp"
#include "test_util.hpp"

using namespace matest;

namespace {

SolveResult long_reference(const SplitProblem& prob) {
    SolverConfig cfg;
    cfg.max_iter = 200000;
    cfg.tol_primal = cfg.tol_dual = 1e-12;
    cfg.tol_gap = 1e-13;
    cfg.record_every = 10000;
    return ladmm_unified(prob, cfg, default_init(prob));
}

// Schedule satisfying the decay band: stage k sits at canonical values scaled
// by 1 + spread/(k+1)^2, so consecutive metrics differ by O(1/(k+1)^2).
StageParams decay_band_schedule(int k_stages, double rho, double phi1, double spread) {
    StageParams sp;
    for (int k = 0; k < k_stages; ++k) {
        const double bump = 1.0 + spread / double((k + 1) * (k + 1));
        const double beta = bump / rho;
        sp.stages.push_back(Stage{StageCoef::scalar(bump / (rho * phi1)),
                                  StageCoef::scalar(beta),
                                  StageCoef::scalar(1.0 / beta)});
    }
    return sp;
}

}  // namespace

TEST_SUITE("lbo") {

TEST_CASE("canonical schedule is the classical iteration, both kinds") {
    testutil::Rng rng(40);
    const double rho = 1.0, phi1 = 1.5;
    for (ProblemKind kind : {ProblemKind::Covariance, ProblemKind::Precision}) {
        Mat s = testutil::random_spd(rng, 8, 0.4, 2.0);
        SplitProblem prob = make_problem(kind, s, 500, 0.2);
        StageParams sp = canonical_schedule(30, rho, phi1);
        sp.validate();
        IterateState lbo = default_init(prob);
        IterateState cls = default_init(prob);
        for (int k = 0; k < sp.k_stages(); ++k) {
            lbo = lbo_step(prob, lbo, sp, k);
            detail::ladmm_step(prob, rho, phi1, 1.0, cls);  // phi2 = 1
            CHECK((lbo.x - cls.x).norm() <= 1e-10);
            CHECK((lbo.y - cls.y).norm() <= 1e-10);
            CHECK((lbo.v - cls.v).norm() <= 1e-10);
        }
    }
}

TEST_CASE("a KKT triple is absorbing") {
    Mat s(2, 2);
    s << 1, 0.5, 0.5, 1;
    SplitProblem prob = make_problem(ProblemKind::Covariance, s, 500, 0.3);
    Mat x(2, 2);
    x << 1, 0.2, 0.2, 1;
    Mat v(2, 2);
    v << 0, 0.3, 0.3, 0;
    IterateState kkt{x, x, v};
    StageParams sp = canonical_schedule(1);
    IterateState out = lbo_step(prob, kkt, sp, 0);
    CHECK((out.x - x).norm() <= 1e-9);
    CHECK((out.y - x).norm() <= 1e-9);
    CHECK((out.v - v).norm() <= 1e-9);
}

TEST_CASE("scalar stage matches hand arithmetic") {
    // p = 1, S = 2, lambda = 0, alpha = 1/2, beta = 1, start (x, y, v) = (1, 1/2, 1/4):
    //   mX = 1 - 1/2 (1/4 + (1 - 1/2)) = 5/8
    //   X+ = (1/2 * 2 + 5/8) / (3/2) = 13/12
    //   Y+ = X+ + 1 * 1/4 = 4/3
    //   V+ = 1/4 + (13/12 - 16/12) = 0
    SplitProblem prob = make_problem(ProblemKind::Covariance, Mat::Constant(1, 1, 2.0), 500, 0.0);
    StageParams sp;
    sp.stages.push_back(
        Stage{StageCoef::scalar(0.5), StageCoef::scalar(1.0), StageCoef::scalar(1.0)});
    IterateState st{Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 0.5),
                    Mat::Constant(1, 1, 0.25)};
    IterateState out = lbo_step(prob, st, sp, 0);
    CHECK(out.x(0, 0) == doctest::Approx(13.0 / 12.0).epsilon(1e-12));
    CHECK(out.y(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(out.v(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("hk_norm formula and positivity") {
    StageParams sp;
    sp.stages.push_back(
        Stage{StageCoef::scalar(0.5), StageCoef::scalar(1.0), StageCoef::scalar(1.0)});
    IterateState zero{Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Zero(2, 2)};
    CHECK(hk_norm(sp, 0, zero) == 0.0);

    // Blocks (1/alpha - 1/beta, 1/beta, beta) = (1, 1, 1) at alpha = 1/2, beta = 1.
    IterateState omega{Mat::Constant(1, 1, 3.0), Mat::Constant(1, 1, 4.0),
                       Mat::Constant(1, 1, 5.0)};
    CHECK(hk_norm(sp, 0, omega) == doctest::Approx(std::sqrt(9.0 + 16.0 + 25.0)));

    StageParams bad;
    bad.mode = StageMode::General;
    bad.stages.push_back(
        Stage{StageCoef::scalar(2.0), StageCoef::scalar(1.0), StageCoef::scalar(1.0)});
    CHECK_THROWS_AS(hk_norm(bad, 0, omega), InvalidMetric);
}

TEST_CASE("contraction inequality along schedules") {
    testutil::Rng rng(41);
    Mat s = testutil::random_spd(rng, 6, 0.4, 2.0);
    SplitProblem prob = make_problem(ProblemKind::Covariance, s, 500, 0.2);
    IterateState ref = long_reference(prob).state;
    StageParams sp = decay_band_schedule(40, 1.0, 1.5, 0.4);
    sp.validate();
    IterateState st = default_init(prob);
    const Eigen::Index p = prob.dim();
    for (int k = 0; k < sp.k_stages(); ++k) {
        IterateState next = lbo_step(prob, st, sp, k);
        // Stage 0 is exempt: the arbitrary init need not satisfy V in dG(Y),
        // which the inequality's derivation uses for the current iterate.
        if (k >= 1) {
            MetricHk h = MetricHk::at(sp, k, p);
            const double lhs = h.squared_norm(triple_diff(st, ref));
            const double rhs = h.squared_norm(triple_diff(next, ref)) +
                               h.squared_norm(triple_diff(st, next));
            CHECK(lhs >= rhs - 1e-7);
        }
        st = std::move(next);
    }
}

TEST_CASE("hk distance is monotone after burn-in for decay-band schedules") {
    testutil::Rng rng(42);
    Mat s = testutil::random_spd(rng, 6, 0.4, 2.0);
    SplitProblem prob = make_problem(ProblemKind::Covariance, s, 500, 0.15);
    IterateState ref = long_reference(prob).state;
    StageParams sp = decay_band_schedule(40, 1.0, 1.5, 0.3);
    IterateState st = default_init(prob);
    for (int k = 0; k < sp.k_stages(); ++k) {
        IterateState next = lbo_step(prob, st, sp, k);
        if (k >= 5) CHECK(hk_dist_drop(sp, k, st, next, ref) <= 1e-7);
        st = std::move(next);
    }
}

TEST_CASE("lbo_solve with no stages is the classical solver") {
    testutil::Rng rng(43);
    Mat s = testutil::random_spd(rng, 6, 0.4, 2.0);
    SplitProblem prob = make_problem(ProblemKind::Covariance, s, 500, 0.2);
    StageParams empty;
    SolverConfig tail;
    tail.max_iter = 300;
    SolveResult a = lbo_solve(prob, empty, default_init(prob), tail);
    SolveResult b = ladmm_unified(prob, tail, default_init(prob));
    CHECK((a.state.x - b.state.x).norm() == 0.0);
    CHECK((a.state.v - b.state.v).norm() == 0.0);
}

TEST_CASE("lbo_solve trace marks exactly K learned rows") {
    testutil::Rng rng(44);
    Mat s = testutil::random_spd(rng, 5, 0.4, 2.0);
    SplitProblem prob = make_problem(ProblemKind::Covariance, s, 500, 0.2);
    StageParams sp = canonical_schedule(7);
    SolverConfig tail;
    tail.max_iter = 50;
    SolveResult res = lbo_solve(prob, sp, default_init(prob), tail);
    int learned = 0, tail_rows = 0;
    for (const auto& row : res.trace.rows) {
        if (row.phase == Phase::Learned) ++learned;
        if (row.phase == Phase::Tail) ++tail_rows;
    }
    CHECK(learned == 7);
    CHECK(tail_rows >= 1);

    // Tail disabled: the run is exactly the K stages.
    SolverConfig no_tail;
    no_tail.max_iter = 0;
    res = lbo_solve(prob, sp, default_init(prob), no_tail);
    CHECK(res.trace.iters == 7);
}

TEST_CASE("train_schedule with zero epochs returns the canonical initialization") {
    testutil::Rng rng(45);
    TrainConfig cfg;
    cfg.instance_batch.push_back(
        make_problem(ProblemKind::Covariance, testutil::random_spd(rng, 5, 0.4, 2.0), 500, 0.2));
    cfg.k_stages = 4;
    cfg.epochs = 0;
    StageParams sp = train_schedule(cfg);
    REQUIRE(sp.k_stages() == 4);
    for (const auto& st : sp.stages) {
        CHECK(st.alpha.s == doctest::Approx(1.0 / 1.5));
        CHECK(st.beta.s == doctest::Approx(1.0));
        CHECK(st.gamma.s == doctest::Approx(1.0));
    }
}

TEST_CASE("trained scalar stage is optimal on a 1-d grid") {
    // Single scalar precision instance, one stage. Starting at the default
    // init (theta = 1, V = 0) the multiplier never moves, so the one-stage
    // loss depends on alpha alone: a genuinely 1-d landscape. The trainer's
    // alpha must match a 200-point grid scan within grid resolution.
    SplitProblem prob = make_problem(ProblemKind::Precision, Mat::Constant(1, 1, 2.0), 500, 0.0);
    TrainConfig cfg;
    cfg.instance_batch.push_back(prob);
    cfg.k_stages = 1;
    cfg.epochs = 300;
    cfg.lr = 0.1;
    StageParams got = train_schedule(cfg);
    const double beta = got.stages[0].beta.s;
    const double alpha_got = got.stages[0].alpha.s;

    auto loss_at = [&](double alpha) {
        StageParams sp;
        sp.stages.push_back(Stage{StageCoef::scalar(alpha), StageCoef::scalar(beta),
                                  StageCoef::scalar(1.0 / beta)});
        return detail::schedule_loss(cfg.instance_batch, sp, {});
    };
    double best_alpha = cfg.delta;
    double best_loss = loss_at(best_alpha);
    const double hi = beta - cfg.delta;
    const double step = (hi - cfg.delta) / 199.0;
    for (int i = 0; i < 200; ++i) {
        const double a = cfg.delta + step * i;
        const double l = loss_at(a);
        if (l < best_loss) {
            best_loss = l;
            best_alpha = a;
        }
    }
    CHECK(loss_at(alpha_got) <= best_loss + 1e-12);
    CHECK(std::abs(alpha_got - best_alpha) <= 2 * step);
}

TEST_CASE("training lowers the unrolled loss on a small batch") {
    testutil::Rng rng(46);
    TrainConfig cfg;
    for (int i = 0; i < 4; ++i)
        cfg.instance_batch.push_back(make_problem(
            ProblemKind::Covariance, testutil::random_spd(rng, 10, 0.4, 2.0), 500, 0.25));
    cfg.k_stages = 3;
    cfg.epochs = 40;
    cfg.lr = 0.1;
    StageParams initial = canonical_schedule(cfg.k_stages, cfg.rho, cfg.phi1);
    const double before = detail::schedule_loss(cfg.instance_batch, initial, {});
    StageParams trained = train_schedule(cfg);
    trained.validate();
    const double after = detail::schedule_loss(cfg.instance_batch, trained, {});
    CHECK(after <= before);
    CHECK(after < 0.9 * before);  // this batch trains easily
}

TEST_CASE("superiority search yields nothing at a KKT point") {
    Mat s(2, 2);
    s << 1, 0.5, 0.5, 1;
    SplitProblem prob = make_problem(ProblemKind::Covariance, s, 500, 0.3);
    Mat x(2, 2);
    x << 1, 0.2, 0.2, 1;
    Mat v(2, 2);
    v << 0, 0.3, 0.3, 0;
    IterateState kkt{x, x, v};
    SolverConfig cfg;
    cfg.rho = 0.5;
    CHECK(!superiority_search(prob, kkt, cfg, 64, kkt, 7).has_value());
}

TEST_CASE("superiority search beats the classical step away from optima") {
    testutil::Rng rng(47);
    Mat s = testutil::random_spd(rng, 5, 0.4, 2.0);
    SplitProblem prob = make_problem(ProblemKind::Covariance, s, 500, 0.2);
    SolverConfig cfg;
    cfg.rho = 0.5;
    SolverConfig refcfg = cfg;
    refcfg.max_iter = 200000;
    refcfg.tol_primal = refcfg.tol_dual = 1e-12;
    refcfg.tol_gap = 1e-13;
    refcfg.record_every = 10000;
    IterateState ref = ladmm_unified(prob, refcfg, default_init(prob)).state;

    IterateState st = default_init(prob);
    st.x += testutil::random_symmetric(rng, 5, 0.3);
    st.x = psd_floor_project(st.x, prob.eps);
    st.v = testutil::random_symmetric(rng, 5, 0.2);
    auto found = superiority_search(prob, st, cfg, 64, ref, 11);
    REQUIRE(found.has_value());

    IterateState tilde = st;
    detail::ladmm_step(prob, cfg.rho, cfg.phi1, cfg.phi2, tilde);
    IterateState hat = lbo_step(prob, st, *found, 0);
    auto dist = [&](const IterateState& a) {
        return std::sqrt((a.x - ref.x).squaredNorm() + (a.y - ref.y).squaredNorm() +
                         (a.v - ref.v).squaredNorm());
    };
    CHECK(dist(hat) < dist(tilde) - 1e-12);

    SolverConfig bad;
    bad.rho = 1.0;
    CHECK_THROWS_AS(superiority_search(prob, st, bad, 8, ref, 1), InvalidArgument);
}

TEST_CASE("stage parameter validation") {
    StageParams sp;
    sp.stages.push_back(
        Stage{StageCoef::scalar(1.0), StageCoef::scalar(0.5), StageCoef::scalar(2.0)});
    CHECK_THROWS_AS(sp.validate(), InvalidArgument);  // alpha >= beta

    StageParams wrong_gamma;
    wrong_gamma.stages.push_back(
        Stage{StageCoef::scalar(0.5), StageCoef::scalar(1.0), StageCoef::scalar(2.0)});
    CHECK_THROWS_AS(wrong_gamma.validate(), InvalidArgument);

    StageParams general;
    general.mode = StageMode::General;
    general.stages.push_back(
        Stage{StageCoef::scalar(1.0), StageCoef::scalar(0.5), StageCoef::scalar(2.0)});
    CHECK_NOTHROW(general.validate());
}

}  // TEST_SUITE
