#include "matest/checks.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include "matest/baselines.hpp"
#include "matest/bench.hpp"
#include "matest/generators.hpp"
#include "matest/lbo.hpp"
#include "matest/metrics.hpp"
#include "matest/solvers.hpp"

namespace matest {

namespace {

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

Mat rng_symmetric(CounterRng& rng, Eigen::Index p, double scale = 1.0) {
    Mat a(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double v = scale * rng.gauss();
            a(i, j) = v;
            a(j, i) = v;
        }
    return a;
}

SolveResult tight_ladmm(const SplitProblem& prob, double rho = 1.0, double phi = 1.5) {
    SolverConfig cfg;
    cfg.rho = rho;
    cfg.phi1 = cfg.phi2 = phi;
    cfg.max_iter = 300000;
    cfg.tol_primal = cfg.tol_dual = 1e-12;
    cfg.tol_gap = 1e-13;
    cfg.record_every = 20000;
    return ladmm_unified(prob, cfg, default_init(prob));
}

SplitProblem sampled_cov_problem(const StructureSpec& spec, Eigen::Index p, int n,
                                 std::uint64_t seed, double lambda = -1) {
    Mat truth = make_truth(spec, p, mix_seed(seed, 11));
    Instance inst = sample_instance(truth, structure_kind(spec), n, mix_seed(seed, 13));
    return make_problem(inst.kind, inst.sample_cov, n, lambda);
}

// --- criterion 1: prox operators vs projected-gradient minimization --------

Mat pg_cov_oracle(const Mat& m, const Mat& s, double t, double eps) {
    Mat x = psd_floor_project(m, eps);
    const double step = 1.0 / (1.0 + 1.0 / t);
    for (int it = 0; it < 200000; ++it) {
        Mat grad = (x - s) + (x - m) / t;
        Mat xn = psd_floor_project((x - step * grad).eval(), eps);
        if ((xn - x).norm() / step <= 1e-11) return xn;
        x = std::move(xn);
    }
    return x;
}

Mat pg_logdet_oracle(const Mat& m, const Mat& s, double t, double eps) {
    auto objective = [&](const Mat& x, double logdet) {
        return inner(s, x) - logdet + (x - m).squaredNorm() / (2.0 * t);
    };
    EigenDecomp ed = sym_eig(psd_floor_project(m, eps));
    Mat x = ed.q * ed.d.cwiseMax(eps).asDiagonal() * ed.q.transpose();
    for (int it = 0; it < 200000; ++it) {
        EigenDecomp cur = sym_eig(x);
        Vec d = cur.d.cwiseMax(eps);
        Mat xinv = cur.q * d.cwiseInverse().asDiagonal() * cur.q.transpose();
        const double fcur = objective(x, d.array().log().sum());
        const double lip = 1.0 / (d.minCoeff() * d.minCoeff()) + 1.0 / t;
        double step = 1.0 / lip;
        Mat grad = s - xinv + (x - m) / t;
        for (;;) {
            EigenDecomp cand = sym_eig((x - step * grad).eval());
            Vec dc = cand.d.cwiseMax(eps);
            Mat xn = cand.q * dc.asDiagonal() * cand.q.transpose();
            if ((xn - x).norm() / step <= 1e-11) return xn;
            if (objective(xn, dc.array().log().sum()) <= fcur + 1e-14 * (1.0 + std::abs(fcur))) {
                x = std::move(xn);
                break;
            }
            step *= 0.5;
            if (step < 1e-15) return x;  // progress below the noise floor
        }
    }
    return x;
}

CheckResult check_prox_oracle() {
    CounterRng rng(101);
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index p = 2 + Eigen::Index(rng.next_u64() % 7);  // 2..8
        const double t = rng.uniform(0.2, 1.5);
        const double eps = 1e-4;
        Mat s = rng_symmetric(rng, p);
        Mat m = rng_symmetric(rng, p);
        if (trial % 2 == 0) {
            Mat got = prox_cov_f(m, s, t, eps);
            worst = std::max(worst, (got - pg_cov_oracle(m, s, t, eps)).norm());
        } else {
            Mat got = prox_logdet_g(m, s, t, eps);
            worst = std::max(worst, (got - pg_logdet_oracle(m, s, t, eps)).norm());
        }
    }
    return CheckResult{"prox-oracle", worst <= 1e-8,
                       fmt("max deviation %.3e (tol 1e-8) over 50 instances", worst)};
}

// --- criterion 2: canonical reduction --------------------------------------

CheckResult check_reduction() {
    double worst = 0;
    const double rho = 1.0, phi1 = 1.5;
    for (ProblemKind kind : {ProblemKind::Covariance, ProblemKind::Precision}) {
        SplitProblem prob =
            kind == ProblemKind::Covariance
                ? sampled_cov_problem(Toeplitz{0.5}, 20, 500, 21)
                : sampled_cov_problem(Banded{2}, 20, 500, 22);
        StageParams sp = canonical_schedule(100, rho, phi1);
        IterateState lbo = default_init(prob);
        IterateState cls = default_init(prob);
        for (int k = 0; k < 100; ++k) {
            lbo = lbo_step(prob, lbo, sp, k);
            detail::ladmm_step(prob, rho, phi1, 1.0, cls);
            worst = std::max({worst, (lbo.x - cls.x).norm(), (lbo.y - cls.y).norm(),
                              (lbo.v - cls.v).norm()});
        }
    }
    return CheckResult{"reduction", worst <= 1e-10,
                       fmt("max per-stage deviation %.3e (tol 1e-10), 100 stages, p=20", worst)};
}

// --- criterion 3: one-step Lyapunov decrease --------------------------------

CheckResult check_lyapunov() {
    double worst_violation = -1e300;
    int unconverged = 0;
    const double varrhos[4] = {0.1, 0.3, 0.5, 0.7};
    for (int inst = 0; inst < 20; ++inst) {
        SplitProblem prob =
            sampled_cov_problem(Toeplitz{varrhos[inst % 4]}, 15, 500, 300 + inst);
        IterateState ref = tight_ladmm(prob).state;
        for (double phi : {1.1, 1.5, 3.0}) {
            const double rho = 1.0;
            IterateState st = default_init(prob);
            double energy = detail::lyapunov_energy(st, ref, phi, rho);
            bool converged = false;
            for (int k = 0; k < 5000; ++k) {
                IterateState prev = st;
                detail::ladmm_step(prob, rho, phi, phi, st);
                const double next = detail::lyapunov_energy(st, ref, phi, rho);
                const double drop = (phi - 1) * (st.x - prev.x).squaredNorm() +
                                    (phi - 1) * (st.y - prev.y).squaredNorm() +
                                    ((st.v - prev.v) / rho + st.y - prev.y).squaredNorm();
                worst_violation = std::max(worst_violation, next - (energy - drop));
                energy = next;
                if ((st.x - st.y).norm() <= 1e-6) {
                    converged = true;
                    break;
                }
            }
            if (!converged) ++unconverged;
        }
    }
    const bool pass = worst_violation <= 1e-7 && unconverged == 0;
    return CheckResult{"lyapunov", pass,
                       fmt("max one-step violation %.3e (slack 1e-7), unconverged runs %g",
                           worst_violation, double(unconverged))};
}

// --- criterion 4: cross-solver consensus ------------------------------------

CheckResult check_consensus() {
    std::ostringstream detail_out;
    bool pass = true;

    struct CovCase {
        StructureSpec spec;
        Eigen::Index p;
    };
    const CovCase cov_cases[10] = {
        {Toeplitz{0.1}, 25}, {Toeplitz{0.5}, 50},  {Toeplitz{0.9}, 25}, {Factor{3, 1.0, 0.04}, 50},
        {SparseRandom{0.5}, 25}, {Block{10}, 50},  {Toeplitz{0.5}, 100}, {Factor{5, 1.0, 0.04}, 25},
        {SparseRandom{0.3}, 50}, {Block{20}, 100}};
    double worst_cov = 0;
    int composite_excluded = 0;
    for (int i = 0; i < 10; ++i) {
        SplitProblem prob = sampled_cov_problem(cov_cases[i].spec, cov_cases[i].p, 500, 400 + i);
        SolverConfig cfg;
        cfg.max_iter = 100000;
        cfg.tol_primal = cfg.tol_dual = 1e-10;
        cfg.tol_gap = 1e-11;
        cfg.record_every = 100;
        Mat ref = ladmm_unified(prob, cfg, default_init(prob)).state.x;
        Mat admm = admm_covariance(prob, cfg, default_init(prob)).state.x;

        BaselineConfig bc;
        bc.max_iter = 20000;
        bc.tol_gap = 1e-11;
        bc.record_every = 50;
        BaselineResult tosa = tosa_covariance(prob, bc, default_init(prob).x);
        BaselineConfig half = bc;
        half.step = 0.5;
        BaselineResult pfbs = pfbs_covariance(prob, half, default_init(prob).x);
        BaselineResult fista = fista_covariance(prob, half, default_init(prob).x);

        const bool floor_inactive = min_eigenvalue(ref) > prob.eps * 2;
        const double d_admm = (admm - ref).norm();
        const double d_tosa = (tosa.estimate - ref).norm();
        worst_cov = std::max({worst_cov, d_admm, d_tosa});
        if (d_admm > 1e-5 || d_tosa > 1e-5) pass = false;
        // PFBS/FISTA count only where their composite prox is exact (floor
        // inactive) and they reached the gap certificate; at a binding floor
        // they settle on a biased fixed point and stay at max_iter.
        for (const BaselineResult* b : {&pfbs, &fista}) {
            if (b->trace.status != SolveStatus::GapConverged) {
                ++composite_excluded;
                continue;
            }
            const double dev = (b->estimate - ref).norm();
            const double tol = floor_inactive ? 1e-5 : 1e-3;
            if (dev > tol) pass = false;
            if (floor_inactive) worst_cov = std::max(worst_cov, dev);
        }
    }
    detail_out << fmt("cov max dev %.3e (tol 1e-5), %g composite-prox runs excluded", worst_cov,
                      double(composite_excluded));

    struct PrecCase {
        StructureSpec spec;
        Eigen::Index p;
    };
    const PrecCase prec_cases[10] = {{Banded{2}, 25}, {Banded{2}, 49}, {Banded{2}, 100},
                                     {Banded{4}, 25}, {Banded{4}, 49}, {Banded{4}, 100},
                                     {Grid{5}, 25},   {Grid{7}, 49},   {Grid{10}, 100},
                                     {Banded{2}, 36}};
    double worst_prec = 0;
    for (int i = 0; i < 10; ++i) {
        SplitProblem prob =
            sampled_cov_problem(prec_cases[i].spec, prec_cases[i].p, 500, 500 + i);
        SolverConfig cfg;
        cfg.max_iter = 100000;
        cfg.tol_primal = cfg.tol_dual = 1e-10;
        cfg.tol_gap = 1e-10;
        cfg.record_every = 20;
        Mat ref = ladmm_unified(prob, cfg, default_init(prob)).state.x;

        BaselineConfig bc;
        bc.max_iter = 20000;
        bc.tol_gap = 1e-10;
        bc.record_every = 20;
        Mat pg = proxgrad_precision(prob, bc, default_init(prob).x).estimate;
        Mat spg = spg_precision(prob, bc, default_init(prob).x).estimate;
        const double d_pg = (pg - ref).norm();
        const double d_spg = (spg - ref).norm();
        worst_prec = std::max({worst_prec, d_pg, d_spg});
        if (d_pg > 1e-4 || d_spg > 1e-4) pass = false;
    }
    detail_out << fmt("; prec max dev %.3e (tol 1e-4)", worst_prec);
    return CheckResult{"consensus", pass, detail_out.str()};
}

// --- criterion 5: KKT certification of precision solves ---------------------

CheckResult check_kkt() {
    double worst = 0;
    const StructureSpec specs[3] = {Banded{2}, Banded{4}, Grid{6}};
    const Eigen::Index ps[3] = {25, 36, 36};
    for (int i = 0; i < 3; ++i) {
        SplitProblem prob = sampled_cov_problem(specs[i], ps[i], 500, 600 + i);
        SolverConfig cfg;
        cfg.max_iter = 200000;
        cfg.tol_primal = cfg.tol_dual = 1e-9;
        cfg.tol_gap = 1e-12;
        cfg.record_every = 100;
        SolveResult res = ladmm_unified(prob, cfg, default_init(prob));
        Mat theta = res.state.x;
        EigenDecomp ed = sym_eig(theta);
        Mat grad = prob.s - ed.q * ed.d.cwiseInverse().asDiagonal() * ed.q.transpose();
        for (Eigen::Index c = 0; c < theta.cols(); ++c)
            for (Eigen::Index r = 0; r < theta.rows(); ++r) {
                double viol;
                if (r != c && std::abs(theta(r, c)) > 1e-6)
                    viol = std::abs(grad(r, c) + prob.lambda * (theta(r, c) > 0 ? 1.0 : -1.0));
                else
                    viol = std::max(0.0, std::abs(grad(r, c)) - prob.lambda);
                worst = std::max(worst, viol);
            }
    }
    return CheckResult{"kkt", worst <= 1e-4,
                       fmt("max entrywise stationarity violation %.3e (tol 1e-4)", worst)};
}

// --- criterion 6: contraction inequality and Hk monotonicity ----------------

StageParams decay_band_schedule(int k_stages, double rho, double phi1, double spread) {
    StageParams sp;
    for (int k = 0; k < k_stages; ++k) {
        const double bump = 1.0 + spread / double((k + 1) * (k + 1));
        const double beta = bump / rho;
        sp.stages.push_back(Stage{StageCoef::scalar(bump / (rho * phi1)),
                                  StageCoef::scalar(beta), StageCoef::scalar(1.0 / beta)});
    }
    return sp;
}

CheckResult check_contraction_monotonicity() {
    double worst_contraction = -1e300;
    double worst_drop = -1e300;
    CounterRng rng(700);
    for (int run = 0; run < 20; ++run) {
        SplitProblem prob =
            sampled_cov_problem(Toeplitz{0.2 + 0.03 * run}, 15, 500, 700 + run);
        IterateState ref = tight_ladmm(prob).state;
        StageParams sp = decay_band_schedule(40, 1.0, 1.5, rng.uniform(0.1, 0.6));
        IterateState st = default_init(prob);
        for (int k = 0; k < sp.k_stages(); ++k) {
            IterateState next = lbo_step(prob, st, sp, k);
            // The contraction lemma uses V_k in dG(Y_k), which the Y-prox
            // optimality guarantees for every generated iterate but not for
            // the arbitrary initial triple; stage 0 is therefore skipped.
            if (k >= 1) {
                MetricHk h = MetricHk::at(sp, k, prob.dim());
                const double lhs = h.squared_norm(triple_diff(st, ref));
                const double rhs = h.squared_norm(triple_diff(next, ref)) +
                                   h.squared_norm(triple_diff(st, next));
                worst_contraction = std::max(worst_contraction, rhs - lhs);
            }
            if (k >= 5)
                worst_drop = std::max(worst_drop, hk_dist_drop(sp, k, st, next, ref));
            st = std::move(next);
        }
    }
    const bool pass = worst_contraction <= 1e-7 && worst_drop <= 1e-7;
    return CheckResult{
        "contraction", pass,
        fmt("max contraction violation %.3e, max post-burn-in distance rise %.3e (slack 1e-7)",
            worst_contraction, worst_drop)};
}

// --- criterion 7: one-step superiority existence -----------------------------

CheckResult check_superiority() {
    SolverConfig cfg;
    cfg.rho = 0.5;
    int successes = 0, trials = 0;
    CounterRng rng(800);
    for (int inst = 0; inst < 5; ++inst) {
        SplitProblem prob = sampled_cov_problem(Toeplitz{0.3 + 0.1 * inst}, 5, 500, 800 + inst);
        IterateState ref = tight_ladmm(prob, cfg.rho, 1.5).state;
        for (int trial = 0; trial < 20; ++trial) {
            IterateState st;
            st.x = psd_floor_project((ref.x + rng_symmetric(rng, 5, 0.4)).eval(), prob.eps);
            st.y = ref.y + rng_symmetric(rng, 5, 0.4);
            st.v = ref.v + rng_symmetric(rng, 5, 0.4);
            ++trials;
            if (superiority_search(prob, st, cfg, 64, ref, mix_seed(900, trial)).has_value())
                ++successes;
        }
    }
    const double rate = double(successes) / double(trials);
    return CheckResult{"superiority", rate >= 0.9,
                       fmt("success rate %.2f over %g random states (need 0.90)", rate,
                           double(trials))};
}

// --- criterion 8: training efficacy ------------------------------------------

double mean_gap_after_stages(const std::vector<SplitProblem>& batch, const StageParams& sp) {
    double total = 0;
    for (const auto& prob : batch) {
        IterateState st = default_init(prob);
        for (int k = 0; k < sp.k_stages(); ++k) st = lbo_step(prob, st, sp, k);
        total += duality_gap(prob, st.x, dual_feasible_from_iterate(prob, st));
    }
    return total / double(batch.size());
}

CheckResult check_training() {
    std::vector<SplitProblem> train, heldout;
    for (int i = 0; i < 16; ++i) {
        SplitProblem prob = sampled_cov_problem(Toeplitz{0.5}, 50, 500, 1000 + i);
        (i < 8 ? train : heldout).push_back(std::move(prob));
    }
    TrainConfig cfg;
    cfg.instance_batch = train;
    cfg.k_stages = 10;
    cfg.epochs = 80;
    cfg.lr = 0.1;
    StageParams trained = train_schedule(cfg);
    StageParams canonical = canonical_schedule(cfg.k_stages, cfg.rho, cfg.phi1);
    const double gap_trained = mean_gap_after_stages(heldout, trained);
    const double gap_canonical = mean_gap_after_stages(heldout, canonical);
    const bool pass = gap_trained <= 0.9 * gap_canonical;
    return CheckResult{"training", pass,
                       fmt("held-out mean gap trained %.4e vs canonical %.4e (need <= 0.9x)",
                           gap_trained, gap_canonical)};
}

// --- criterion 9: entrywise concentration scaling ----------------------------

CheckResult check_concentration() {
    auto rows = concentration_experiment(Toeplitz{0.5}, {25, 100, 400}, {100, 400, 1600}, 50, 42);
    double lo = 1e300, hi = 0;
    for (const auto& row : rows) {
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
    }
    return CheckResult{"concentration", hi / lo <= 3.0,
                       fmt("ratio spread %.2f (max/min over 3x3 grid, need <= 3)", hi / lo)};
}

// --- criterion 10: statistically motivated early stopping --------------------

CheckResult check_earlystop() {
    const Eigen::Index p = 100;
    Mat truth = make_truth(Banded{2}, p, mix_seed(1100, 11));
    Instance inst = sample_instance(truth, ProblemKind::Precision, 500, mix_seed(1100, 13));
    SplitProblem prob = make_problem(inst.kind, inst.sample_cov, inst.n);

    int support = 0;
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < p; ++i)
            if (i != j && truth(i, j) != 0.0) ++support;

    SolverConfig cfg;
    cfg.max_iter = 30000;
    cfg.tol_primal = cfg.tol_dual = 1e-10;
    cfg.tol_gap = 1e-11;
    cfg.record_every = 5;
    SolveResult full = ladmm_unified(prob, cfg, default_init(prob));
    const double full_err = (full.state.x - truth).norm();

    // c = 0.3 puts the threshold below the initial gap, so the stop exercises
    // the trajectory rather than firing on the starting point.
    const double c = 0.3;
    auto idx = early_stop_statistical(full.trace, prob, support, c);
    if (!idx.has_value())
        return CheckResult{"earlystop", false, "gap threshold never crossed"};
    // Replay to the stopping index to recover that iterate.
    SolverConfig replay = cfg;
    replay.max_iter = std::max(1, *idx);
    replay.tol_primal = replay.tol_dual = 1e-300;
    replay.tol_gap = 1e-300;
    replay.record_every = replay.max_iter;
    SolveResult stopped = ladmm_unified(prob, replay, default_init(prob));
    const double stop_err = (stopped.state.x - truth).norm();
    const bool pass = *idx > 0 && stop_err <= 2.0 * full_err;
    return CheckResult{"earlystop", pass,
                       fmt("stopped at iter %g with error %.4f vs converged %.4f (need <= 2x)",
                           double(*idx), stop_err, full_err)};
}

// --- criterion 11: end-to-end determinism ------------------------------------

CheckResult check_determinism() {
    ExperimentPlan plan;
    const char* candidates[] = {"plans/desk.json", "../plans/desk.json"};
    bool loaded = false;
    for (const char* cand : candidates) {
        if (std::filesystem::exists(cand)) {
            plan = load_plan(cand);
            loaded = true;
            break;
        }
    }
    if (!loaded) {
        // Fall back to the same desk grid the shipped plan describes.
        plan.name = "desk";
        plan.structures = {Toeplitz{0.1}, Toeplitz{0.5}, Toeplitz{0.9}, Banded{2}, Grid{7}};
        plan.p_grid = {49, 100};
        plan.n = 500;
        plan.solvers = {SolverId::Admm, SolverId::Ladmm, SolverId::Lbo,
                        SolverId::Tosa, SolverId::Pfbs, SolverId::Fista,
                        SolverId::Proxgrad, SolverId::Spg};
        plan.seeds = {1};
        plan.jobs = 4;
    }
    const auto tmp = std::filesystem::temp_directory_path();
    ExperimentPlan a = plan, b = plan;
    a.output_dir = tmp / "matest_det_a";
    b.output_dir = tmp / "matest_det_b";
    std::filesystem::remove_all(a.output_dir);
    std::filesystem::remove_all(b.output_dir);

    const char* prev = std::getenv("MATEST_SEED");
    setenv("MATEST_SEED", "7", 1);
    auto ra = read_results_csv(run_plan(a));
    auto rb = read_results_csv(run_plan(b));
    if (prev)
        setenv("MATEST_SEED", prev, 1);
    else
        unsetenv("MATEST_SEED");

    if (ra.size() != rb.size() || ra.empty())
        return CheckResult{"determinism", false, "row count mismatch"};
    int mismatches = 0;
    for (size_t i = 0; i < ra.size(); ++i) {
        const auto& x = ra[i];
        const auto& y = rb[i];
        const bool same = x.structure == y.structure && x.param == y.param && x.p == y.p &&
                          x.n == y.n && x.seed == y.seed && x.solver == y.solver &&
                          x.iters == y.iters && x.frob_err == y.frob_err &&
                          x.nuclear == y.nuclear && x.gap_final == y.gap_final &&
                          x.status == y.status;
        if (!same) ++mismatches;
    }
    return CheckResult{"determinism", mismatches == 0,
                       fmt("%g rows compared, %g non-timing mismatches", double(ra.size()),
                           double(mismatches))};
}

using CheckFn = CheckResult (*)();

const std::vector<std::pair<std::string, CheckFn>>& registry() {
    static const std::vector<std::pair<std::string, CheckFn>> entries = {
        {"prox-oracle", check_prox_oracle},
        {"reduction", check_reduction},
        {"lyapunov", check_lyapunov},
        {"consensus", check_consensus},
        {"kkt", check_kkt},
        {"contraction", check_contraction_monotonicity},
        {"superiority", check_superiority},
        {"training", check_training},
        {"concentration", check_concentration},
        {"earlystop", check_earlystop},
        {"determinism", check_determinism},
    };
    return entries;
}

}  // namespace

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, fn] : registry()) out.push_back(name);
        return out;
    }();
    return names;
}

CheckResult run_check(const std::string& name) {
    for (const auto& [key, fn] : registry()) {
        if (key != name) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult res = fn();
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return res;
    }
    throw InvalidArgument("unknown check suite: " + name);
}

std::vector<CheckResult> run_all_checks(bool print_progress) {
    std::vector<CheckResult> out;
    for (const auto& name : check_names()) {
        CheckResult res = run_check(name);
        if (print_progress)
            std::fprintf(stderr, "%s %s (%.1fs) %s\n", res.pass ? "PASS" : "FAIL",
                         res.name.c_str(), res.seconds, res.detail.c_str());
        out.push_back(std::move(res));
    }
    return out;
}

}  // namespace matest
