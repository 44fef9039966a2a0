#pragma once

// Reparameterized LADMM: stage-wise learnable (alpha_k, beta_k, gamma_k)
// schedules driving weighted proximal steps
//   X+ = prox_{alpha,F}(X - alpha.(V + gamma.(X - Y)))
//   Y+ = prox_{beta,G} (Y + beta.(V + gamma.(X+ - Y)))
//   V+ = V + gamma.(X+ - Y+)
// In weighted-prox mode gamma is tied to 1/beta and the stage set is
// S = {(alpha, beta): 0 < alpha < beta}. The canonical choice
// alpha = 1/(rho phi1), beta = 1/rho recovers classical LADMM with phi2 = 1.
//
// Also here: the stage metric H_k with blocks (1/alpha - 1/beta, 1/beta, beta),
// the duality-gap trainer over scalar stage parameters, and the one-step
// superiority search.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "matest/errors.hpp"
#include "matest/problems.hpp"
#include "matest/prox.hpp"
#include "matest/solvers.hpp"
#include "matest/trace.hpp"

namespace matest {

// A per-stage coefficient: positive scalar or entrywise-positive matrix.
struct StageCoef {
    bool is_scalar = true;
    double s = 1.0;
    Mat m;

    static StageCoef scalar(double v) {
        if (!(v > 0)) throw InvalidArgument("StageCoef: value must be positive");
        StageCoef c;
        c.s = v;
        return c;
    }
    static StageCoef matrix(const Mat& v) {
        if (v.minCoeff() <= 0) throw InvalidArgument("StageCoef: entries must be positive");
        StageCoef c;
        c.is_scalar = false;
        c.m = v;
        return c;
    }

    Mat times(const Mat& a) const { return is_scalar ? (s * a).eval() : m.cwiseProduct(a).eval(); }
    StageCoef recip() const {
        StageCoef c;
        c.is_scalar = is_scalar;
        if (is_scalar)
            c.s = 1.0 / s;
        else
            c.m = m.cwiseInverse();
        return c;
    }
    double min_entry() const { return is_scalar ? s : m.minCoeff(); }
    double max_entry() const { return is_scalar ? s : m.maxCoeff(); }
    WeightMat weight(Eigen::Index p) const {
        return is_scalar ? WeightMat::from_scalar(s, p) : WeightMat::from_matrix(m);
    }
    // Entrywise value at (i, j) regardless of representation.
    double at(Eigen::Index i, Eigen::Index j) const { return is_scalar ? s : m(i, j); }
};

struct Stage {
    StageCoef alpha;
    StageCoef beta;
    StageCoef gamma;
};

enum class StageMode { WeightedProx, General };

struct StageParams {
    StageMode mode = StageMode::WeightedProx;
    std::vector<Stage> stages;

    int k_stages() const { return int(stages.size()); }

    // Weighted-prox mode requires 0 < alpha < beta entrywise and gamma = 1/beta;
    // general mode only requires positivity.
    void validate() const {
        for (const auto& st : stages) {
            if (st.alpha.min_entry() <= 0 || st.beta.min_entry() <= 0 ||
                st.gamma.min_entry() <= 0)
                throw InvalidArgument("StageParams: coefficients must be positive");
            if (mode != StageMode::WeightedProx) continue;
            if (st.alpha.is_scalar && st.beta.is_scalar) {
                if (!(st.alpha.s < st.beta.s))
                    throw InvalidArgument("StageParams: requires alpha < beta");
                if (std::abs(st.gamma.s * st.beta.s - 1.0) > 1e-9)
                    throw InvalidArgument("StageParams: gamma must equal 1/beta");
            } else {
                const Eigen::Index p = st.alpha.is_scalar ? st.beta.m.rows() : st.alpha.m.rows();
                for (Eigen::Index j = 0; j < p; ++j)
                    for (Eigen::Index i = 0; i < p; ++i) {
                        if (!(st.alpha.at(i, j) < st.beta.at(i, j)))
                            throw InvalidArgument("StageParams: requires alpha < beta");
                        if (std::abs(st.gamma.at(i, j) * st.beta.at(i, j) - 1.0) > 1e-9)
                            throw InvalidArgument("StageParams: gamma must equal 1/beta");
                    }
            }
        }
    }
};

// The LADMM-equivalent schedule: alpha = 1/(rho phi1), beta = 1/rho, gamma = rho.
inline StageParams canonical_schedule(int k_stages, double rho = 1.0, double phi1 = 1.5) {
    if (!(rho > 0) || !(phi1 > 1))
        throw InvalidArgument("canonical_schedule: need rho > 0 and phi1 > 1");
    StageParams sp;
    sp.stages.assign(size_t(k_stages), Stage{StageCoef::scalar(1.0 / (rho * phi1)),
                                             StageCoef::scalar(1.0 / rho),
                                             StageCoef::scalar(rho)});
    return sp;
}

// One reparameterized stage.
inline IterateState lbo_step(const SplitProblem& prob, const IterateState& st,
                             const StageParams& sp, int k) {
    if (k < 0 || k >= sp.k_stages()) throw InvalidArgument("lbo_step: stage index out of range");
    const Stage& stage = sp.stages[size_t(k)];
    const Eigen::Index p = prob.dim();
    const ProxKind fkind =
        prob.kind == ProblemKind::Covariance ? ProxKind::CovF : ProxKind::LogDetG;

    IterateState out;
    Mat pull = st.v + stage.gamma.times(st.x - st.y);
    out.x = weighted_prox(fkind, (st.x - stage.alpha.times(pull)).eval(), prob.s, prob.lambda,
                          prob.eps, stage.alpha.weight(p));
    Mat push = st.v + stage.gamma.times(out.x - st.y);
    out.y = weighted_prox(ProxKind::L1Off, (st.y + stage.beta.times(push)).eval(), prob.s,
                          prob.lambda, prob.eps, stage.beta.weight(p));
    out.v = st.v + stage.gamma.times(out.x - out.y);
    return out;
}

// Block-diagonal stage metric H_k with entrywise positive blocks
// (1/alpha - 1/beta, 1/beta, beta); ||omega||_{H_k}^2 = <omega, H_k(omega)>.
struct MetricHk {
    Mat wx, wy, wv;

    static MetricHk at(const StageParams& sp, int k, Eigen::Index p) {
        // Indices past the schedule clamp to the final stage.
        if (sp.k_stages() == 0) throw InvalidArgument("MetricHk: empty schedule");
        k = std::clamp(k, 0, sp.k_stages() - 1);
        const Stage& st = sp.stages[size_t(k)];
        MetricHk h;
        h.wx = Mat(p, p);
        h.wy = Mat(p, p);
        h.wv = Mat(p, p);
        for (Eigen::Index j = 0; j < p; ++j)
            for (Eigen::Index i = 0; i < p; ++i) {
                const double a = st.alpha.at(i, j), b = st.beta.at(i, j);
                h.wx(i, j) = 1.0 / a - 1.0 / b;
                h.wy(i, j) = 1.0 / b;
                h.wv(i, j) = b;
                if (!(h.wx(i, j) > 0))
                    throw InvalidMetric("MetricHk: alpha >= beta breaks positivity");
            }
        return h;
    }

    double squared_norm(const IterateState& omega) const {
        return wx.cwiseProduct(omega.x.cwiseAbs2()).sum() +
               wy.cwiseProduct(omega.y.cwiseAbs2()).sum() +
               wv.cwiseProduct(omega.v.cwiseAbs2()).sum();
    }

    // Operator norm of the block-diagonal entrywise metric.
    double norm() const {
        return std::max({wx.maxCoeff(), wy.maxCoeff(), wv.maxCoeff()});
    }
};

inline double hk_norm(const StageParams& sp, int k, const IterateState& omega) {
    return std::sqrt(std::max(0.0, MetricHk::at(sp, k, omega.dim()).squared_norm(omega)));
}

inline IterateState triple_diff(const IterateState& a, const IterateState& b) {
    return IterateState{(a.x - b.x).eval(), (a.y - b.y).eval(), (a.v - b.v).eval()};
}

// dist^2_{H_{k+1}}(omega_{k+1}, ref) - dist^2_{H_k}(omega_k, ref); monotone
// schedules keep this nonpositive for large k.
inline double hk_dist_drop(const StageParams& sp, int k, const IterateState& omega_k,
                           const IterateState& omega_k1, const IterateState& ref) {
    const Eigen::Index p = ref.dim();
    const double cur = MetricHk::at(sp, k, p).squared_norm(triple_diff(omega_k, ref));
    const double next = MetricHk::at(sp, k + 1, p).squared_norm(triple_diff(omega_k1, ref));
    return next - cur;
}

// phi(omega) = (V, -V, Y - X), the monotone-operator part of the KKT system.
inline IterateState phi_map(const IterateState& omega) {
    return IterateState{omega.v, (-omega.v).eval(), (omega.y - omega.x).eval()};
}

// K learned stages followed by a classical LADMM tail (when tail_cfg.max_iter
// is positive). The trace marks learned rows and tail rows.
inline SolveResult lbo_solve(const SplitProblem& prob, const StageParams& sp, IterateState st,
                             const SolverConfig& tail_cfg, const IterateState* ref = nullptr) {
    sp.validate();
    detail::Recorder rec(prob, tail_cfg.tol_gap, tail_cfg.phi1, tail_cfg.rho, ref);
    rec.record(0, st, (st.x - st.y).norm(), std::numeric_limits<double>::quiet_NaN());
    int iter = 0;
    for (int k = 0; k < sp.k_stages(); ++k) {
        IterateState next = lbo_step(prob, st, sp, k);
        const double dual_res = (next.y - st.y).norm() / sp.stages[size_t(k)].beta.max_entry();
        st = std::move(next);
        ++iter;
        rec.record(iter, st, (st.x - st.y).norm(), dual_res, Phase::Learned, false);
    }
    SolveStatus status = SolveStatus::MaxIter;
    if (tail_cfg.max_iter > 0) {
        tail_cfg.validate();
        int k = 0;
        while (k < tail_cfg.max_iter) {
            ++k;
            const double dual_res =
                detail::ladmm_step(prob, tail_cfg.rho, tail_cfg.phi1, tail_cfg.phi2, st);
            const double primal_res = (st.x - st.y).norm();
            const bool due = (k % tail_cfg.record_every == 0) || k == tail_cfg.max_iter;
            const bool resid_ok =
                primal_res <= tail_cfg.tol_primal && dual_res <= tail_cfg.tol_dual;
            if (due || resid_ok) {
                const bool gap_ok = rec.record(iter + k, st, primal_res, dual_res, Phase::Tail);
                if (gap_ok) { status = SolveStatus::GapConverged; break; }
                if (resid_ok) { status = SolveStatus::Converged; break; }
            }
        }
        iter += k;
    }
    return SolveResult{std::move(st), rec.take(status, iter)};
}

struct TrainConfig {
    std::vector<SplitProblem> instance_batch;
    int k_stages = 10;
    std::vector<double> loss_weights;  // per-stage, defaults to all ones
    double lr = 0.05;
    int epochs = 100;
    double fd_step = 1e-4;       // central-difference probe, scaled by 1 + |param|
    double delta = 1e-3;         // margin keeping alpha <= beta - delta and entries >= delta
    double schedule_decay = -1;  // c0 decay band for ||H_{k+1} - H_k||; negative disables
    double rho = 1.0;            // canonical initialization
    double phi1 = 1.5;

    void validate() const {
        if (instance_batch.empty()) throw InvalidArgument("TrainConfig: empty instance batch");
        if (k_stages < 1) throw InvalidArgument("TrainConfig: k_stages must be positive");
        if (!(lr > 0) || !(fd_step > 0) || !(delta > 0))
            throw InvalidArgument("TrainConfig: lr, fd_step, delta must be positive");
        if (!loss_weights.empty() && int(loss_weights.size()) != k_stages)
            throw InvalidArgument("TrainConfig: loss_weights size must match k_stages");
        const auto p0 = instance_batch.front().dim();
        const auto kind0 = instance_batch.front().kind;
        for (const auto& prob : instance_batch)
            if (prob.dim() != p0 || prob.kind != kind0)
                throw InvalidArgument("TrainConfig: batch instances must share p and kind");
    }
};

namespace detail {

// Sum over instances and stages of weighted duality gaps along the unrolled
// schedule. bad_stage reports the first stage producing a non-finite gap.
inline double schedule_loss(const std::vector<SplitProblem>& batch, const StageParams& sp,
                            const std::vector<double>& weights, int* bad_stage = nullptr) {
    double loss = 0;
    for (const auto& prob : batch) {
        IterateState st = default_init(prob);
        for (int k = 0; k < sp.k_stages(); ++k) {
            st = lbo_step(prob, st, sp, k);
            const double w = weights.empty() ? 1.0 : weights[size_t(k)];
            if (w == 0) continue;
            const double gap =
                duality_gap(prob, st.x, dual_feasible_from_iterate(prob, st));
            if (!std::isfinite(gap)) {
                if (bad_stage) *bad_stage = k;
                return std::numeric_limits<double>::quiet_NaN();
            }
            loss += w * gap;
        }
    }
    return loss;
}

// Scalar parameter vector <-> schedule. Layout: alpha_0..alpha_{K-1},
// beta_0..beta_{K-1}; gamma stays tied to 1/beta.
inline StageParams params_to_schedule(const std::vector<double>& theta, int k_stages) {
    StageParams sp;
    sp.stages.reserve(size_t(k_stages));
    for (int k = 0; k < k_stages; ++k) {
        const double a = theta[size_t(k)];
        const double b = theta[size_t(k_stages + k)];
        sp.stages.push_back(
            Stage{StageCoef::scalar(a), StageCoef::scalar(b), StageCoef::scalar(1.0 / b)});
    }
    return sp;
}

// Project onto {delta <= alpha <= beta - delta} stagewise, then clip each
// consecutive stage into the decay band ||H_{k+1} - H_k|| <= c0/(k+1)^2 ||H_{k+1}||.
inline void project_params(std::vector<double>& theta, int k_stages, double delta, double c0) {
    for (int k = 0; k < k_stages; ++k) {
        double& a = theta[size_t(k)];
        double& b = theta[size_t(k_stages + k)];
        a = std::max(a, delta);
        b = std::max(b, 2 * delta);
        if (a > b - delta) {
            const double mid = 0.5 * (a + b);
            a = std::max(mid - 0.5 * delta, delta);
            b = a + delta;
        }
    }
    if (c0 < 0) return;
    auto blocks = [](double a, double b) {
        return std::array<double, 3>{1.0 / a - 1.0 / b, 1.0 / b, b};
    };
    for (int k = 0; k + 1 < k_stages; ++k) {
        const double a0 = theta[size_t(k)], b0 = theta[size_t(k_stages + k)];
        double& a1 = theta[size_t(k + 1)];
        double& b1 = theta[size_t(k_stages + k + 1)];
        auto violates = [&](double a, double b) {
            auto h0 = blocks(a0, b0);
            auto h1 = blocks(a, b);
            double diff = 0, norm1 = 0;
            for (int i = 0; i < 3; ++i) {
                diff = std::max(diff, std::abs(h1[i] - h0[i]));
                norm1 = std::max(norm1, std::abs(h1[i]));
            }
            return diff > c0 / double((k + 1) * (k + 1)) * norm1;
        };
        if (!violates(a1, b1)) continue;
        double lo = 0.0, hi = 1.0;  // interpolation toward stage k; s = 0 is feasible
        for (int it = 0; it < 60; ++it) {
            const double s = 0.5 * (lo + hi);
            const double as = a0 + s * (a1 - a0), bs = b0 + s * (b1 - b0);
            if (violates(as, bs))
                hi = s;
            else
                lo = s;
        }
        a1 = a0 + lo * (a1 - a0);
        b1 = b0 + lo * (b1 - b0);
    }
}

}  // namespace detail

// Duality-gap training of the scalar-per-stage schedule by projected gradient
// descent with central finite differences; returns the best schedule seen.
inline StageParams train_schedule(const TrainConfig& cfg) {
    cfg.validate();
    const int k = cfg.k_stages;
    std::vector<double> theta(size_t(2 * k));
    for (int i = 0; i < k; ++i) {
        theta[size_t(i)] = 1.0 / (cfg.rho * cfg.phi1);
        theta[size_t(k + i)] = 1.0 / cfg.rho;
    }
    detail::project_params(theta, k, cfg.delta, cfg.schedule_decay);

    auto loss_of = [&](const std::vector<double>& t) {
        int bad = -1;
        const double l =
            detail::schedule_loss(cfg.instance_batch, detail::params_to_schedule(t, k),
                                  cfg.loss_weights, &bad);
        if (!std::isfinite(l))
            throw NonFiniteLoss("train_schedule: non-finite loss at stage " + std::to_string(bad));
        return l;
    };

    std::vector<double> best = theta;
    double best_loss = loss_of(theta);
    if (cfg.epochs == 0) return detail::params_to_schedule(best, k);

    double lr = cfg.lr;
    double cur_loss = best_loss;
    std::vector<double> grad(theta.size());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t i = 0; i < theta.size(); ++i) {
            const double h = cfg.fd_step * (1.0 + std::abs(theta[i]));
            std::vector<double> up = theta, dn = theta;
            up[i] = theta[i] + h;
            dn[i] = std::max(theta[i] - h, cfg.delta / 2);
            grad[i] = (loss_of(up) - loss_of(dn)) / (up[i] - dn[i]);
        }
        double gmax = 0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));
        if (gmax == 0) break;
        std::vector<double> next(theta.size());
        for (size_t i = 0; i < theta.size(); ++i)
            next[i] = theta[i] - lr * (1.0 + std::abs(theta[i])) * grad[i] / gmax;
        detail::project_params(next, k, cfg.delta, cfg.schedule_decay);
        const double next_loss = loss_of(next);
        if (next_loss <= cur_loss) {
            theta = std::move(next);
            cur_loss = next_loss;
            lr = std::min(lr * 1.25, 4 * cfg.lr);
        } else {
            lr *= 0.5;  // step rejected; best-seen still protects the result
            if (lr < 1e-6 * cfg.lr) break;
        }
        if (cur_loss < best_loss) {
            best_loss = cur_loss;
            best = theta;
        }
    }
    return detail::params_to_schedule(best, k);
}

// One-step superiority search: probes random single-stage (alpha, beta) pairs
// around the canonical values (log-uniform x[1/4, 4]) and returns the first
// stage whose next iterate lands strictly closer to the reference than the
// classical LADMM step; empty when no probe wins (e.g. at a KKT point).
inline std::optional<StageParams> superiority_search(const SplitProblem& prob,
                                                     const IterateState& st,
                                                     const SolverConfig& cfg, int probes,
                                                     const IterateState& ref,
                                                     std::uint64_t seed = 1) {
    cfg.validate();
    if (!(cfg.rho < 1)) throw InvalidArgument("superiority_search: requires rho < 1");
    auto dist = [&](const IterateState& a) {
        return std::sqrt((a.x - ref.x).squaredNorm() + (a.y - ref.y).squaredNorm() +
                         (a.v - ref.v).squaredNorm());
    };
    IterateState tilde = st;
    detail::ladmm_step(prob, cfg.rho, cfg.phi1, cfg.phi2, tilde);
    const double err_ladmm = dist(tilde);

    const double alpha0 = 1.0 / (cfg.rho * cfg.phi1);
    const double beta0 = 1.0 / cfg.rho;
    std::uint64_t state = seed ? seed : 0x9e3779b97f4a7c15ull;
    auto next_uniform = [&state]() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        return (double(z) + 0.5) * (1.0 / 18446744073709551616.0);
    };
    const double span = std::log(16.0);
    for (int i = 0; i < probes; ++i) {
        const double a = alpha0 * std::exp(std::log(0.25) + span * next_uniform());
        const double b = beta0 * std::exp(std::log(0.25) + span * next_uniform());
        if (!(a < b)) continue;
        StageParams sp;
        sp.stages.push_back(
            Stage{StageCoef::scalar(a), StageCoef::scalar(b), StageCoef::scalar(1.0 / b)});
        IterateState hat = lbo_step(prob, st, sp, 0);
        if (dist(hat) <= err_ladmm - 1e-12) return sp;
    }
    return std::nullopt;
}

}  // namespace matest
