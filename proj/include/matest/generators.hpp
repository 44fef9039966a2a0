#pragma once

// Synthetic ground-truth structures, Gaussian sampling, and the entrywise
// concentration experiment.
//
// Covariance structures: Toeplitz varrho^|i-j|; factor BB^T + sigma_n I;
// random sparse off-diagonals with reinforced diagonal; block equicorrelation
// with sparse cross-block edges. Precision structures: banded (width 2 or 4)
// and the two-dimensional grid.
//
// Sampling is counter-based (splitmix64 -> Box-Muller), so draws are bitwise
// reproducible across platforms for a fixed seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "matest/errors.hpp"
#include "matest/problems.hpp"
#include "matest/symcore.hpp"
#include "matest/types.hpp"

namespace matest {

class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return (double(next_u64()) + 0.5) * (1.0 / 18446744073709551616.0); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double gauss() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

  private:
    std::uint64_t state_;
};

struct Toeplitz {
    double varrho = 0.5;  // |varrho| < 1
};
struct Factor {
    int m = 3;
    double sigma_b = 1.0;   // loading scale (standard deviation)
    double sigma_n = 0.04;  // diagonal noise variance
};
struct SparseRandom {
    double q = 0.5;  // nonzero probability of each off-diagonal pair
    double diag_lo = 0.5, diag_hi = 2.0;
    double off_lo = 0.1, off_hi = 0.8;
};
struct Block {
    int block_size = 20;
    double rho_w = 0.7;
    double rho_b = 0.1;
    double pi_b = 0.3;
};
struct Banded {
    int width = 2;  // 2 or 4
};
struct Grid {
    int side = 5;  // p = side^2
};

using StructureSpec = std::variant<Toeplitz, Factor, SparseRandom, Block, Banded, Grid>;

inline ProblemKind structure_kind(const StructureSpec& spec) {
    if (std::holds_alternative<Banded>(spec) || std::holds_alternative<Grid>(spec))
        return ProblemKind::Precision;
    return ProblemKind::Covariance;
}

inline std::string structure_tag(const StructureSpec& spec) {
    if (std::holds_alternative<Toeplitz>(spec)) return "toeplitz";
    if (std::holds_alternative<Factor>(spec)) return "factor";
    if (std::holds_alternative<SparseRandom>(spec)) return "sparse";
    if (std::holds_alternative<Block>(spec)) return "block";
    if (std::holds_alternative<Banded>(spec))
        return std::get<Banded>(spec).width == 2 ? "banded1" : "banded2";
    return "grid";
}

// The single structure parameter varied in the experiment grids.
inline double structure_param(const StructureSpec& spec) {
    if (const auto* t = std::get_if<Toeplitz>(&spec)) return t->varrho;
    if (const auto* f = std::get_if<Factor>(&spec)) return double(f->m);
    if (const auto* s = std::get_if<SparseRandom>(&spec)) return s->q;
    if (const auto* b = std::get_if<Block>(&spec)) return double(b->block_size);
    if (const auto* bd = std::get_if<Banded>(&spec)) return double(bd->width);
    return double(std::get<Grid>(spec).side);
}

namespace detail {

// Escalating diagonal loading until lambda_min >= 0.05; random sparse and
// block draws do not come with a positive definiteness guarantee.
inline void load_until_pd(Mat& a) {
    double tau = 0.01;
    while (min_eigenvalue(a) < 0.05) {
        a += tau * Mat::Identity(a.rows(), a.cols());
        tau *= 2.0;
    }
}

}  // namespace detail

inline Mat make_truth(const StructureSpec& spec, Eigen::Index p, std::uint64_t seed) {
    if (p < 1) throw InvalidArgument("make_truth: p must be positive");
    CounterRng rng(seed);

    if (const auto* t = std::get_if<Toeplitz>(&spec)) {
        if (!(std::abs(t->varrho) < 1))
            throw InvalidArgument("make_truth: toeplitz requires |varrho| < 1");
        Mat a(p, p);
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < p; ++j)
                a(i, j) = std::pow(t->varrho, double(std::abs(long(i - j))));
        return a;
    }
    if (const auto* f = std::get_if<Factor>(&spec)) {
        if (f->m < 1 || f->m > int(p)) throw InvalidArgument("make_truth: factor needs 1 <= m <= p");
        if (!(f->sigma_b > 0) || !(f->sigma_n > 0))
            throw InvalidArgument("make_truth: factor scales must be positive");
        Mat b(p, f->m);
        for (Eigen::Index i = 0; i < p; ++i)
            for (int j = 0; j < f->m; ++j) b(i, j) = f->sigma_b * rng.gauss();
        Mat a = b * b.transpose();
        a += f->sigma_n * Mat::Identity(p, p);
        return ((a + a.transpose()) * 0.5).eval();
    }
    if (const auto* s = std::get_if<SparseRandom>(&spec)) {
        if (!(s->q >= 0 && s->q <= 1)) throw InvalidArgument("make_truth: sparse q in [0,1]");
        Mat a = Mat::Zero(p, p);
        for (Eigen::Index i = 0; i < p; ++i) a(i, i) = rng.uniform(s->diag_lo, s->diag_hi);
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = i + 1; j < p; ++j) {
                if (rng.uniform() >= s->q) continue;
                const double mag = rng.uniform(s->off_lo, s->off_hi);
                const double v = rng.uniform() < 0.5 ? mag : -mag;
                a(i, j) = a(j, i) = v;
            }
        detail::load_until_pd(a);
        return a;
    }
    if (const auto* b = std::get_if<Block>(&spec)) {
        if (b->block_size < 1) throw InvalidArgument("make_truth: block size must be positive");
        if (!(b->pi_b >= 0 && b->pi_b <= 1)) throw InvalidArgument("make_truth: pi_b in [0,1]");
        Mat a = Mat::Identity(p, p);
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = i + 1; j < p; ++j) {
                const bool same = (i / b->block_size) == (j / b->block_size);
                if (same) {
                    a(i, j) = a(j, i) = b->rho_w;
                } else if (rng.uniform() < b->pi_b) {
                    a(i, j) = a(j, i) = b->rho_b;
                }
            }
        detail::load_until_pd(a);
        return a;
    }
    if (const auto* bd = std::get_if<Banded>(&spec)) {
        if (bd->width != 2 && bd->width != 4)
            throw InvalidArgument("make_truth: banded width must be 2 or 4");
        Mat a = Mat::Identity(p, p);
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < p; ++j)
                if (i != j && std::abs(long(i - j)) <= bd->width) a(i, j) = 0.2;
        return a;
    }
    const auto& g = std::get<Grid>(spec);
    if (g.side < 1 || Eigen::Index(g.side) * g.side != p)
        throw InvalidArgument("make_truth: grid requires p = side^2");
    Mat a = Mat::Identity(p, p);
    const Eigen::Index side = g.side;
    for (Eigen::Index i = 0; i < p; ++i) {
        if ((i + 1) % side != 0) a(i, i + 1) = a(i + 1, i) = 0.2;       // horizontal neighbor
        if (i + side < p) a(i, i + side) = a(i + side, i) = 0.2;        // vertical neighbor
    }
    return a;
}

// A generated problem instance: ground truth, the seed its samples came from,
// and the assembled sample covariance S = (1/n) sum x_i x_i^T.
struct Instance {
    ProblemKind kind = ProblemKind::Covariance;
    Mat truth;  // Sigma* or Theta*
    std::uint64_t samples_seed = 0;
    int n = 0;
    Mat sample_cov;
};

inline Instance sample_instance(const Mat& truth, ProblemKind kind, int n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("sample_instance: n must be positive");
    const Eigen::Index p = truth.rows();
    EigenDecomp ed = sym_eig(truth);
    if (kind == ProblemKind::Precision && ed.d.minCoeff() <= 0)
        throw NotPositiveDefinite("sample_instance: precision truth must be positive definite");

    // Population covariance factor: L = Q sqrt(d) for covariance truth,
    // Q sqrt(1/d) for precision truth (samples from N(0, Theta*^{-1})).
    Vec scale(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double d = ed.d[i];
        if (kind == ProblemKind::Covariance) {
            if (d < -1e-12) throw NotPositiveDefinite("sample_instance: covariance truth indefinite");
            scale[i] = std::sqrt(std::max(d, 0.0));
        } else {
            scale[i] = 1.0 / std::sqrt(d);
        }
    }
    Mat l = ed.q * scale.asDiagonal();

    CounterRng rng(seed);
    Mat s = Mat::Zero(p, p);
    Vec z(p), x(p);
    for (int k = 0; k < n; ++k) {
        for (Eigen::Index i = 0; i < p; ++i) z[i] = rng.gauss();
        x.noalias() = l * z;
        s.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0);
    }
    s = s.selfadjointView<Eigen::Lower>();
    s /= double(n);

    Instance inst;
    inst.kind = kind;
    inst.truth = truth;
    inst.samples_seed = seed;
    inst.n = n;
    inst.sample_cov = ((s + s.transpose()) * 0.5).eval();
    return inst;
}

// One cell of the entrywise concentration experiment.
struct ConcentrationRow {
    Eigen::Index p = 0;
    int n = 0;
    double median_err = 0;  // median over reps of ||S - Sigma*||_inf
    double q95_err = 0;
    double ratio = 0;  // median / sqrt(log p / n)
};

inline std::vector<ConcentrationRow> concentration_experiment(
    const StructureSpec& spec, const std::vector<Eigen::Index>& p_list,
    const std::vector<int>& n_list, int reps, std::uint64_t seed) {
    if (reps < 30) throw InvalidArgument("concentration_experiment: reps must be >= 30");
    std::vector<ConcentrationRow> rows;
    for (Eigen::Index p : p_list) {
        Mat truth = make_truth(spec, p, seed);
        const ProblemKind kind = structure_kind(spec);
        for (int n : n_list) {
            std::vector<double> errs(static_cast<size_t>(reps), 0.0);
            Mat sigma_star = truth;
            if (kind == ProblemKind::Precision) {
                EigenDecomp ed = sym_eig(truth);
                sigma_star = ed.q * ed.d.cwiseInverse().asDiagonal() * ed.q.transpose();
            }
            for (int r = 0; r < reps; ++r) {
                Instance inst =
                    sample_instance(truth, kind, n, seed + 1 + std::uint64_t(r) * 7919u + std::uint64_t(p) * 104729u + std::uint64_t(n));
                errs[size_t(r)] = max_abs(inst.sample_cov - sigma_star);
            }
            std::sort(errs.begin(), errs.end());
            ConcentrationRow row;
            row.p = p;
            row.n = n;
            row.median_err = errs[size_t(reps / 2)];
            row.q95_err = errs[size_t((reps * 95) / 100)];
            row.ratio = row.median_err / std::sqrt(std::log(double(p)) / double(n));
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace matest
