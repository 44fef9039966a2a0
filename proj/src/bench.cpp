#include "matest/bench.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "matest/io.hpp"

namespace matest {

using nlohmann::json;

const char* to_string(SolverId id) {
    switch (id) {
        case SolverId::Admm: return "admm";
        case SolverId::Ladmm: return "ladmm";
        case SolverId::Lbo: return "lbo";
        case SolverId::Tosa: return "tosa";
        case SolverId::Pfbs: return "pfbs";
        case SolverId::Fista: return "fista";
        case SolverId::Proxgrad: return "proxgrad";
        case SolverId::Spg: return "spg";
    }
    return "unknown";
}

std::optional<SolverId> solver_from_string(const std::string& name) {
    for (SolverId id : {SolverId::Admm, SolverId::Ladmm, SolverId::Lbo, SolverId::Tosa,
                        SolverId::Pfbs, SolverId::Fista, SolverId::Proxgrad, SolverId::Spg})
        if (name == to_string(id)) return id;
    return std::nullopt;
}

bool solver_supports(SolverId id, ProblemKind kind) {
    switch (id) {
        case SolverId::Admm:
        case SolverId::Ladmm:
        case SolverId::Lbo:
            return true;
        case SolverId::Tosa:
        case SolverId::Pfbs:
        case SolverId::Fista:
            return kind == ProblemKind::Covariance;
        case SolverId::Proxgrad:
        case SolverId::Spg:
            return kind == ProblemKind::Precision;
    }
    return false;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace {

json structure_json(const StructureSpec& spec) {
    json j;
    j["type"] = structure_tag(spec);
    if (const auto* t = std::get_if<Toeplitz>(&spec)) {
        j["varrho"] = t->varrho;
    } else if (const auto* f = std::get_if<Factor>(&spec)) {
        j["m"] = f->m;
        j["sigma_b"] = f->sigma_b;
        j["sigma_n"] = f->sigma_n;
    } else if (const auto* s = std::get_if<SparseRandom>(&spec)) {
        j["q"] = s->q;
        j["diag"] = {s->diag_lo, s->diag_hi};
        j["offdiag"] = {s->off_lo, s->off_hi};
    } else if (const auto* b = std::get_if<Block>(&spec)) {
        j["block_size"] = b->block_size;
        j["rho_w"] = b->rho_w;
        j["rho_b"] = b->rho_b;
        j["pi_b"] = b->pi_b;
    } else if (std::holds_alternative<Grid>(spec)) {
        j["side"] = std::get<Grid>(spec).side;
    }
    return j;
}

StructureSpec structure_from(const json& j, Eigen::Index p) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "toeplitz") return Toeplitz{j.value("varrho", 0.5)};
    if (type == "factor") {
        Factor f;
        f.m = j.value("m", 3);
        f.sigma_b = j.value("sigma_b", 1.0);
        f.sigma_n = j.value("sigma_n", 0.04);
        return f;
    }
    if (type == "sparse") {
        SparseRandom s;
        s.q = j.value("q", 0.5);
        if (j.contains("diag")) {
            s.diag_lo = j["diag"][0].get<double>();
            s.diag_hi = j["diag"][1].get<double>();
        }
        if (j.contains("offdiag")) {
            s.off_lo = j["offdiag"][0].get<double>();
            s.off_hi = j["offdiag"][1].get<double>();
        }
        return s;
    }
    if (type == "block") {
        Block b;
        b.block_size = j.value("block_size", 20);
        b.rho_w = j.value("rho_w", 0.7);
        b.rho_b = j.value("rho_b", 0.1);
        b.pi_b = j.value("pi_b", 0.3);
        return b;
    }
    if (type == "banded1" || (type == "banded" && j.value("width", 2) == 2)) return Banded{2};
    if (type == "banded2" || (type == "banded" && j.value("width", 2) == 4)) return Banded{4};
    if (type == "grid") {
        int side = j.value("side", 0);
        if (side == 0) {
            side = int(std::lround(std::sqrt(double(p))));
            if (Eigen::Index(side) * side != p)
                throw InvalidArgument("grid structure requires a square p");
        }
        return Grid{side};
    }
    throw InvalidArgument("unknown structure type: " + type);
}

std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

StructureSpec structure_from_json(const std::string& json_text, Eigen::Index p) {
    return structure_from(json::parse(json_text), p);
}

std::string structure_to_json(const StructureSpec& spec) { return structure_json(spec).dump(); }

ExperimentPlan load_plan(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open plan: " + file.string());
    json j = json::parse(in);
    ExperimentPlan plan;
    plan.name = j.value("name", file.stem().string());
    if (!j.contains("structures") || j["structures"].empty())
        throw InvalidArgument("plan: nonempty structures required");
    if (!j.contains("p") || j["p"].empty()) throw InvalidArgument("plan: nonempty p grid required");
    plan.p_grid.clear();
    for (const auto& pv : j["p"]) plan.p_grid.push_back(pv.get<Eigen::Index>());
    plan.n = j.value("n", 500);
    for (const auto& sj : j["structures"])
        plan.structures.push_back(structure_from(sj, plan.p_grid.front()));
    // Keep raw structure JSON around for grid side derivation per p.
    if (!j.contains("solvers") || j["solvers"].empty())
        throw InvalidArgument("plan: nonempty solver list required");
    for (const auto& sv : j["solvers"]) {
        auto id = solver_from_string(sv.get<std::string>());
        if (!id) throw InvalidArgument("plan: unknown solver " + sv.get<std::string>());
        plan.solvers.push_back(*id);
    }
    if (j.contains("seeds")) {
        plan.seeds.clear();
        for (const auto& s : j["seeds"]) plan.seeds.push_back(s.get<std::uint64_t>());
    }
    if (j.contains("overrides")) {
        const auto& o = j["overrides"];
        auto getd = [&](const char* k) -> std::optional<double> {
            if (o.contains(k)) return o[k].get<double>();
            return std::nullopt;
        };
        auto geti = [&](const char* k) -> std::optional<int> {
            if (o.contains(k)) return o[k].get<int>();
            return std::nullopt;
        };
        plan.overrides.lambda = getd("lambda");
        plan.overrides.eps = getd("eps");
        plan.overrides.rho = getd("rho");
        plan.overrides.phi1 = getd("phi1");
        plan.overrides.phi2 = getd("phi2");
        plan.overrides.step = getd("step");
        plan.overrides.tol_gap = getd("tol_gap");
        plan.overrides.tol_primal = getd("tol_primal");
        plan.overrides.tol_dual = getd("tol_dual");
        plan.overrides.max_iter = geti("max_iter");
        plan.overrides.record_every = geti("record_every");
        plan.overrides.stages = geti("stages");
        if (o.contains("schedule_file"))
            plan.overrides.schedule_file = o["schedule_file"].get<std::string>();
    }
    plan.output_dir = j.value("output_dir", std::string("out"));
    plan.emit_figures = j.value("emit_figures", false);
    plan.jobs = j.value("jobs", 1);
    return plan;
}

void save_instance(const std::filesystem::path& dir, const StructureSpec& spec,
                   const Instance& inst) {
    std::filesystem::create_directories(dir);
    json sj = structure_json(spec);
    json doc;
    doc["structure"] = sj;
    doc["kind"] = inst.kind == ProblemKind::Covariance ? "covariance" : "precision";
    doc["p"] = inst.truth.rows();
    std::ofstream spec_out(dir / "spec.json");
    spec_out << doc.dump(2) << "\n";
    json meta;
    meta["seed"] = inst.samples_seed;
    meta["n"] = inst.n;
    std::ofstream meta_out(dir / "meta.json");
    meta_out << meta.dump(2) << "\n";
    write_matrix_binary(dir / "truth.bin", inst.truth);
    write_matrix_binary(dir / "s.bin", inst.sample_cov);
}

Instance load_instance(const std::filesystem::path& dir, StructureSpec* spec_out) {
    std::ifstream spec_in(dir / "spec.json");
    if (!spec_in) throw IoError("cannot open " + (dir / "spec.json").string());
    json doc = json::parse(spec_in);
    std::ifstream meta_in(dir / "meta.json");
    if (!meta_in) throw IoError("cannot open " + (dir / "meta.json").string());
    json meta = json::parse(meta_in);
    Instance inst;
    inst.kind = doc.value("kind", std::string("covariance")) == "precision"
                    ? ProblemKind::Precision
                    : ProblemKind::Covariance;
    inst.truth = read_matrix_binary(dir / "truth.bin");
    inst.sample_cov = read_matrix_binary(dir / "s.bin");
    inst.samples_seed = meta.value("seed", 0ull);
    inst.n = meta.value("n", 0);
    if (spec_out) *spec_out = structure_from(doc.at("structure"), inst.truth.rows());
    return inst;
}

void save_problem(const std::filesystem::path& file, const SplitProblem& prob,
                  const std::filesystem::path& matrix_file) {
    write_matrix(matrix_file, prob.s);
    json j;
    j["kind"] = prob.kind == ProblemKind::Covariance ? "covariance" : "precision";
    j["p"] = prob.dim();
    j["n"] = prob.n;
    j["lambda"] = prob.lambda;
    j["eps"] = prob.eps;
    j["s"] = matrix_file.string();
    std::ofstream out(file);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    out << j.dump(2) << "\n";
}

SplitProblem load_problem(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open: " + file.string());
    json j = json::parse(in);
    std::filesystem::path mfile = j.at("s").get<std::string>();
    if (mfile.is_relative()) mfile = file.parent_path() / mfile;
    Mat s = read_matrix(mfile);
    SplitProblem prob = make_problem(
        j.value("kind", std::string("covariance")) == "precision" ? ProblemKind::Precision
                                                                  : ProblemKind::Covariance,
        s, j.value("n", 500), j.value("lambda", -1.0), j.value("eps", 1e-4));
    return prob;
}

namespace {

json coef_json(const StageCoef& c) {
    if (c.is_scalar) return json(c.s);
    json rows = json::array();
    for (Eigen::Index i = 0; i < c.m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < c.m.cols(); ++j) row.push_back(c.m(i, j));
        rows.push_back(row);
    }
    return rows;
}

StageCoef coef_from(const json& j) {
    if (j.is_number()) return StageCoef::scalar(j.get<double>());
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    Mat m{rows, rows};
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < rows; ++k)
            m(i, k) = j[size_t(i)][size_t(k)].get<double>();
    return StageCoef::matrix(m);
}

}  // namespace

void save_schedule(const std::filesystem::path& file, const StageParams& sp) {
    json j;
    j["K"] = sp.k_stages();
    j["mode"] = sp.mode == StageMode::WeightedProx ? "weighted_prox" : "general";
    json stages = json::array();
    for (const auto& st : sp.stages) {
        json s;
        s["alpha"] = coef_json(st.alpha);
        s["beta"] = coef_json(st.beta);
        s["gamma"] = coef_json(st.gamma);
        stages.push_back(s);
    }
    j["stages"] = stages;
    std::ofstream out(file);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    out << j.dump(2) << "\n";
}

StageParams load_schedule(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open: " + file.string());
    json j = json::parse(in);
    StageParams sp;
    sp.mode = j.value("mode", std::string("weighted_prox")) == "general"
                  ? StageMode::General
                  : StageMode::WeightedProx;
    for (const auto& s : j.at("stages"))
        sp.stages.push_back(
            Stage{coef_from(s.at("alpha")), coef_from(s.at("beta")), coef_from(s.at("gamma"))});
    if (j.contains("K") && j["K"].get<int>() != sp.k_stages())
        throw InvalidArgument("schedule: K disagrees with the stage list");
    sp.validate();
    return sp;
}

std::string schedule_cache_key(ProblemKind kind, Eigen::Index p, double lambda,
                               const std::string& generator_tag) {
    std::string text = (kind == ProblemKind::Covariance ? std::string("cov|") : "prec|") +
                       std::to_string(p) + "|" + format_g17(lambda) + "|" + generator_tag;
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunOutcome run_single(const Instance& inst, SolverId solver, const RunOverrides& o,
                      RunTrace* trace_out, Mat* estimate_out) {
    RunOutcome row;
    row.p = inst.truth.rows();
    row.n = inst.n;
    row.seed = inst.samples_seed;
    row.solver = to_string(solver);

    if (!solver_supports(solver, inst.kind)) {
        row.status = "incompatible";
        return row;
    }
    try {
        SplitProblem prob = make_problem(inst.kind, inst.sample_cov, inst.n,
                                         o.lambda.value_or(-1.0), o.eps.value_or(1e-4));
        SolverConfig cfg;
        if (o.rho) cfg.rho = *o.rho;
        if (o.phi1) cfg.phi1 = *o.phi1;
        if (o.phi2) cfg.phi2 = *o.phi2;
        if (o.max_iter) cfg.max_iter = *o.max_iter;
        if (o.tol_gap) cfg.tol_gap = *o.tol_gap;
        if (o.tol_primal) cfg.tol_primal = *o.tol_primal;
        if (o.tol_dual) cfg.tol_dual = *o.tol_dual;
        if (o.record_every) cfg.record_every = *o.record_every;

        BaselineConfig bcfg;
        if (o.step) bcfg.step = *o.step;
        if (o.max_iter) bcfg.max_iter = *o.max_iter;
        if (o.tol_gap) bcfg.tol_gap = *o.tol_gap;
        if (o.record_every) bcfg.record_every = *o.record_every;

        Mat estimate;
        RunTrace trace;
        switch (solver) {
            case SolverId::Admm: {
                SolveResult res = inst.kind == ProblemKind::Covariance
                                      ? admm_covariance(prob, cfg, default_init(prob))
                                      : admm_precision(prob, cfg, default_init(prob));
                estimate = std::move(res.state.x);
                trace = std::move(res.trace);
                break;
            }
            case SolverId::Ladmm: {
                SolveResult res = ladmm_unified(prob, cfg, default_init(prob));
                estimate = std::move(res.state.x);
                trace = std::move(res.trace);
                break;
            }
            case SolverId::Lbo: {
                StageParams sp = o.schedule_file
                                     ? load_schedule(*o.schedule_file)
                                     : canonical_schedule(o.stages.value_or(10), cfg.rho, cfg.phi1);
                SolveResult res = lbo_solve(prob, sp, default_init(prob), cfg);
                estimate = std::move(res.state.x);
                trace = std::move(res.trace);
                break;
            }
            case SolverId::Tosa: {
                BaselineResult res = tosa_covariance(prob, bcfg, default_init(prob).x);
                estimate = std::move(res.estimate);
                trace = std::move(res.trace);
                break;
            }
            case SolverId::Pfbs: {
                BaselineResult res = pfbs_covariance(prob, bcfg, default_init(prob).x);
                estimate = std::move(res.estimate);
                trace = std::move(res.trace);
                break;
            }
            case SolverId::Fista: {
                BaselineResult res = fista_covariance(prob, bcfg, default_init(prob).x);
                estimate = std::move(res.estimate);
                trace = std::move(res.trace);
                break;
            }
            case SolverId::Proxgrad: {
                BaselineResult res = proxgrad_precision(prob, bcfg, default_init(prob).x);
                estimate = std::move(res.estimate);
                trace = std::move(res.trace);
                break;
            }
            case SolverId::Spg: {
                BaselineResult res = spg_precision(prob, bcfg, default_init(prob).x);
                estimate = std::move(res.estimate);
                trace = std::move(res.trace);
                break;
            }
        }
        EvalReport rep = evaluate(estimate, inst, trace);
        row.seconds = rep.seconds;
        row.iters = rep.iters;
        row.frob_err = rep.frob_err;
        row.nuclear = rep.nuclear;
        row.gap_final = rep.gap_final;
        row.status = to_string(trace.status);
        if (trace_out) *trace_out = std::move(trace);
        if (estimate_out) *estimate_out = std::move(estimate);
    } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
    }
    return row;
}

namespace {

struct Cell {
    StructureSpec spec;
    Eigen::Index p;
    std::uint64_t seed;
    SolverId solver;
    size_t structure_index;
};

void emit_figures_for(const std::filesystem::path& dir, const Instance& inst, const Mat& est,
                      const RunTrace& trace) {
    std::filesystem::create_directories(dir);
    write_trace_csv(dir / "trace.csv", trace);
    write_matrix_text(dir / "error_matrix.txt", (est - inst.truth).eval());
    EigenDecomp ed = sym_eig(est);
    const Eigen::Index top = std::min<Eigen::Index>(inst.truth.rows(), 1000);
    std::ofstream out(dir / "eigenvalues.csv");
    out << "rank,eigenvalue\n";
    for (Eigen::Index i = 0; i < top; ++i)
        out << i + 1 << ',' << format_g17(ed.d[ed.d.size() - 1 - i]) << '\n';
}

}  // namespace

std::filesystem::path run_plan(const ExperimentPlan& plan) {
    std::vector<std::uint64_t> seeds = plan.seeds;
    if (const char* env = std::getenv("MATEST_SEED")) {
        seeds.clear();
        seeds.push_back(std::strtoull(env, nullptr, 10));
    }
    if (seeds.empty()) seeds.push_back(1);

    std::vector<Cell> cells;
    for (size_t si = 0; si < plan.structures.size(); ++si)
        for (Eigen::Index p : plan.p_grid)
            for (std::uint64_t seed : seeds)
                for (SolverId solver : plan.solvers) {
                    StructureSpec spec = plan.structures[si];
                    if (auto* g = std::get_if<Grid>(&spec)) {
                        const int side = int(std::lround(std::sqrt(double(p))));
                        if (Eigen::Index(side) * side != p) continue;  // grid needs square p
                        g->side = side;
                    }
                    if (!solver_supports(solver, structure_kind(spec))) continue;
                    cells.push_back(Cell{spec, p, seed, solver, si});
                }

    std::filesystem::create_directories(plan.output_dir);
    std::vector<RunOutcome> rows(cells.size());
    std::atomic<size_t> next{0};
    const int jobs = std::max(1, plan.jobs);

    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const Cell& cell = cells[i];
            const std::uint64_t truth_seed =
                mix_seed(cell.seed, cell.structure_index * 1000003ull + std::uint64_t(cell.p));
            Mat truth = make_truth(cell.spec, cell.p, truth_seed);
            Instance inst =
                sample_instance(truth, structure_kind(cell.spec), plan.n, truth_seed + 1);
            inst.samples_seed = cell.seed;  // report the plan-level seed
            RunTrace trace;
            Mat est;
            RunOutcome row = run_single(inst, cell.solver, plan.overrides,
                                        plan.emit_figures ? &trace : nullptr,
                                        plan.emit_figures ? &est : nullptr);
            row.structure = structure_tag(cell.spec);
            row.param = structure_param(cell.spec);
            row.seed = cell.seed;
            if (plan.emit_figures && row.status.rfind("error", 0) != 0 &&
                row.status != "incompatible") {
                std::ostringstream tag;
                tag << row.structure << structure_param(cell.spec) << "_p" << cell.p << "_s"
                    << cell.seed << "_" << row.solver;
                emit_figures_for(plan.output_dir / "runs" / tag.str(), inst, est, trace);
            }
            rows[i] = std::move(row);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    const std::filesystem::path out = plan.output_dir / "results.csv";
    write_results_csv(out, rows);
    return out;
}

void write_results_csv(const std::filesystem::path& file, const std::vector<RunOutcome>& rows) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot open for writing: " + file.string());
    out << "# matest results schema v1\n";
    out << "structure,param,p,n,seed,solver,seconds,iters,frob_err,nuclear,gap_final,status\n";
    for (const auto& r : rows) {
        out << r.structure << ',' << format_g17(r.param) << ',' << r.p << ',' << r.n << ','
            << r.seed << ',' << r.solver << ',' << format_g17(r.seconds) << ',' << r.iters << ','
            << format_g17(r.frob_err) << ',' << format_g17(r.nuclear) << ','
            << format_g17(r.gap_final) << ',' << r.status << '\n';
    }
    if (!out) throw IoError("write failed: " + file.string());
}

std::vector<RunOutcome> read_results_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open: " + file.string());
    std::vector<RunOutcome> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("structure,", 0) == 0) continue;
        std::istringstream ls(line);
        std::string field;
        RunOutcome r;
        auto next_field = [&]() {
            if (!std::getline(ls, field, ',')) throw IoError("bad results row: " + line);
            return field;
        };
        r.structure = next_field();
        r.param = std::stod(next_field());
        r.p = std::stol(next_field());
        r.n = std::stoi(next_field());
        r.seed = std::stoull(next_field());
        r.solver = next_field();
        r.seconds = std::stod(next_field());
        r.iters = std::stoi(next_field());
        r.frob_err = std::stod(next_field());
        r.nuclear = std::stod(next_field());
        r.gap_final = std::stod(next_field());
        std::getline(ls, r.status);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string format_report(const std::vector<RunOutcome>& rows) {
    // Group rows by (structure, param, p, n); average over seeds per solver.
    struct Key {
        std::string structure;
        double param;
        Eigen::Index p;
        int n;
        bool operator<(const Key& o) const {
            return std::tie(structure, param, p, n) < std::tie(o.structure, o.param, o.p, o.n);
        }
    };
    struct Agg {
        double seconds = 0, frob = 0, nuclear = 0, gap = 0;
        int count = 0;
    };
    std::map<Key, std::map<std::string, Agg>> table;
    for (const auto& r : rows) {
        if (r.status.rfind("error", 0) == 0 || r.status == "incompatible") continue;
        Agg& a = table[Key{r.structure, r.param, r.p, r.n}][r.solver];
        a.seconds += r.seconds;
        a.frob += r.frob_err;
        a.nuclear += r.nuclear;
        a.gap += r.gap_final;
        a.count += 1;
    }
    std::ostringstream out;
    for (const auto& [key, solvers] : table) {
        out << key.structure << " param=" << key.param << " p=" << key.p << " n=" << key.n
            << "\n";
        char buf[160];
        std::snprintf(buf, sizeof(buf), "  %-10s %12s %14s %14s %12s\n", "solver", "time(s)",
                      "frobenius", "nuclear", "gap");
        out << buf;
        for (const auto& [solver, a] : solvers) {
            const double c = std::max(1, a.count);
            std::snprintf(buf, sizeof(buf), "  %-10s %12.4g %14.6g %14.6g %12.3e\n",
                          solver.c_str(), a.seconds / c, a.frob / c, a.nuclear / c, a.gap / c);
            out << buf;
        }
    }
    return out.str();
}

}  // namespace matest
