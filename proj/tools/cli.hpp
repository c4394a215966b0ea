#pragma once

// Command-line front end. `run` parses the arguments, executes one subcommand
// and returns the process exit code: 0 success, 2 bad configuration or input,
// 3 numerical failure.

#include "randghep/randghep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace randghep::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kExitOk        = 0;
inline constexpr int kExitConfig    = 2;
inline constexpr int kExitNumerical = 3;

/// Relative slack granted to the oracle bound checks, in units of |lambda_1|.
inline constexpr double kRoundoffAllowance = 1e-12;

namespace detail {

inline std::uint64_t resolve_seed(std::uint64_t seed, json& report)
{
    if (seed != 0) {
        report["seed_source"] = "user";
        report["seed"]        = seed;
        return seed;
    }
    std::random_device rd;
    std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    if (s == 0)
        s = 1;
    report["seed_source"] = "entropy";
    report["seed"]        = s;
    return s;
}

/// Caps Eigen's internal parallelism from RANDGHEP_THREADS.
inline int configure_threads()
{
    const char* env = std::getenv("RANDGHEP_THREADS");
    if (env == nullptr || *env == '\0')
        return Eigen::nbThreads();
    char* end     = nullptr;
    const long nt = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || nt < 1)
        throw ConfigError("RANDGHEP_THREADS must be a positive integer, got '" + std::string(env) + "'");
    Eigen::setNbThreads(static_cast<int>(nt));
    return static_cast<int>(nt);
}

inline void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

inline std::ofstream open_out(const fs::path& path)
{
    std::ofstream f(path);
    if (!f)
        throw ConfigError("cannot write " + path.string());
    f << std::setprecision(17);
    return f;
}

inline void write_json(const fs::path& path, const json& j)
{
    auto f = open_out(path);
    f << j.dump(2) << '\n';
}

/// Default oversampling of 20, reduced when the problem is too small for it.
inline Index resolve_p(std::optional<Index> p, Index k, Index limit, json& config)
{
    if (p) {
        config["p"] = *p;
        return *p;
    }
    const Index chosen = std::max<Index>(0, std::min<Index>(20, limit - k));
    config["p"]        = chosen;
    config["p_source"] = chosen == 20 ? "default" : "default_clamped";
    return chosen;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline json base_report(const std::string& command)
{
    json r;
    r["command"] = command;
    r["version"] = kVersion;
    r["threads"] = configure_threads();
    return r;
}

inline void add_pencil_source(CLI::App* sub, std::string& a, std::string& b)
{
    sub->add_option("--A", a, "Matrix Market file with the symmetric matrix A");
    sub->add_option("--B", b, "Matrix Market file with the SPD matrix B");
}

} // namespace detail

// ---------------------------------------------------------------------------

struct SolveArgs {
    std::string A, B;
    Index k = 0;
    std::optional<Index> p;
    std::string method = "two-pass";
    std::string qr     = "mgs-r";
    std::string order  = "algebraic";
    std::uint64_t seed = 1;
    bool oracle        = false;
    bool write_modes   = false;
    std::string out    = ".";
};

inline int cmd_solve(const SolveArgs& a, std::ostream& out)
{
    const auto t0 = std::chrono::steady_clock::now();
    json report   = detail::base_report("solve");
    const GhepMethod method = parse_ghep_method(a.method);
    GhepOptions opts;
    opts.qr = parse_qr_algorithm(a.qr);
    if (a.order == "magnitude")
        opts.order = EigenOrder::magnitude;
    else if (a.order != "algebraic")
        throw ConfigError("--order must be 'algebraic' or 'magnitude'");

    const Matrix A = load_matrix_market(a.A);
    const Matrix B = load_matrix_market(a.B);
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
        throw ConfigError("A and B must be square matrices of the same size");
    const auto pencil = dense_pencil(A, B);

    json config = {{"A", a.A}, {"B", a.B}, {"k", a.k}, {"method", a.method}, {"qr", a.qr}, {"order", a.order}};
    SketchConfig cfg;
    cfg.k    = a.k;
    cfg.p    = detail::resolve_p(a.p, a.k, A.rows(), config);
    cfg.seed = detail::resolve_seed(a.seed, report);
    report["config"] = config;

    const GhepSolution sol = ghep_solve(pencil, cfg, method, opts);
    report["result"]       = to_json(sol);

    const fs::path dir(a.out);
    detail::ensure_dir(dir);
    auto csv = detail::open_out(dir / "spectrum.csv");
    if (a.oracle) {
        const GhepOracle ref = dense_ghep_oracle(A, B);
        const double eps     = range_error_exact(A, B, sol.Q);
        bool all_hold        = true;
        csv << "index,lambda,lambda_oracle,abs_err,lambda_bound,lambda_bound_ok,sine,sine_bound,sine_bound_ok\n";
        for (Index i = 0; i < sol.lambda.size(); ++i) {
            const double ex    = ref.spectrum.lambdas(i);
            const double err   = std::abs(sol.lambda(i) - ex);
            const auto bnd     = eigenpair_bounds(eps, spectral_gap(sol.lambda(i), ref.spectrum.lambdas, i));
            const double sine  = std::sin(b_angle(ref.X.col(i), sol.U.col(i), *pencil.B));
            const double gap   = spectral_gap(sol.lambda(i), ref.spectrum.lambdas, i);
            const double floor = kRoundoffAllowance * std::abs(ref.spectrum.lambdas(0));
            const bool l_ok    = err <= bnd.lambda_bound + floor;
            const bool s_ok    = sine <= bnd.sine_bound + floor * std::sqrt(ref.spectrum.kappa_B) / gap;
            all_hold           = all_hold && l_ok && s_ok;
            csv << i + 1 << ',' << sol.lambda(i) << ',' << ex << ',' << err << ',' << bnd.lambda_bound << ','
                << (l_ok ? "true" : "false") << ',' << sine << ',' << bnd.sine_bound << ','
                << (s_ok ? "true" : "false") << '\n';
        }
        report["oracle"] = {{"epsilon", eps},
                            {"relative_error", relative_eigenvalue_error(ref.spectrum.lambdas, sol.lambda)},
                            {"kappa_B", ref.spectrum.kappa_B},
                            {"bounds_hold", all_hold}};
    } else {
        csv << "index,lambda\n";
        for (Index i = 0; i < sol.lambda.size(); ++i)
            csv << i + 1 << ',' << sol.lambda(i) << '\n';
    }
    if (a.write_modes)
        save_matrix_market(dir / "modes.mtx", sol.U);
    report["wall_time_seconds"] = detail::seconds_since(t0);
    detail::write_json(dir / "report.json", report);
    out << report.dump(2) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct KleArgs {
    std::string nu = "2.5";
    double ell     = 2.0;
    Index n        = 201;
    Index k        = 20;
    std::optional<Index> p;
    std::string method = "two-pass";
    std::string qr     = "mgs-r";
    std::uint64_t seed = 1;
    bool direct_c      = false;
    std::string out    = ".";
};

inline int cmd_kle(const KleArgs& a, std::ostream& out)
{
    const auto t0 = std::chrono::steady_clock::now();
    json report   = detail::base_report("kle");
    KleOptions opts;
    opts.method   = parse_ghep_method(a.method);
    opts.qr       = parse_qr_algorithm(a.qr);
    opts.direct_c = a.direct_c;
    const MaternConfig kernel{parse_matern_nu(a.nu), a.ell};
    kernel.validate();
    const Grid1D grid{-1.0, 1.0, a.n};
    grid.validate();

    json config = {{"nu", std::string(to_string(kernel.nu))}, {"ell", a.ell}, {"n", a.n}, {"k", a.k},
                   {"method", a.method}, {"qr", a.qr}, {"direct_c", a.direct_c}, {"domain", {grid.a, grid.b}}};
    SketchConfig cfg;
    cfg.k    = a.k;
    cfg.p    = detail::resolve_p(a.p, a.k, a.n, config);
    cfg.seed = detail::resolve_seed(a.seed, report);
    report["config"] = config;

    const KleSolution sol = kle_solve(grid, kernel, cfg, opts);
    report["result"]      = to_json(sol.solution);
    if (sol.relative_error)
        report["relative_error"] = *sol.relative_error;

    const fs::path dir(a.out);
    detail::ensure_dir(dir);
    auto csv = detail::open_out(dir / "spectrum.csv");
    csv << "index,lambda_approx,lambda_oracle,abs_err\n";
    for (Index i = 0; i < sol.solution.lambda.size(); ++i) {
        csv << i + 1 << ',' << sol.solution.lambda(i);
        if (sol.lambda_oracle)
            csv << ',' << (*sol.lambda_oracle)(i) << ',' << std::abs((*sol.lambda_oracle)(i) - sol.solution.lambda(i));
        else
            csv << ",,";
        csv << '\n';
    }
    save_matrix_market(dir / "modes.mtx", sol.solution.U);
    report["wall_time_seconds"] = detail::seconds_since(t0);
    detail::write_json(dir / "report.json", report);
    out << report.dump(2) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct GsvdArgs {
    std::string A, S, T;
    Index k = 0;
    std::optional<Index> p;
    std::string qr     = "precholqr";
    std::uint64_t seed = 1;
    std::string out    = ".";
};

inline int cmd_gsvd(const GsvdArgs& a, std::ostream& out)
{
    const auto t0 = std::chrono::steady_clock::now();
    json report   = detail::base_report("gsvd");
    const QrAlgorithm qr = parse_qr_algorithm(a.qr);
    const Matrix A = load_matrix_market(a.A);
    const Matrix S = load_matrix_market(a.S);
    const Matrix T = load_matrix_market(a.T);
    if (S.rows() != A.rows() || S.cols() != A.rows() || T.rows() != A.cols() || T.cols() != A.cols())
        throw ConfigError("S must be m x m and T must be n x n for an m x n matrix A");

    json config = {{"A", a.A}, {"S", a.S}, {"T", a.T}, {"k", a.k}, {"qr", a.qr}};
    SketchConfig cfg;
    cfg.k    = a.k;
    cfg.p    = detail::resolve_p(a.p, a.k, std::min(A.rows(), A.cols()), config);
    cfg.seed = detail::resolve_seed(a.seed, report);
    report["config"] = config;

    const DenseMap Aop{A};
    const DenseSpd Sop{S}, Top{T};
    const GsvdResult res = randomized_gsvd(Aop, Sop, Top, cfg, qr);
    const Index kk       = res.sigma.size();
    report["result"]     = {
        {"sigma", vector_to_json(res.sigma)},
        {"u_orthogonality", randghep::detail::spectral_norm(res.U.transpose() * S * res.U - Matrix::Identity(kk, kk))},
        {"v_orthogonality", randghep::detail::spectral_norm(res.V.transpose() * T * res.V - Matrix::Identity(kk, kk))},
        {"counts", {{"a_applies", Aop.matvec_count()}, {"a_transpose_applies", Aop.transpose_count()},
                    {"s_applies", Sop.matvec_count()}, {"t_applies", Top.matvec_count()},
                    {"t_solves", Top.solve_count()}}}};

    const fs::path dir(a.out);
    detail::ensure_dir(dir);
    auto csv = detail::open_out(dir / "spectrum.csv");
    csv << "index,sigma\n";
    for (Index i = 0; i < kk; ++i)
        csv << i + 1 << ',' << res.sigma(i) << '\n';
    report["wall_time_seconds"] = detail::seconds_since(t0);
    detail::write_json(dir / "report.json", report);
    out << report.dump(2) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
    std::string A, B;
    std::string nu;
    double ell = 2.0;
    Index n    = 201;
    Index k    = 10;
    Index p    = 5;
    double alpha = 10.0;
    Index r      = 5;
    double tol   = 0.0;
    bool grow    = false;
    std::optional<double> binv;
    bool oracle        = false;
    std::uint64_t seed = 1;
    std::string out    = ".";
};

inline int cmd_estimate(const EstimateArgs& a, std::ostream& out)
{
    const auto t0 = std::chrono::steady_clock::now();
    json report   = detail::base_report("estimate");
    json config   = {{"k", a.k}, {"p", a.p}, {"alpha", a.alpha}, {"r", a.r}, {"grow", a.grow}};

    GhepPencil pencil;
    Matrix Adense, Bdense;
    if (!a.A.empty() || !a.B.empty()) {
        if (a.A.empty() || a.B.empty())
            throw ConfigError("--A and --B must be given together");
        if (!a.nu.empty())
            throw ConfigError("give either --A/--B or --nu, not both");
        Adense = load_matrix_market(a.A);
        Bdense = load_matrix_market(a.B);
        if (Adense.rows() != Adense.cols() || Bdense.rows() != Bdense.cols() || Adense.rows() != Bdense.rows())
            throw ConfigError("A and B must be square matrices of the same size");
        pencil = dense_pencil(Adense, Bdense);
        config["A"] = a.A;
        config["B"] = a.B;
    } else {
        if (a.nu.empty())
            throw ConfigError("estimate needs a pencil: --A/--B files or a KLE configuration via --nu");
        const KleProblem problem(Grid1D{-1.0, 1.0, a.n}, MaternConfig{parse_matern_nu(a.nu), a.ell});
        pencil = problem.pencil();
        if (a.oracle) {
            Adense = problem.dense_A();
            Bdense = problem.M->dense();
        }
        config["kle"] = {{"nu", a.nu}, {"ell", a.ell}, {"n", a.n}};
    }
    if (a.tol > 0.0)
        config["tol"] = a.tol;
    if (a.binv)
        config["binv_norm"] = *a.binv;
    const std::uint64_t seed = detail::resolve_seed(a.seed, report);
    report["config"]         = config;

    const SketchConfig cfg{a.k, a.p, seed};
    cfg.validate(pencil.dim());
    json result;
    Matrix Q;
    ErrorEstimate est;
    if (a.grow) {
        if (!(a.tol > 0.0))
            throw ConfigError("--grow needs a positive --tol");
        const AdaptiveRange ar = adaptive_range(pencil, cfg.r(), a.tol, a.alpha, a.r, seed, 10, a.binv);
        Q                      = ar.basis.compact_Q();
        est                    = ar.estimate;
        json traj              = json::array();
        for (const auto& step : ar.trajectory)
            traj.push_back({{"columns", step.columns}, {"estimate", step.estimate}});
        result["trajectory"]    = traj;
        result["final_columns"] = ar.trajectory.back().columns;
        result["converged"]     = ar.converged;
        result["c_applies"]     = ar.c_applies;
    } else {
        const RangeResult range = range_finder_b(pencil, cfg);
        Q                       = range.basis.compact_Q();
        est = posterior_estimate(pencil, Q, range.basis.compact_WQ(), a.alpha, a.r, derive_seed(seed, 0xE57), a.binv);
        result["sketch_columns"] = cfg.r();
        if (a.tol > 0.0)
            result["below_tol"] = est.e <= a.tol;
    }
    result.update(to_json(est));
    result["effective_rank"] = Q.cols();
    if (a.oracle) {
        if (Adense.size() == 0)
            throw ConfigError("--oracle needs a dense pencil");
        result["f_exact"] = range_error_exact(Adense, Bdense, Q);
    }
    report["result"] = result;

    const fs::path dir(a.out);
    detail::ensure_dir(dir);
    report["wall_time_seconds"] = detail::seconds_since(t0);
    detail::write_json(dir / "report.json", report);
    out << report.dump(2) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct QrBenchArgs {
    std::vector<std::string> nu;
    double ell         = 2.0;
    Index n            = 201;
    Index cols         = 100;
    std::uint64_t seed = 1;
    std::string out;
};

inline std::string csv_number(double v)
{
    if (std::isinf(v))
        return "inf";
    std::ostringstream os;
    os << std::setprecision(6) << std::scientific << v;
    return os.str();
}

inline int cmd_qr_bench(const QrBenchArgs& a, std::ostream& out)
{
    detail::configure_threads();
    std::vector<std::string> kernels = a.nu;
    if (kernels.empty())
        kernels = {"0.5", "1.5", "2.5"};
    json dummy;
    const std::uint64_t seed = detail::resolve_seed(a.seed, dummy);

    std::ostringstream csv;
    csv << "alg,kernel,m1,m2,m3,m4\n";
    for (const auto& nu_s : kernels) {
        const MaternConfig kernel{parse_matern_nu(nu_s), a.ell};
        kernel.validate();
        const KleProblem problem(Grid1D{-1.0, 1.0, a.n}, kernel);
        if (a.cols < 1 || a.cols > a.n)
            throw ConfigError("--cols must lie in [1, n]");
        const Matrix Y = problem.pencil().apply_c(gaussian_matrix(a.n, a.cols, seed));
        for (QrAlgorithm alg : {QrAlgorithm::mgs, QrAlgorithm::mgs_reorth, QrAlgorithm::precholqr}) {
            const QrMetrics m = qr_metrics(Y, weighted_qr(Y, *problem.M, alg), *problem.M);
            csv << to_string(alg) << ",matern" << to_string(kernel.nu) << ',' << csv_number(m.residual) << ','
                << csv_number(m.orthogonality) << ',' << csv_number(m.projection) << ',' << csv_number(m.inverse)
                << '\n';
        }
    }
    if (!a.out.empty()) {
        const fs::path path(a.out);
        if (path.has_parent_path())
            detail::ensure_dir(path.parent_path());
        auto f = detail::open_out(path);
        f << csv.str();
    }
    out << csv.str();
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct SvdArgs {
    std::string A;
    Index k = 0;
    std::optional<Index> p;
    std::string mode   = "svd";
    std::uint64_t seed = 1;
    std::string out    = ".";
};

inline int cmd_svd(const SvdArgs& a, std::ostream& out)
{
    const auto t0 = std::chrono::steady_clock::now();
    json report   = detail::base_report("svd");
    const Matrix A = load_matrix_market(a.A);
    json config    = {{"A", a.A}, {"k", a.k}, {"mode", a.mode}};
    SketchConfig cfg;
    cfg.k    = a.k;
    cfg.p    = detail::resolve_p(a.p, a.k, std::min(A.rows(), A.cols()), config);
    cfg.seed = detail::resolve_seed(a.seed, report);
    report["config"] = config;

    const DenseMap Aop{A};
    Vector values;
    if (a.mode == "svd") {
        values = randomized_svd(Aop, cfg).sigma;
    } else if (a.mode == "evd-two-pass" || a.mode == "evd-single-pass") {
        if (!is_symmetric(A, 1e-12))
            throw ConfigError("evd modes need a symmetric matrix");
        values = randomized_evd(Aop, cfg, a.mode == "evd-two-pass" ? PassMode::two_pass : PassMode::single_pass).lambda;
    } else {
        throw ConfigError("--mode must be svd, evd-two-pass or evd-single-pass");
    }
    report["result"] = {{"values", vector_to_json(values)},
                        {"a_applies", Aop.matvec_count()},
                        {"a_transpose_applies", Aop.transpose_count()}};

    const fs::path dir(a.out);
    detail::ensure_dir(dir);
    auto csv = detail::open_out(dir / "spectrum.csv");
    csv << "index,value\n";
    for (Index i = 0; i < values.size(); ++i)
        csv << i + 1 << ',' << values(i) << '\n';
    report["wall_time_seconds"] = detail::seconds_since(t0);
    detail::write_json(dir / "report.json", report);
    out << report.dump(2) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

/// Parses argv (argv[0] is the program name) and runs the chosen subcommand.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Randomized solvers for generalized eigenvalue problems and the generalized SVD", "randghep"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Solve A x = lambda B x for Matrix Market inputs");
    detail::add_pencil_source(s, solve.A, solve.B);
    s->get_option("--A")->required();
    s->get_option("--B")->required();
    s->add_option("--k", solve.k, "Number of eigenpairs")->required();
    s->add_option("--p", solve.p, "Oversampling (default 20, reduced for small problems)");
    s->add_option("--method", solve.method, "two-pass, single-pass or nystrom");
    s->add_option("--qr", solve.qr, "mgs, mgs-r, cholqr or precholqr");
    s->add_option("--order", solve.order, "algebraic or magnitude");
    s->add_option("--seed", solve.seed, "Sketch seed (0 draws one from entropy)");
    s->add_flag("--oracle", solve.oracle, "Compare with a dense reference solve");
    s->add_flag("--write-modes", solve.write_modes, "Write eigenvectors to modes.mtx");
    s->add_option("--out", solve.out, "Output directory");

    KleArgs kle;
    auto* kl = app.add_subcommand("kle", "Karhunen-Loeve modes of a Matern covariance on [-1, 1]");
    kl->add_option("--nu", kle.nu, "Matern smoothness: 0.5, 1.5 or 2.5");
    kl->add_option("--ell", kle.ell, "Correlation length");
    kl->add_option("--n", kle.n, "Number of grid nodes");
    kl->add_option("--k", kle.k, "Number of modes");
    kl->add_option("--p", kle.p, "Oversampling (default 20, reduced for small problems)");
    kl->add_option("--method", kle.method, "two-pass, single-pass or nystrom");
    kl->add_option("--qr", kle.qr, "mgs, mgs-r, cholqr or precholqr");
    kl->add_option("--seed", kle.seed, "Sketch seed (0 draws one from entropy)");
    kl->add_flag("--direct-c", kle.direct_c, "Apply Gamma M directly instead of solving with M");
    kl->add_option("--out", kle.out, "Output directory");

    GsvdArgs gs;
    auto* g = app.add_subcommand("gsvd", "Weighted generalized SVD of A with weights S and T");
    g->add_option("--A", gs.A, "Matrix Market file with A (m x n)")->required();
    g->add_option("--S", gs.S, "Matrix Market file with S (m x m, SPD)")->required();
    g->add_option("--T", gs.T, "Matrix Market file with T (n x n, SPD)")->required();
    g->add_option("--k", gs.k, "Number of singular triplets")->required();
    g->add_option("--p", gs.p, "Oversampling (default 20, reduced for small problems)");
    g->add_option("--qr", gs.qr, "mgs, mgs-r, cholqr or precholqr");
    g->add_option("--seed", gs.seed, "Sketch seed (0 draws one from entropy)");
    g->add_option("--out", gs.out, "Output directory");

    EstimateArgs est;
    auto* e = app.add_subcommand("estimate", "Randomized a-posteriori estimate of the range error");
    detail::add_pencil_source(e, est.A, est.B);
    e->add_option("--nu", est.nu, "Use a KLE pencil with this Matern smoothness");
    e->add_option("--ell", est.ell, "KLE correlation length");
    e->add_option("--n", est.n, "KLE grid nodes");
    e->add_option("--k", est.k, "Target rank of the initial sketch");
    e->add_option("--p", est.p, "Oversampling of the initial sketch");
    e->add_option("--alpha", est.alpha, "Estimator safety factor (> 1)");
    e->add_option("--r", est.r, "Number of probe vectors");
    e->add_option("--tol", est.tol, "Target error");
    e->add_flag("--grow", est.grow, "Add 10 sketch columns per round until the estimate is below --tol");
    e->add_option("--binv", est.binv, "Known value of |B^{-1}|_2");
    e->add_flag("--oracle", est.oracle, "Also report the exact range error");
    e->add_option("--seed", est.seed, "Sketch seed (0 draws one from entropy)");
    e->add_option("--out", est.out, "Output directory");

    QrBenchArgs qb;
    auto* q = app.add_subcommand("qr-bench", "Accuracy of the weighted QR variants on a KLE sketch");
    q->add_option("--nu", qb.nu, "Matern smoothness (repeatable; default all three)");
    q->add_option("--ell", qb.ell, "Correlation length");
    q->add_option("--n", qb.n, "Number of grid nodes");
    q->add_option("--cols", qb.cols, "Sketch columns");
    q->add_option("--seed", qb.seed, "Sketch seed (0 draws one from entropy)");
    q->add_option("--out", qb.out, "Also write the CSV to this file");

    SvdArgs sv;
    auto* v = app.add_subcommand("svd", "Randomized SVD or symmetric EVD of a Matrix Market matrix");
    v->add_option("--A", sv.A, "Matrix Market file")->required();
    v->add_option("--k", sv.k, "Target rank")->required();
    v->add_option("--p", sv.p, "Oversampling (default 20, reduced for small problems)");
    v->add_option("--mode", sv.mode, "svd, evd-two-pass or evd-single-pass");
    v->add_option("--seed", sv.seed, "Sketch seed (0 draws one from entropy)");
    v->add_option("--out", sv.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& pe) {
        const int code = app.exit(pe, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (s->parsed())
            return cmd_solve(solve, out);
        if (kl->parsed())
            return cmd_kle(kle, out);
        if (g->parsed())
            return cmd_gsvd(gs, out);
        if (e->parsed())
            return cmd_estimate(est, out);
        if (q->parsed())
            return cmd_qr_bench(qb, out);
        if (v->parsed())
            return cmd_svd(sv, out);
    } catch (const NumericalError& ex) {
        err << "numerical error: " << ex.what() << '\n';
        return kExitNumerical;
    } catch (const Error& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const fs::filesystem_error& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& ex) {
        err << "internal error: " << ex.what() << '\n';
        return 1;
    }
    return kExitConfig;
}

} // namespace randghep::cli
