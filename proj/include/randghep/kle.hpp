#pragma once

// Karhunen-Loeve expansion harness on a 1D uniform grid: Matern covariance,
// piecewise-linear mass matrix, the pencil (M Gamma M, M), truncation checks
// and field realizations.

#include "randghep/error_analysis.hpp"

#include <cmath>
#include <optional>

namespace randghep {

struct Grid1D {
    double a = -1.0;
    double b = 1.0;
    Index n  = 201;

    void validate() const
    {
        detail::require(n >= 2, "Grid1D: need at least two nodes");
        detail::require(b > a, "Grid1D: need a < b");
    }

    double h() const { return (b - a) / static_cast<double>(n - 1); }

    Vector nodes() const
    {
        validate();
        Vector x(n);
        for (Index i = 0; i < n; ++i)
            x(i) = a + static_cast<double>(i) * h();
        x(n - 1) = b;
        return x;
    }
};

enum class MaternNu { half, three_halves, five_halves };

inline std::string_view to_string(MaternNu nu)
{
    switch (nu) {
    case MaternNu::half: return "0.5";
    case MaternNu::three_halves: return "1.5";
    case MaternNu::five_halves: return "2.5";
    }
    return "?";
}

inline MaternNu parse_matern_nu(std::string_view s)
{
    if (s == "0.5" || s == "1/2" || s == "half")
        return MaternNu::half;
    if (s == "1.5" || s == "3/2" || s == "three_halves")
        return MaternNu::three_halves;
    if (s == "2.5" || s == "5/2" || s == "five_halves")
        return MaternNu::five_halves;
    throw ConfigError("unsupported Matern smoothness '" + std::string(s) + "' (use 0.5, 1.5 or 2.5)");
}

struct MaternConfig {
    MaternNu nu = MaternNu::five_halves;
    double ell  = 2.0;

    void validate() const { detail::require(ell > 0.0, "MaternConfig: correlation length must be positive"); }
};

/// Matern covariance with d = |x - y| / ell for the three half-integer orders.
inline double matern_kernel(const MaternConfig& cfg, double x, double y)
{
    const double d = std::abs(x - y) / cfg.ell;
    switch (cfg.nu) {
    case MaternNu::half: return std::exp(-d);
    case MaternNu::three_halves: {
        const double s = std::sqrt(3.0) * d;
        return (1.0 + s) * std::exp(-s);
    }
    case MaternNu::five_halves: {
        const double s = std::sqrt(5.0) * d;
        return (1.0 + s + 5.0 / 3.0 * d * d) * std::exp(-s);
    }
    }
    return 0.0;
}

/// Nodal covariance Gamma_ij = kappa(x_i, x_j).
inline Matrix assemble_covariance(const VectorRef& nodes, const MaternConfig& cfg)
{
    cfg.validate();
    const Index n = nodes.size();
    detail::require(n >= 1, "assemble_covariance: empty node set");
    Matrix G(n, n);
    for (Index j = 0; j < n; ++j) {
        G(j, j) = 1.0;
        for (Index i = j + 1; i < n; ++i)
            G(i, j) = G(j, i) = matern_kernel(cfg, nodes(i), nodes(j));
    }
    return G;
}

inline Matrix assemble_covariance(const Grid1D& grid, const MaternConfig& cfg)
{
    return assemble_covariance(grid.nodes(), cfg);
}

/// Mass matrix of the hat functions: (h/6)[1 4 1] inside, (h/6)[2 1] at the ends.
inline std::shared_ptr<const TridiagonalSpd> mass_operator_1d(const Grid1D& grid)
{
    grid.validate();
    const double h = grid.h();
    Vector d       = Vector::Constant(grid.n, 2.0 * h / 3.0);
    d(0) = d(grid.n - 1) = h / 3.0;
    return std::make_shared<TridiagonalSpd>(std::move(d), Vector::Constant(grid.n - 1, h / 6.0));
}

inline Matrix assemble_mass_1d(const Grid1D& grid) { return mass_operator_1d(grid)->dense(); }

/// Discrete KLE problem: the pencil M Gamma M phi = lambda M phi.
struct KleProblem {
    Grid1D grid;
    MaternConfig kernel;
    Matrix Gamma;
    std::shared_ptr<const TridiagonalSpd> M;

    KleProblem(const Grid1D& g, const MaternConfig& k)
        : grid(g), kernel(k), Gamma(assemble_covariance(g, k)), M(mass_operator_1d(g))
    {
    }

    Index dim() const { return grid.n; }

    /// A = M Gamma M applied right to left, B = M, and C = Gamma M.
    GhepPencil pencil() const
    {
        auto Mop   = M;
        auto Gptr  = std::make_shared<const Matrix>(Gamma);
        const Index n = dim();
        GhepPencil out;
        out.A = make_function_map(n, n, [Mop, Gptr](const MatrixRef& X) -> Matrix {
            const Matrix MX = Mop->apply(X);
            return Mop->apply(*Gptr * MX);
        });
        out.B = Mop;
        out.C = make_function_map(n, n, [Mop, Gptr](const MatrixRef& X) -> Matrix {
            return *Gptr * Mop->apply(X);
        });
        return out;
    }

    /// Dense M Gamma M, for oracles.
    Matrix dense_A() const
    {
        const Matrix Md = M->dense();
        return detail::symmetrized(Md * Gamma * Md);
    }

    GhepOracle oracle() const { return dense_ghep_oracle(dense_A(), M->dense()); }
};

inline GhepPencil kle_pencil(const Grid1D& grid, const MaternConfig& cfg) { return KleProblem(grid, cfg).pencil(); }

/// Sum_{i<k} |lambda_i - lambda~_i| / sum_{i<k} |lambda_i|, index-paired.
inline double relative_eigenvalue_error(const VectorRef& exact, const VectorRef& approx)
{
    const Index k = std::min(exact.size(), approx.size());
    detail::require(k >= 1, "relative_eigenvalue_error: empty spectrum");
    const double den = exact.head(k).cwiseAbs().sum();
    const double num = (exact.head(k) - approx.head(k)).cwiseAbs().sum();
    return den > 0.0 ? num / den : num;
}

struct KleOptions {
    GhepMethod method = GhepMethod::two_pass;
    QrAlgorithm qr    = QrAlgorithm::mgs_reorth;
    bool direct_c     = false; ///< apply C = Gamma M without the M-solve (two-pass, Nystrom)
    Index oracle_max_n = 2000; ///< compare against the dense oracle up to this size
};

struct KleSolution {
    GhepSolution solution;
    Grid1D grid;
    MaternConfig kernel;
    Index truncation = 0;
    std::optional<Vector> lambda_oracle;
    std::optional<double> relative_error;
};

inline KleSolution kle_solve(const KleProblem& problem, const SketchConfig& cfg, const KleOptions& opts = {})
{
    GhepOptions gopts;
    gopts.qr           = opts.qr;
    gopts.use_direct_c = opts.direct_c;
    KleSolution out;
    out.solution   = ghep_solve(problem.pencil(), cfg, opts.method, gopts);
    out.grid       = problem.grid;
    out.kernel     = problem.kernel;
    out.truncation = cfg.k;
    if (problem.dim() <= opts.oracle_max_n) {
        const GhepOracle ref = problem.oracle();
        out.lambda_oracle    = ref.spectrum.lambdas.head(cfg.k);
        out.relative_error   = relative_eigenvalue_error(*out.lambda_oracle, out.solution.lambda);
    }
    return out;
}

inline KleSolution kle_solve(const Grid1D& grid, const MaternConfig& kernel, const SketchConfig& cfg,
                             const KleOptions& opts = {})
{
    return kle_solve(KleProblem(grid, kernel), cfg, opts);
}

struct FieldRealization {
    Vector values;
    Index clipped = 0; ///< eigenvalues below zero replaced by zero
};

/// s(x_i) = sum_k xi_k sqrt(lambda_k) phi_k(x_i), zero mean.
inline FieldRealization kle_realize(const GhepSolution& sol, const VectorRef& xi)
{
    if (xi.size() != sol.lambda.size())
        throw ConfigError("kle_realize: expected " + std::to_string(sol.lambda.size()) + " coefficients, got " +
                          std::to_string(xi.size()));
    FieldRealization out;
    Vector scale(xi.size());
    for (Index k = 0; k < xi.size(); ++k) {
        if (sol.lambda(k) < 0.0)
            ++out.clipped;
        scale(k) = std::sqrt(std::max(sol.lambda(k), 0.0)) * xi(k);
    }
    out.values = sol.U * scale;
    return out;
}

inline FieldRealization kle_realize(const KleSolution& sol, const VectorRef& xi)
{
    return kle_realize(sol.solution, xi);
}

struct TruncationReport {
    Vector lhs_terms;     ///< |sqrt(l) phi - sqrt(l~) phi~|_M^2 per mode
    Vector lambda_terms;  ///< |l - l~|
    Vector vector_terms;  ///< l |phi - phi~|_M^2
    Vector angle_terms;   ///< 2 l (1 - cos angle_M(phi, phi~))
    Vector sine_angles;   ///< sin angle_M(phi, phi~)
    Vector gaps;          ///< distance of l~_k to the rest of the exact spectrum

    double expected_sq_error = 0.0; ///< E |sum xi_k (sqrt(l) phi - sqrt(l~) phi~)|_M^2 = trace(D^T M D)
    double lhs_sum           = 0.0;
    double lambda_sum        = 0.0;
    double vector_sum        = 0.0;
    double angle_sum         = 0.0;

    double epsilon             = 0.0;
    double bound_literal       = 0.0; ///< K min(2 eps, 2 eps / delta_min)
    double bound_summed        = 0.0; ///< sum_k min(2 eps, 4 eps^2 / delta_k)
    double worst_term_slack    = 0.0; ///< min_k (lambda_k + vector_k - lhs_k)
    bool per_term_holds        = false;
    bool total_holds           = false;
};

/// Compares a truncated expansion with the exact one. The expectation over xi
/// is evaluated in closed form, so no sampling is involved. Eigenvector signs
/// are aligned so that <phi, phi~>_M >= 0.
inline TruncationReport kle_truncation_check(const VectorRef& exact_lambda, const MatrixRef& exact_phi,
                                             const GhepSolution& approx, const SpdOperator& M, double epsilon,
                                             double tol = 1e-12)
{
    const Index K = approx.lambda.size();
    detail::require(exact_lambda.size() >= K && exact_phi.cols() >= K && exact_phi.rows() == approx.U.rows(),
                    "kle_truncation_check: exact expansion is shorter than the approximation");
    detail::require(epsilon >= 0.0, "kle_truncation_check: epsilon must be non-negative");

    TruncationReport rep;
    rep.lhs_terms.resize(K);
    rep.lambda_terms.resize(K);
    rep.vector_terms.resize(K);
    rep.angle_terms.resize(K);
    rep.sine_angles.resize(K);
    rep.gaps.resize(K);
    rep.epsilon = epsilon;

    Matrix D(approx.U.rows(), K);
    double min_gap = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < K; ++k) {
        const double l  = exact_lambda(k);
        const double lt = approx.lambda(k);
        Vector phi_t    = approx.U.col(k);
        const Vector Mphi = M.apply(Vector(exact_phi.col(k)));
        if (phi_t.dot(Mphi) < 0.0)
            phi_t = -phi_t;

        D.col(k)            = std::sqrt(std::max(l, 0.0)) * exact_phi.col(k) - std::sqrt(std::max(lt, 0.0)) * phi_t;
        const Vector diff   = exact_phi.col(k) - phi_t;
        const double dnorm2 = diff.dot(Vector(M.apply(diff)));
        rep.lhs_terms(k)    = D.col(k).dot(Vector(M.apply(Vector(D.col(k)))));
        rep.lambda_terms(k) = std::abs(l - lt);
        rep.vector_terms(k) = l * dnorm2;
        const double ang    = b_angle(exact_phi.col(k), phi_t, M);
        rep.sine_angles(k)  = std::sin(ang);
        rep.angle_terms(k)  = 2.0 * l * (1.0 - std::cos(ang));
        rep.gaps(k)         = spectral_gap(lt, exact_lambda, k);
        min_gap             = std::min(min_gap, rep.gaps(k));
        rep.bound_summed += eigenpair_bounds(epsilon, rep.gaps(k)).lambda_bound;
    }
    rep.expected_sq_error = (D.transpose() * M.apply(D)).trace();
    rep.lhs_sum           = rep.lhs_terms.sum();
    rep.lambda_sum        = rep.lambda_terms.sum();
    rep.vector_sum        = rep.vector_terms.sum();
    rep.angle_sum         = rep.angle_terms.sum();
    rep.bound_literal     = static_cast<double>(K) *
                        (min_gap > 0.0 ? std::min(2.0 * epsilon, 2.0 * epsilon / min_gap) : 2.0 * epsilon);
    rep.worst_term_slack = (rep.lambda_terms + rep.vector_terms - rep.lhs_terms).minCoeff();
    rep.per_term_holds   = rep.worst_term_slack >= -tol;
    rep.total_holds      = rep.lhs_sum <= rep.lambda_sum + rep.vector_sum + tol;
    return rep;
}

} // namespace randghep
