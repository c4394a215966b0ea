#pragma once

// Randomized solvers for A x = lambda B x returning B-orthonormal eigenpairs,
// A ~ (BU) Lambda (BU)^T, with exact matvec accounting.

#include "randghep/sketch.hpp"

#include <limits>

namespace randghep {

enum class GhepMethod { two_pass, single_pass, nystrom };

inline std::string_view to_string(GhepMethod m)
{
    switch (m) {
    case GhepMethod::two_pass: return "two-pass";
    case GhepMethod::single_pass: return "single-pass";
    case GhepMethod::nystrom: return "nystrom";
    }
    return "?";
}

inline GhepMethod parse_ghep_method(std::string_view s)
{
    if (s == "two-pass" || s == "two_pass")
        return GhepMethod::two_pass;
    if (s == "single-pass" || s == "single_pass")
        return GhepMethod::single_pass;
    if (s == "nystrom")
        return GhepMethod::nystrom;
    throw ConfigError("unknown method '" + std::string(s) + "'");
}

/// Operator applications spent by one solve. The first three fields follow the
/// cost model with no re-orthogonalization; extra applications from
/// re-orthogonalization sweeps are reported separately.
struct MatvecCounts {
    std::uint64_t a_applies        = 0;
    std::uint64_t b_applies        = 0;
    std::uint64_t b_solves         = 0;
    std::uint64_t reorth_b_applies = 0;
    std::uint64_t reorth_b_solves  = 0;
    std::uint64_t c_applies        = 0; ///< direct B^{-1}A applications
    std::uint64_t probe_a_applies  = 0; ///< symmetry probe, not part of the algorithm

    bool operator==(const MatvecCounts&) const = default;
};

struct GhepDiagnostics {
    Index sketch_columns    = 0;
    Index effective_rank    = 0; ///< independent sketch columns after B-orthonormalization
    bool direct_c           = false;
    double symmetry_defect  = 0.0;
    double sigma_min_F      = std::numeric_limits<double>::quiet_NaN();
    double sigma_max_F      = std::numeric_limits<double>::quiet_NaN();
    double sigma_max_Omega  = std::numeric_limits<double>::quiet_NaN();
    bool cholesky_fallback  = false;
    Index dropped_dims      = 0;
};

struct GhepSolution {
    Matrix U;      ///< n x k, U^T B U = I
    Vector lambda; ///< descending
    GhepMethod method = GhepMethod::two_pass;
    MatvecCounts counts;
    GhepDiagnostics diagnostics;
    std::uint64_t seed = 0;
    Index k = 0, p = 0;

    Matrix Q;  ///< B-orthonormal range basis the solution was built from
    Matrix BQ; ///< cached B Q
};

struct GhepOptions {
    QrAlgorithm qr        = QrAlgorithm::mgs_reorth;
    EigenOrder order      = EigenOrder::algebraic;
    bool check_symmetry   = true;
    double symmetry_tol   = 1e-8;
    bool use_direct_c     = false; ///< two-pass / Nystrom only
};

/// Relative asymmetry max |x^T A y - y^T A x| / (|Ax||y| + |Ay||x|) over random
/// pairs. Costs 2 * pairs applications of A.
inline double symmetry_defect(const LinearMap& A, std::uint64_t seed, Index pairs = 3)
{
    const Matrix X  = gaussian_matrix(A.cols(), pairs, derive_seed(seed, 0x5359'4d4dULL));
    const Matrix Y  = gaussian_matrix(A.cols(), pairs, derive_seed(seed, 0x5359'4d4eULL));
    const Matrix AX = A.apply(X);
    const Matrix AY = A.apply(Y);
    double worst    = 0.0;
    for (Index i = 0; i < pairs; ++i) {
        const double lhs   = Y.col(i).dot(AX.col(i));
        const double rhs   = X.col(i).dot(AY.col(i));
        const double scale = AX.col(i).norm() * Y.col(i).norm() + AY.col(i).norm() * X.col(i).norm();
        if (scale > 0.0)
            worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return worst;
}

namespace detail {

inline void prepare(const GhepPencil& pencil, const SketchConfig& cfg, const GhepOptions& opts,
                    GhepSolution& sol)
{
    pencil.validate();
    cfg.validate(pencil.dim());
    sol.seed = cfg.seed;
    sol.k    = cfg.k;
    sol.p    = cfg.p;
    sol.diagnostics.sketch_columns = cfg.r();
    if (opts.check_symmetry) {
        sol.diagnostics.symmetry_defect = symmetry_defect(*pencil.A, cfg.seed);
        sol.counts.probe_a_applies      = 6;
        if (sol.diagnostics.symmetry_defect > opts.symmetry_tol)
            throw ConfigError("A is not symmetric (probe defect " +
                              std::to_string(sol.diagnostics.symmetry_defect) + ")");
    }
}

inline void record_range(const RangeResult& range, GhepSolution& sol)
{
    sol.counts.a_applies += range.a_applies;
    sol.counts.b_solves += range.b_solves;
    sol.counts.c_applies += range.c_applies;
    sol.counts.b_applies += range.basis.w_applies;
    sol.counts.reorth_b_applies += range.basis.reorth_w_applies;
    sol.diagnostics.direct_c       = range.c_applies > 0;
    sol.diagnostics.effective_rank = range.basis.effective_rank();
    sol.Q                          = range.basis.compact_Q();
    sol.BQ                         = range.basis.compact_WQ();
}

inline void keep_leading(GhepSolution& sol, const Vector& w, const Matrix& U, Index k)
{
    const Index kk = std::min<Index>(k, w.size());
    sol.lambda     = w.head(kk);
    sol.U          = U.leftCols(kk);
}

/// T~ = (Omega^T B Q)^+ (Omega^T A Omega) (Q^T B Omega)^+ from sketch data only.
struct SinglePassProjection {
    Matrix T_tilde;
    double sigma_min_F;
    double sigma_max_F;
};

inline SinglePassProjection single_pass_projection(const MatrixRef& BQ, const MatrixRef& Omega,
                                                   const MatrixRef& Ybar)
{
    const Matrix F = BQ.transpose() * Omega; // q x r
    Eigen::JacobiSVD<Matrix> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    SinglePassProjection out{Matrix{}, s(s.size() - 1), s(0)};
    if (!(out.sigma_min_F > 1e-10 * out.sigma_max_F))
        throw IllConditionedError("single-pass: F = Q^T B Omega is ill-conditioned (sigma_min/sigma_max = " +
                                  std::to_string(out.sigma_min_F / out.sigma_max_F) +
                                  "); use the two-pass solver");
    const Matrix Fpinv = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose(); // r x q
    const Matrix S     = symmetrized(Omega.transpose() * Ybar);
    out.T_tilde        = symmetrized(Fpinv.transpose() * S * Fpinv);
    return out;
}

/// Pivoted Cholesky T ~ G G^T stopping once the largest remaining pivot is
/// <= tol. Returns G with one column per accepted pivot.
inline Matrix pivoted_cholesky(const MatrixRef& T, double tol)
{
    const Index n = T.rows();
    Matrix G      = Matrix::Zero(n, n);
    Vector d      = T.diagonal();
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    Index m = 0;
    for (; m < n; ++m) {
        Index piv   = -1;
        double best = tol;
        for (Index i = 0; i < n; ++i)
            if (!used[static_cast<std::size_t>(i)] && d(i) > best) {
                best = d(i);
                piv  = i;
            }
        if (piv < 0)
            break;
        used[static_cast<std::size_t>(piv)] = true;
        Vector g = T.col(piv) - G.leftCols(m) * G.row(piv).head(m).transpose();
        g /= std::sqrt(best);
        for (Index i = 0; i < n; ++i)
            if (used[static_cast<std::size_t>(i)] && i != piv)
                g(i) = 0.0;
        G.col(m) = g;
        d -= g.cwiseAbs2();
    }
    return G.leftCols(m);
}

} // namespace detail

/// Two-pass solver: T = Q^T A Q from a second round of A applications.
inline GhepSolution ghep_two_pass(const GhepPencil& pencil, const SketchConfig& cfg, const GhepOptions& opts = {})
{
    GhepSolution sol;
    sol.method = GhepMethod::two_pass;
    detail::prepare(pencil, cfg, opts, sol);

    const RangeResult range = range_finder_b(pencil, cfg, opts.qr, opts.use_direct_c);
    detail::record_range(range, sol);

    const Matrix AQ = pencil.A->apply(sol.Q);
    sol.counts.a_applies += static_cast<std::uint64_t>(sol.Q.cols());
    auto [w, S] = detail::sorted_eig(sol.Q.transpose() * AQ, opts.order);
    detail::keep_leading(sol, w, sol.Q * S, cfg.k);
    return sol;
}

/// Single-pass solver: T is reconstructed from Omega, A Omega and the cached
/// B Q, so A is applied only while sketching.
inline GhepSolution ghep_single_pass(const GhepPencil& pencil, const SketchConfig& cfg,
                                     const GhepOptions& opts = {})
{
    GhepSolution sol;
    sol.method = GhepMethod::single_pass;
    detail::prepare(pencil, cfg, opts, sol);

    const RangeResult range = range_finder_b(pencil, cfg, opts.qr, false);
    detail::record_range(range, sol);

    const auto proj                  = detail::single_pass_projection(sol.BQ, range.Omega, range.Ybar);
    sol.diagnostics.sigma_min_F      = proj.sigma_min_F;
    sol.diagnostics.sigma_max_F      = proj.sigma_max_F;
    sol.diagnostics.sigma_max_Omega  = detail::spectral_norm(range.Omega);
    auto [w, S] = detail::sorted_eig(proj.T_tilde, opts.order);
    detail::keep_leading(sol, w, sol.Q * S, cfg.k);
    return sol;
}

/// Nystrom solver: A ~ A Q (Q^T A Q)^{-1} Q^T A, converted to B-orthonormal
/// form through a B^{-1}-weighted QR of M = A Q L^{-T}.
inline GhepSolution ghep_nystrom(const GhepPencil& pencil, const SketchConfig& cfg, const GhepOptions& opts = {})
{
    GhepSolution sol;
    sol.method = GhepMethod::nystrom;
    detail::prepare(pencil, cfg, opts, sol);

    const RangeResult range = range_finder_b(pencil, cfg, opts.qr, opts.use_direct_c);
    detail::record_range(range, sol);

    const Matrix AQ = pencil.A->apply(sol.Q);
    sol.counts.a_applies += static_cast<std::uint64_t>(sol.Q.cols());
    const Matrix T = detail::symmetrized(sol.Q.transpose() * AQ);

    const double tol = 1e-12 * std::abs(T.trace()) / static_cast<double>(cfg.r());
    Matrix M;
    Eigen::LLT<Matrix> llt(T);
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
        const Vector d = Matrix(llt.matrixL()).diagonal();
        ok             = d.cwiseAbs2().minCoeff() > tol;
    }
    if (ok) {
        // M = A Q L^{-T}
        M = llt.matrixU().solve<Eigen::OnTheRight>(AQ);
    } else {
        // T ~ G G^T on its numerically positive part; T^+ ~ G^{+T} G^+.
        const Matrix G = detail::pivoted_cholesky(T, tol);
        if (G.cols() == 0)
            throw NumericalError("nystrom: Q^T A Q has no positive part");
        sol.diagnostics.cholesky_fallback = true;
        sol.diagnostics.dropped_dims      = T.rows() - G.cols();
        const Matrix Gpt = G * (G.transpose() * G).llt().solve(Matrix::Identity(G.cols(), G.cols()));
        M                = AQ * Gpt;
    }

    const InverseSpd W(pencil.B);
    const BOrthoBasis mb = weighted_qr(M, W, opts.qr);
    sol.counts.b_solves += mb.w_applies;
    sol.counts.reorth_b_solves += mb.reorth_w_applies;

    const Matrix RM = mb.compact_R();
    Eigen::JacobiSVD<Matrix> svd(RM, Eigen::ComputeThinU);
    const Vector sig = svd.singularValues();
    const Matrix U   = mb.compact_WQ() * svd.matrixU(); // B^{-1} Q_M U_M, B-orthonormal
    detail::keep_leading(sol, sig.cwiseAbs2(), U, cfg.k);
    return sol;
}

inline GhepSolution ghep_solve(const GhepPencil& pencil, const SketchConfig& cfg, GhepMethod method,
                               const GhepOptions& opts = {})
{
    switch (method) {
    case GhepMethod::two_pass: return ghep_two_pass(pencil, cfg, opts);
    case GhepMethod::single_pass: return ghep_single_pass(pencil, cfg, opts);
    case GhepMethod::nystrom: return ghep_nystrom(pencil, cfg, opts);
    }
    throw ConfigError("ghep_solve: unknown method");
}

/// (B U) Lambda (B U)^T X using only applications of B.
inline Matrix low_rank_apply(const GhepSolution& sol, const SpdOperator& B, const MatrixRef& X)
{
    detail::require(X.rows() == B.dim() && sol.U.rows() == B.dim(), "low_rank_apply: shape mismatch");
    const Matrix BU = B.apply(sol.U);
    return BU * (sol.lambda.asDiagonal() * (BU.transpose() * X));
}

/// T = Q^T A Q and its single-pass reconstruction T~ built from the same sketch,
/// together with the singular values entering the single-pass error bound.
struct ProjectedPair {
    Matrix T;
    Matrix T_tilde;
    double sigma_max_Omega;
    double sigma_min_F;
    Matrix Q;
    Matrix BQ;
};

inline ProjectedPair projected_pair(const GhepPencil& pencil, const SketchConfig& cfg,
                                    QrAlgorithm qr = QrAlgorithm::mgs_reorth)
{
    const RangeResult range = range_finder_b(pencil, cfg, qr, false);
    ProjectedPair out;
    out.Q           = range.basis.compact_Q();
    out.BQ          = range.basis.compact_WQ();
    out.T           = detail::symmetrized(out.Q.transpose() * pencil.A->apply(out.Q));
    const auto proj = detail::single_pass_projection(out.BQ, range.Omega, range.Ybar);
    out.T_tilde     = proj.T_tilde;
    out.sigma_min_F = proj.sigma_min_F;
    out.sigma_max_Omega = detail::spectral_norm(range.Omega);
    return out;
}

} // namespace randghep
