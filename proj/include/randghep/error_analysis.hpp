#pragma once

// Error estimators and bounds for the randomized GHEP solvers, plus dense
// reference oracles. The oracles form square roots of B; they exist to check
// the solvers and are never called by them.

#include "randghep/ghep.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace randghep {

/// Dense reference geometry of an SPD matrix B: B^{1/2}, B^{-1/2} from the
/// symmetric eigendecomposition, plus a Cholesky factor for a second route.
class DenseBGeometry {
public:
    explicit DenseBGeometry(const MatrixRef& B)
    {
        detail::require(B.rows() == B.cols(), "DenseBGeometry: B must be square");
        Eigen::SelfAdjointEigenSolver<Matrix> es(detail::symmetrized(B));
        const Vector& d = es.eigenvalues();
        if (!(d.minCoeff() > 0.0))
            throw NotPositiveDefiniteError("B is not positive definite");
        const Matrix& V = es.eigenvectors();
        sqrt_     = V * d.cwiseSqrt().asDiagonal() * V.transpose();
        inv_sqrt_ = V * d.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
        b_norm_    = d.maxCoeff();
        binv_norm_ = 1.0 / d.minCoeff();
        llt_.compute(B);
        if (llt_.info() != Eigen::Success)
            throw NotPositiveDefiniteError("B is not positive definite");
    }

    const Matrix& sqrt() const { return sqrt_; }
    const Matrix& inv_sqrt() const { return inv_sqrt_; }
    const Eigen::LLT<Matrix>& cholesky() const { return llt_; }
    double b_norm() const { return b_norm_; }
    double binv_norm() const { return binv_norm_; }
    double kappa() const { return b_norm_ * binv_norm_; }

    /// |M|_B = |B^{1/2} M B^{-1/2}|_2.
    double b_norm_of(const MatrixRef& M) const { return detail::spectral_norm(sqrt_ * M * inv_sqrt_); }

    /// Same quantity through the Cholesky congruence |L^T M L^{-T}|_2.
    double b_norm_of_cholesky(const MatrixRef& M) const
    {
        const Matrix LtM = llt_.matrixU() * M;
        return detail::spectral_norm(llt_.matrixU().solve<Eigen::OnTheRight>(LtM));
    }

private:
    Matrix sqrt_, inv_sqrt_;
    Eigen::LLT<Matrix> llt_;
    double b_norm_    = 0.0;
    double binv_norm_ = 0.0;
};

inline double b_norm(const MatrixRef& M, const MatrixRef& B) { return DenseBGeometry(B).b_norm_of(M); }

struct SpectrumReference {
    Vector lambdas;  ///< all pencil eigenvalues, descending
    Vector sigmas_B; ///< generalized singular values of C = B^{-1} A, descending
    double binv_norm = 0.0;
    double b_norm    = 0.0;
    double kappa_B   = 0.0;
};

struct GhepOracle {
    SpectrumReference spectrum;
    Matrix X; ///< eigenvectors, X^T B X = I, column j pairs with lambdas(j)
};

/// Exact GHEP through the Cholesky transform B = L L^T, L^{-1} A L^{-T} y = lambda y,
/// x = L^{-T} y. sigma_B(C) are the singular values of B^{1/2} C = B^{-1/2} A.
inline GhepOracle dense_ghep_oracle(const MatrixRef& A, const MatrixRef& B)
{
    detail::require(A.rows() == A.cols() && B.rows() == B.cols() && A.rows() == B.rows(),
                    "dense_ghep_oracle: shape mismatch");
    const DenseBGeometry geo(B);
    const auto& llt = geo.cholesky();
    const Matrix LiA   = llt.matrixL().solve(A);
    const Matrix Ct    = llt.matrixL().solve(LiA.transpose()); // L^{-1} A L^{-T} (A symmetric)
    auto [w, Y]        = detail::sorted_eig(Ct, EigenOrder::algebraic);

    GhepOracle out;
    out.X                  = llt.matrixU().solve(Y);
    out.spectrum.lambdas   = w;
    out.spectrum.sigmas_B  = Eigen::BDCSVD<Matrix>(geo.inv_sqrt() * A).singularValues();
    out.spectrum.binv_norm = geo.binv_norm();
    out.spectrum.b_norm    = geo.b_norm();
    out.spectrum.kappa_B   = geo.kappa();
    return out;
}

/// Exact range error f = |(I - Q Q^T B) C|_B of a B-orthonormal basis, for a
/// fixed dense pencil. Uses B^{1/2} C B^{-1/2} = B^{-1/2} A B^{-1/2} =: S, so
/// f = |(I - Z Z^T) S|_2 with Z = B^{1/2} Q.
class RangeErrorOracle {
public:
    RangeErrorOracle(const MatrixRef& A, const MatrixRef& B) : geo_(B)
    {
        S_ = detail::symmetrized(geo_.inv_sqrt() * A * geo_.inv_sqrt());
    }

    double operator()(const MatrixRef& Q) const
    {
        detail::require(Q.rows() == S_.rows(), "range_error_exact: Q has wrong row count");
        if (Q.cols() == 0)
            return detail::spectral_norm(S_);
        const Matrix Z = geo_.sqrt() * Q;
        return detail::spectral_norm(S_ - Z * (Z.transpose() * S_));
    }

    const DenseBGeometry& geometry() const { return geo_; }

private:
    DenseBGeometry geo_;
    Matrix S_;
};

inline double range_error_exact(const MatrixRef& A, const MatrixRef& B, const MatrixRef& Q)
{
    return RangeErrorOracle(A, B)(Q);
}

/// (max_i |q_i|_2)^2 over B-orthonormal columns: a lower bound on |B^{-1}|_2.
inline double binv_norm_crude(const MatrixRef& Q)
{
    if (Q.cols() == 0)
        return 0.0;
    return Q.colwise().squaredNorm().maxCoeff();
}

enum class BinvSource { exact_binv_norm, crude_lower_bound };

inline std::string_view to_string(BinvSource s)
{
    return s == BinvSource::exact_binv_norm ? "exact_binv_norm" : "crude_lower_bound";
}

struct ErrorEstimate {
    double e                 = 0.0;
    double alpha             = 0.0;
    Index r_probes           = 0;
    double probability_floor = 0.0;
    double binv_norm_used    = 0.0;
    BinvSource source        = BinvSource::crude_lower_bound;
    double max_probe_b_norm  = 0.0;
};

namespace detail {

inline void check_estimator_args(double alpha, Index r_probes)
{
    require(alpha > 1.0, "posterior_estimate: alpha must exceed 1");
    require(r_probes >= 1, "posterior_estimate: need at least one probe");
}

/// Largest |(I - Q Q^T B) z_i|_B over the columns of CW = C * probes.
inline double max_residual_b_norm(const SpdOperator& B, const MatrixRef& Q, const MatrixRef& BQ,
                                  const MatrixRef& CW)
{
    Matrix Z = CW;
    if (Q.cols() > 0)
        Z -= Q * (BQ.transpose() * CW);
    const Matrix BZ = B.apply(Z);
    return std::sqrt(std::max(0.0, (Z.array() * BZ.array()).colwise().sum().maxCoeff()));
}

inline ErrorEstimate finish_estimate(double max_norm, double alpha, Index r_probes, const MatrixRef& Q,
                                     std::optional<double> binv_norm)
{
    ErrorEstimate est;
    est.alpha             = alpha;
    est.r_probes          = r_probes;
    est.probability_floor = 1.0 - std::pow(alpha, -static_cast<double>(r_probes));
    if (binv_norm) {
        est.binv_norm_used = *binv_norm;
        est.source         = BinvSource::exact_binv_norm;
    } else {
        est.binv_norm_used = binv_norm_crude(Q);
        est.source         = BinvSource::crude_lower_bound;
    }
    est.max_probe_b_norm = max_norm;
    est.e                = alpha * std::sqrt(2.0 * est.binv_norm_used / std::numbers::pi) * max_norm;
    return est;
}

} // namespace detail

/// Probabilistic upper bound on |(I - Q Q^T B) C|_B from r fresh Gaussian
/// probes; it holds with probability at least 1 - alpha^{-r}. Without a value
/// for |B^{-1}|_2 the crude lower bound from the columns of Q is substituted,
/// and the estimate is then no longer guaranteed.
inline ErrorEstimate posterior_estimate(const GhepPencil& pencil, const MatrixRef& Q, const MatrixRef& BQ,
                                        double alpha, Index r_probes, std::uint64_t seed,
                                        std::optional<double> binv_norm = std::nullopt)
{
    detail::check_estimator_args(alpha, r_probes);
    pencil.validate();
    detail::require(Q.rows() == pencil.dim() && BQ.rows() == Q.rows() && BQ.cols() == Q.cols(),
                    "posterior_estimate: basis shape mismatch");
    const Matrix probes = gaussian_matrix(pencil.dim(), r_probes, seed);
    const Matrix CW     = pencil.apply_c(probes);
    const double mx     = detail::max_residual_b_norm(*pencil.B, Q, BQ, CW);
    return detail::finish_estimate(mx, alpha, r_probes, Q, binv_norm);
}

struct GrowthStep {
    Index columns;
    double estimate;
};

struct AdaptiveRange {
    BOrthoBasis basis;
    ErrorEstimate estimate;
    std::vector<GrowthStep> trajectory;
    bool converged          = false;
    std::uint64_t c_applies = 0; ///< applications of B^{-1} A, sketch and probes together
};

/// Grows an MGS-R range basis in steps of `increment` columns until the
/// posterior estimate falls below `tol`. The probe columns of each round are
/// the next sketch columns of the same Gaussian stream, so when the estimate
/// is too large their products with C are appended to the basis instead of
/// being recomputed.
inline AdaptiveRange adaptive_range(const GhepPencil& pencil, Index initial_columns, double tol, double alpha,
                                    Index r_probes, std::uint64_t seed, Index increment = 10,
                                    std::optional<double> binv_norm = std::nullopt, Index max_columns = 0)
{
    detail::check_estimator_args(alpha, r_probes);
    pencil.validate();
    const Index n = pencil.dim();
    if (max_columns <= 0)
        max_columns = n;
    detail::require(initial_columns >= 1 && initial_columns <= max_columns && max_columns <= n,
                    "adaptive_range: invalid column limits");
    detail::require(increment >= 1, "adaptive_range: increment must be positive");
    detail::require(tol > 0.0, "adaptive_range: tol must be positive");

    AdaptiveRange out;
    Index cols    = initial_columns;
    out.basis     = mgs_w_reorth(pencil.apply_c(gaussian_matrix(n, cols, seed)), *pencil.B);
    out.c_applies = static_cast<std::uint64_t>(cols);

    const Index block = std::max(increment, r_probes);
    while (true) {
        const Matrix CW = pencil.apply_c(gaussian_matrix(n, block, seed, cols));
        out.c_applies += static_cast<std::uint64_t>(block);
        const Matrix Q  = out.basis.compact_Q();
        const Matrix BQ = out.basis.compact_WQ();
        const double mx = detail::max_residual_b_norm(*pencil.B, Q, BQ, CW.leftCols(r_probes));
        out.estimate    = detail::finish_estimate(mx, alpha, r_probes, Q, binv_norm);
        out.trajectory.push_back({cols, out.estimate.e});
        if (out.estimate.e <= tol) {
            out.converged = true;
            break;
        }
        if (cols >= max_columns)
            break;
        const Index add = std::min(increment, max_columns - cols);
        mgs_w_reorth_extend(out.basis, CW.leftCols(add), *pencil.B);
        cols += add;
    }
    return out;
}

/// Expected-error bound for the range finder with r = k + p Gaussian columns:
/// sqrt(|B^{-1}|) [ (1 + sqrt(k/(p-1))) s_{k+1} + e sqrt(k+p)/p (sum_{j>k} s_j^2)^{1/2} ],
/// with s the generalized singular values of C.
inline double apriori_bound(const VectorRef& sigmas_B, Index k, Index p, double binv_norm)
{
    detail::require(p >= 2, "apriori_bound: p must be at least 2");
    detail::require(k >= 1, "apriori_bound: k must be positive");
    detail::require(binv_norm >= 0.0, "apriori_bound: |B^{-1}| must be non-negative");
    if (k >= sigmas_B.size())
        return 0.0;
    const double kd   = static_cast<double>(k);
    const double pd   = static_cast<double>(p);
    const double next = sigmas_B(k);
    const double tail = sigmas_B.tail(sigmas_B.size() - k).norm();
    return std::sqrt(binv_norm) *
           ((1.0 + std::sqrt(kd / (pd - 1.0))) * next + std::numbers::e * std::sqrt(kd + pd) / pd * tail);
}

struct EigenpairBounds {
    double lambda_bound;
    double sine_bound;
    bool gap_degenerate;
};

/// Eigenvalue and B-angle bounds of a Ritz pair given the range error eps and
/// the spectral gap delta: |lambda - lambda~| <= min(2 eps, 4 eps^2 / delta),
/// sin angle_B <= 2 eps / delta (capped at 1). A zero gap leaves only 2 eps.
inline EigenpairBounds eigenpair_bounds(double epsilon, double delta)
{
    detail::require(epsilon >= 0.0, "eigenpair_bounds: epsilon must be non-negative");
    detail::require(delta >= 0.0, "eigenpair_bounds: delta must be non-negative");
    if (delta == 0.0)
        return {2.0 * epsilon, 1.0, true};
    return {std::min(2.0 * epsilon, 4.0 * epsilon * epsilon / delta), std::min(1.0, 2.0 * epsilon / delta), false};
}

/// Gap between approx and every reference eigenvalue other than index j.
inline double spectral_gap(double approx, const VectorRef& reference, Index j)
{
    double gap = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < reference.size(); ++i)
        if (i != j)
            gap = std::min(gap, std::abs(approx - reference(i)));
    return gap;
}

/// Bound on |eig_j(T) - eig_j(T~)| between the two-pass and single-pass
/// projected matrices. +inf when F is singular.
inline double single_pass_bound(double epsilon, double kappa_B, double sigma_max_Omega, double sigma_min_F)
{
    detail::require(epsilon >= 0.0 && kappa_B >= 1.0 - 1e-12 && sigma_max_Omega >= 0.0 && sigma_min_F >= 0.0,
                    "single_pass_bound: invalid arguments");
    if (sigma_min_F == 0.0)
        return std::numeric_limits<double>::infinity();
    return 2.0 * epsilon * std::sqrt(kappa_B) * sigma_max_Omega * sigma_max_Omega / (sigma_min_F * sigma_min_F);
}

/// Angle between x and y in the B-inner product, in [0, pi/2].
inline double b_angle(const VectorRef& x, const VectorRef& y, const SpdOperator& B)
{
    detail::require(x.size() == B.dim() && y.size() == B.dim(), "b_angle: shape mismatch");
    const Vector Bx  = B.apply(x);
    const double xx  = x.dot(Bx);
    const Vector By  = B.apply(y);
    const double yy  = y.dot(By);
    if (!(xx > 0.0) || !(yy > 0.0))
        throw ConfigError("b_angle: zero vector");
    const double xy  = y.dot(Bx);
    // sin from the B-orthogonal residual keeps small angles accurate.
    const Vector res = y - (xy / xx) * x;
    const double rr  = std::max(0.0, res.dot(Vector(B.apply(res))));
    return std::atan2(std::sqrt(rr / yy), std::abs(xy) / std::sqrt(xx * yy));
}

} // namespace randghep
