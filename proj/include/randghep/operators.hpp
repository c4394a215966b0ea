#pragma once

// Matrix-free operator contracts. Every solver in the library sees A, B and
// B^{-1} only through block application, never through entries or square
// roots of B.

#include "randghep/types.hpp"

#include <atomic>
#include <cmath>
#include <memory>
#include <string>

namespace randghep {

/// A linear map R^{cols} -> R^{rows} applied to blocks of column vectors.
///
/// `apply` increments the matvec counter by the number of columns it receives.
/// Implementations override `do_apply` (and optionally `do_apply_transpose`).
/// Operators are immutable after construction; the counters are atomic so a
/// single operator can be shared between threads.
class LinearMap {
public:
    LinearMap(Index rows, Index cols) : rows_(rows), cols_(cols)
    {
        detail::require(rows > 0 && cols > 0, "LinearMap: dimensions must be positive");
    }

    LinearMap(const LinearMap&)            = delete;
    LinearMap& operator=(const LinearMap&) = delete;
    virtual ~LinearMap()                   = default;

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }

    Matrix apply(const MatrixRef& X) const
    {
        detail::require(X.rows() == cols_, "LinearMap::apply: block has " + std::to_string(X.rows()) +
                                               " rows, operator expects " + std::to_string(cols_));
        applies_.fetch_add(static_cast<std::uint64_t>(X.cols()), std::memory_order_relaxed);
        return do_apply(X);
    }

    Matrix apply_transpose(const MatrixRef& X) const
    {
        detail::require(X.rows() == rows_, "LinearMap::apply_transpose: shape mismatch");
        if (!has_transpose())
            throw UnsupportedError("LinearMap: operator does not expose transpose application");
        transpose_applies_.fetch_add(static_cast<std::uint64_t>(X.cols()), std::memory_order_relaxed);
        return do_apply_transpose(X);
    }

    virtual bool has_transpose() const { return false; }

    std::uint64_t matvec_count() const noexcept { return applies_.load(std::memory_order_relaxed); }
    std::uint64_t transpose_count() const noexcept
    {
        return transpose_applies_.load(std::memory_order_relaxed);
    }

    virtual void reset_counters() const
    {
        applies_.store(0);
        transpose_applies_.store(0);
    }

protected:
    virtual Matrix do_apply(const MatrixRef& X) const = 0;
    virtual Matrix do_apply_transpose(const MatrixRef&) const
    {
        throw UnsupportedError("LinearMap: operator does not expose transpose application");
    }

private:
    Index rows_;
    Index cols_;
    mutable std::atomic<std::uint64_t> applies_{0};
    mutable std::atomic<std::uint64_t> transpose_applies_{0};
};

/// Symmetric positive definite operator exposing B x and B^{-1} x.
class SpdOperator : public LinearMap {
public:
    explicit SpdOperator(Index n) : LinearMap(n, n) {}

    Index dim() const noexcept { return rows(); }

    Matrix apply_inverse(const MatrixRef& X) const
    {
        detail::require(X.rows() == dim(), "SpdOperator::apply_inverse: shape mismatch");
        solves_.fetch_add(static_cast<std::uint64_t>(X.cols()), std::memory_order_relaxed);
        return do_apply_inverse(X);
    }

    std::uint64_t solve_count() const noexcept { return solves_.load(std::memory_order_relaxed); }

    bool has_transpose() const override { return true; }

    void reset_counters() const override
    {
        LinearMap::reset_counters();
        solves_.store(0);
    }

protected:
    virtual Matrix do_apply_inverse(const MatrixRef& X) const = 0;
    Matrix do_apply_transpose(const MatrixRef& X) const override { return do_apply(X); }

private:
    mutable std::atomic<std::uint64_t> solves_{0};
};

using LinearMapPtr = std::shared_ptr<const LinearMap>;
using SpdPtr       = std::shared_ptr<const SpdOperator>;

/// Dense matrix behind the LinearMap contract.
class DenseMap final : public LinearMap {
public:
    explicit DenseMap(Matrix M) : LinearMap(M.rows(), M.cols()), M_(std::move(M)) {}

    const Matrix& matrix() const noexcept { return M_; }
    bool has_transpose() const override { return true; }

protected:
    Matrix do_apply(const MatrixRef& X) const override { return M_ * X; }
    Matrix do_apply_transpose(const MatrixRef& X) const override { return M_.transpose() * X; }

private:
    Matrix M_;
};

inline bool is_symmetric(const MatrixRef& M, double rel_tol = 1e-13)
{
    if (M.rows() != M.cols())
        return false;
    const double scale = M.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return true;
    return (M - M.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// Dense SPD matrix; B^{-1} is served by a Cholesky factorization computed
/// once at construction.
class DenseSpd final : public SpdOperator {
public:
    explicit DenseSpd(Matrix M) : SpdOperator(M.rows()), M_(std::move(M))
    {
        detail::require(M_.rows() == M_.cols(), "dense_spd: matrix must be square");
        detail::require(is_symmetric(M_, 1e-12), "dense_spd: matrix is not symmetric");
        llt_.compute(M_);
        if (llt_.info() != Eigen::Success)
            throw NotPositiveDefiniteError("dense_spd: Cholesky factorization met a non-positive pivot");
    }

    const Matrix& matrix() const noexcept { return M_; }

protected:
    Matrix do_apply(const MatrixRef& X) const override { return M_ * X; }
    Matrix do_apply_inverse(const MatrixRef& X) const override { return llt_.solve(X); }

private:
    Matrix M_;
    Eigen::LLT<Matrix> llt_;
};

inline SpdPtr dense_spd(Matrix M) { return std::make_shared<DenseSpd>(std::move(M)); }

/// Symmetric tridiagonal SPD matrix with an O(n) Cholesky solve.
class TridiagonalSpd final : public SpdOperator {
public:
    /// `diag` has n entries, `off` has n-1 (the sub/super diagonal).
    TridiagonalSpd(Vector diag, Vector off) : SpdOperator(diag.size()), d_(std::move(diag)), e_(std::move(off))
    {
        const Index n = d_.size();
        detail::require(e_.size() == n - 1, "TridiagonalSpd: off-diagonal must have n-1 entries");
        // B = L L^T with L lower bidiagonal (l_ii = c_i, l_{i+1,i} = s_i).
        c_.resize(n);
        s_.resize(std::max<Index>(n - 1, 0));
        for (Index i = 0; i < n; ++i) {
            double piv = d_(i);
            if (i > 0)
                piv -= s_(i - 1) * s_(i - 1);
            if (!(piv > 0.0))
                throw NotPositiveDefiniteError("TridiagonalSpd: non-positive pivot at row " + std::to_string(i));
            c_(i) = std::sqrt(piv);
            if (i + 1 < n)
                s_(i) = e_(i) / c_(i);
        }
    }

    const Vector& diagonal() const noexcept { return d_; }
    const Vector& off_diagonal() const noexcept { return e_; }

    Matrix dense() const
    {
        const Index n = d_.size();
        Matrix M      = Matrix::Zero(n, n);
        M.diagonal()  = d_;
        for (Index i = 0; i + 1 < n; ++i)
            M(i, i + 1) = M(i + 1, i) = e_(i);
        return M;
    }

protected:
    Matrix do_apply(const MatrixRef& X) const override
    {
        const Index n = d_.size();
        Matrix Y      = d_.asDiagonal() * X;
        if (n > 1) {
            Y.topRows(n - 1) += e_.asDiagonal() * X.bottomRows(n - 1);
            Y.bottomRows(n - 1) += e_.asDiagonal() * X.topRows(n - 1);
        }
        return Y;
    }

    Matrix do_apply_inverse(const MatrixRef& X) const override
    {
        const Index n = d_.size();
        Matrix Y      = X;
        // L z = x
        for (Index i = 0; i < n; ++i) {
            if (i > 0)
                Y.row(i) -= s_(i - 1) * Y.row(i - 1);
            Y.row(i) /= c_(i);
        }
        // L^T y = z
        for (Index i = n - 1; i >= 0; --i) {
            if (i + 1 < n)
                Y.row(i) -= s_(i) * Y.row(i + 1);
            Y.row(i) /= c_(i);
        }
        return Y;
    }

private:
    Vector d_, e_, c_, s_;
};

class IdentitySpd final : public SpdOperator {
public:
    explicit IdentitySpd(Index n) : SpdOperator(n) {}

protected:
    Matrix do_apply(const MatrixRef& X) const override { return X; }
    Matrix do_apply_inverse(const MatrixRef& X) const override { return X; }
};

/// W = B^{-1} seen as an SPD operator. Applications are forwarded to B, so B's
/// own solve/apply counters record the work.
class InverseSpd final : public SpdOperator {
public:
    explicit InverseSpd(SpdPtr B) : SpdOperator(B->dim()), B_(std::move(B)) {}

protected:
    Matrix do_apply(const MatrixRef& X) const override { return B_->apply_inverse(X); }
    Matrix do_apply_inverse(const MatrixRef& X) const override { return B_->apply(X); }

private:
    SpdPtr B_;
};

/// Generic map backed by callables; used for composed operators such as
/// A = M Gamma M.
template <typename ApplyFn>
class FunctionMap final : public LinearMap {
public:
    FunctionMap(Index rows, Index cols, ApplyFn fn) : LinearMap(rows, cols), fn_(std::move(fn)) {}

protected:
    Matrix do_apply(const MatrixRef& X) const override { return fn_(X); }

private:
    ApplyFn fn_;
};

template <typename ApplyFn>
LinearMapPtr make_function_map(Index rows, Index cols, ApplyFn fn)
{
    return std::make_shared<FunctionMap<ApplyFn>>(rows, cols, std::move(fn));
}

/// The pencil (A, B) consumed by the GHEP solvers. `C` optionally provides a
/// direct application of B^{-1}A that avoids the B-solve.
struct GhepPencil {
    LinearMapPtr A;
    SpdPtr B;
    LinearMapPtr C;

    Index dim() const { return B->dim(); }

    void validate() const
    {
        detail::require(A && B, "GhepPencil: A and B must be set");
        detail::require(A->rows() == A->cols(), "GhepPencil: A must be square");
        detail::require(A->rows() == B->dim(), "GhepPencil: A and B dimensions differ");
        if (C)
            detail::require(C->rows() == B->dim() && C->cols() == B->dim(), "GhepPencil: C has wrong shape");
    }

    /// Y = B^{-1} A X through the A and B^{-1} contracts.
    Matrix apply_c(const MatrixRef& X) const { return B->apply_inverse(A->apply(X)); }
};

inline GhepPencil dense_pencil(Matrix A, Matrix B)
{
    detail::require(is_symmetric(A, 1e-12), "dense_pencil: A is not symmetric");
    return GhepPencil{std::make_shared<DenseMap>(std::move(A)), dense_spd(std::move(B)), nullptr};
}

/// Eigenvalue of Ax = lambda Bx recovered from theta of the shifted pencil
/// Ax = theta (alpha A + beta B) x.
inline double spectral_transform(double theta, double alpha, double beta)
{
    const double denom = 1.0 - theta * alpha;
    if (denom == 0.0)
        throw PoleError("spectral_transform: 1 - theta*alpha = 0 (eigenvalue at infinity)");
    return theta * beta / denom;
}

} // namespace randghep
