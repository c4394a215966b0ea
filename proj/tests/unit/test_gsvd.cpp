#include "randghep/randghep.hpp"
#include "../support/fixtures.hpp"

#include <gtest/gtest.h>

using namespace randghep;
namespace rt = randghep::testing;

TEST(Gsvd, IdentityWeightsRecoverOrdinarySingularValues)
{
    const Matrix A = gaussian_matrix(25, 3, 1) * gaussian_matrix(3, 18, 2);
    const DenseMap op{A};
    const IdentitySpd S(25), T(18);
    const auto g = randomized_gsvd(op, S, T, SketchConfig{3, 3, 3});
    const auto s = randomized_svd(op, SketchConfig{3, 3, 4});
    EXPECT_LE((g.sigma - s.sigma).cwiseAbs().maxCoeff(), 1e-11 * s.sigma(0));
    const Vector exact = Eigen::JacobiSVD<Matrix>(A).singularValues().head(3);
    EXPECT_LE((g.sigma - exact).cwiseAbs().maxCoeff(), 1e-11 * exact(0));
}

TEST(Gsvd, ExactRankWeightedFactorization)
{
    const Index m = 30, n = 20;
    const Matrix Sm = rt::random_spd(m, 100.0, 5);
    const Matrix Tm = rt::random_spd(n, 50.0, 6);
    const Matrix U0 = rt::b_orthonormalize(gaussian_matrix(m, 3, 7), Sm);
    const Matrix V0 = rt::b_orthonormalize(gaussian_matrix(n, 3, 8), Tm);
    const Vector s0 = (Vector(3) << 4.0, 2.0, 0.5).finished();
    const Matrix A  = U0 * s0.asDiagonal() * V0.transpose() * Tm;
    const DenseMap op{A};
    const DenseSpd S{Sm}, T{Tm};
    const auto g = randomized_gsvd(op, S, T, SketchConfig{3, 4, 9});
    EXPECT_LE(rt::max_relative_error(s0, g.sigma), 1e-10);
    EXPECT_LE(rt::b_orthonormality_defect(g.U, Sm), 1e-10);
    EXPECT_LE(rt::b_orthonormality_defect(g.V, Tm), 1e-10);
    EXPECT_LE((A * g.V - g.U * g.sigma.asDiagonal()).norm(), 1e-9 * s0(0));
    EXPECT_LE((g.U * g.sigma.asDiagonal() * g.V.transpose() * Tm - A).norm(), 1e-9 * A.norm());
}

TEST(Gsvd, SingularValuesAreStationaryRatios)
{
    const Matrix A  = gaussian_matrix(15, 10, 10);
    const Matrix Sm = rt::random_spd(15, 10.0, 11);
    const Matrix Tm = rt::random_spd(10, 10.0, 12);
    const DenseMap op{A};
    const DenseSpd S{Sm}, T{Tm};
    const auto g = randomized_gsvd(op, S, T, SketchConfig{10, 0, 13});
    for (Index j = 0; j < g.sigma.size(); ++j) {
        const Vector v  = g.V.col(j);
        const Vector Av = A * v;
        const double ratio = std::sqrt(Av.dot(Sm * Av) / v.dot(Tm * v));
        EXPECT_NEAR(ratio, g.sigma(j), 1e-10 * g.sigma(0));
    }
}

TEST(GsvdPairValues, DiagonalPair)
{
    const Matrix A = Matrix::Identity(2, 2);
    const Matrix B = (Matrix(2, 2) << 2.0, 0.0, 0.0, 4.0).finished();
    const Vector s = gsvd_pair_values(A, B, SketchConfig{2, 0, 1});
    EXPECT_NEAR(s(0), 0.5, 1e-14);
    EXPECT_NEAR(s(1), 0.25, 1e-14);
}

TEST(GsvdPairValues, ScalingA)
{
    const Matrix A = gaussian_matrix(8, 5, 14);
    const Matrix B = gaussian_matrix(7, 5, 15);
    const Vector s1 = gsvd_pair_values(A, B, SketchConfig{5, 0, 16});
    const Vector s3 = gsvd_pair_values(3.0 * A, B, SketchConfig{5, 0, 16});
    EXPECT_LE((s3 - 3.0 * s1).cwiseAbs().maxCoeff(), 1e-11 * s3(0));
}

TEST(GsvdPairValues, RankDeficientBIsUnsupported)
{
    Matrix B = gaussian_matrix(6, 4, 17);
    B.col(3) = B.col(0) + B.col(1);
    EXPECT_THROW(gsvd_pair_values(gaussian_matrix(5, 4, 18), B, SketchConfig{2, 0, 1}), UnsupportedError);
}

TEST(Gsvd, ConfigAndCapabilityErrors)
{
    const DenseMap op{gaussian_matrix(6, 4, 19)};
    const IdentitySpd S(6), T(4);
    EXPECT_THROW(randomized_gsvd(op, S, T, SketchConfig{3, 2, 1}), ConfigError);
    const auto fm = make_function_map(6, 4, [](const MatrixRef& X) -> Matrix { return Matrix::Zero(6, X.cols()); });
    EXPECT_THROW(randomized_gsvd(*fm, S, T, SketchConfig{2, 1, 1}), UnsupportedError);
}

TEST(Gsvd, ErrorIsBoundedByRowRangeError)
{
    const Index m = 40, n = 30;
    const Matrix U = rt::random_orthonormal(m, n, 20);
    const Matrix V = rt::random_orthonormal(n, n, 21);
    Vector s(n);
    for (Index i = 0; i < n; ++i)
        s(i) = std::pow(0.5, static_cast<double>(i));
    const Matrix A  = U * s.asDiagonal() * V.transpose();
    const Matrix Tm = rt::random_spd(n, 10.0, 22);
    const DenseMap op{A};
    const IdentitySpd S(m);
    const DenseSpd T{Tm};
    const auto g = randomized_gsvd(op, S, T, SketchConfig{6, 6, 23});
    const Matrix F      = g.SQ1.transpose() * A * g.Q2;
    const double tail   = Eigen::JacobiSVD<Matrix>(F).singularValues()(6);
    const double eps_S  = detail::spectral_norm(A - g.Q1 * g.SQ1.transpose() * A);
    const double eps_T  = detail::spectral_norm(A - A * g.Q2 * g.TQ2.transpose());
    const double err    = detail::spectral_norm(A - g.U * g.sigma.asDiagonal() * g.V.transpose() * Tm);
    EXPECT_LE(err, (eps_S + eps_T + tail * std::sqrt(detail::spectral_norm(Tm))) * (1.0 + 1e-10));
    EXPECT_LE(err, 1e-1);
}
