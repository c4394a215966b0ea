#include "randghep/randghep.hpp"
#include "../support/fixtures.hpp"

#include <gtest/gtest.h>

using namespace randghep;
namespace rt = randghep::testing;

namespace {

constexpr GhepMethod kMethods[] = {GhepMethod::two_pass, GhepMethod::single_pass, GhepMethod::nystrom};

Vector lambda3() { return (Vector(3) << 10.0, 5.0, 1.0).finished(); }

} // namespace

TEST(GhepMethodNames, RoundTrip)
{
    for (GhepMethod m : kMethods)
        EXPECT_EQ(parse_ghep_method(to_string(m)), m);
    EXPECT_THROW(parse_ghep_method("lanczos"), ConfigError);
}

TEST(Ghep, IdenticalMatricesGiveUnitEigenvalues)
{
    const Matrix B = rt::random_spd(20, 10.0, 1);
    for (GhepMethod m : kMethods) {
        const auto sol = ghep_solve(dense_pencil(B, B), SketchConfig{4, 4, 2}, m);
        EXPECT_LE((sol.lambda.array() - 1.0).abs().maxCoeff(), 1e-10) << to_string(m);
    }
}

TEST(Ghep, ExactRankRecovery)
{
    const auto fx = rt::exact_rank_pencil(rt::random_spd(40, 1e4, 3), lambda3(), 4);
    const double tol[] = {1e-10, 1e-8, 1e-10};
    for (int i = 0; i < 3; ++i) {
        const auto pencil = dense_pencil(fx.A, fx.B);
        const auto sol    = ghep_solve(pencil, SketchConfig{3, 4, 5}, kMethods[i]);
        EXPECT_LE(rt::max_relative_error(fx.lambda0, sol.lambda), tol[i]) << to_string(kMethods[i]);
        EXPECT_LE(rt::b_orthonormality_defect(sol.U, fx.B), 1e-8) << to_string(kMethods[i]);
    }
}

TEST(Ghep, EigenvectorsSatisfyPencilEquation)
{
    const auto fx  = rt::exact_rank_pencil(rt::random_spd(30, 100.0, 6), lambda3(), 7);
    const auto sol = ghep_two_pass(dense_pencil(fx.A, fx.B), SketchConfig{3, 3, 8});
    const Matrix R = fx.A * sol.U - fx.B * sol.U * sol.lambda.asDiagonal();
    EXPECT_LE(R.norm(), 1e-9 * fx.A.norm());
}

TEST(Ghep, EigenvaluesAreDescending)
{
    const auto pencil = dense_pencil(rt::random_spd(30, 1e3, 9), rt::random_spd(30, 10.0, 10));
    for (GhepMethod m : kMethods) {
        const auto sol = ghep_solve(pencil, SketchConfig{6, 4, 11}, m);
        for (Index i = 1; i < sol.lambda.size(); ++i)
            EXPECT_GE(sol.lambda(i - 1), sol.lambda(i)) << to_string(m);
    }
}

TEST(Ghep, NystromEigenvaluesAreNonnegative)
{
    const KleProblem problem(Grid1D{-1.0, 1.0, 81}, MaternConfig{MaternNu::five_halves, 1.0});
    const auto sol = ghep_nystrom(problem.pencil(), SketchConfig{20, 10, 12});
    EXPECT_GE(sol.lambda.minCoeff(), -1e-12);
}

TEST(Ghep, NystromFallsBackOnIndefiniteCore)
{
    Vector d(20);
    for (Index i = 0; i < 20; ++i)
        d(i) = i < 10 ? std::pow(0.5, static_cast<double>(i)) : -1e-6;
    const Matrix V = rt::random_orthonormal(20, 20, 13);
    const Matrix A = detail::symmetrized(V * d.asDiagonal() * V.transpose());
    const auto sol = ghep_nystrom(dense_pencil(A, Matrix::Identity(20, 20)), SketchConfig{4, 12, 14});
    EXPECT_TRUE(sol.diagnostics.cholesky_fallback);
    EXPECT_GE(sol.lambda.minCoeff(), -1e-12);
    EXPECT_NEAR(sol.lambda(0), 1.0, 1e-3);
}

TEST(Ghep, SinglePassWithIdentityWeightMatchesEvd)
{
    Vector d(40);
    for (Index i = 0; i < 40; ++i)
        d(i) = std::pow(0.6, static_cast<double>(i));
    const Matrix V = rt::random_orthonormal(40, 40, 15);
    const Matrix A = detail::symmetrized(V * d.asDiagonal() * V.transpose());
    const SketchConfig cfg{5, 5, 16};
    const DenseMap op{A};
    const auto evd = randomized_evd(op, cfg, PassMode::two_pass);
    const auto sol = ghep_two_pass(dense_pencil(A, Matrix::Identity(40, 40)), cfg);
    EXPECT_LE((evd.lambda - sol.lambda).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ghep, Deterministic)
{
    const auto pencil = dense_pencil(rt::random_spd(25, 50.0, 17), rt::random_spd(25, 5.0, 18));
    for (GhepMethod m : kMethods) {
        const auto a = ghep_solve(pencil, SketchConfig{5, 5, 99}, m);
        const auto b = ghep_solve(pencil, SketchConfig{5, 5, 99}, m);
        EXPECT_EQ(a.lambda, b.lambda) << to_string(m);
        EXPECT_EQ(a.U, b.U) << to_string(m);
    }
}

TEST(Ghep, ConfigErrors)
{
    const auto pencil = dense_pencil(rt::random_spd(10, 5.0, 19), Matrix::Identity(10, 10));
    EXPECT_THROW(ghep_two_pass(pencil, SketchConfig{0, 2, 1}), ConfigError);
    EXPECT_THROW(ghep_two_pass(pencil, SketchConfig{8, 3, 1}), ConfigError);
    EXPECT_THROW(ghep_two_pass(pencil, SketchConfig{2, -1, 1}), ConfigError);
}

TEST(Ghep, AsymmetricOperatorIsRejectedByProbe)
{
    Matrix A = rt::random_spd(12, 5.0, 20);
    A(0, 5) += 1.0;
    GhepPencil pencil{std::make_shared<DenseMap>(A), dense_spd(Matrix::Identity(12, 12)), nullptr};
    EXPECT_THROW(ghep_two_pass(pencil, SketchConfig{2, 2, 1}), ConfigError);
    GhepOptions opts;
    opts.check_symmetry = false;
    EXPECT_NO_THROW(ghep_two_pass(pencil, SketchConfig{2, 2, 1}, opts));
}

TEST(Ghep, CountsFollowCostModel)
{
    const auto pencil = dense_pencil(rt::random_spd(50, 100.0, 21), rt::random_spd(50, 10.0, 22));
    const SketchConfig cfg{6, 4, 23};
    const std::uint64_t r = 10;
    const std::uint64_t expected[3][3] = {{2 * r, r, r}, {r, r, r}, {2 * r, r, 2 * r}};
    for (int i = 0; i < 3; ++i) {
        const auto sol = ghep_solve(pencil, cfg, kMethods[i]);
        EXPECT_EQ(sol.counts.a_applies, expected[i][0]) << to_string(kMethods[i]);
        EXPECT_EQ(sol.counts.b_applies, expected[i][1]) << to_string(kMethods[i]);
        EXPECT_EQ(sol.counts.b_solves, expected[i][2]) << to_string(kMethods[i]);
        EXPECT_EQ(sol.counts.probe_a_applies, 6u);
    }
}

TEST(Ghep, DirectOperatorSkipsSolves)
{
    const KleProblem problem(Grid1D{-1.0, 1.0, 61}, MaternConfig{MaternNu::three_halves, 1.0});
    GhepOptions opts;
    opts.use_direct_c = true;
    const auto direct = ghep_two_pass(problem.pencil(), SketchConfig{8, 4, 24}, opts);
    const auto plain  = ghep_two_pass(problem.pencil(), SketchConfig{8, 4, 24});
    EXPECT_TRUE(direct.diagnostics.direct_c);
    EXPECT_EQ(direct.counts.c_applies, 12u);
    EXPECT_EQ(direct.counts.b_solves, 0u);
    EXPECT_LE((direct.lambda - plain.lambda).cwiseAbs().maxCoeff(), 1e-10 * plain.lambda(0));
}

TEST(LowRankApply, ReproducesExactRankOperator)
{
    const auto fx  = rt::exact_rank_pencil(rt::random_spd(30, 50.0, 25), lambda3(), 26);
    const auto pencil = dense_pencil(fx.A, fx.B);
    const auto sol = ghep_two_pass(pencil, SketchConfig{3, 3, 27});
    const Matrix X = gaussian_matrix(30, 4, 28);
    EXPECT_LE((low_rank_apply(sol, *pencil.B, X) - fx.A * X).norm(), 1e-9 * (fx.A * X).norm());
}

TEST(LowRankApply, ShapeMismatch)
{
    const auto pencil = dense_pencil(rt::random_spd(10, 5.0, 29), Matrix::Identity(10, 10));
    const auto sol    = ghep_two_pass(pencil, SketchConfig{2, 2, 1});
    EXPECT_THROW(low_rank_apply(sol, *pencil.B, Matrix::Ones(9, 1)), ConfigError);
}

TEST(Ghep, TwoPassRitzValuesInterlaceExactSpectrum)
{
    const Matrix A = rt::random_spd(30, 1e3, 30);
    const Matrix B = rt::random_spd(30, 20.0, 31);
    const auto ref = dense_ghep_oracle(A, B);
    const auto sol = ghep_two_pass(dense_pencil(A, B), SketchConfig{6, 4, 32});
    for (Index i = 0; i < sol.lambda.size(); ++i) {
        EXPECT_LE(sol.lambda(i), ref.spectrum.lambdas(i) * (1.0 + 1e-12));
        EXPECT_GE(sol.lambda(i), ref.spectrum.lambdas(30 - 10 + i) * (1.0 - 1e-12));
    }
}

TEST(Ghep, KleMethodOrdering)
{
    const KleProblem problem(Grid1D{-1.0, 1.0, 201}, MaternConfig{MaternNu::half, 2.0});
    const Vector exact = problem.oracle().spectrum.lambdas.head(20);
    const auto pencil  = problem.pencil();
    int nys_beats_two = 0, two_beats_single = 0;
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const SketchConfig cfg{20, 5, seed};
        const double e2 = relative_eigenvalue_error(exact, ghep_two_pass(pencil, cfg).lambda);
        const double e1 = relative_eigenvalue_error(exact, ghep_single_pass(pencil, cfg).lambda);
        const double en = relative_eigenvalue_error(exact, ghep_nystrom(pencil, cfg).lambda);
        nys_beats_two += en <= e2 ? 1 : 0;
        two_beats_single += e2 <= e1 ? 1 : 0;
    }
    EXPECT_GE(nys_beats_two, 20);
    EXPECT_GE(two_beats_single, 18);
}

TEST(ProjectedPair, SinglePassCoreMatchesTwoPassOnExactRank)
{
    const auto fx = rt::exact_rank_pencil(rt::random_spd(30, 100.0, 33), lambda3(), 34);
    const auto pp = projected_pair(dense_pencil(fx.A, fx.B), SketchConfig{3, 3, 35});
    const auto a  = detail::sorted_eig(pp.T, EigenOrder::algebraic).first;
    const auto b  = detail::sorted_eig(pp.T_tilde, EigenOrder::algebraic).first;
    EXPECT_LE((a.head(3) - b.head(3)).cwiseAbs().maxCoeff(), 1e-8 * a(0));
    EXPECT_GT(pp.sigma_min_F, 0.0);
}
