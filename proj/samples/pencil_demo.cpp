// Generalized eigenproblem A x = lambda B x with operators that are never
// formed as dense matrices: A is a diagonal scaling sandwiched between two
// applications of a tridiagonal B. The a-posteriori estimator is used to
// decide whether the sketch was large enough.

#include "randghep/randghep.hpp"

#include <cmath>
#include <iostream>

int main()
{
    using namespace randghep;

    const Index n = 400;
    const Vector diag = Vector::Constant(n, 2.5);
    const Vector off  = Vector::Constant(n - 1, -1.0);
    auto B            = std::make_shared<TridiagonalSpd>(diag, off);

    Vector d(n);
    for (Index i = 0; i < n; ++i)
        d(i) = std::exp(-0.5 * static_cast<double>(i));

    GhepPencil pencil;
    pencil.A = make_function_map(n, n, [B, d](const MatrixRef& X) -> Matrix {
        return B->apply(d.asDiagonal() * B->apply(X));
    });
    pencil.B = B;
    pencil.C = make_function_map(n, n, [B, d](const MatrixRef& X) -> Matrix {
        return d.asDiagonal() * B->apply(X);
    });

    const SketchConfig cfg{15, 10, 42};
    const GhepSolution sol = ghep_nystrom(pencil, cfg);

    std::cout << "leading eigenvalues\n";
    for (Index i = 0; i < 5; ++i)
        std::cout << "  " << sol.lambda(i) << '\n';

    const auto est = posterior_estimate(pencil, sol.Q, sol.BQ, 10.0, 5, 99);
    std::cout << "\nrange error estimate " << est.e << " (holds with probability >= " << est.probability_floor
              << ", |B^-1| from " << to_string(est.source) << ")\n";
    std::cout << "A-applies " << sol.counts.a_applies << ", B-applies " << sol.counts.b_applies << ", B-solves "
              << sol.counts.b_solves << '\n';
    return 0;
}
