// Truncated Karhunen-Loeve expansion of a Matern field on [-1, 1]: computes
// the leading modes with the three randomized solvers, compares them with the
// dense reference and draws one realization of the field.

#include "randghep/randghep.hpp"

#include <iomanip>
#include <iostream>

int main()
{
    using namespace randghep;

    const Grid1D grid{-1.0, 1.0, 201};
    const MaternConfig kernel{MaternNu::three_halves, 0.5};
    const KleProblem problem(grid, kernel);
    const SketchConfig cfg{20, 10, 7};

    std::cout << "Matern nu=" << to_string(kernel.nu) << " ell=" << kernel.ell << " n=" << grid.n << " k=" << cfg.k
              << " p=" << cfg.p << "\n\n";
    std::cout << std::left << std::setw(14) << "method" << std::setw(16) << "rel. error" << "A-applies  B-solves\n";

    for (GhepMethod method : {GhepMethod::two_pass, GhepMethod::single_pass, GhepMethod::nystrom}) {
        KleOptions opts;
        opts.method       = method;
        const auto result = kle_solve(problem, cfg, opts);
        std::cout << std::setw(14) << to_string(method) << std::setw(16) << std::scientific << std::setprecision(3)
                  << *result.relative_error << std::setw(11) << result.solution.counts.a_applies
                  << result.solution.counts.b_solves << '\n';
    }

    const auto result = kle_solve(problem, cfg);
    const Vector xi   = gaussian_matrix(cfg.k, 1, 2024);
    const auto field  = kle_realize(result, xi);
    const Vector x    = grid.nodes();

    std::cout << "\nfield realization (every 20th node)\n" << std::fixed << std::setprecision(4);
    for (Index i = 0; i < grid.n; i += 20)
        std::cout << "  x=" << std::setw(8) << x(i) << " s=" << field.values(i) << '\n';
    return 0;
}
