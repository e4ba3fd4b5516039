// Slit radii on an annulus from the least-squares solver, next to the
// separable closed form, and the resulting bracket for R.

#include <cstdio>

#include "squeeze/annulus.hpp"
#include "squeeze/slit_solver.hpp"

using namespace squeeze;

int main()
{
    const double rho = 0.25;
    Domain annulus{"annulus", {OuterDisk{0, 1}, Disk{0, rho}}};
    annulus.validate();
    const SlitEvaluator eval(annulus);

    std::printf("%6s %12s %12s %12s %12s\n", "x", "outer base", "closed form", "inner base", "closed form");
    for (double x : {0.3, 0.4, 0.5, 0.6, 0.8}) {
        const double outer = eval.solve(x, 0).radii.at(0).radius;
        const double inner = eval.solve(x, 1).radii.at(0).radius;
        std::printf("%6.2f %12.9f %12.9f %12.9f %12.9f\n", x, outer, annulus_oracle(rho, x, AnnulusBase::outer), inner,
                    annulus_oracle(rho, x, AnnulusBase::inner));
    }
    const Bracket b = eval.r_value(0.5);
    std::printf("R(0.5) >= %.9f, S(0.5) <= %.9f (%s)\n", b.lower, b.upper, b.upper_witness.c_str());
}
