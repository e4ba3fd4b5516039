#pragma once

// Separable solution of the slit-potential problem on the annulus
// {rho < |z| < 1} with base point x in (rho, 1) on the positive axis.
//
// u = log|z - x| + A + B log|z| + sum_n (a_n r^n + b_n (rho/r)^n) cos(n theta),
// with u = 0 on the base circle, u = lambda on the other circle and no
// conjugate period around the non-base circle. Both boundary traces of
// log|z - x| are expanded in their Fourier series, which decouples the modes.

#include <cmath>
#include <vector>

#include "squeeze/error.hpp"
#include "squeeze/geometry.hpp"

namespace squeeze {

enum class AnnulusBase { inner, outer };

struct AnnulusSolution {
    double rho = 0;
    double x = 0;
    AnnulusBase base = AnnulusBase::outer;
    double A = 0, B = 0;
    std::vector<double> a, b; // modes n = 1..size
    double lambda = 0;        // u on the non-base circle
    double radius = 0;        // exp(lambda)
    double truncation = 0;    // bound on the dropped tail of the trace series

    double potential(cplx z) const
    {
        const double r = std::abs(z), th = std::arg(z);
        double u = std::log(std::abs(z - x)) + A + B * std::log(r);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double n = double(i + 1);
            u += (a[i] * std::pow(r, n) + b[i] * std::pow(rho / r, n)) * std::cos(n * th);
        }
        return u;
    }
};

inline AnnulusSolution annulus_solve(double rho, double x, AnnulusBase base, double tol = 1e-12,
                                     std::size_t max_modes = 20000)
{
    if (!(rho > 0 && rho < x && x < 1)) throw Error(ErrorCode::invalid_argument, "annulus oracle needs 0 < rho < x < 1");
    AnnulusSolution s;
    s.rho = rho;
    s.x = x;
    s.base = base;

    // Traces: log|e^{i t} - x| = -sum x^n/n cos nt,
    //         log|rho e^{i t} - x| = log x - sum (rho/x)^n/n cos nt.
    // The flux of log|z - x| through |z| = rho is 0 and through |z| = 1 is
    // 2 pi, so B = 0 for the outer base and B = -1 for the inner base.
    if (base == AnnulusBase::outer) {
        s.B = 0;
        s.A = 0;
        s.lambda = std::log(x) + s.A + s.B * std::log(rho);
    } else {
        s.B = -1;
        s.A = -(std::log(x) + s.B * std::log(rho));
        s.lambda = s.A;
    }
    s.radius = std::exp(s.lambda);

    // Each mode must cancel the trace on both circles.
    const double q = std::max(x, rho / x);
    std::size_t n = 1;
    for (; n <= max_modes; ++n) {
        const double nn = double(n);
        const double outer_trace = std::pow(x, nn) / nn;       // needed on r = 1
        const double inner_trace = std::pow(rho / x, nn) / nn; // needed on r = rho
        // a + b rho^n = outer_trace, a rho^n + b = inner_trace
        const double rn = std::pow(rho, nn);
        const double b = (inner_trace - rn * outer_trace) / (1 - rn * rn);
        const double a = outer_trace - b * rn;
        s.a.push_back(a);
        s.b.push_back(b);
        const double tail = std::pow(q, nn + 1) / ((nn + 1) * (1 - q));
        if (tail < tol) {
            s.truncation = tail;
            return s;
        }
    }
    throw Error(ErrorCode::truncation_not_converged,
                "trace series needs more than " + std::to_string(max_modes) + " modes at x=" + std::to_string(x));
}

/// The slit radius of the canonical map with the given base circle.
inline double annulus_oracle(double rho, double x, AnnulusBase base) { return annulus_solve(rho, x, base).radius; }

} // namespace squeeze
