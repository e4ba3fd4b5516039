#pragma once

// Quadratic dynamics f_c(z) = z^2 + c for c outside the Mandelbrot set.
//
// G_c uses the negative sign convention: G_c = -log|z| + O(1) at infinity,
// G_c = 0 on the Julia set, G_c(f_c(z)) = 2 G_c(z). With t0 = G_c(0), the
// level set {G_c = t} is one loop for t < t0 and has 2^n loops for t strictly
// between 2^(1-n) t0 and 2^(-n) t0. Each loop bounds a piece of {G_c >= t}.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "squeeze/error.hpp"
#include "squeeze/geometry.hpp"
#include "squeeze/parallel.hpp"
#include "squeeze/slit_solver.hpp"

namespace squeeze {

struct EscapeResult {
    bool escaped = false;
    int n = 0; // first iterate beyond the radius, or maxiter when inside
};

/// Iterates the critical orbit 0, c, c^2 + c, ... "Inside" only means the
/// orbit stayed bounded for maxiter steps.
inline EscapeResult mandelbrot_escape(cplx c, int maxiter, double radius = 2)
{
    if (maxiter < 1) throw Error(ErrorCode::invalid_argument, "maxiter must be at least 1");
    if (!(radius >= 2)) throw Error(ErrorCode::invalid_argument, "escape radius must be at least 2");
    cplx z = 0;
    for (int n = 1; n <= maxiter; ++n) {
        z = z * z + c;
        if (std::abs(z) > radius) return {true, n};
    }
    return {false, maxiter};
}

struct GreenEvaluation {
    cplx c;
    cplx z;
    double value = 0;
    int n_used = 0;        // iterations until the escape radius
    double tail_bound = 0; // bound on the neglected part of the telescoping sum
};

inline double escape_radius(cplx c) { return std::max(2.0, std::abs(c)) + 1; }

/// G_c(z) = -2^-n log|f^n(z)| - sum_{k >= n} 2^-(k+1) log|1 + c / f^k(z)^2|,
/// where n is the first iterate beyond the escape radius. The sum is cut
/// once 2^-K (-log(1 - |c| / |f^K(z)|^2)) is below tol.
inline GreenEvaluation green_value(cplx c, cplx z, double tol = 1e-12, int max_iter = 100000)
{
    if (!(tol > 0)) throw Error(ErrorCode::invalid_argument, "tolerance must be positive");
    GreenEvaluation g{c, z, 0, 0, 0};
    const double R = escape_radius(c);
    const double ac = std::abs(c);
    int n = 0;
    while (std::abs(z) <= R) {
        if (n >= max_iter) {
            std::ostringstream os;
            os << "orbit of " << g.z << " under z^2 + " << c << " stays within " << R << " for " << max_iter << " steps";
            throw Error(ErrorCode::no_escape, os.str());
        }
        z = z * z + c;
        ++n;
    }
    g.n_used = n;
    double scale = std::ldexp(1.0, -n);
    double value = -scale * std::log(std::abs(z));
    for (int k = n;; ++k) {
        const double q = ac / std::norm(z);
        const double tail = scale * -std::log1p(-q);
        if (tail <= tol || std::abs(z) > 1e100) {
            g.tail_bound = tail;
            break;
        }
        value -= 0.5 * scale * std::log(std::abs(1.0 + c / (z * z)));
        z = z * z + c;
        scale *= 0.5;
    }
    g.value = value;
    return g;
}

/// t0 = G_c(0), the level of the first figure eight.
inline double critical_level(cplx c, double tol = 1e-12) { return green_value(c, 0.0, tol).value; }

/// Geometric middle of band n: below t0 for n = 0, otherwise between
/// 2^(1-n) t0 and 2^(-n) t0.
inline double band_level(double t0, int n) { return std::sqrt(2.0) * std::ldexp(t0, -n); }

/// The 2^k crossings of the figure eights at level 2^-k t0: preimages of 0
/// under f^k.
inline std::vector<cplx> figure_eight_points(cplx c, int k)
{
    std::vector<cplx> pts{0.0};
    for (int i = 0; i < k; ++i) {
        std::vector<cplx> next;
        for (cplx w : pts) {
            const cplx s = std::sqrt(w - c);
            next.push_back(s);
            next.push_back(-s);
        }
        pts = std::move(next);
    }
    return pts;
}

struct LevelGrid {
    std::optional<Box> box;      // default: square around the level curve
    std::size_t resolution = 256; // cells per side
    bool check_doubling = true;
};

struct LevelCurveSet {
    cplx c;
    double t = 0;
    std::vector<std::vector<cplx>> components; // closed, counterclockwise
    std::vector<int> nesting;                  // parent component, -1 at the top level
    std::vector<cplx> crossing_points;         // centres of ambiguous cells
    std::size_t resolution = 0;
    std::size_t coarse_count = 0; // count at half resolution when doubling is checked
};

namespace detail {

inline Box default_level_box(cplx c, double t)
{
    const double h = std::max(2.5, 1.5 * std::exp(-t) + std::sqrt(std::abs(c)));
    return {-h, h, -h, h};
}

/// Marching squares on G - t. Cells with alternating corners are resolved by
/// the value at the cell centre.
inline LevelCurveSet trace_level(cplx c, double t, const Box& box, std::size_t res)
{
    const std::size_t nx = res, ny = res;
    const double hx = (box.xmax - box.xmin) / double(nx), hy = (box.ymax - box.ymin) / double(ny);
    auto node = [&](std::size_t i, std::size_t j) { return cplx(box.xmin + hx * double(i), box.ymin + hy * double(j)); };
    auto level = [&](cplx z) {
        try {
            return green_value(c, z, 1e-12).value - t;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::no_escape) throw;
            return -t; // numerically on the Julia set
        }
    };
    std::vector<double> v((nx + 1) * (ny + 1));
    parallel_for(ny + 1, [&](std::size_t j) {
        for (std::size_t i = 0; i <= nx; ++i) v[j * (nx + 1) + i] = level(node(i, j));
    });
    auto val = [&](std::size_t i, std::size_t j) { return v[j * (nx + 1) + i]; };

    // Edge ids: 2*(node index) for the edge to the right, +1 for the edge up.
    auto hedge = [&](std::size_t i, std::size_t j) { return 2 * (j * (nx + 1) + i); };
    auto vedge = [&](std::size_t i, std::size_t j) { return 2 * (j * (nx + 1) + i) + 1; };
    std::map<std::size_t, cplx> crossing;
    auto cross_at = [&](std::size_t id) -> cplx {
        auto it = crossing.find(id);
        if (it != crossing.end()) return it->second;
        const std::size_t nidx = id / 2;
        const std::size_t i = nidx % (nx + 1), j = nidx / (nx + 1);
        const std::size_t i2 = id % 2 == 0 ? i + 1 : i, j2 = id % 2 == 0 ? j : j + 1;
        const double va = val(i, j), vb = val(i2, j2);
        const cplx p = node(i, j) + (node(i2, j2) - node(i, j)) * (va / (va - vb));
        crossing.emplace(id, p);
        return p;
    };

    LevelCurveSet out;
    out.c = c;
    out.t = t;
    out.resolution = res;
    std::vector<std::pair<std::size_t, std::size_t>> segs;
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const bool in0 = val(i, j) >= 0, in1 = val(i + 1, j) >= 0, in2 = val(i + 1, j + 1) >= 0, in3 = val(i, j + 1) >= 0;
            const std::size_t e0 = hedge(i, j), e1 = vedge(i + 1, j), e2 = hedge(i, j + 1), e3 = vedge(i, j);
            const int cs = int(in0) | int(in1) << 1 | int(in2) << 2 | int(in3) << 3;
            if (cs == 0 || cs == 15) continue;
            if (cs == 5 || cs == 10) {
                const cplx mid = node(i, j) + cplx(0.5 * hx, 0.5 * hy);
                out.crossing_points.push_back(mid);
                const bool centre_in = level(mid) >= 0;
                // the centre decides which pair of opposite corners is joined
                if ((cs == 5) == centre_in) {
                    segs.emplace_back(e0, e1);
                    segs.emplace_back(e2, e3);
                } else {
                    segs.emplace_back(e3, e0);
                    segs.emplace_back(e1, e2);
                }
                continue;
            }
            std::vector<std::size_t> es;
            if (in0 != in1) es.push_back(e0);
            if (in1 != in2) es.push_back(e1);
            if (in2 != in3) es.push_back(e2);
            if (in3 != in0) es.push_back(e3);
            segs.emplace_back(es[0], es[1]);
        }
    }
    // Curves reaching the box border cannot close.
    for (std::size_t i = 0; i < nx; ++i) {
        if ((val(i, 0) >= 0) != (val(i + 1, 0) >= 0) || (val(i, ny) >= 0) != (val(i + 1, ny) >= 0)) {
            throw Error(ErrorCode::unresolved_topology, "level curve leaves the grid box");
        }
    }
    for (std::size_t j = 0; j < ny; ++j) {
        if ((val(0, j) >= 0) != (val(0, j + 1) >= 0) || (val(nx, j) >= 0) != (val(nx, j + 1) >= 0)) {
            throw Error(ErrorCode::unresolved_topology, "level curve leaves the grid box");
        }
    }

    std::map<std::size_t, std::vector<std::size_t>> at_edge;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        at_edge[segs[s].first].push_back(s);
        at_edge[segs[s].second].push_back(s);
    }
    std::vector<bool> used(segs.size(), false);
    for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
        if (used[s0]) continue;
        std::vector<cplx> loop;
        std::size_t s = s0, e = segs[s0].first;
        while (!used[s]) {
            used[s] = true;
            loop.push_back(cross_at(e));
            e = segs[s].first == e ? segs[s].second : segs[s].first;
            const auto& nb = at_edge[e];
            std::size_t nxt = s;
            for (std::size_t cand : nb) {
                if (cand != s) nxt = cand;
            }
            if (nxt == s) break;
            s = nxt;
        }
        // drop repeated crossings (a level through a grid node)
        std::vector<cplx> clean;
        for (cplx p : loop) {
            if (clean.empty() || std::abs(p - clean.back()) > 1e-14) clean.push_back(p);
        }
        while (clean.size() > 1 && std::abs(clean.front() - clean.back()) <= 1e-14) clean.pop_back();
        if (clean.size() < 3) continue;
        if (signed_area(clean) < 0) std::reverse(clean.begin(), clean.end());
        out.components.push_back(std::move(clean));
    }
    // Deterministic order: by lowest-left first vertex of each component.
    for (auto& comp : out.components) {
        auto it = std::min_element(comp.begin(), comp.end(), [](cplx a, cplx b) {
            return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
        });
        std::rotate(comp.begin(), it, comp.end());
    }
    std::sort(out.components.begin(), out.components.end(), [](const auto& a, const auto& b) {
        return a[0].real() < b[0].real() || (a[0].real() == b[0].real() && a[0].imag() < b[0].imag());
    });

    out.nesting.assign(out.components.size(), -1);
    for (std::size_t i = 0; i < out.components.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < out.components.size(); ++k) {
            if (k == i || !polygon_contains(out.components[k], out.components[i][0])) continue;
            const double area = std::abs(signed_area(out.components[k]));
            if (area < best) {
                best = area;
                out.nesting[i] = int(k);
            }
        }
    }
    return out;
}

} // namespace detail

/// Levels within this distance of a critical level 2^-n t0 are refused.
inline constexpr double critical_guard = 1e-6;

inline LevelCurveSet level_curve(cplx c, double t, const LevelGrid& grid = {})
{
    if (!(t < 0)) throw Error(ErrorCode::invalid_argument, "level must be negative");
    if (grid.resolution < 4) throw Error(ErrorCode::invalid_argument, "grid resolution too small");
    const double t0 = critical_level(c);
    for (int n = 0; std::ldexp(std::abs(t0), -n) > critical_guard; ++n) {
        if (std::abs(t - std::ldexp(t0, -n)) < critical_guard) {
            throw Error(ErrorCode::invalid_argument, "level lies within the guard band of a critical level");
        }
    }
    const Box box = grid.box.value_or(detail::default_level_box(c, t));
    if (!grid.check_doubling) return detail::trace_level(c, t, box, grid.resolution);
    const auto coarse = detail::trace_level(c, t, box, grid.resolution);
    auto fine = detail::trace_level(c, t, box, 2 * grid.resolution);
    fine.coarse_count = coarse.components.size();
    if (coarse.components.size() != fine.components.size()) {
        throw Error(ErrorCode::unresolved_topology, std::to_string(coarse.components.size()) + " components at resolution " +
                                                        std::to_string(grid.resolution) + " but " +
                                                        std::to_string(fine.components.size()) + " at " +
                                                        std::to_string(2 * grid.resolution));
    }
    return fine;
}

/// The two lifts of a loop under f_c, by continuing z = sqrt(w - c) along
/// it. A loop winding an odd number of times around c has a single lift
/// covering it twice: branch-merge.
inline std::pair<std::vector<cplx>, std::vector<cplx>> preimage_loops(cplx c, std::span<const cplx> loop, double guard = 1e-9)
{
    if (loop.size() < 3) throw Error(ErrorCode::invalid_argument, "loop needs at least three vertices");
    double near = std::numeric_limits<double>::infinity();
    for (cplx w : loop) near = std::min(near, std::abs(w - c));
    if (near <= guard) throw Error(ErrorCode::invalid_argument, "loop passes within the guard distance of c");
    std::vector<cplx> lift;
    lift.reserve(loop.size());
    lift.push_back(std::sqrt(loop[0] - c));
    for (std::size_t i = 1; i <= loop.size(); ++i) {
        const cplx s = std::sqrt(loop[i % loop.size()] - c);
        const cplx z = std::abs(s - lift.back()) <= std::abs(s + lift.back()) ? s : -s;
        if (std::abs(z - lift.back()) >= std::abs(z + lift.back())) {
            throw Error(ErrorCode::invalid_argument, "loop too coarse to follow a branch of the square root");
        }
        if (i < loop.size()) {
            lift.push_back(z);
        } else if (std::abs(z - lift.front()) > std::abs(z + lift.front())) {
            throw Error(ErrorCode::branch_merge, "the lift does not close: the loop winds an odd number of times around c");
        }
    }
    std::vector<cplx> other(lift.size());
    std::transform(lift.begin(), lift.end(), other.begin(), [](cplx z) { return -z; });
    return {lift, other};
}

/// Arc-length resampling of a closed polyline.
inline std::vector<cplx> resample_closed(std::span<const cplx> pts, std::size_t n)
{
    Polyline p{std::vector<cplx>(pts.begin(), pts.end())};
    return sample_boundary(Component(p), n);
}

namespace detail {

/// Newton steps along the gradient of G_c onto {G_c = t}. Marching squares
/// leaves grid-scale kinks in the loops; projecting the resampled points
/// removes them, which matters for the boundary residual of the solver.
inline cplx project_to_level(cplx c, double t, cplx z)
{
    auto g = [c](cplx w) { return green_value(c, w, 1e-14).value; };
    for (int it = 0; it < 20; ++it) {
        const double h = 1e-7 * std::max(1.0, std::abs(z));
        const cplx grad((g(z + h) - g(z - h)) / (2 * h), (g(z + cplx(0, h)) - g(z - cplx(0, h))) / (2 * h));
        if (std::norm(grad) == 0) break;
        const cplx step = (g(z) - t) * grad / std::norm(grad);
        z -= step;
        if (std::abs(step) < 1e-13 * std::max(1.0, std::abs(z))) break;
    }
    return z;
}

} // namespace detail

/// Domain whose complementary components are the regions bounded by the
/// loops of {G_c = t}, each resampled to `vertices` points and pulled onto
/// the level set.
inline Domain approx_domain(cplx c, double t, const LevelGrid& grid = {}, std::size_t vertices = 512)
{
    const LevelCurveSet set = level_curve(c, t, grid);
    Domain d;
    std::ostringstream label;
    label << "julia c=" << c.real() << "," << c.imag() << " t=" << t;
    d.label = label.str();
    for (std::size_t i = 0; i < set.components.size(); ++i) {
        if (set.nesting[i] != -1) {
            throw Error(ErrorCode::unresolved_topology, "nested level loops do not bound disjoint regions");
        }
        auto pts = resample_closed(set.components[i], vertices);
        for (auto& z : pts) z = detail::project_to_level(c, t, z);
        d.components.push_back(Polyline{std::move(pts)});
    }
    d.validate();
    return d;
}

struct DecayRow {
    int band = 0;
    double t = 0;
    std::size_t components = 0;
    std::optional<Bracket> bracket;
    std::string error;
};

/// R at a fixed point on the approximating domains of bands 0..bands-1.
inline std::vector<DecayRow> julia_rdecay(cplx c, int bands, cplx x, const LevelGrid& grid = {},
                                          const SlitParams& params = {}, std::size_t vertices = 512)
{
    if (bands < 1) throw Error(ErrorCode::invalid_argument, "need at least one band");
    const double t0 = critical_level(c);
    std::vector<DecayRow> rows(static_cast<std::size_t>(bands));
    for (int n = 0; n < bands; ++n) {
        auto& row = rows[std::size_t(n)];
        row.band = n;
        row.t = band_level(t0, n);
        try {
            const Domain d = approx_domain(c, row.t, grid, vertices);
            row.components = d.size();
            row.bracket = r_value(d, x, params);
        } catch (const Error& e) {
            row.error = e.what();
        }
    }
    return rows;
}

} // namespace squeeze
