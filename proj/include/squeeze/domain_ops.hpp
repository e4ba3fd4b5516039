#pragma once

// Operations on domains: cube splitting, exact measure of rectangle unions,
// Hausdorff distance between sampled compact sets, and Moebius images.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "squeeze/error.hpp"
#include "squeeze/geometry.hpp"
#include "squeeze/parallel.hpp"

namespace squeeze {

using rational = boost::multiprecision::cpp_rational;

/// Rectangle with exact rational edges, for hierarchies whose measure must be
/// tracked without rounding.
struct ExactRect {
    rational a, b, c, d;

    static ExactRect from(const Rect& r) { return {rational(r.a), rational(r.b), rational(r.c), rational(r.d)}; }
    Rect to_rect() const
    {
        return {a.convert_to<double>(), b.convert_to<double>(), c.convert_to<double>(), d.convert_to<double>()};
    }
    rational width() const { return b - a; }
    rational height() const { return d - c; }
    rational area() const { return width() * height(); }

    friend bool operator==(const ExactRect&, const ExactRect&) = default;
};

enum class Axis { vertical, horizontal };

inline const char* to_string(Axis a) { return a == Axis::vertical ? "vertical" : "horizontal"; }

struct SplitStep {
    Axis axis;
    int k;

    friend bool operator==(const SplitStep&, const SplitStep&) = default;
};

struct HierarchyCube {
    ExactRect rect;
    int depth = 0;
    std::vector<SplitStep> lineage;

    friend bool operator==(const HierarchyCube&, const HierarchyCube&) = default;
};

/// Removes the open 1/k-neighborhood of the mid-segment of the cube across
/// the given axis (vertical: the segment x = mid). Children are [a, mid-1/k]
/// and [mid+1/k, b] in the split direction.
inline std::pair<ExactRect, ExactRect> split_cube(const ExactRect& cube, int k, Axis axis)
{
    if (k < 1) throw Error(ErrorCode::invalid_argument, "split parameter k must be positive");
    const rational h = rational(1, k);
    const rational side = axis == Axis::vertical ? cube.width() : cube.height();
    if (side <= 2 * h) {
        throw Error(ErrorCode::degenerate_child, "side " + std::to_string(side.convert_to<double>()) +
                                                     " is not larger than 2/k = " + std::to_string(2.0 / k));
    }
    ExactRect lo = cube, hi = cube;
    if (axis == Axis::vertical) {
        const rational mid = (cube.a + cube.b) / 2;
        lo.b = mid - h;
        hi.a = mid + h;
    } else {
        const rational mid = (cube.c + cube.d) / 2;
        lo.d = mid - h;
        hi.c = mid + h;
    }
    return {lo, hi};
}

inline std::pair<Rect, Rect> split_cube(const Rect& cube, int k, Axis axis)
{
    auto [lo, hi] = split_cube(ExactRect::from(cube), k, axis);
    return {lo.to_rect(), hi.to_rect()};
}

inline std::pair<HierarchyCube, HierarchyCube> split_cube(const HierarchyCube& cube, int k, Axis axis)
{
    auto [lo, hi] = split_cube(cube.rect, k, axis);
    HierarchyCube l{lo, cube.depth + 1, cube.lineage}, h{hi, cube.depth + 1, cube.lineage};
    l.lineage.push_back({axis, k});
    h.lineage.push_back({axis, k});
    return {l, h};
}

namespace detail {

inline bool interiors_overlap(const ExactRect& p, const ExactRect& q)
{
    return std::max(p.a, q.a) < std::min(p.b, q.b) && std::max(p.c, q.c) < std::min(p.d, q.d);
}

} // namespace detail

/// Exact area of a union of rectangles with pairwise disjoint interiors.
inline rational lebesgue_measure(std::span<const ExactRect> cubes)
{
    rational total = 0;
    for (std::size_t i = 0; i < cubes.size(); ++i) {
        for (std::size_t j = i + 1; j < cubes.size(); ++j) {
            if (detail::interiors_overlap(cubes[i], cubes[j])) {
                throw Error(ErrorCode::overlap,
                            "rectangles " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
            }
        }
        total += cubes[i].area();
    }
    return total;
}

/// Same, for double rectangles; every double is converted exactly.
inline rational lebesgue_measure(std::span<const Rect> cubes)
{
    std::vector<ExactRect> exact;
    exact.reserve(cubes.size());
    for (const auto& r : cubes) exact.push_back(ExactRect::from(r));
    return lebesgue_measure(std::span<const ExactRect>(exact));
}

// ---------------------------------------------------------------------------
// Hausdorff distance

/// Symmetric Hausdorff distance of two finite point sets (brute force).
inline double hausdorff_distance(std::span<const cplx> p, std::span<const cplx> q)
{
    if (p.empty() || q.empty()) throw Error(ErrorCode::empty_set, "Hausdorff distance of an empty set");
    auto directed = [](std::span<const cplx> from, std::span<const cplx> to) {
        std::vector<double> best(from.size());
        parallel_for(from.size(), [&](std::size_t i) {
            double m = std::numeric_limits<double>::infinity();
            for (cplx z : to) m = std::min(m, std::norm(from[i] - z));
            best[i] = m;
        });
        return std::sqrt(*std::max_element(best.begin(), best.end()));
    };
    return std::max(directed(p, q), directed(q, p));
}

/// Samples of a compact component set: boundary samples at the given
/// spacing plus the interior grid points of the same spacing. The exterior
/// kind is not compact in the plane and is rejected.
inline std::vector<cplx> discretize(std::span<const Component> ks, double spacing)
{
    if (!(spacing > 0)) throw Error(ErrorCode::invalid_argument, "sampling spacing must be positive");
    std::vector<cplx> out;
    for (const auto& k : ks) {
        if (!is_bounded(k)) throw Error(ErrorCode::invalid_argument, "cannot sample an unbounded component");
        if (is_point(k)) {
            out.push_back(std::get<PointComponent>(k).at);
            continue;
        }
        const auto n = std::max<std::size_t>(8, std::size_t(std::ceil(perimeter(k) / spacing)));
        for (cplx z : sample_boundary(k, n)) out.push_back(z);
        const Box b = *bounding_box(k);
        const double x0 = std::ceil(b.xmin / spacing) * spacing, y0 = std::ceil(b.ymin / spacing) * spacing;
        for (double y = y0; y <= b.ymax; y += spacing) {
            for (double x = x0; x <= b.xmax; x += spacing) {
                if (contains(k, cplx(x, y))) out.push_back({x, y});
            }
        }
    }
    if (out.empty()) throw Error(ErrorCode::empty_set, "component set is empty");
    return out;
}

inline double hausdorff_distance(std::span<const Component> p, std::span<const Component> q, double spacing)
{
    const auto sp = discretize(p, spacing), sq = discretize(q, spacing);
    return hausdorff_distance(std::span<const cplx>(sp), std::span<const cplx>(sq));
}

// ---------------------------------------------------------------------------
// Moebius transformations

/// z -> (a z + b) / (c z + d) with ad - bc != 0.
struct Mobius {
    cplx a = 1, b = 0, c = 0, d = 1;

    void check() const
    {
        if (a * d - b * c == cplx(0)) throw Error(ErrorCode::invalid_argument, "Moebius map is singular (ad - bc = 0)");
    }
    bool affine() const { return c == cplx(0); }
    /// Preimage of infinity; only meaningful when !affine().
    cplx pole() const { return -d / c; }
    cplx operator()(cplx z) const { return (a * z + b) / (c * z + d); }

    /// this after other: z -> this(other(z)).
    Mobius after(const Mobius& o) const
    {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mobius inverse() const { return {d, -b, -c, a}; }
};

struct MobiusOptions {
    std::size_t samples_per_edge = 64; // polyline density for curved polygon images
    double pole_tolerance = 1e-12;     // relative to domain scale
};

namespace detail {

/// Image of the circle |z - c0| = r; returns (center, radius, inside_maps_inside).
inline std::tuple<cplx, double, bool> mobius_circle(const Mobius& t, cplx c0, double r)
{
    if (t.affine()) {
        const cplx s = t.a / t.d;
        return {t(c0), std::abs(s) * r, true};
    }
    // t(z) = a/c - (ad - bc)/c^2 * 1/(z - p)
    const cplx p = t.pole();
    const double dd = std::norm(c0 - p) - r * r;
    const cplx inv_center = std::conj(c0 - p) / dd;
    const double inv_radius = r / std::abs(dd);
    const cplx s = -(t.a * t.d - t.b * t.c) / (t.c * t.c);
    return {t.a / t.c + s * inv_center, std::abs(s) * inv_radius, dd > 0};
}

} // namespace detail

/// Image of a domain under a Moebius map. Round components stay round;
/// polygonal components become polylines (exact vertex images for affine
/// maps, dense edge samples otherwise).
inline Domain mobius_apply(const Mobius& t, const Domain& dom, const MobiusOptions& opt = {})
{
    t.check();
    Domain out;
    out.label = dom.label;
    const double tol = opt.pole_tolerance * dom.scale();
    for (std::size_t i = 0; i < dom.size(); ++i) {
        const auto& k = dom.components[i];
        if (!t.affine()) {
            const cplx p = t.pole();
            double gap;
            if (auto d = std::get_if<Disk>(&k)) {
                gap = std::abs(std::abs(p - d->center) - d->radius);
            } else if (auto o = std::get_if<OuterDisk>(&k)) {
                gap = std::abs(std::abs(p - o->center) - o->radius);
            } else if (auto q = std::get_if<PointComponent>(&k)) {
                gap = std::abs(p - q->at);
            } else {
                gap = polygon_boundary_distance(polygon_vertices(k), p);
            }
            if (gap <= tol) {
                throw Error(ErrorCode::pole_on_boundary, "pole of the map lies on component " + std::to_string(i));
            }
        }
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, PointComponent>) {
                    out.components.push_back(PointComponent{t(s.at)});
                } else if constexpr (std::is_same_v<T, Disk>) {
                    auto [c, r, inside] = detail::mobius_circle(t, s.center, s.radius);
                    if (inside) {
                        out.components.push_back(Disk{c, r});
                    } else {
                        out.components.push_back(OuterDisk{c, r});
                    }
                } else if constexpr (std::is_same_v<T, OuterDisk>) {
                    auto [c, r, inside] = detail::mobius_circle(t, s.center, s.radius);
                    // The exterior maps to the exterior unless the pole lies
                    // inside the circle.
                    if (inside) {
                        out.components.push_back(OuterDisk{c, r});
                    } else {
                        out.components.push_back(Disk{c, r});
                    }
                } else {
                    const auto poly = polygon_vertices(Component(s));
                    if (!t.affine() && polygon_contains(poly, t.pole())) {
                        throw Error(ErrorCode::invalid_argument,
                                    "pole of the map lies inside polygonal component " + std::to_string(i));
                    }
                    Polyline img;
                    const std::size_t per_edge = t.affine() ? 1 : opt.samples_per_edge;
                    for (std::size_t e = 0; e < poly.size(); ++e) {
                        const cplx a = poly[e], b = poly[(e + 1) % poly.size()];
                        for (std::size_t m = 0; m < per_edge; ++m) {
                            img.pts.push_back(t(a + (b - a) * (double(m) / double(per_edge))));
                        }
                    }
                    out.components.push_back(std::move(img));
                }
            },
            k);
    }
    return out;
}

} // namespace squeeze
