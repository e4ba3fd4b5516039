#pragma once

// Complementary components of finitely connected domains in the Riemann sphere.
//
// A Domain is the sphere minus a finite union of pairwise disjoint closed
// components. Bounded components are rectangles, closed disks, closed polygons
// or single points; at most one component may be the unbounded exterior of a
// circle, in which case infinity is not in the domain.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "squeeze/error.hpp"

namespace squeeze {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Closed axis-aligned rectangle [a,b] x [c,d].
struct Rect {
    double a = 0, b = 1, c = 0, d = 1;

    double width() const { return b - a; }
    double height() const { return d - c; }
    double area() const { return width() * height(); }
    cplx center() const { return {0.5 * (a + b), 0.5 * (c + d)}; }
    /// Counterclockwise corners starting at (a,c).
    std::array<cplx, 4> corners() const { return {cplx(a, c), cplx(b, c), cplx(b, d), cplx(a, d)}; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Closed disk |z - center| <= radius.
struct Disk {
    cplx center;
    double radius = 1;

    friend bool operator==(const Disk&, const Disk&) = default;
};

/// Closed exterior |z - center| >= radius, together with infinity.
struct OuterDisk {
    cplx center;
    double radius = 1;

    friend bool operator==(const OuterDisk&, const OuterDisk&) = default;
};

/// A single point, i.e. a puncture of the domain.
struct PointComponent {
    cplx at;

    friend bool operator==(const PointComponent&, const PointComponent&) = default;
};

/// Closed region bounded by a simple counterclockwise polygon. The closing
/// edge from the last vertex back to the first is implicit.
struct Polyline {
    std::vector<cplx> pts;

    friend bool operator==(const Polyline&, const Polyline&) = default;
};

using Component = std::variant<Rect, Disk, OuterDisk, PointComponent, Polyline>;

// ---------------------------------------------------------------------------
// Planar primitives

inline double cross(cplx u, cplx v) { return u.real() * v.imag() - u.imag() * v.real(); }

inline double dist_point_segment(cplx p, cplx a, cplx b)
{
    const cplx ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) {
        return std::abs(p - a);
    }
    double t = ((p - a) * std::conj(ab)).real() / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

inline bool segments_intersect(cplx p1, cplx p2, cplx q1, cplx q2)
{
    // Orientation tests with a relative dead zone, so rounding on nearly
    // collinear edges (e.g. resampled straight runs) does not fake a crossing.
    auto orient = [](cplx a, cplx b, cplx p) {
        const double d = cross(b - a, p - a);
        return std::abs(d) <= 1e-12 * std::abs(b - a) * std::abs(p - a) ? 0.0 : d;
    };
    const double d1 = orient(q1, q2, p1);
    const double d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1);
    const double d4 = orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    auto on_segment = [](cplx a, cplx b, cplx p) {
        return std::min(a.real(), b.real()) <= p.real() && p.real() <= std::max(a.real(), b.real()) &&
               std::min(a.imag(), b.imag()) <= p.imag() && p.imag() <= std::max(a.imag(), b.imag());
    };
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

inline double dist_segment_segment(cplx p1, cplx p2, cplx q1, cplx q2)
{
    if (segments_intersect(p1, p2, q1, q2)) {
        return 0.0;
    }
    return std::min({dist_point_segment(p1, q1, q2), dist_point_segment(p2, q1, q2),
                     dist_point_segment(q1, p1, p2), dist_point_segment(q2, p1, p2)});
}

inline double signed_area(std::span<const cplx> pts)
{
    double s = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        s += cross(pts[i], pts[(i + 1) % pts.size()]);
    }
    return 0.5 * s;
}

/// Even-odd point-in-polygon test; boundary points count as inside.
inline bool polygon_contains(std::span<const cplx> pts, cplx z)
{
    bool inside = false;
    const std::size_t n = pts.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if (dist_point_segment(z, pts[j], pts[i]) == 0.0) {
            return true;
        }
        const cplx a = pts[i];
        const cplx b = pts[j];
        if ((a.imag() > z.imag()) != (b.imag() > z.imag())) {
            const double xs = a.real() + (z.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
            if (z.real() < xs) {
                inside = !inside;
            }
        }
    }
    return inside;
}

inline double polygon_boundary_distance(std::span<const cplx> pts, cplx z)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        best = std::min(best, dist_point_segment(z, pts[i], pts[(i + 1) % pts.size()]));
    }
    return best;
}

inline bool polygon_is_simple(std::span<const cplx> pts)
{
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = pts[i], b = pts[(i + 1) % n];
        if (a == b) {
            return false;
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            // adjacent edges share a vertex
            if (j == i + 1 || (i == 0 && j == n - 1)) {
                continue;
            }
            if (segments_intersect(a, b, pts[j], pts[(j + 1) % n])) {
                return false;
            }
        }
    }
    return true;
}

/// Winding number of a closed polygon around z, computed from accumulated
/// argument increments.
inline double winding_number(std::span<const cplx> loop, cplx z)
{
    double total = 0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        total += std::arg((loop[(i + 1) % loop.size()] - z) / (loop[i] - z));
    }
    return total / (2 * pi);
}

inline std::vector<cplx> circle_points(cplx center, double radius, std::size_t n)
{
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = center + std::polar(radius, 2 * pi * double(i) / double(n));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Component queries

inline std::vector<cplx> polygon_of(const Rect& r)
{
    const auto c = r.corners();
    return {c.begin(), c.end()};
}

inline bool is_point(const Component& k) { return std::holds_alternative<PointComponent>(k); }
inline bool is_bounded(const Component& k) { return !std::holds_alternative<OuterDisk>(k); }
inline bool is_round(const Component& k) { return std::holds_alternative<Disk>(k) || std::holds_alternative<OuterDisk>(k); }

/// Polygon vertices for the polygonal kinds; empty for round kinds.
inline std::vector<cplx> polygon_vertices(const Component& k)
{
    if (auto r = std::get_if<Rect>(&k)) return polygon_of(*r);
    if (auto p = std::get_if<Polyline>(&k)) return p->pts;
    return {};
}

inline bool contains(const Component& k, cplx z)
{
    return std::visit(
        [z](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Rect>) {
                return s.a <= z.real() && z.real() <= s.b && s.c <= z.imag() && z.imag() <= s.d;
            } else if constexpr (std::is_same_v<T, Disk>) {
                return std::abs(z - s.center) <= s.radius;
            } else if constexpr (std::is_same_v<T, OuterDisk>) {
                return std::abs(z - s.center) >= s.radius;
            } else if constexpr (std::is_same_v<T, PointComponent>) {
                return z == s.at;
            } else {
                return polygon_contains(s.pts, z);
            }
        },
        k);
}

/// Euclidean distance from z to the component (zero inside).
inline double distance(const Component& k, cplx z)
{
    return std::visit(
        [z](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Rect>) {
                const double dx = std::max({s.a - z.real(), 0.0, z.real() - s.b});
                const double dy = std::max({s.c - z.imag(), 0.0, z.imag() - s.d});
                return std::hypot(dx, dy);
            } else if constexpr (std::is_same_v<T, Disk>) {
                return std::max(0.0, std::abs(z - s.center) - s.radius);
            } else if constexpr (std::is_same_v<T, OuterDisk>) {
                return std::max(0.0, s.radius - std::abs(z - s.center));
            } else if constexpr (std::is_same_v<T, PointComponent>) {
                return std::abs(z - s.at);
            } else {
                if (polygon_contains(s.pts, z)) return 0.0;
                return polygon_boundary_distance(s.pts, z);
            }
        },
        k);
}

inline double perimeter(const Component& k)
{
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Rect>) {
                return 2 * (s.width() + s.height());
            } else if constexpr (std::is_same_v<T, Disk> || std::is_same_v<T, OuterDisk>) {
                return 2 * pi * s.radius;
            } else if constexpr (std::is_same_v<T, PointComponent>) {
                return 0.0;
            } else {
                double p = 0;
                for (std::size_t i = 0; i < s.pts.size(); ++i) p += std::abs(s.pts[(i + 1) % s.pts.size()] - s.pts[i]);
                return p;
            }
        },
        k);
}

/// Diameter; infinite for the exterior kind.
inline double diameter(const Component& k)
{
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Rect>) {
                return std::hypot(s.width(), s.height());
            } else if constexpr (std::is_same_v<T, Disk>) {
                return 2 * s.radius;
            } else if constexpr (std::is_same_v<T, OuterDisk>) {
                return std::numeric_limits<double>::infinity();
            } else if constexpr (std::is_same_v<T, PointComponent>) {
                return 0.0;
            } else {
                double d = 0;
                for (std::size_t i = 0; i < s.pts.size(); ++i)
                    for (std::size_t j = i + 1; j < s.pts.size(); ++j) d = std::max(d, std::abs(s.pts[i] - s.pts[j]));
                return d;
            }
        },
        k);
}

/// Interior point of a polygon far from its boundary, found by grid sampling
/// of the boundary distance.
inline cplx polygon_interior_point(std::span<const cplx> pts)
{
    double xmin = pts[0].real(), xmax = xmin, ymin = pts[0].imag(), ymax = ymin;
    for (cplx p : pts) {
        xmin = std::min(xmin, p.real());
        xmax = std::max(xmax, p.real());
        ymin = std::min(ymin, p.imag());
        ymax = std::max(ymax, p.imag());
    }
    cplx best = pts[0];
    double best_d = -1;
    constexpr int n = 48;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            const cplx z(xmin + (xmax - xmin) * i / n, ymin + (ymax - ymin) * j / n);
            if (!polygon_contains(pts, z)) continue;
            const double d = polygon_boundary_distance(pts, z);
            if (d > best_d) {
                best_d = d;
                best = z;
            }
        }
    }
    // local pattern search
    double step = std::max(xmax - xmin, ymax - ymin) / n;
    while (step > 1e-6 * std::max(xmax - xmin, ymax - ymin)) {
        bool moved = false;
        for (cplx dir : {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)}) {
            const cplx z = best + step * dir;
            if (!polygon_contains(pts, z)) continue;
            const double d = polygon_boundary_distance(pts, z);
            if (d > best_d) {
                best_d = d;
                best = z;
                moved = true;
            }
        }
        if (!moved) step *= 0.5;
    }
    return best;
}

inline cplx polygon_centroid(std::span<const cplx> pts)
{
    cplx c = 0;
    double a = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const cplx p = pts[i], q = pts[(i + 1) % pts.size()];
        const double w = cross(p, q);
        a += w;
        c += (p + q) * w;
    }
    return c / (3.0 * a);
}

/// Expansion center of a component: the center for round kinds and
/// rectangles, the area centroid for polygons when it lies well inside,
/// otherwise a sampled deep interior point.
inline cplx anchor(const Component& k)
{
    return std::visit(
        [](const auto& s) -> cplx {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Rect>) {
                return s.center();
            } else if constexpr (std::is_same_v<T, Disk> || std::is_same_v<T, OuterDisk>) {
                return s.center;
            } else if constexpr (std::is_same_v<T, PointComponent>) {
                return s.at;
            } else {
                const cplx deep = polygon_interior_point(s.pts);
                const cplx cen = polygon_centroid(s.pts);
                if (polygon_contains(s.pts, cen) &&
                    polygon_boundary_distance(s.pts, cen) >= 0.75 * polygon_boundary_distance(s.pts, deep)) {
                    return cen;
                }
                return deep;
            }
        },
        k);
}

/// Largest distance from the anchor to the boundary (circle radius for the
/// exterior kind).
inline double anchor_radius(const Component& k)
{
    const cplx c = anchor(k);
    return std::visit(
        [c](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Disk> || std::is_same_v<T, OuterDisk>) {
                return s.radius;
            } else if constexpr (std::is_same_v<T, PointComponent>) {
                return 0.0;
            } else {
                double r = 0;
                for (cplx p : polygon_vertices(Component(s))) r = std::max(r, std::abs(p - c));
                return r;
            }
        },
        k);
}

/// Uniformly spaced boundary samples (by arc length); a point component
/// yields its single point.
inline std::vector<cplx> sample_boundary(const Component& k, std::size_t n)
{
    if (auto p = std::get_if<PointComponent>(&k)) return {p->at};
    if (auto d = std::get_if<Disk>(&k)) return circle_points(d->center, d->radius, n);
    if (auto o = std::get_if<OuterDisk>(&k)) return circle_points(o->center, o->radius, n);
    const auto pts = polygon_vertices(k);
    const double total = perimeter(k);
    std::vector<cplx> out;
    out.reserve(n);
    std::size_t edge = 0;
    double edge_start = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = total * double(i) / double(n);
        while (true) {
            const double len = std::abs(pts[(edge + 1) % pts.size()] - pts[edge]);
            if (s <= edge_start + len || edge + 1 == pts.size()) {
                const double t = len > 0 ? (s - edge_start) / len : 0.0;
                out.push_back(pts[edge] + std::clamp(t, 0.0, 1.0) * (pts[(edge + 1) % pts.size()] - pts[edge]));
                break;
            }
            edge_start += len;
            ++edge;
        }
    }
    return out;
}

/// Default sample count: 256 per component, scaled up with perimeter
/// relative to the unit circle.
inline std::size_t default_sample_count(const Component& k, std::size_t base = 256)
{
    const double scale = perimeter(k) / (2 * pi);
    return std::max<std::size_t>(base, std::size_t(std::ceil(double(base) * scale)));
}

struct Box {
    double xmin, xmax, ymin, ymax;
};

inline std::optional<Box> bounding_box(const Component& k)
{
    return std::visit(
        [](const auto& s) -> std::optional<Box> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Rect>) {
                return Box{s.a, s.b, s.c, s.d};
            } else if constexpr (std::is_same_v<T, Disk>) {
                return Box{s.center.real() - s.radius, s.center.real() + s.radius, s.center.imag() - s.radius,
                           s.center.imag() + s.radius};
            } else if constexpr (std::is_same_v<T, OuterDisk>) {
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, PointComponent>) {
                return Box{s.at.real(), s.at.real(), s.at.imag(), s.at.imag()};
            } else {
                Box b{s.pts[0].real(), s.pts[0].real(), s.pts[0].imag(), s.pts[0].imag()};
                for (cplx p : s.pts) {
                    b.xmin = std::min(b.xmin, p.real());
                    b.xmax = std::max(b.xmax, p.real());
                    b.ymin = std::min(b.ymin, p.imag());
                    b.ymax = std::max(b.ymax, p.imag());
                }
                return b;
            }
        },
        k);
}

/// Euclidean gap between two components; zero when they meet or one
/// contains the other.
inline double component_gap(const Component& p, const Component& q)
{
    auto round = [](const Component& k) -> std::optional<std::pair<cplx, double>> {
        if (auto d = std::get_if<Disk>(&k)) return std::pair{d->center, d->radius};
        return std::nullopt;
    };
    // Point and exterior kinds reduce to distances against the other one.
    if (auto a = std::get_if<PointComponent>(&p)) return distance(q, a->at);
    if (auto b = std::get_if<PointComponent>(&q)) return distance(p, b->at);
    if (std::holds_alternative<OuterDisk>(p) && std::holds_alternative<OuterDisk>(q)) return 0.0;
    if (std::holds_alternative<OuterDisk>(q)) return component_gap(q, p);
    if (auto o = std::get_if<OuterDisk>(&p)) {
        if (auto d = round(q)) return std::max(0.0, o->radius - (std::abs(d->first - o->center) + d->second));
        double far = 0;
        for (cplx v : polygon_vertices(q)) far = std::max(far, std::abs(v - o->center));
        return std::max(0.0, o->radius - far);
    }
    const auto rp = round(p), rq = round(q);
    if (rp && rq) return std::max(0.0, std::abs(rp->first - rq->first) - rp->second - rq->second);
    if (rq) return component_gap(q, p);
    if (rp) {
        // disk vs polygon
        const auto poly = polygon_vertices(q);
        if (polygon_contains(poly, rp->first)) return 0.0;
        return std::max(0.0, polygon_boundary_distance(poly, rp->first) - rp->second);
    }
    const auto pa = polygon_vertices(p), pb = polygon_vertices(q);
    if (polygon_contains(pb, pa[0]) || polygon_contains(pa, pb[0])) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        for (std::size_t j = 0; j < pb.size(); ++j) {
            best = std::min(best, dist_segment_segment(pa[i], pa[(i + 1) % pa.size()], pb[j], pb[(j + 1) % pb.size()]));
        }
    }
    return best;
}

inline void validate_component(const Component& k)
{
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Rect>) {
                if (!(s.a < s.b && s.c < s.d)) throw Error(ErrorCode::invalid_argument, "rectangle needs a<b and c<d");
            } else if constexpr (std::is_same_v<T, Disk> || std::is_same_v<T, OuterDisk>) {
                if (!(s.radius > 0)) throw Error(ErrorCode::invalid_argument, "disk radius must be positive");
            } else if constexpr (std::is_same_v<T, Polyline>) {
                if (s.pts.size() < 3) throw Error(ErrorCode::invalid_argument, "polyline needs at least 3 vertices");
                if (signed_area(s.pts) <= 0) throw Error(ErrorCode::invalid_argument, "polyline must be counterclockwise");
                if (!polygon_is_simple(s.pts)) throw Error(ErrorCode::invalid_argument, "polyline is self-intersecting");
            }
        },
        k);
}

// ---------------------------------------------------------------------------

struct Domain {
    std::string label;
    std::vector<Component> components;

    std::size_t size() const { return components.size(); }

    bool has_exterior() const
    {
        return std::any_of(components.begin(), components.end(), [](const auto& k) { return !is_bounded(k); });
    }

    /// True when z lies in the open domain.
    bool contains(cplx z) const
    {
        return std::none_of(components.begin(), components.end(), [z](const auto& k) { return squeeze::contains(k, z); });
    }

    /// Distance from z to the nearest component.
    double clearance(cplx z) const
    {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& k : components) best = std::min(best, distance(k, z));
        return best;
    }

    /// Smallest pairwise gap between components.
    double min_gap() const
    {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < components.size(); ++i)
            for (std::size_t j = i + 1; j < components.size(); ++j)
                best = std::min(best, component_gap(components[i], components[j]));
        return best;
    }

    /// Box around all bounded components (and the exterior circle).
    Box extent() const
    {
        Box b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        auto grow = [&b](const Box& o) {
            b.xmin = std::min(b.xmin, o.xmin);
            b.xmax = std::max(b.xmax, o.xmax);
            b.ymin = std::min(b.ymin, o.ymin);
            b.ymax = std::max(b.ymax, o.ymax);
        };
        for (const auto& k : components) {
            if (auto o = std::get_if<OuterDisk>(&k)) {
                grow(Box{o->center.real() - o->radius, o->center.real() + o->radius, o->center.imag() - o->radius,
                         o->center.imag() + o->radius});
            } else {
                grow(*bounding_box(k));
            }
        }
        if (!std::isfinite(b.xmin)) b = Box{-1, 1, -1, 1};
        return b;
    }

    /// Characteristic length used to scale gap tolerances.
    double scale() const
    {
        const Box b = extent();
        return std::max({b.xmax - b.xmin, b.ymax - b.ymin, 1e-300});
    }

    /// Checks component invariants and pairwise positive gaps.
    void validate() const
    {
        int exteriors = 0;
        for (const auto& k : components) {
            validate_component(k);
            if (!is_bounded(k)) ++exteriors;
        }
        if (exteriors > 1) throw Error(ErrorCode::invalid_argument, "at most one exterior component is allowed");
        for (std::size_t i = 0; i < components.size(); ++i) {
            for (std::size_t j = i + 1; j < components.size(); ++j) {
                if (!(component_gap(components[i], components[j]) > 0)) {
                    throw Error(ErrorCode::overlap,
                                "components " + std::to_string(i) + " and " + std::to_string(j) + " are not disjoint");
                }
            }
        }
    }
};

/// Flood fill over a res x res grid covering the domain extent (with a
/// margin). Returns true when all free cells reachable from the grid border
/// (or from one free cell, when there is an exterior component) form a single
/// 4-connected set. A sanity gate, not a proof.
inline bool is_connected(const Domain& dom, std::size_t res = 512)
{
    if (dom.components.empty()) return true;
    Box b = dom.extent();
    const double margin = 0.05 * std::max(b.xmax - b.xmin, b.ymax - b.ymin) + 1e-9;
    b.xmin -= margin;
    b.xmax += margin;
    b.ymin -= margin;
    b.ymax += margin;
    const double hx = (b.xmax - b.xmin) / double(res - 1);
    const double hy = (b.ymax - b.ymin) / double(res - 1);
    std::vector<char> free(res * res);
    std::size_t n_free = 0, seed = res * res;
    for (std::size_t j = 0; j < res; ++j) {
        for (std::size_t i = 0; i < res; ++i) {
            const cplx z(b.xmin + hx * double(i), b.ymin + hy * double(j));
            const bool f = dom.contains(z);
            free[j * res + i] = f;
            if (f) {
                ++n_free;
                if (seed == res * res) seed = j * res + i;
            }
        }
    }
    if (n_free == 0) return false;
    std::vector<char> seen(res * res, 0);
    std::queue<std::size_t> q;
    q.push(seed);
    seen[seed] = 1;
    std::size_t reached = 0;
    while (!q.empty()) {
        const std::size_t c = q.front();
        q.pop();
        ++reached;
        const std::size_t i = c % res, j = c / res;
        auto visit = [&](std::size_t ii, std::size_t jj) {
            const std::size_t id = jj * res + ii;
            if (free[id] && !seen[id]) {
                seen[id] = 1;
                q.push(id);
            }
        };
        if (i > 0) visit(i - 1, j);
        if (i + 1 < res) visit(i + 1, j);
        if (j > 0) visit(i, j - 1);
        if (j + 1 < res) visit(i, j + 1);
    }
    return reached == n_free;
}

} // namespace squeeze
