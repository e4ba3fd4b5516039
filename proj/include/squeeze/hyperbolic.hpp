#pragma once

// Hyperbolic metric on round model domains and loop-length upper bounds.
//
// Densities use curvature -1 (2 / (1 - |z|^2) on the unit disk). The
// Kobayashi-Royden length is half of that: a loop of Kobayashi length l through
// the base point squeezes with s <= (e^l - 1) / (e^l + 1), because its image in
// the unit disk must leave B_s(0) and come back.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "squeeze/error.hpp"
#include "squeeze/geometry.hpp"

namespace squeeze {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Poincare distance in the unit disk, d(0, s) = log((1 + s) / (1 - s)).
inline double poincare_distance_disk(cplx a, cplx b)
{
    if (!(std::abs(a) < 1) || !(std::abs(b) < 1)) {
        throw Error(ErrorCode::invalid_argument, "Poincare distance needs points inside the unit disk");
    }
    const double t = std::abs(a - b) / std::abs(1.0 - std::conj(a) * b);
    return 2 * std::atanh(t);
}

struct DiskModel {
    cplx center = 0;
    double radius = 1;
};

struct PuncturedDiskModel {
    cplx center = 0; // the puncture
    double radius = 1;
};

/// {inner < |z - center| < outer}; outer may be infinite.
struct AnnulusModel {
    cplx center = 0;
    double inner = 0.5;
    double outer = 1;
};

using Model = std::variant<DiskModel, PuncturedDiskModel, AnnulusModel>;

inline const char* model_kind(const Model& m)
{
    switch (m.index()) {
    case 0: return "disk";
    case 1: return "punctured-disk";
    default: return "annulus";
    }
}

inline bool model_contains(const Model& m, cplx z)
{
    return std::visit(
        [z](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            const double r = std::abs(z - s.center);
            if constexpr (std::is_same_v<T, DiskModel>) {
                return r < s.radius;
            } else if constexpr (std::is_same_v<T, PuncturedDiskModel>) {
                return r > 0 && r < s.radius;
            } else {
                return r > s.inner && r < s.outer;
            }
        },
        m);
}

inline void validate_model(const Model& m)
{
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, AnnulusModel>) {
                if (!(s.inner > 0 && s.outer > s.inner)) {
                    throw Error(ErrorCode::invalid_argument, "annulus model needs 0 < inner < outer");
                }
            } else {
                if (!(s.radius > 0 && std::isfinite(s.radius))) {
                    throw Error(ErrorCode::invalid_argument, "model radius must be positive and finite");
                }
            }
        },
        m);
}

/// Curvature -1 density of the model's complete metric at z.
inline double metric_density(const Model& m, cplx z)
{
    validate_model(m);
    if (!model_contains(m, z)) throw Error(ErrorCode::invalid_argument, std::string("point outside the ") + model_kind(m));
    return std::visit(
        [z](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            const double r = std::abs(z - s.center);
            if constexpr (std::is_same_v<T, DiskModel>) {
                return 2 * s.radius / (s.radius * s.radius - r * r);
            } else if constexpr (std::is_same_v<T, PuncturedDiskModel>) {
                return 1 / (r * std::log(s.radius / r));
            } else {
                if (!std::isfinite(s.outer)) return 1 / (r * std::log(r / s.inner));
                // log z maps the annulus to a vertical strip of width L
                const double L = std::log(s.outer / s.inner);
                return pi / (L * r * std::sin(pi * std::log(r / s.inner) / L));
            }
        },
        m);
}

namespace detail {

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                        int depth)
{
    const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

} // namespace detail

/// Curvature -1 length of a closed polyline in the model.
inline double model_length(const Model& m, std::span<const cplx> loop, double tol = 1e-10)
{
    if (loop.size() < 2) throw Error(ErrorCode::invalid_argument, "loop needs at least two vertices");
    double total = 0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const cplx a = loop[i], b = loop[(i + 1) % loop.size()];
        const double len = std::abs(b - a);
        if (len == 0) continue;
        auto f = [&](double t) { return metric_density(m, a + (b - a) * t) * len; };
        const double fa = f(0), fm = f(0.5), fb = f(1);
        total += detail::adaptive_simpson(f, 0, 1, fa, fm, fb, (fa + 4 * fm + fb) / 6, tol * len, 30);
    }
    return total;
}

struct LoopEstimate {
    std::vector<cplx> loop;
    bool found = false;
    std::optional<Model> witness;
    double length_upper = infinity;     // curvature -1 length in the witness
    double kobayashi_length = infinity; // half of length_upper
    std::size_t candidates = 0;         // witnesses that passed the inclusion check
    std::string note;
};

namespace detail {

/// Smallest and largest distance from c to a component (the largest is
/// infinite for the exterior kind).
inline std::pair<double, double> radial_range(const Component& k, cplx c)
{
    if (auto o = std::get_if<OuterDisk>(&k)) {
        return {std::max(0.0, o->radius - std::abs(c - o->center)), infinity};
    }
    if (auto d = std::get_if<Disk>(&k)) {
        const double r = std::abs(c - d->center);
        return {std::max(0.0, r - d->radius), r + d->radius};
    }
    if (auto p = std::get_if<PointComponent>(&k)) {
        const double r = std::abs(c - p->at);
        return {r, r};
    }
    const auto pts = polygon_vertices(k);
    double far = 0;
    for (cplx v : pts) far = std::max(far, std::abs(v - c));
    return {distance(k, c), far};
}

/// Membership in the witness shrunk by a relative margin, so that boundary
/// samples of a component whose edge the witness shares do not count as
/// inside through rounding.
inline bool model_contains_inner(const Model& m, cplx z)
{
    constexpr double margin = 1e-12;
    return std::visit(
        [z](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            const double r = std::abs(z - s.center);
            if constexpr (std::is_same_v<T, AnnulusModel>) {
                return r > s.inner * (1 + margin) && r < s.outer * (1 - margin);
            } else {
                return r < s.radius * (1 - margin);
            }
        },
        m);
}

/// Independent inclusion check: no sampled component boundary point (and no
/// point component) lies in the witness, and every loop vertex does.
inline bool witness_verified(const Domain& dom, const Model& m, std::span<const cplx> loop, std::size_t samples)
{
    for (cplx z : loop) {
        if (!model_contains(m, z)) return false;
    }
    for (const auto& k : dom.components) {
        if (is_point(k)) {
            if (model_contains(m, std::get<PointComponent>(k).at)) return false;
            continue;
        }
        for (cplx z : sample_boundary(k, samples)) {
            if (model_contains_inner(m, z)) return false;
        }
        // a component swallowed whole by the witness has no boundary sample
        // on the witness boundary, so test one interior point too
        const cplx inside = is_bounded(k) ? anchor(k) : cplx(infinity, 0);
        if (is_bounded(k) && model_contains(m, inside)) return false;
    }
    return true;
}

} // namespace detail

/// Upper bound for the hyperbolic length of a loop in the domain by the
/// inclusion principle. Candidate witnesses are round disks, punctured disks
/// and annuli centred at component anchors and at the loop centroid.
inline LoopEstimate kobayashi_length_upper(const Domain& dom, std::span<const cplx> loop, std::size_t verify_samples = 512)
{
    if (loop.size() < 3) throw Error(ErrorCode::invalid_argument, "loop needs at least three vertices");
    for (cplx z : loop) {
        if (!dom.contains(z)) throw Error(ErrorCode::invalid_argument, "loop leaves the domain");
    }
    LoopEstimate est;
    est.loop.assign(loop.begin(), loop.end());

    std::vector<cplx> centers;
    cplx mean = 0;
    for (cplx z : loop) mean += z;
    centers.push_back(mean / double(loop.size()));
    for (const auto& k : dom.components) {
        if (is_bounded(k)) centers.push_back(anchor(k));
    }

    std::vector<Model> candidates;
    for (cplx c : centers) {
        double lmin = infinity, lmax = 0;
        for (cplx z : loop) {
            lmin = std::min(lmin, std::abs(z - c));
            lmax = std::max(lmax, std::abs(z - c));
        }
        // Components must sit entirely inside lmin or entirely beyond lmax.
        double r1 = 0, r2 = infinity;
        bool separable = true, puncture = false, inner_any = false;
        for (const auto& k : dom.components) {
            const auto [near, far] = detail::radial_range(k, c);
            if (far < lmin) {
                inner_any = true;
                r1 = std::max(r1, far);
                if (is_point(k) && far == 0) puncture = true;
            } else if (near > lmax) {
                r2 = std::min(r2, near);
            } else {
                separable = false;
            }
        }
        if (!separable) continue;
        if (!inner_any) {
            if (std::isfinite(r2)) candidates.push_back(DiskModel{c, r2});
        } else if (puncture && r1 == 0) {
            if (std::isfinite(r2)) candidates.push_back(PuncturedDiskModel{c, r2});
        } else if (r1 > 0) {
            candidates.push_back(AnnulusModel{c, r1, r2});
        }
    }

    for (const auto& m : candidates) {
        if (!detail::witness_verified(dom, m, loop, verify_samples)) continue;
        ++est.candidates;
        const double len = model_length(m, loop);
        if (len < est.length_upper) {
            est.length_upper = len;
            est.witness = m;
        }
    }
    est.found = est.witness.has_value();
    if (est.found) {
        est.kobayashi_length = est.length_upper / 2;
    } else {
        est.note = "no-witness-found: no round disk, punctured disk or annulus separates the loop";
    }
    return est;
}

/// s <= (e^L - 1) / (e^L + 1) for a loop of Kobayashi length L through the
/// point, when the loop cannot be contracted in the domain.
inline double squeeze_upper_from_loop(double L)
{
    if (!(L >= 0)) throw Error(ErrorCode::invalid_argument, "loop length must be nonnegative");
    return std::tanh(L / 2);
}

/// d(1/(1+delta)) - d(1/(1+2 delta)) with d(t) = log((1+t)/(1-t)); tends to
/// log 2 as delta -> 0. Simplified to avoid cancellation in 1 - t.
inline double sublemma_gap(double delta)
{
    if (!(delta > 0 && delta <= 1)) throw Error(ErrorCode::invalid_argument, "delta must lie in (0, 1]");
    return std::log1p(1 / (1 + delta));
}

} // namespace squeeze
