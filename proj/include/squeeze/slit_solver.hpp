#pragma once

// Canonical circular slit maps of finitely connected domains.
//
// For a base point x and a base component K_k, the slit map phi sends K_k to
// the unit circle, x to 0, and every other component to an arc of a circle
// centred at 0. Only u = log|phi| is computed:
//
//   u(z) = log|z - x| - log|z - c_k| + sum of single-valued harmonic terms,
//
// with u = 0 on K_k, u = log r_i on K_i, and no conjugate period around any
// K_i (i != k). The log term at the anchor c_k is dropped when K_k is the
// exterior component. The single-valued part is a least-squares fit from
// Laurent tails about each component anchor plus simple poles clustered at
// polygon corners. The system matrix does not depend on x or k, so one
// factorization serves every evaluation on a domain.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "squeeze/error.hpp"
#include "squeeze/geometry.hpp"
#include "squeeze/parallel.hpp"

namespace squeeze {

struct SlitParams {
    int series_order = 24;     // M: Laurent order per component
    int collocation = 256;     // N: baseline boundary samples per component
    double tol = 1e-7;         // accepted boundary residual
    int corner_terms = 8;      // singular corner expansion terms per polygon corner
    int corner_poles = 32;     // clustered poles per polygon corner
    double corner_sigma = 2.0; // clustering rate of corner poles
    int max_refinements = 2;   // refinement levels tried when the residual exceeds tol
    double clearance = 1e-6;   // minimum distance of x to a component, relative to domain scale
    double image_reach = 1.0;  // reflect x into components closer than this many anchor radii
    double wedge_zone = 1.5;   // corner reflection when |x - vertex| < this times dist(x, boundary)
    double min_gap = 1e-3;     // minimum component gap, relative to domain scale
    int interior_poles = 96;   // poles inside finely sampled curves (polylines with >= 32 vertices)

    friend bool operator==(const SlitParams&, const SlitParams&) = default;
};

struct SlitRadius {
    std::size_t component = 0;
    double radius = 0;
};

/// Laurent tail sum_n a_n (z - c)^{-n}, or Taylor sum_n a_n (z - c)^n for
/// the exterior component.
struct SeriesBlock {
    std::size_t component = 0;
    cplx center;
    bool exterior = false;
    std::vector<cplx> coefficients; // n = 1..M
};

/// Term Re(a / (z - q)).
struct PoleTerm {
    std::size_t component = 0;
    cplx pole;
    cplx coefficient;
};

/// Term Re(a ((z - vertex) / (z - anchor))^exponent), principal branch.
struct CornerTerm {
    std::size_t component = 0;
    cplx vertex;
    cplx anchor;
    double exponent = 1;
    cplx coefficient;
};

/// Local Green's function correction at a convex polygon corner, with
/// zeta(z) = ((z - vertex) / (z - anchor))^exponent:
/// log|zeta(z) - zeta(at)| - log|z - at| - log|zeta(z) - image|.
/// Its conjugate period is -1 around its own component and 0 elsewhere.
struct WedgeTerm {
    std::size_t component = 0;
    cplx vertex;
    cplx anchor;
    double exponent = 1;
    cplx at;
    cplx zeta_at;
    cplx image;

    cplx zeta(cplx z) const { return std::pow((z - vertex) / (z - anchor), exponent); }
    double value(cplx z) const
    {
        const cplx w = zeta(z);
        return std::log(std::abs(w - zeta_at)) - std::log(std::abs(z - at)) - std::log(std::abs(w - image));
    }
};

/// Term coefficient * log|z - at|.
struct LogSource {
    cplx at;
    double coefficient = 0;
};

struct SlitSolution {
    cplx x;
    std::size_t base = 0;
    std::vector<LogSource> log_sources;
    std::vector<SeriesBlock> series;
    std::vector<PoleTerm> poles;
    std::vector<CornerTerm> corners;
    std::vector<WedgeTerm> wedges;
    double constant = 0;
    std::vector<SlitRadius> radii;
    double boundary_residual = 0;
    double period_residual = 0;
    double condition_estimate = 0;
    int series_order = 0;
    int collocation = 0;

    /// u = log|phi| at z.
    double potential(cplx z) const
    {
        double u = constant;
        for (const auto& s : log_sources) u += s.coefficient * std::log(std::abs(z - s.at));
        for (const auto& b : series) {
            const cplx w = b.exterior ? (z - b.center) : 1.0 / (z - b.center);
            cplx p = w;
            for (const cplx& a : b.coefficients) {
                u += (a * p).real();
                p *= w;
            }
        }
        for (const auto& p : poles) u += (p.coefficient / (z - p.pole)).real();
        for (const auto& c : corners) u += (c.coefficient * std::pow((z - c.vertex) / (z - c.anchor), c.exponent)).real();
        for (const auto& w : wedges) u += w.value(z);
        return u;
    }
};

/// Largest disk about 0 avoiding all slits; 1 when there are none.
inline double slit_squeeze(const SlitSolution& sol)
{
    double s = 1.0;
    for (const auto& r : sol.radii) s = std::min(s, r.radius);
    return s;
}

/// Lower bound R(x) with an optional loop-derived upper bound.
struct Bracket {
    struct BaseEntry {
        std::size_t base = 0;
        bool ok = false;
        std::string error;
        std::vector<SlitRadius> radii;
        double squeeze = 0;
        double residual = 0;
    };

    cplx x;
    double lower = 0;
    double upper = 1;
    std::size_t argmax_base = 0;
    double residual = 0;
    std::string upper_witness;
    std::vector<BaseEntry> diagnostics;
};

namespace detail {

struct BasisTerm {
    enum class Kind { laurent, taylor, pole, corner } kind;
    std::size_t component;
    cplx center;
    double scale;
    int order;
    cplx aux = 0.0;
    double expo = 1.0;
};

struct BoundarySample {
    cplx z;
    double weight;
    std::size_t component;
};

/// Interior angle turn at a polygon vertex (positive for convex corners of a
/// counterclockwise polygon).
inline double vertex_turn(const std::vector<cplx>& pts, std::size_t i)
{
    const std::size_t n = pts.size();
    const cplx prev = pts[(i + n - 1) % n], v = pts[i], next = pts[(i + 1) % n];
    return std::arg((next - v) / (v - prev));
}

} // namespace detail

/// True when the open segment from a to b avoids the polygon boundary, except
/// possibly at the endpoint a.
inline bool segment_inside(const std::vector<cplx>& poly, cplx a, cplx b)
{
    if (!polygon_contains(poly, b)) return false;
    constexpr int n = 64;
    for (int m = 1; m <= n; ++m) {
        const cplx z = a + (b - a) * (double(m) / n);
        if (!polygon_contains(poly, z) || (m < n && polygon_boundary_distance(poly, z) < 1e-12 * std::abs(b - a)))
            return false;
    }
    return true;
}

/// Least-squares system for one domain at a fixed series order and sample
/// density. Immutable after construction; solve() is thread-safe.
class SlitSystem {
public:
    SlitSystem(Domain domain, const SlitParams& params, int order, int samples)
        : domain_(std::move(domain)), params_(params), order_(order), samples_(samples)
    {
        if (domain_.components.empty()) {
            throw Error(ErrorCode::invalid_argument, "domain has no complementary components");
        }
        scale_ = domain_.scale();
        check_gaps();
        build_basis();
        build_samples();
        assemble();
    }

    const Domain& domain() const { return domain_; }
    int order() const { return order_; }
    int samples() const { return samples_; }
    std::size_t rows() const { return std::size_t(qr_.rows()); }
    std::size_t cols() const { return std::size_t(qr_.cols()); }
    double condition_estimate() const { return condition_; }

    /// Known singular part of the potential for base point x: the source at
    /// x and, for each component x is close to, a reflected source inside
    /// that component balanced by a sink at its anchor. Near a convex corner
    /// the reflection is done in the coordinate that straightens the corner.
    /// The corrections are single-valued and harmonic in the domain; they
    /// only take load off the fit.
    struct Singular {
        std::vector<LogSource> sources;
        std::vector<WedgeTerm> wedges;

        double operator()(cplx z) const
        {
            double g = 0;
            for (const auto& s : sources) g += s.coefficient * std::log(std::abs(z - s.at));
            for (const auto& w : wedges) g += w.value(z);
            return g;
        }
    };

    Singular singular_part(cplx x) const
    {
        Singular out;
        out.sources.push_back({x, 1.0});
        for (std::size_t i = 0; i < domain_.size(); ++i) {
            const auto& k = domain_.components[i];
            if (is_point(k)) continue;
            const double reach = params_.image_reach * anchor_radius(k);
            if (distance(k, x) >= reach) continue;
            cplx star;
            if (is_round(k)) {
                const bool outer = !is_bounded(k);
                const cplx c = outer ? std::get<OuterDisk>(k).center : std::get<Disk>(k).center;
                const double r = outer ? std::get<OuterDisk>(k).radius : std::get<Disk>(k).radius;
                if (x == c) continue;
                star = c + r * r / std::conj(x - c);
            } else {
                const auto poly = polygon_vertices(k);
                double best = std::numeric_limits<double>::infinity();
                cplx q;
                for (std::size_t e = 0; e < poly.size(); ++e) {
                    const cplx a = poly[e], b = poly[(e + 1) % poly.size()];
                    const cplx ab = b - a;
                    const double t = std::clamp(((x - a) * std::conj(ab)).real() / std::norm(ab), 0.0, 1.0);
                    const cplx c = a + t * ab;
                    if (std::abs(x - c) < best) {
                        best = std::abs(x - c);
                        q = c;
                    }
                }
                if (auto w = wedge_image(i, poly, x, best)) {
                    out.wedges.push_back(*w);
                    out.sources.push_back({anchors_[i], 1.0});
                    continue;
                }
                star = 2.0 * q - x;
                if (!polygon_contains(poly, star) || polygon_boundary_distance(poly, star) < 0.5 * best) continue;
            }
            out.sources.push_back({star, -1.0});
            if (is_bounded(k)) out.sources.push_back({anchors_[i], 1.0});
        }
        return out;
    }

    /// Particular least-squares solution for the x-dependent data.
    struct Particular {
        cplx x;
        Singular known;
        Eigen::VectorXd y;
    };

    Particular particular(cplx x) const
    {
        check_point(x);
        Particular p{x, singular_part(x), {}};
        Eigen::VectorXd rhs(qr_.rows());
        for (Eigen::Index r = 0; r < qr_.rows(); ++r) rhs[r] = -p.known(rows_[std::size_t(r)].z);
        p.y = qr_.solve(rhs);
        return p;
    }

    SlitSolution solve(cplx x, std::size_t base) const { return solve(particular(x), base); }

    SlitSolution solve(const Particular& part, std::size_t base) const
    {
        if (base >= domain_.size()) throw Error(ErrorCode::invalid_argument, "base component index out of range");
        if (is_point(domain_.components[base])) {
            throw Error(ErrorCode::base_is_point, "component " + std::to_string(base) + " has zero diameter");
        }
        const bool bounded_base = is_bounded(domain_.components[base]);

        Singular g = part.known;
        Eigen::VectorXd y = part.y;
        if (bounded_base) {
            g.sources.push_back({anchors_[base], -1.0});
            y += anchor_solutions_[base];
        }
        const auto& sources = g.sources;

        const Eigen::VectorXd coef = y.cwiseQuotient(col_scale_);

        double residual = 0;
        const Eigen::VectorXd fit = check_matrix_ * coef;
        for (std::size_t r = 0; r < checks_.size(); ++r) {
            residual = std::max(residual, std::abs(fit[Eigen::Index(r)] + g(checks_[r].z)));
        }

        auto mu = [&](std::size_t comp) { return coef[Eigen::Index(2 * terms_.size() + indicator_[comp])]; };
        const double mu_base = mu(base);

        SlitSolution sol;
        sol.x = part.x;
        sol.base = base;
        sol.log_sources = sources;
        sol.wedges = g.wedges;
        sol.constant = -mu_base;
        sol.series_order = order_;
        sol.collocation = samples_;
        sol.condition_estimate = condition_;
        sol.boundary_residual = residual;

        using Kind = detail::BasisTerm::Kind;
        std::map<std::size_t, std::size_t> block_of;
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            const auto& term = terms_[t];
            const cplx a(coef[Eigen::Index(2 * t)], -coef[Eigen::Index(2 * t + 1)]);
            if (term.kind == Kind::pole) {
                sol.poles.push_back({term.component, term.center, a * term.scale});
                continue;
            }
            if (term.kind == Kind::corner) {
                sol.corners.push_back({term.component, term.center, term.aux, term.expo, a});
                continue;
            }
            auto it = block_of.find(term.component);
            if (it == block_of.end()) {
                it = block_of.emplace(term.component, sol.series.size()).first;
                SeriesBlock blk;
                blk.component = term.component;
                blk.center = term.center;
                blk.exterior = term.kind == Kind::taylor;
                sol.series.push_back(blk);
            }
            const double s = term.kind == Kind::taylor ? std::pow(term.scale, -term.order) : std::pow(term.scale, term.order);
            sol.series[it->second].coefficients.push_back(a * s);
        }

        for (std::size_t i = 0; i < domain_.size(); ++i) {
            if (i == base) continue;
            double lambda;
            if (is_point(domain_.components[i])) {
                lambda = sol.potential(std::get<PointComponent>(domain_.components[i]).at);
            } else {
                lambda = mu(i) - mu_base;
            }
            sol.radii.push_back({i, std::exp(lambda)});
        }

        // Conjugate periods come only from the log sources; measure them by
        // winding numbers of each non-base boundary.
        double period = 0;
        for (std::size_t i = 0; i < domain_.size(); ++i) {
            if (i == base || is_point(domain_.components[i]) || !is_bounded(domain_.components[i])) continue;
            double flux = 0;
            for (const auto& s : sources) flux += s.coefficient * winding_number(boundary_loops_[i], s.at);
            for (const auto& w : g.wedges) flux -= w.component == i ? 1.0 : 0.0;
            period = std::max(period, 2 * pi * std::abs(flux));
        }
        sol.period_residual = period;
        return sol;
    }

private:
    void check_gaps() const
    {
        const auto& ks = domain_.components;
        for (std::size_t i = 0; i < ks.size(); ++i) {
            for (std::size_t j = i + 1; j < ks.size(); ++j) {
                if (is_point(ks[i]) || is_point(ks[j])) continue;
                const double gap = component_gap(ks[i], ks[j]);
                if (gap < params_.min_gap * scale_) {
                    std::ostringstream os;
                    os << "components " << i << " and " << j << " are " << gap << " apart (below " << params_.min_gap
                       << " of scale " << scale_ << ")";
                    throw Error(ErrorCode::ill_conditioned, os.str());
                }
            }
        }
    }

    void check_point(cplx x) const
    {
        if (!domain_.contains(x)) throw Error(ErrorCode::invalid_argument, "base point is not in the domain");
        for (const auto& k : domain_.components) {
            if (is_point(k)) {
                if (distance(k, x) == 0.0) throw Error(ErrorCode::invalid_argument, "base point is a puncture");
                continue;
            }
            if (distance(k, x) <= params_.clearance * scale_) {
                throw Error(ErrorCode::invalid_argument, "base point violates solver clearance");
            }
        }
    }

    void build_basis()
    {
        using Kind = detail::BasisTerm::Kind;
        const auto& ks = domain_.components;
        anchors_.resize(ks.size());
        indicator_.assign(ks.size(), 0);
        corners_.resize(ks.size());
        std::size_t n_ind = 0;
        for (std::size_t i = 0; i < ks.size(); ++i) {
            anchors_[i] = anchor(ks[i]);
            if (is_point(ks[i])) continue;
            indicator_[i] = n_ind++;
            const double rho = anchor_radius(ks[i]);
            const Kind kind = is_bounded(ks[i]) ? Kind::laurent : Kind::taylor;
            for (int n = 1; n <= order_; ++n) terms_.push_back({kind, i, anchors_[i], rho, n});

            const auto poly = polygon_vertices(ks[i]);
            if (poly.empty()) continue;
            if (poly.size() >= 32) add_interior_poles(i, poly);
            for (std::size_t v = 0; v < poly.size(); ++v) {
                const double turn = detail::vertex_turn(poly, v);
                if (turn < pi / 9) continue; // smooth or reflex vertex
                const cplx prev = poly[(v + poly.size() - 1) % poly.size()];
                const cplx next = poly[(v + 1) % poly.size()];
                const double edge = std::min(std::abs(prev - poly[v]), std::abs(next - poly[v]));
                const cplx inward = (prev - poly[v]) / std::abs(prev - poly[v]) + (next - poly[v]) / std::abs(next - poly[v]);
                const cplx dir = inward / std::abs(inward);
                const double beta = 0.5 * edge;
                corners_[i].push_back({v, beta, segment_inside(poly, poly[v], anchors_[i])});
                // Singular corner expansion ((z - v) / (z - c))^(k pi / angle).
                // Its branch cut is the segment from v to the anchor c, which
                // must stay inside the component.
                const double expo = pi / (pi + turn);
                if (corners_[i].back().cut) {
                    for (int k = 1; k <= params_.corner_terms; ++k) {
                        terms_.push_back({Kind::corner, i, poly[v], beta, k, anchors_[i], expo * k});
                    }
                }
                const int np = params_.corner_poles;
                for (int j = 1; j <= np; ++j) {
                    const double d = beta * std::exp(-params_.corner_sigma * (std::sqrt(double(np)) - std::sqrt(double(j))));
                    terms_.push_back({Kind::pole, i, poly[v] + d * dir, d, 1});
                }
            }
        }
        n_indicator_ = n_ind;
    }

    /// A Laurent tail about one anchor converges slowly on elongated or
    /// pinched curves, so finely sampled curves also get poles on an inward
    /// offset of the boundary.
    void add_interior_poles(std::size_t i, const std::vector<cplx>& poly)
    {
        const int np = params_.interior_poles;
        if (np <= 0) return;
        const double perim = perimeter(domain_.components[i]);
        const double spacing = perim / double(np);
        const auto pts = sample_boundary(domain_.components[i], std::size_t(np));
        for (std::size_t m = 0; m < pts.size(); ++m) {
            const cplx tangent = pts[(m + 1) % pts.size()] - pts[(m + pts.size() - 1) % pts.size()];
            if (std::abs(tangent) == 0) continue;
            cplx normal = cplx(0, 1) * tangent / std::abs(tangent);
            const double probe = 1e-3 * spacing;
            if (!polygon_contains(poly, pts[m] + probe * normal)) normal = -normal;
            for (double h = 2 * spacing; h > 0.05 * spacing; h *= 0.5) {
                const cplx q = pts[m] + h * normal;
                if (polygon_contains(poly, q) && polygon_boundary_distance(poly, q) > 0.6 * h) {
                    terms_.push_back({detail::BasisTerm::Kind::pole, i, q, h, 1});
                    break;
                }
            }
        }
    }

    void build_samples()
    {
        const auto& ks = domain_.components;
        boundary_loops_.resize(ks.size());
        for (std::size_t i = 0; i < ks.size(); ++i) {
            if (is_point(ks[i])) continue;
            const auto poly = polygon_vertices(ks[i]);
            if (poly.empty()) {
                const bool outer = !is_bounded(ks[i]);
                const cplx c = outer ? std::get<OuterDisk>(ks[i]).center : std::get<Disk>(ks[i]).center;
                const double r = outer ? std::get<OuterDisk>(ks[i]).radius : std::get<Disk>(ks[i]).radius;
                const std::size_t n = std::size_t(std::max(samples_, 4 * order_ + 8));
                for (std::size_t m = 0; m < n; ++m) {
                    const double th = 2 * pi * double(m) / double(n);
                    rows_.push_back({c + std::polar(r, th), 2 * pi * r / double(n), i});
                    checks_.push_back({c + std::polar(r, th + pi / double(n)), 0, i});
                }
                boundary_loops_[i] = circle_points(c, r, 64);
                continue;
            }
            boundary_loops_[i] = poly;
            std::map<std::size_t, double> corner_beta;
            for (const auto& cr : corners_[i]) corner_beta[cr.vertex] = cr.beta;
            const double perim = perimeter(ks[i]);
            const std::size_t np = std::size_t(params_.corner_poles);
            for (std::size_t e = 0; e < poly.size(); ++e) {
                const cplx a = poly[e], b = poly[(e + 1) % poly.size()];
                const double len = std::abs(b - a);
                const std::size_t nu = std::max<std::size_t>(
                    poly.size() > 16 ? 2 : 4, std::size_t(std::ceil(double(samples_) * len / perim)));
                std::vector<double> s;
                for (std::size_t m = 0; m < nu; ++m) s.push_back(len * double(m) / double(nu));
                auto cluster = [&](double beta, bool from_start) {
                    const std::size_t k = 3 * np;
                    for (std::size_t m = 1; m <= k; ++m) {
                        const double d = beta * std::exp(-params_.corner_sigma *
                                                         (std::sqrt(double(np)) - std::sqrt(double(m) / 3.0)));
                        if (d >= 0.5 * len) continue;
                        s.push_back(from_start ? d : len - d);
                    }
                };
                if (auto it = corner_beta.find(e); it != corner_beta.end()) cluster(it->second, true);
                if (auto it = corner_beta.find((e + 1) % poly.size()); it != corner_beta.end()) cluster(it->second, false);
                std::sort(s.begin(), s.end());
                s.erase(std::unique(s.begin(), s.end()), s.end());
                for (std::size_t m = 0; m < s.size(); ++m) {
                    const double lo = m == 0 ? 0.0 : 0.5 * (s[m] + s[m - 1]);
                    const double hi = m + 1 == s.size() ? len : 0.5 * (s[m] + s[m + 1]);
                    rows_.push_back({a + (s[m] / len) * (b - a), hi - lo, i});
                    const double next = m + 1 == s.size() ? len : s[m + 1];
                    checks_.push_back({a + (0.5 * (s[m] + next) / len) * (b - a), 0, i});
                }
            }
        }
    }

    /// Near a convex corner with a cut to the anchor, x is reflected in the
    /// coordinate zeta that straightens the corner. The reflected point must
    /// not land in the domain.
    std::optional<WedgeTerm> wedge_image(std::size_t i, const std::vector<cplx>& poly, cplx x, double d) const
    {
        for (const auto& cr : corners_[i]) {
            if (!cr.cut) continue;
            const cplx v = poly[cr.vertex];
            if (std::abs(x - v) >= cr.beta || std::abs(x - v) >= params_.wedge_zone * d) continue;
            const cplx c = anchors_[i];
            const double alpha = pi / (pi + detail::vertex_turn(poly, cr.vertex));
            WedgeTerm w{i, v, c, alpha, x, 0.0, 0.0};
            w.zeta_at = w.zeta(x);
            const cplx next = poly[(cr.vertex + 1) % poly.size()];
            const cplx u = std::polar(1.0, alpha * std::arg((next - v) / (v - c)));
            w.image = u * u * std::conj(w.zeta_at);
            if (std::abs(std::arg(w.image)) < alpha * pi) {
                const cplx wz = std::pow(w.image, 1.0 / alpha);
                const cplx zs = (v - c * wz) / (1.0 - wz);
                if (!polygon_contains(poly, zs) || polygon_boundary_distance(poly, zs) < 0.25 * std::abs(x - v)) {
                    return std::nullopt;
                }
            }
            return w;
        }
        return std::nullopt;
    }

    void eval_terms(cplx z, double* out) const
    {
        using Kind = detail::BasisTerm::Kind;
        // Consecutive series terms share a center; reuse the running power.
        cplx w = 0, p = 0;
        std::size_t last_comp = std::size_t(-1);
        Kind last_kind = Kind::pole;
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            const auto& term = terms_[t];
            cplx f;
            if (term.kind == Kind::pole) {
                f = term.scale / (z - term.center);
            } else if (term.kind == Kind::corner) {
                f = std::pow((z - term.center) / (z - term.aux), term.expo);
            } else {
                if (term.component != last_comp || term.kind != last_kind || term.order == 1) {
                    w = term.kind == Kind::laurent ? term.scale / (z - term.center) : (z - term.center) / term.scale;
                    p = w;
                } else {
                    p *= w;
                }
                f = p;
            }
            last_comp = term.component;
            last_kind = term.kind;
            out[2 * t] = f.real();
            out[2 * t + 1] = f.imag();
        }
    }

    void assemble()
    {
        const Eigen::Index nc = Eigen::Index(2 * terms_.size() + n_indicator_);
        const Eigen::Index nr = Eigen::Index(rows_.size());
        if (nr < nc) throw Error(ErrorCode::ill_conditioned, "fewer collocation rows than unknowns");
        Eigen::MatrixXd A(nr, nc);
        row_weight_.resize(rows_.size());
        std::vector<double> buf(2 * terms_.size());
        for (Eigen::Index r = 0; r < nr; ++r) {
            const auto& s = rows_[std::size_t(r)];
            const double w = 1.0;
            row_weight_[std::size_t(r)] = w;
            eval_terms(s.z, buf.data());
            for (std::size_t c = 0; c < buf.size(); ++c) A(r, Eigen::Index(c)) = w * buf[c];
            for (Eigen::Index c = Eigen::Index(buf.size()); c < nc; ++c) A(r, c) = 0.0;
            A(r, Eigen::Index(buf.size() + indicator_[s.component])) = -w;
        }
        col_scale_ = A.colwise().norm().transpose();
        for (Eigen::Index c = 0; c < nc; ++c) {
            if (col_scale_[c] == 0.0) col_scale_[c] = 1.0;
            A.col(c) /= col_scale_[c];
        }

        check_matrix_.resize(Eigen::Index(checks_.size()), nc);
        for (std::size_t r = 0; r < checks_.size(); ++r) {
            eval_terms(checks_[r].z, buf.data());
            for (std::size_t c = 0; c < buf.size(); ++c) check_matrix_(Eigen::Index(r), Eigen::Index(c)) = buf[c];
            for (Eigen::Index c = Eigen::Index(buf.size()); c < nc; ++c) check_matrix_(Eigen::Index(r), c) = 0.0;
            check_matrix_(Eigen::Index(r), Eigen::Index(buf.size() + indicator_[checks_[r].component])) = -1.0;
        }

        // Unpivoted blocked QR: roughly nine times faster than the pivoted
        // variant at these sizes, and the columns are already normalized.
        qr_.compute(A);
        const Eigen::VectorXd diag = qr_.matrixQR().diagonal().cwiseAbs();
        condition_ = diag.minCoeff() > 0 ? diag.maxCoeff() / diag.minCoeff() : INFINITY;

        anchor_solutions_.resize(domain_.size());
        for (std::size_t k = 0; k < domain_.size(); ++k) {
            if (is_point(domain_.components[k]) || !is_bounded(domain_.components[k])) continue;
            Eigen::VectorXd rhs(nr);
            for (Eigen::Index r = 0; r < nr; ++r) {
                rhs[r] = std::log(std::abs(rows_[std::size_t(r)].z - anchors_[k])) * row_weight_[std::size_t(r)];
            }
            anchor_solutions_[k] = qr_.solve(rhs);
        }
    }

    Domain domain_;
    SlitParams params_;
    int order_;
    int samples_;
    double scale_ = 1;
    std::vector<cplx> anchors_;
    std::vector<std::size_t> indicator_;
    std::size_t n_indicator_ = 0;
    struct Corner {
        std::size_t vertex;
        double beta;
        bool cut; // segment to the anchor stays inside, so corner terms exist
    };
    std::vector<std::vector<Corner>> corners_;
    std::vector<detail::BasisTerm> terms_;
    std::vector<detail::BoundarySample> rows_;
    std::vector<detail::BoundarySample> checks_;
    std::vector<std::vector<cplx>> boundary_loops_;
    std::vector<double> row_weight_;
    Eigen::MatrixXd check_matrix_;
    Eigen::VectorXd col_scale_;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
    double condition_ = 0;
    std::vector<Eigen::VectorXd> anchor_solutions_;
};

/// Lazily refined family of SlitSystems for one domain. Each solve starts at
/// level 0 and moves up until the solution is accepted or the refinement
/// budget is spent.
class SlitEvaluator {
public:
    SlitEvaluator(Domain domain, SlitParams params = {}) : domain_(std::move(domain)), params_(params)
    {
        if (domain_.components.empty()) {
            throw Error(ErrorCode::invalid_argument, "domain has no complementary components");
        }
    }

    const Domain& domain() const { return domain_; }
    const SlitParams& params() const { return params_; }

    const SlitSystem& system(int level) const
    {
        std::lock_guard lock(mutex_);
        auto it = systems_.find(level);
        if (it == systems_.end()) {
            // Each level doubles the collocation and adds corner poles. The
            // series order grows slowly: high Laurent orders about nearby
            // anchors hurt conditioning more than they help.
            const int m = params_.series_order + 8 * level;
            const int n = params_.collocation << level;
            SlitParams p = params_;
            p.corner_poles += 8 * level;
            p.interior_poles <<= level;
            it = systems_.emplace(level, std::make_shared<SlitSystem>(domain_, p, m, n)).first;
        }
        return *it->second;
    }

    /// Accepted solution, or residual-above-tol after the refinement budget.
    SlitSolution solve(cplx x, std::size_t base) const
    {
        SlitSolution sol;
        for (int level = 0; level <= params_.max_refinements; ++level) {
            sol = system(level).solve(x, base);
            if (accepted(sol)) return sol;
        }
        std::ostringstream os;
        os << "boundary residual " << sol.boundary_residual << " / period residual " << sol.period_residual
           << " above tol " << params_.tol << " at M=" << sol.series_order << ", N=" << sol.collocation;
        throw Error(ErrorCode::residual_above_tol, os.str());
    }

    bool accepted(const SlitSolution& sol) const
    {
        bool ok = sol.boundary_residual <= params_.tol && sol.period_residual <= params_.tol;
        for (const auto& r : sol.radii) ok = ok && r.radius > 0 && r.radius < 1;
        return ok;
    }

    struct BaseResult {
        SlitSolution solution;
        bool ok = false;
        std::string error;
    };

    /// Solves for each listed base, refining only the bases that are not yet
    /// accepted. Failures are kept with their last solution.
    std::map<std::size_t, BaseResult> solve_bases(cplx x, std::vector<std::size_t> pending) const
    {
        std::map<std::size_t, BaseResult> out;
        for (int level = 0; level <= params_.max_refinements && !pending.empty(); ++level) {
            const SlitSystem& sys = system(level);
            const auto part = sys.particular(x);
            std::vector<std::size_t> still;
            for (std::size_t k : pending) {
                BaseResult res;
                res.solution = sys.solve(part, k);
                res.ok = accepted(res.solution);
                if (!res.ok) {
                    const auto& sol = res.solution;
                    std::ostringstream os;
                    os << "residual-above-tol: boundary residual " << sol.boundary_residual << " / period residual "
                       << sol.period_residual << " above tol " << params_.tol << " at M=" << sol.series_order
                       << ", N=" << sol.collocation;
                    res.error = os.str();
                    still.push_back(k);
                }
                out[k] = std::move(res);
            }
            pending = std::move(still);
        }
        return out;
    }

    /// R(x) = max over non-point base components of the smallest slit radius.
    Bracket r_value(cplx x) const
    {
        std::vector<std::size_t> bases;
        for (std::size_t k = 0; k < domain_.size(); ++k) {
            if (!is_point(domain_.components[k])) bases.push_back(k);
        }
        std::map<std::size_t, Bracket::BaseEntry> entries;
        for (auto& [k, res] : solve_bases(x, bases)) {
            Bracket::BaseEntry entry;
            entry.base = k;
            entry.radii = res.solution.radii;
            entry.squeeze = slit_squeeze(res.solution);
            entry.residual = res.solution.boundary_residual;
            entry.ok = res.ok;
            entry.error = res.error;
            entries[k] = std::move(entry);
        }

        Bracket br;
        br.x = x;
        bool any = false;
        std::string causes;
        for (auto& [k, entry] : entries) {
            if (entry.ok) {
                if (!any || entry.squeeze > br.lower) {
                    br.lower = entry.squeeze;
                    br.argmax_base = k;
                    br.residual = entry.residual;
                }
                any = true;
            } else {
                causes += "[base " + std::to_string(k) + "] " + entry.error + "; ";
            }
            br.diagnostics.push_back(std::move(entry));
        }
        if (!any) throw Error(ErrorCode::residual_above_tol, "all base components failed: " + causes);
        return br;
    }

private:
    Domain domain_;
    SlitParams params_;
    mutable std::mutex mutex_;
    mutable std::map<int, std::shared_ptr<SlitSystem>> systems_;
};

inline SlitSolution solve_slit_potential(const Domain& domain, cplx x, std::size_t base, const SlitParams& params = {})
{
    return SlitEvaluator(domain, params).solve(x, base);
}

inline Bracket r_value(const Domain& domain, cplx x, const SlitParams& params = {})
{
    return SlitEvaluator(domain, params).r_value(x);
}

struct GridSpec {
    Box box{-1, 1, -1, 1};
    std::size_t nx = 3;
    std::size_t ny = 3;
};

struct FieldRow {
    cplx x;
    std::optional<Bracket> bracket;
    std::string error;
};

/// Row-major sweep over grid points lying in the domain with clearance.
/// Failures are recorded per row.
inline std::vector<FieldRow> r_field(const SlitEvaluator& eval, const GridSpec& grid)
{
    std::vector<cplx> pts;
    const Domain& dom = eval.domain();
    const double min_clear = eval.params().clearance * dom.scale();
    for (std::size_t j = 0; j < grid.ny; ++j) {
        const double y = grid.ny == 1 ? grid.box.ymin
                                      : grid.box.ymin + (grid.box.ymax - grid.box.ymin) * double(j) / double(grid.ny - 1);
        for (std::size_t i = 0; i < grid.nx; ++i) {
            const double xr = grid.nx == 1 ? grid.box.xmin
                                           : grid.box.xmin + (grid.box.xmax - grid.box.xmin) * double(i) / double(grid.nx - 1);
            const cplx z(xr, y);
            if (!dom.contains(z)) continue;
            bool clear = true;
            for (const auto& k : dom.components) {
                if (distance(k, z) <= (is_point(k) ? 0.0 : min_clear)) clear = false;
            }
            if (clear) pts.push_back(z);
        }
    }
    std::vector<FieldRow> rows(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        rows[i].x = pts[i];
        try {
            rows[i].bracket = eval.r_value(pts[i]);
        } catch (const Error& e) {
            rows[i].error = e.what();
        }
    });
    return rows;
}

inline std::vector<FieldRow> r_field(const Domain& domain, const GridSpec& grid, const SlitParams& params = {})
{
    return r_field(SlitEvaluator(domain, params), grid);
}

} // namespace squeeze
