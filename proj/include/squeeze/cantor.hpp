#pragma once

// Finite stages of the two Cantor set constructions.
//
// Theorem1State: I^2 split alternately across vertical and horizontal
// mid-segments, every cube at every stage, with exact measure bookkeeping.
// Theorem2State: cubes surrounded by loops where the squeezing function is
// large, marked points near the boundary whose tiny cubes make it small, and
// the certificate rows that bracket both.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "squeeze/domain_json.hpp"
#include "squeeze/domain_ops.hpp"
#include "squeeze/error.hpp"
#include "squeeze/geometry.hpp"
#include "squeeze/hyperbolic.hpp"
#include "squeeze/parallel.hpp"
#include "squeeze/slit_solver.hpp"

namespace squeeze {

inline constexpr int state_version = 1;

/// Closed curve at distance `offset` from the rectangle (straight edges and
/// quarter circles), sampled uniformly by arc length from (a, c - offset).
inline std::vector<cplx> rounded_rect(const Rect& r, double offset, std::size_t n)
{
    if (!(offset > 0)) throw Error(ErrorCode::invalid_argument, "offset must be positive");
    const double w = r.width(), h = r.height(), q = 0.5 * pi * offset;
    const double total = 2 * (w + h) + 4 * q;
    struct Piece {
        double len;
        cplx from, to; // straight piece
        cplx center;   // arc piece
        double angle = 0;
        bool arc = false;
    };
    const Piece pieces[8] = {
        {w, {r.a, r.c - offset}, {r.b, r.c - offset}, {}, 0, false},
        {q, {}, {}, {r.b, r.c}, -0.5 * pi, true},
        {h, {r.b + offset, r.c}, {r.b + offset, r.d}, {}, 0, false},
        {q, {}, {}, {r.b, r.d}, 0, true},
        {w, {r.b, r.d + offset}, {r.a, r.d + offset}, {}, 0, false},
        {q, {}, {}, {r.a, r.d}, 0.5 * pi, true},
        {h, {r.a - offset, r.d}, {r.a - offset, r.c}, {}, 0, false},
        {q, {}, {}, {r.a, r.c}, pi, true},
    };
    std::vector<cplx> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = total * double(i) / double(n);
        for (const auto& p : pieces) {
            if (s <= p.len) {
                const double t = p.len > 0 ? s / p.len : 0;
                out.push_back(p.arc ? p.center + std::polar(offset, p.angle + 0.5 * pi * t) : p.from + t * (p.to - p.from));
                break;
            }
            s -= p.len;
        }
    }
    return out;
}

inline Domain domain_of(const std::vector<HierarchyCube>& cubes, const std::string& label)
{
    Domain d;
    d.label = label;
    for (const auto& c : cubes) d.components.push_back(c.rect.to_rect());
    return d;
}

namespace detail {

inline json rational_json(const rational& q) { return q.str(); }

inline rational rational_from(const json& j, const std::string& path)
{
    if (!j.is_string()) throw Error(ErrorCode::config_error, path + ": expected a rational string");
    try {
        return rational(j.get<std::string>());
    } catch (const std::exception&) {
        throw Error(ErrorCode::config_error, path + ": malformed rational '" + j.get<std::string>() + "'");
    }
}

inline json cube_json(const HierarchyCube& c)
{
    json lineage = json::array();
    for (const auto& s : c.lineage) lineage.push_back({to_string(s.axis), s.k});
    return {{"rect", {rational_json(c.rect.a), rational_json(c.rect.b), rational_json(c.rect.c), rational_json(c.rect.d)}},
            {"depth", c.depth},
            {"lineage", lineage}};
}

inline HierarchyCube cube_from(const json& j, const std::string& path)
{
    require_keys(j, path, {"rect", "depth", "lineage"});
    const auto& r = j["rect"];
    if (!r.is_array() || r.size() != 4) throw Error(ErrorCode::config_error, path + ".rect: expected 4 rationals");
    HierarchyCube c;
    c.rect = {rational_from(r[0], path + ".rect[0]"), rational_from(r[1], path + ".rect[1]"),
              rational_from(r[2], path + ".rect[2]"), rational_from(r[3], path + ".rect[3]")};
    c.depth = j["depth"].get<int>();
    for (const auto& s : j["lineage"]) {
        const std::string axis = s.at(0);
        if (axis != "vertical" && axis != "horizontal") throw Error(ErrorCode::config_error, path + ".lineage: bad axis");
        c.lineage.push_back({axis == "vertical" ? Axis::vertical : Axis::horizontal, s.at(1).get<int>()});
    }
    return c;
}

inline void check_version(const json& j, const std::string& kind, const std::string& path)
{
    if (!j.contains("version") || j["version"] != state_version) {
        throw Error(ErrorCode::config_error, path + ".version: expected " + std::to_string(state_version));
    }
    if (!j.contains("kind") || j["kind"] != kind) throw Error(ErrorCode::config_error, path + ".kind: expected " + kind);
}

inline json complex_json(cplx z) { return {z.real(), z.imag()}; }

inline cplx complex_from(const json& j, const std::string& path)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw Error(ErrorCode::config_error, path + ": expected [re, im]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json rect_json(const Rect& r) { return {r.a, r.b, r.c, r.d}; }

inline Rect rect_from(const json& j, const std::string& path)
{
    if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::config_error, path + ": expected [a, b, c, d]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Cubes cut by shrinking slabs under a measure budget

struct Theorem1State {
    double epsilon = 0.5;
    int stage = 0;
    std::vector<int> k_schedule;
    std::vector<HierarchyCube> cubes;
    rational measure = 1;

    Domain domain() const { return domain_of(cubes, "theorem1 stage " + std::to_string(stage)); }
};

/// Stage s (1-based) splits across vertical segments when s is odd.
inline Axis stage_axis(int stage) { return stage % 2 == 1 ? Axis::vertical : Axis::horizontal; }

inline Theorem1State theorem1_initial(double epsilon)
{
    if (!(epsilon > 0 && epsilon < 1)) throw Error(ErrorCode::invalid_argument, "epsilon must lie in (0, 1)");
    Theorem1State st;
    st.epsilon = epsilon;
    st.cubes.push_back(HierarchyCube{ExactRect{0, 1, 0, 1}, 0, {}});
    return st;
}

/// Splits every cube of the state once more with parameter k.
inline void advance_theorem1(Theorem1State& st, int k)
{
    const Axis axis = stage_axis(st.stage + 1);
    std::vector<HierarchyCube> next;
    next.reserve(2 * st.cubes.size());
    for (const auto& c : st.cubes) {
        try {
            auto [lo, hi] = split_cube(c, k, axis);
            next.push_back(std::move(lo));
            next.push_back(std::move(hi));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::degenerate_child) throw;
            throw Error(ErrorCode::schedule_too_aggressive,
                        "stage " + std::to_string(st.stage + 1) + " with k=" + std::to_string(k) + ": " + e.what());
        }
    }
    st.cubes = std::move(next);
    st.k_schedule.push_back(k);
    ++st.stage;
    std::vector<ExactRect> rects;
    for (const auto& c : st.cubes) rects.push_back(c.rect);
    st.measure = lebesgue_measure(std::span<const ExactRect>(rects));
}

/// Smallest k per stage keeping a retained fraction of (1 - eps)^(1/depth),
/// so the product of the fractions stays above 1 - eps.
inline std::vector<int> auto_schedule(double epsilon, int depth)
{
    if (!(epsilon > 0 && epsilon < 1)) throw Error(ErrorCode::invalid_argument, "epsilon must lie in (0, 1)");
    if (depth < 1) throw Error(ErrorCode::invalid_argument, "depth must be at least 1");
    const double f = std::pow(1 - epsilon, 1.0 / depth);
    std::vector<int> ks;
    rational width = 1, height = 1;
    for (int s = 1; s <= depth; ++s) {
        const Axis axis = stage_axis(s);
        const rational side = axis == Axis::vertical ? width : height;
        int k = int(std::ceil(2 / ((1 - f) * side.convert_to<double>())));
        while (1 - rational(2, k) / side < rational(f)) ++k;
        ks.push_back(k);
        const rational child = (side - rational(2, k)) / 2;
        (axis == Axis::vertical ? width : height) = child;
    }
    return ks;
}

inline Theorem1State build_theorem1(double epsilon, int depth, std::optional<std::vector<int>> schedule = {})
{
    if (depth < 1) throw Error(ErrorCode::invalid_argument, "depth must be at least 1");
    const std::vector<int> ks = schedule ? *schedule : auto_schedule(epsilon, depth);
    if (int(ks.size()) != depth) {
        throw Error(ErrorCode::invalid_argument, "k schedule has " + std::to_string(ks.size()) + " entries for depth " +
                                                     std::to_string(depth));
    }
    Theorem1State st = theorem1_initial(epsilon);
    for (int k : ks) advance_theorem1(st, k);
    if (st.measure < 1 - rational(epsilon)) {
        throw Error(ErrorCode::measure_bound_violated, "measure " + std::to_string(st.measure.convert_to<double>()) +
                                                           " is below 1 - eps = " + std::to_string(1 - epsilon));
    }
    return st;
}

inline json to_json(const Theorem1State& st)
{
    json cubes = json::array();
    for (const auto& c : st.cubes) cubes.push_back(detail::cube_json(c));
    return {{"version", state_version},   {"kind", "theorem1"},
            {"epsilon", st.epsilon},      {"stage", st.stage},
            {"k_schedule", st.k_schedule}, {"measure", detail::rational_json(st.measure)},
            {"measure_value", st.measure.convert_to<double>()}, {"cubes", cubes}};
}

inline Theorem1State theorem1_from_json(const json& j, const std::string& path = "state")
{
    detail::check_version(j, "theorem1", path);
    detail::require_keys(j, path, {"version", "kind", "epsilon", "stage", "k_schedule", "measure", "measure_value", "cubes"});
    Theorem1State st;
    st.epsilon = j["epsilon"].get<double>();
    st.stage = j["stage"].get<int>();
    st.k_schedule = j["k_schedule"].get<std::vector<int>>();
    st.measure = detail::rational_from(j["measure"], path + ".measure");
    for (std::size_t i = 0; i < j["cubes"].size(); ++i) {
        st.cubes.push_back(detail::cube_from(j["cubes"][i], path + ".cubes[" + std::to_string(i) + "]"));
    }
    if (int(st.k_schedule.size()) != st.stage) throw Error(ErrorCode::config_error, path + ": stage and schedule disagree");
    return st;
}

struct Theorem1Options {
    double delta = 0.01;
    std::size_t samples = 16;        // points on each rounded cube boundary
    std::optional<double> threshold; // defaults to 1 - epsilon
    SlitParams params;
};

struct Theorem1Row {
    int stage = 0;
    std::size_t cube = 0;
    cplx x;
    double lower = std::numeric_limits<double>::quiet_NaN();
    double upper = 1;
    double residual = 0;
    std::string error;
    bool pass = false;
};

struct Theorem1Certificate {
    double delta = 0;
    double threshold = 0;
    std::vector<Theorem1Row> rows;
    std::map<int, double> min_lower; // per stage, over solved rows
    std::size_t failures = 0;        // solver failures, not bound violations
    std::size_t skipped = 0;         // sample points outside the domain
    std::optional<double> trend;     // min(stage d) - min(stage d-1)
    bool pass = false;
};

namespace detail {

inline std::vector<Theorem1Row> theorem1_rows(const Theorem1State& st, const Theorem1Options& opt, double threshold,
                                              std::size_t& skipped)
{
    const Domain dom = st.domain();
    const SlitEvaluator eval(dom, opt.params);
    std::vector<Theorem1Row> rows;
    for (std::size_t i = 0; i < st.cubes.size(); ++i) {
        for (cplx z : rounded_rect(st.cubes[i].rect.to_rect(), opt.delta, opt.samples)) {
            if (!dom.contains(z) || dom.clearance(z) <= opt.params.clearance * dom.scale()) {
                ++skipped;
                continue;
            }
            Theorem1Row row;
            row.stage = st.stage;
            row.cube = i;
            row.x = z;
            rows.push_back(row);
        }
    }
    parallel_for(rows.size(), [&](std::size_t r) {
        auto& row = rows[r];
        try {
            const Bracket br = eval.r_value(row.x);
            row.lower = br.lower;
            row.upper = br.upper;
            row.residual = br.residual;
            row.pass = br.lower >= threshold;
        } catch (const Error& e) {
            row.error = e.what();
        }
    });
    return rows;
}

} // namespace detail

struct LadderRow {
    int k = 0;
    cplx x;
    double lower = std::numeric_limits<double>::quiet_NaN();
    std::string error;
};

/// R after a single first-stage cut with each k, at fixed points. Finer cuts
/// leave less room for the complement to be seen from outside the cube, so
/// the lower bounds should not decrease along the ladder.
inline std::vector<LadderRow> theorem1_k_ladder(double epsilon, std::span<const int> ks, std::span<const cplx> pts,
                                                const SlitParams& params = {})
{
    std::vector<LadderRow> rows;
    for (int k : ks) {
        Theorem1State st = theorem1_initial(epsilon);
        advance_theorem1(st, k);
        const SlitEvaluator eval(st.domain(), params);
        const std::size_t first = rows.size();
        for (cplx z : pts) rows.push_back({k, z});
        parallel_for(pts.size(), [&](std::size_t i) {
            auto& row = rows[first + i];
            try {
                row.lower = eval.r_value(row.x).lower;
            } catch (const Error& e) {
                row.error = e.what();
            }
        });
    }
    return rows;
}

/// Lower bounds R on the delta-boundary of every cube at the final stage and
/// at the stage before it.
inline Theorem1Certificate certify_theorem1(const Theorem1State& st, const Theorem1Options& opt = {})
{
    if (!(opt.delta > 0)) throw Error(ErrorCode::invalid_argument, "delta must be positive");
    if (st.stage < 1) throw Error(ErrorCode::invalid_argument, "state has no stages");
    Theorem1Certificate cert;
    cert.delta = opt.delta;
    cert.threshold = opt.threshold.value_or(1 - st.epsilon);

    std::vector<Theorem1State> stages;
    if (st.stage >= 2) {
        Theorem1State prev = theorem1_initial(st.epsilon);
        for (int s = 0; s + 1 < st.stage; ++s) advance_theorem1(prev, st.k_schedule[std::size_t(s)]);
        stages.push_back(std::move(prev));
    }
    stages.push_back(st);

    for (const auto& s : stages) {
        auto rows = detail::theorem1_rows(s, opt, cert.threshold, cert.skipped);
        for (auto& r : rows) cert.rows.push_back(std::move(r));
    }
    cert.pass = true;
    for (const auto& r : cert.rows) {
        if (!r.error.empty()) {
            ++cert.failures;
            continue;
        }
        auto it = cert.min_lower.find(r.stage);
        if (it == cert.min_lower.end()) {
            cert.min_lower[r.stage] = r.lower;
        } else {
            it->second = std::min(it->second, r.lower);
        }
        cert.pass = cert.pass && r.pass;
    }
    if (cert.min_lower.count(st.stage) && cert.min_lower.count(st.stage - 1)) {
        cert.trend = cert.min_lower[st.stage] - cert.min_lower[st.stage - 1];
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Lower bounds for the squeezing function through a restricted slit map

struct LowerBound {
    double value = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    std::string witness;
    std::string error;
};

/// Slit maps of the domain formed by a subset of the components, restricted
/// to the full domain. phi stays injective on the smaller domain and still
/// omits a disk about 0 of radius min(slit radii, min |phi| over the removed
/// components), which bounds the squeezing function from below. With the
/// full component list this is R itself. The minimum over a removed
/// component is taken over its sampled boundary (phi has no zeros there, so
/// log|phi| is harmonic and attains its minimum on the boundary).
class RestrictedLowerBound {
public:
    RestrictedLowerBound(const Domain& full, std::vector<std::size_t> subset, const SlitParams& params,
                         std::size_t removed_samples = 64)
        : subset_(std::move(subset)), samples_(removed_samples), total_(full.size())
    {
        std::sort(subset_.begin(), subset_.end());
        Domain sub;
        sub.label = full.label;
        std::size_t next = 0;
        for (std::size_t i = 0; i < full.size(); ++i) {
            if (next < subset_.size() && subset_[next] == i) {
                sub.components.push_back(full.components[i]);
                ++next;
            } else {
                removed_.push_back(full.components[i]);
            }
        }
        if (sub.components.empty()) throw Error(ErrorCode::invalid_argument, "empty component subset");
        eval_.emplace(std::move(sub), params);
    }

    LowerBound at(cplx x) const
    {
        LowerBound out;
        const Domain& sub = eval_->domain();
        std::vector<std::size_t> bases;
        for (std::size_t k = 0; k < sub.size(); ++k) {
            if (!is_point(sub.components[k])) bases.push_back(k);
        }
        try {
            std::string causes;
            for (auto& [k, res] : eval_->solve_bases(x, bases)) {
                if (!res.ok) {
                    causes += res.error + "; ";
                    continue;
                }
                double v = slit_squeeze(res.solution);
                for (const auto& e : removed_) {
                    double umin = std::numeric_limits<double>::infinity();
                    for (cplx z : sample_boundary(e, is_point(e) ? 1 : samples_)) {
                        umin = std::min(umin, res.solution.potential(z));
                    }
                    v = std::min(v, std::exp(umin));
                }
                if (!out.ok || v > out.value) {
                    out.value = v;
                    out.ok = true;
                    std::ostringstream os;
                    os << (removed_.empty() ? "slit-map" : "slit-restriction") << " base=" << subset_[k] << " components="
                       << subset_.size() << "/" << total_;
                    out.witness = os.str();
                }
            }
            if (!out.ok) out.error = "all base components failed: " + causes;
        } catch (const Error& e) {
            out.error = e.what();
        }
        return out;
    }

private:
    std::vector<std::size_t> subset_;
    std::vector<Component> removed_;
    std::size_t samples_;
    std::size_t total_;
    std::optional<SlitEvaluator> eval_;
};

/// Indices of the `count` components nearest to a point set.
inline std::vector<std::size_t> nearest_components(const Domain& dom, std::span<const cplx> pts, std::size_t count)
{
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < dom.size(); ++i) {
        double d = std::numeric_limits<double>::infinity();
        for (cplx z : pts) d = std::min(d, distance(dom.components[i], z));
        order.emplace_back(d, i);
    }
    std::sort(order.begin(), order.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < std::min(count, order.size()); ++i) out.push_back(order[i].second);
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Stage verification

struct CertificateRow {
    int stage = 0;
    std::string kind; // "loop" (placement), "i'" (upper on circles), "ii'" (lower on loops)
    cplx x;
    double value = std::numeric_limits<double>::quiet_NaN();
    double threshold = 0;
    std::string witness;
    bool pass = false;
    bool solver_failure = false;

    friend bool operator==(const CertificateRow&, const CertificateRow&) = default;
};

/// Lower-bound check on a loop: value > threshold at every sample.
struct LoopCheck {
    int stage = 0;
    std::string kind = "ii'";
    std::vector<cplx> pts;
    std::size_t samples = 8;
    double threshold = 0;
    bool strict = true;
};

/// Upper-bound check on the circle |z - center| = radius: value < threshold.
struct CircleCheck {
    int stage = 0;
    std::string kind = "i'";
    cplx center;
    double radius = 0;
    double threshold = 1;
};

struct VerifyOptions {
    SlitParams params;
    std::size_t local_components = 8; // components kept in the slit map; the rest are removed
    std::size_t circle_vertices = 256;
    std::size_t removed_samples = 64;
};

inline std::string describe(const Model& m)
{
    std::ostringstream os;
    os.precision(6);
    std::visit(
        [&os](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            os << (std::is_same_v<T, DiskModel> ? "disk" : std::is_same_v<T, PuncturedDiskModel> ? "punctured-disk" : "annulus")
               << "(c=" << s.center.real() << "," << s.center.imag();
            if constexpr (std::is_same_v<T, AnnulusModel>) {
                os << " r=" << s.inner << ".." << s.outer;
            } else {
                os << " r=" << s.radius;
            }
            os << ")";
        },
        m);
    return os.str();
}

/// Evenly spaced subset of a loop's vertices.
inline std::vector<cplx> loop_samples(std::span<const cplx> pts, std::size_t n)
{
    std::vector<cplx> out;
    if (pts.empty() || n == 0) return out;
    n = std::min(n, pts.size());
    for (std::size_t i = 0; i < n; ++i) out.push_back(pts[i * pts.size() / n]);
    return out;
}

inline std::vector<CertificateRow> verify_stage(const Domain& dom, std::span<const LoopCheck> loops,
                                                std::span<const CircleCheck> circles, const VerifyOptions& opt = {})
{
    std::vector<std::size_t> loop_first;
    std::vector<CertificateRow> rows;
    for (const auto& l : loops) {
        loop_first.push_back(rows.size());
        for (cplx z : loop_samples(l.pts, l.samples)) {
            CertificateRow r;
            r.stage = l.stage;
            r.kind = l.kind;
            r.x = z;
            r.threshold = l.threshold;
            rows.push_back(r);
        }
    }
    const std::size_t circle_first = rows.size();
    for (const auto& c : circles) {
        CertificateRow r;
        r.stage = c.stage;
        r.kind = c.kind;
        r.x = c.center + c.radius;
        r.threshold = c.threshold;
        rows.push_back(r);
    }

    parallel_for(loops.size(), [&](std::size_t li) {
        const auto& l = loops[li];
        const std::size_t first = loop_first[li];
        const std::size_t count = (li + 1 < loops.size() ? loop_first[li + 1] : circle_first) - first;
        try {
            const auto subset = nearest_components(dom, l.pts, opt.local_components);
            const RestrictedLowerBound bound(dom, subset, opt.params, opt.removed_samples);
            for (std::size_t r = first; r < first + count; ++r) {
                auto& row = rows[r];
                const LowerBound lb = bound.at(row.x);
                if (!lb.ok) {
                    row.witness = lb.error;
                    row.solver_failure = true;
                    continue;
                }
                row.value = lb.value;
                row.witness = lb.witness;
                row.pass = l.strict ? lb.value > l.threshold : lb.value >= l.threshold;
            }
        } catch (const Error& e) {
            for (std::size_t r = first; r < first + count; ++r) {
                rows[r].witness = e.what();
                rows[r].solver_failure = true;
            }
        }
    });

    parallel_for(circles.size(), [&](std::size_t ci) {
        const auto& c = circles[ci];
        auto& row = rows[circle_first + ci];
        const auto pts = circle_points(c.center, c.radius, opt.circle_vertices);
        try {
            const LoopEstimate est = kobayashi_length_upper(dom, pts);
            if (!est.found) {
                row.value = 1;
                row.witness = est.note;
            } else {
                row.value = squeeze_upper_from_loop(est.kobayashi_length);
                row.witness = describe(*est.witness);
            }
            row.pass = row.value < c.threshold;
        } catch (const Error& e) {
            row.witness = e.what();
            row.solver_failure = true;
        }
    });
    return rows;
}

// ---------------------------------------------------------------------------
// Cubes with separating loops and marked small cubes

struct Theorem2Loop {
    std::size_t cube = 0; // index into the cubes of the stage it was built on
    Rect rect;
    double offset = 0;
    int trials = 0;
};

struct MarkedPoint {
    cplx p;
    double delta = 0;
    Rect small_cube;
};

struct Theorem2Stage {
    int j = 2;
    std::vector<Theorem2Loop> loops;
    std::vector<MarkedPoint> points;
    std::string policy;
};

struct Theorem2Options {
    std::size_t loop_vertices = 128;
    std::size_t loop_samples = 8;    // certificate rows per loop
    double slack = 0;                // placement accepts lower >= 1 - 1/j - slack
    int max_halvings = 10;           // loop offset search budget
    double small_side = 1.0 / 8;     // small cube side relative to delta_j
    double split_gap = 0.25;         // split gap relative to the cube side
    double failure_budget = 0.1;     // fraction of solver failures that aborts a stage
    VerifyOptions verify;
};

struct Theorem2State {
    std::vector<HierarchyCube> cubes{HierarchyCube{ExactRect{0, 1, 0, 1}, 0, {}}};
    std::vector<Theorem2Stage> stages;
    std::vector<CertificateRow> certificates; // placement rows, then the latest (i')/(ii') verification

    Domain domain() const { return domain_of(cubes, "theorem2 stage " + std::to_string(stages.size())); }
};

namespace detail {

/// Boundary samples of a rectangle with outward unit normals; corners get
/// the diagonal direction.
inline std::vector<std::pair<cplx, cplx>> rect_samples_with_normals(const Rect& r, double spacing)
{
    std::vector<std::pair<cplx, cplx>> out;
    const auto corners = r.corners();
    const cplx normals[4] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
    for (std::size_t e = 0; e < 4; ++e) {
        const cplx a = corners[e], b = corners[(e + 1) % 4];
        const std::size_t n = std::max<std::size_t>(1, std::size_t(std::ceil(std::abs(b - a) / spacing)));
        const cplx diag = (normals[e] + normals[(e + 3) % 4]) / std::sqrt(2.0);
        out.emplace_back(a, diag);
        for (std::size_t i = 1; i < n; ++i) out.emplace_back(a + (b - a) * (double(i) / double(n)), normals[e]);
    }
    return out;
}

inline double polyline_distance(std::span<const cplx> pts, cplx z)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) best = std::min(best, dist_point_segment(z, pts[i], pts[(i + 1) % pts.size()]));
    return best;
}

inline std::pair<HierarchyCube, HierarchyCube> split_with_gap(const HierarchyCube& c, Axis axis, double gap_ratio)
{
    const rational side = axis == Axis::vertical ? c.rect.width() : c.rect.height();
    int k = int(std::ceil(2 / (gap_ratio * side.convert_to<double>())));
    while (side <= rational(2, k)) ++k;
    return split_cube(c, k, axis);
}

} // namespace detail

/// Every (i') and (ii') check recorded so far, evaluated on the given domain.
inline std::vector<CertificateRow> theorem2_checks(const Theorem2State& st, const Domain& dom, const Theorem2Options& opt)
{
    std::vector<LoopCheck> loops;
    std::vector<CircleCheck> circles;
    for (std::size_t s = 0; s < st.stages.size(); ++s) {
        const auto& stage = st.stages[s];
        const double j = stage.j;
        for (const auto& l : stage.loops) {
            loops.push_back({int(s + 1), "ii'", rounded_rect(l.rect, l.offset, opt.loop_vertices), opt.loop_samples,
                             1 - 5 / j, true});
        }
        for (const auto& p : stage.points) circles.push_back({int(s + 1), "i'", p.p, p.delta, 3 / j});
    }
    return verify_stage(dom, loops, circles, opt.verify);
}

/// One inductive step: loops around the current cubes, marked points on a
/// (1/j)-net of the boundary, small cubes at the points, then every cube
/// split into four. Afterwards all recorded checks are re-run on the new
/// domain.
inline Theorem2State build_theorem2_stage(const Theorem2State& in, int j, const Theorem2Options& opt = {})
{
    if (j < 2) throw Error(ErrorCode::invalid_argument, "stage index j must be at least 2");
    Theorem2State st = in;
    const Domain dom = st.domain();
    const std::size_t m = dom.size();
    const double jd = j;

    Theorem2Stage stage;
    stage.j = j;
    std::ostringstream policy;
    policy << "loop offset halved from min(1/(2j), 0.4 gap)/4 until lower >= 1-1/j-" << opt.slack
           << "; points pushed out by min(1/(2j), 0.4 gap); delta = min(clearance/2, 1/(4j)); small side = "
           << opt.small_side << " delta; split gap = " << opt.split_gap << " side";
    stage.policy = policy.str();

    std::vector<double> eta(m);
    for (std::size_t i = 0; i < m; ++i) {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < m; ++k) {
            if (k != i) gap = std::min(gap, component_gap(dom.components[i], dom.components[k]));
        }
        eta[i] = std::min(1 / (2 * jd), 0.4 * gap);
    }

    // Loops, searched independently per cube.
    std::vector<std::vector<CertificateRow>> placement(m);
    std::vector<std::string> loop_error(m);
    stage.loops.resize(m);
    parallel_for(m, [&](std::size_t i) {
        const Rect rect = st.cubes[i].rect.to_rect();
        const double target = 1 - 1 / jd - opt.slack;
        double h = eta[i] / 4;
        for (int t = 0; t <= opt.max_halvings; ++t, h /= 2) {
            const auto pts = rounded_rect(rect, h, opt.loop_vertices);
            LoopCheck check{int(in.stages.size() + 1), "loop", pts, opt.loop_samples, target, false};
            auto rows = verify_stage(dom, std::span<const LoopCheck>(&check, 1), {}, opt.verify);
            const bool ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; });
            if (ok) {
                stage.loops[i] = {i, rect, h, t + 1};
                placement[i] = std::move(rows);
                return;
            }
            if (t == opt.max_halvings) {
                std::ostringstream os;
                os << "cube " << i << ": no loop offset down to " << h << " reaches lower bound " << target;
                for (const auto& r : rows) {
                    if (!r.pass) {
                        os << " (at " << r.x.real() << "," << r.x.imag() << ": " << r.value << " " << r.witness << ")";
                        break;
                    }
                }
                loop_error[i] = os.str();
            }
        }
    });
    for (const auto& e : loop_error) {
        if (!e.empty()) throw Error(ErrorCode::certification_failed, e);
    }

    // Marked points: greedy cover of the boundary samples by 1/j-balls.
    std::vector<std::vector<cplx>> loop_pts;
    for (const auto& l : stage.loops) loop_pts.push_back(rounded_rect(l.rect, l.offset, opt.loop_vertices));
    const double cover = 1 / jd;
    for (std::size_t i = 0; i < m; ++i) {
        for (auto [b, n] : detail::rect_samples_with_normals(st.cubes[i].rect.to_rect(), 1 / (8 * jd))) {
            const bool covered = std::any_of(stage.points.begin(), stage.points.end(),
                                             [&](const MarkedPoint& q) { return std::abs(q.p - b) <= cover; });
            if (covered) continue;
            bool placed = false;
            for (double e = eta[i]; e > eta[i] / 64 && !placed; e /= 2) {
                const cplx p = b + e * n;
                if (!dom.contains(p) || dom.clearance(p) < 0.5 * e) continue;
                // keep clear of loops built this stage
                double to_loops = std::numeric_limits<double>::infinity();
                for (const auto& lp : loop_pts) to_loops = std::min(to_loops, detail::polyline_distance(lp, p));
                if (to_loops < 0.25 * e) continue;
                stage.points.push_back({p, 0, {}});
                placed = true;
            }
            if (!placed) {
                throw Error(ErrorCode::certification_failed,
                            "no admissible marked point near (" + std::to_string(b.real()) + "," + std::to_string(b.imag()) + ")");
            }
        }
    }

    // Radii and small cubes; disks stay clear of loops and of each other.
    for (std::size_t a = 0; a < stage.points.size(); ++a) {
        auto& q = stage.points[a];
        double d = std::min(dom.clearance(q.p) / 2, 1 / (4 * jd));
        for (const auto& lp : loop_pts) d = std::min(d, detail::polyline_distance(lp, q.p) / 2);
        for (std::size_t b = 0; b < stage.points.size(); ++b) {
            if (b != a) d = std::min(d, std::abs(stage.points[b].p - q.p) / 2);
        }
        q.delta = d;
        const double half = 0.5 * opt.small_side * d;
        q.small_cube = {q.p.real() - half, q.p.real() + half, q.p.imag() - half, q.p.imag() + half};
    }

    // Split every cube, old and new, into four.
    std::vector<HierarchyCube> all = st.cubes;
    for (const auto& q : stage.points) all.push_back(HierarchyCube{ExactRect::from(q.small_cube), 0, {}});
    std::vector<HierarchyCube> next;
    for (const auto& c : all) {
        auto [l, r] = detail::split_with_gap(c, Axis::vertical, opt.split_gap);
        for (const auto& half : {l, r}) {
            auto [lo, hi] = detail::split_with_gap(half, Axis::horizontal, opt.split_gap);
            next.push_back(lo);
            next.push_back(hi);
        }
    }
    st.cubes = std::move(next);
    st.domain().validate();

    // Placement rows are kept; the (i')/(ii') rows are replaced by a fresh
    // verification of every stage on the refined domain.
    std::vector<CertificateRow> kept;
    for (const auto& r : st.certificates) {
        if (r.kind == "loop") kept.push_back(r);
    }
    for (auto& rows : placement) {
        for (auto& r : rows) kept.push_back(std::move(r));
    }
    st.stages.push_back(std::move(stage));
    auto checks = theorem2_checks(st, st.domain(), opt);
    const auto failures = std::count_if(checks.begin(), checks.end(), [](const auto& r) { return r.solver_failure; });
    if (!checks.empty() && double(failures) > opt.failure_budget * double(checks.size())) {
        std::string first;
        for (const auto& r : checks) {
            if (r.solver_failure) {
                first = r.witness;
                break;
            }
        }
        throw Error(ErrorCode::certification_failed, std::to_string(failures) + " of " + std::to_string(checks.size()) +
                                                         " certificate rows hit solver failures; first: " + first);
    }
    for (auto& r : checks) kept.push_back(std::move(r));
    st.certificates = std::move(kept);
    return st;
}

/// Stages 1..count, stage s using j = s + 1.
inline Theorem2State build_theorem2(int stages, const Theorem2Options& opt = {}, Theorem2State st = {})
{
    for (int s = int(st.stages.size()) + 1; s <= stages; ++s) st = build_theorem2_stage(st, s + 1, opt);
    return st;
}

inline json to_json(const CertificateRow& r)
{
    return {{"stage", r.stage},         {"kind", r.kind}, {"x", detail::complex_json(r.x)},
            {"value", std::isnan(r.value) ? json(nullptr) : json(r.value)},
            {"threshold", r.threshold}, {"witness", r.witness}, {"pass", r.pass}, {"solver_failure", r.solver_failure}};
}

inline CertificateRow certificate_from_json(const json& j, const std::string& path)
{
    detail::require_keys(j, path, {"stage", "kind", "x", "value", "threshold", "witness", "pass", "solver_failure"});
    CertificateRow r;
    r.stage = j["stage"].get<int>();
    r.kind = j["kind"].get<std::string>();
    r.x = detail::complex_from(j["x"], path + ".x");
    r.value = j["value"].is_null() ? std::numeric_limits<double>::quiet_NaN() : j["value"].get<double>();
    r.threshold = j["threshold"].get<double>();
    r.witness = j["witness"].get<std::string>();
    r.pass = j["pass"].get<bool>();
    r.solver_failure = j["solver_failure"].get<bool>();
    return r;
}

inline json to_json(const Theorem2State& st)
{
    json cubes = json::array(), stages = json::array(), certs = json::array();
    for (const auto& c : st.cubes) cubes.push_back(detail::cube_json(c));
    for (const auto& s : st.stages) {
        json loops = json::array(), points = json::array();
        for (const auto& l : s.loops) {
            loops.push_back({{"cube", l.cube}, {"rect", detail::rect_json(l.rect)}, {"offset", l.offset}, {"trials", l.trials}});
        }
        for (const auto& p : s.points) {
            points.push_back({{"p", detail::complex_json(p.p)}, {"delta", p.delta}, {"small_cube", detail::rect_json(p.small_cube)}});
        }
        stages.push_back({{"j", s.j}, {"policy", s.policy}, {"loops", loops}, {"points", points}});
    }
    for (const auto& r : st.certificates) certs.push_back(to_json(r));
    return {{"version", state_version}, {"kind", "theorem2"}, {"stages", stages}, {"cubes", cubes}, {"certificates", certs}};
}

inline Theorem2State theorem2_from_json(const json& j, const std::string& path = "state")
{
    detail::check_version(j, "theorem2", path);
    detail::require_keys(j, path, {"version", "kind", "stages", "cubes", "certificates"});
    Theorem2State st;
    st.cubes.clear();
    for (std::size_t i = 0; i < j["cubes"].size(); ++i) {
        st.cubes.push_back(detail::cube_from(j["cubes"][i], path + ".cubes[" + std::to_string(i) + "]"));
    }
    for (std::size_t s = 0; s < j["stages"].size(); ++s) {
        const auto& js = j["stages"][s];
        const std::string sp = path + ".stages[" + std::to_string(s) + "]";
        detail::require_keys(js, sp, {"j", "policy", "loops", "points"});
        Theorem2Stage stage;
        stage.j = js["j"].get<int>();
        stage.policy = js["policy"].get<std::string>();
        for (const auto& l : js["loops"]) {
            stage.loops.push_back({l.at("cube").get<std::size_t>(), detail::rect_from(l.at("rect"), sp + ".loops"),
                                   l.at("offset").get<double>(), l.at("trials").get<int>()});
        }
        for (const auto& p : js["points"]) {
            stage.points.push_back({detail::complex_from(p.at("p"), sp + ".points"), p.at("delta").get<double>(),
                                    detail::rect_from(p.at("small_cube"), sp + ".points")});
        }
        st.stages.push_back(std::move(stage));
    }
    for (std::size_t i = 0; i < j["certificates"].size(); ++i) {
        st.certificates.push_back(certificate_from_json(j["certificates"][i], path + ".certificates[" + std::to_string(i) + "]"));
    }
    return st;
}

} // namespace squeeze
