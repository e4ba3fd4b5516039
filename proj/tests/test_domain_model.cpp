#include <gtest/gtest.h>

#include <random>

#include "squeeze/domain_json.hpp"
#include "squeeze/domain_ops.hpp"
#include "support/oracles.hpp"

using namespace squeeze;

namespace {

template <class F>
ErrorCode code_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an exception";
    return ErrorCode::io_error;
}

} // namespace

TEST(SplitCube, UnitSquareK4Vertical)
{
    auto [l, r] = split_cube(Rect{0, 1, 0, 1}, 4, Axis::vertical);
    EXPECT_EQ(l, (Rect{0, 0.25, 0, 1}));
    EXPECT_EQ(r, (Rect{0.75, 1, 0, 1}));
}

TEST(SplitCube, CenteredSquareK8Vertical)
{
    auto [l, r] = split_cube(Rect{-1, 1, -1, 1}, 8, Axis::vertical);
    EXPECT_EQ(l, (Rect{-1, -0.125, -1, 1})); // gap 2/k = 0.25 about the midline
    EXPECT_EQ(r, (Rect{0.125, 1, -1, 1}));
}

TEST(SplitCube, HorizontalSplitsTheHeight)
{
    auto [lo, hi] = split_cube(Rect{0, 2, 0, 1}, 4, Axis::horizontal);
    EXPECT_EQ(lo, (Rect{0, 2, 0, 0.25}));
    EXPECT_EQ(hi, (Rect{0, 2, 0.75, 1}));
}

TEST(SplitCube, DegenerateChildIsRejected)
{
    EXPECT_EQ(code_of([] { split_cube(Rect{0, 1, 0, 1}, 2, Axis::vertical); }), ErrorCode::degenerate_child);
    EXPECT_EQ(code_of([] { split_cube(Rect{0, 1, 0, 0.5}, 4, Axis::horizontal); }), ErrorCode::degenerate_child);
    EXPECT_EQ(code_of([] { split_cube(Rect{0, 1, 0, 1}, 0, Axis::vertical); }), ErrorCode::invalid_argument);
}

TEST(SplitCube, ChildAreasLoseExactlyTheSlab)
{
    const ExactRect parent{rational(1, 3), rational(2), rational(-1, 7), rational(5, 4)};
    for (int k : {3, 5, 7, 11}) {
        for (Axis ax : {Axis::vertical, Axis::horizontal}) {
            const rational side = ax == Axis::vertical ? parent.width() : parent.height();
            if (side <= rational(2, k)) continue;
            auto [l, r] = split_cube(parent, k, ax);
            const rational transverse = ax == Axis::vertical ? parent.height() : parent.width();
            EXPECT_EQ(l.area() + r.area(), parent.area() - rational(2, k) * transverse);
            const rational gap = ax == Axis::vertical ? r.a - l.b : r.c - l.d;
            EXPECT_EQ(gap, rational(2, k));
        }
    }
}

TEST(SplitCube, HierarchyRecordsLineage)
{
    const HierarchyCube root{ExactRect{0, 1, 0, 1}, 0, {}};
    auto [l, r] = split_cube(root, 8, Axis::vertical);
    auto [ll, lh] = split_cube(l, 8, Axis::horizontal);
    EXPECT_EQ(ll.depth, 2);
    ASSERT_EQ(ll.lineage.size(), 2u);
    EXPECT_EQ(ll.lineage[0], (SplitStep{Axis::vertical, 8}));
    EXPECT_EQ(ll.lineage[1], (SplitStep{Axis::horizontal, 8}));
    // children sit inside the parent
    EXPECT_GE(lh.rect.a, l.rect.a);
    EXPECT_LE(lh.rect.b, l.rect.b);
    EXPECT_GE(lh.rect.c, l.rect.c);
    EXPECT_LE(lh.rect.d, l.rect.d);
}

TEST(LebesgueMeasure, TwoStrips)
{
    const std::vector<Rect> cubes{{0, 0.25, 0, 1}, {0.75, 1, 0, 1}};
    EXPECT_EQ(lebesgue_measure(std::span<const Rect>(cubes)), rational(1, 2));
}

TEST(LebesgueMeasure, EmptyIsZero)
{
    EXPECT_EQ(lebesgue_measure(std::span<const Rect>()), rational(0));
}

TEST(LebesgueMeasure, OverlapIsRejected)
{
    const std::vector<Rect> cubes{{0, 0.5, 0, 1}, {0.25, 1, 0, 1}};
    EXPECT_EQ(code_of([&] { lebesgue_measure(std::span<const Rect>(cubes)); }), ErrorCode::overlap);
    // touching edges are not an overlap
    const std::vector<Rect> touching{{0, 0.5, 0, 1}, {0.5, 1, 0, 1}};
    EXPECT_EQ(lebesgue_measure(std::span<const Rect>(touching)), rational(1));
}

TEST(LebesgueMeasure, DepthTwoHierarchy)
{
    std::vector<ExactRect> level{ExactRect{0, 1, 0, 1}};
    for (Axis ax : {Axis::vertical, Axis::horizontal}) {
        std::vector<ExactRect> next;
        for (const auto& c : level) {
            auto [a, b] = split_cube(c, 8, ax);
            next.push_back(a);
            next.push_back(b);
        }
        level = next;
    }
    EXPECT_EQ(lebesgue_measure(std::span<const ExactRect>(level)), rational(9, 16));
}

TEST(LebesgueMeasure, MatchesProductOfRetainedFractions)
{
    // direct summation through the library against the fraction oracle
    for (const std::vector<int>& ks : {std::vector<int>{8, 8}, {5, 9, 30}, {3, 7, 19, 41}, {11, 11, 44, 44}}) {
        std::vector<ExactRect> level{ExactRect{0, 1, 0, 1}};
        for (std::size_t s = 0; s < ks.size(); ++s) {
            std::vector<ExactRect> next;
            for (const auto& c : level) {
                auto [a, b] = split_cube(c, ks[s], s % 2 == 0 ? Axis::vertical : Axis::horizontal);
                next.push_back(a);
                next.push_back(b);
            }
            level = next;
        }
        const auto expect = oracle::alternating_measure(ks);
        EXPECT_EQ(lebesgue_measure(std::span<const ExactRect>(level)), rational(expect.num, expect.den));
    }
}

TEST(Hausdorff, SinglePoints)
{
    const std::vector<cplx> a{0.0}, b{1.0};
    EXPECT_EQ(hausdorff_distance(std::span<const cplx>(a), std::span<const cplx>(b)), 1.0);
}

TEST(Hausdorff, SelfDistanceIsZero)
{
    const std::vector<Component> k{Disk{{0.3, -0.2}, 0.4}, Rect{1, 2, 0, 0.5}};
    EXPECT_EQ(hausdorff_distance(std::span<const Component>(k), std::span<const Component>(k), 0.02), 0.0);
}

TEST(Hausdorff, SquareAgainstTwoStrips)
{
    const std::vector<Component> sq{Rect{0, 1, 0, 1}};
    const std::vector<Component> strips{Rect{0, 0.25, 0, 1}, Rect{0.75, 1, 0, 1}};
    const double spacing = 0.01;
    const double h = hausdorff_distance(std::span<const Component>(sq), std::span<const Component>(strips), spacing);
    EXPECT_NEAR(h, 0.25, spacing);

    const auto ps = discretize(std::span<const Component>(sq), spacing);
    const auto qs = discretize(std::span<const Component>(strips), spacing);
    EXPECT_DOUBLE_EQ(h, oracle::hausdorff(ps, qs));
}

TEST(Hausdorff, RefinementStaysWithinSpacing)
{
    const std::vector<Component> a{Disk{0.0, 1}}, b{Rect{-0.5, 0.5, -0.5, 0.5}};
    const double exact = 1 - 0.5; // the far point of the disk from the square is on an axis
    for (double s : {0.1, 0.05, 0.02}) {
        const double h = hausdorff_distance(std::span<const Component>(a), std::span<const Component>(b), s);
        EXPECT_NEAR(h, exact, s);
    }
}

TEST(Hausdorff, TriangleInequalityOnRandomClouds)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<cplx> p(5 + trial % 7), q(3 + trial % 5), r(4 + trial % 3);
        for (auto* s : {&p, &q, &r})
            for (auto& z : *s) z = {u(rng), u(rng)};
        const double pq = hausdorff_distance(std::span<const cplx>(p), std::span<const cplx>(q));
        const double qr = hausdorff_distance(std::span<const cplx>(q), std::span<const cplx>(r));
        const double pr = hausdorff_distance(std::span<const cplx>(p), std::span<const cplx>(r));
        EXPECT_LE(pr, pq + qr + 1e-9);
        EXPECT_DOUBLE_EQ(pq, hausdorff_distance(std::span<const cplx>(q), std::span<const cplx>(p)));
    }
}

TEST(Hausdorff, EmptySetIsRejected)
{
    const std::vector<cplx> a{0.0};
    EXPECT_EQ(code_of([&] { hausdorff_distance(std::span<const cplx>(a), std::span<const cplx>()); }),
              ErrorCode::empty_set);
}

TEST(Mobius, IdentityKeepsTheDomain)
{
    Domain d;
    d.label = "mixed";
    d.components = {Disk{{-1, 0}, 0.5}, Rect{1, 2, 0, 1}, PointComponent{{0, 2}}};
    const Domain img = mobius_apply(Mobius{}, d);
    ASSERT_EQ(img.size(), 3u);
    EXPECT_EQ(std::get<Disk>(img.components[0]), std::get<Disk>(d.components[0]));
    EXPECT_EQ(std::get<PointComponent>(img.components[2]), std::get<PointComponent>(d.components[2]));
    const auto& poly = std::get<Polyline>(img.components[1]);
    const auto corners = std::get<Rect>(d.components[1]).corners();
    ASSERT_EQ(poly.pts.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(poly.pts[i], corners[i]);
}

TEST(Mobius, InversionOfAnOffsetDisk)
{
    Domain d;
    d.components = {Disk{4.0, 1}};
    const Domain img = mobius_apply(Mobius{0, 1, 1, 0}, d);
    const auto& disk = std::get<Disk>(img.components[0]);
    EXPECT_NEAR(disk.center.real(), 4.0 / 15, 1e-15);
    EXPECT_NEAR(disk.center.imag(), 0.0, 1e-15);
    EXPECT_NEAR(disk.radius, 1.0 / 15, 1e-15);

    // the image circle through three mapped boundary points
    auto inv = [](cplx z) { return 1.0 / z; };
    const auto [c, r] = oracle::circumcircle(inv(5.0), inv(cplx(4, 1)), inv(3.0));
    EXPECT_NEAR(std::abs(c - disk.center), 0, 1e-13);
    EXPECT_NEAR(r, disk.radius, 1e-13);
    for (int i = 0; i < 64; ++i) {
        const cplx z = inv(4.0 + std::polar(1.0, 2 * pi * i / 64));
        EXPECT_NEAR(std::abs(z - disk.center), disk.radius, 1e-13);
    }
}

TEST(Mobius, TranslationOfTheUnitSquare)
{
    Domain d;
    d.components = {Rect{0, 1, 0, 1}};
    const Domain img = mobius_apply(Mobius{1, 5, 0, 1}, d);
    const auto& poly = std::get<Polyline>(img.components[0]);
    const std::vector<cplx> expect{5.0, 6.0, {6, 1}, {5, 1}};
    EXPECT_EQ(poly.pts, expect);
}

TEST(Mobius, DiskAroundThePoleBecomesAnExterior)
{
    Domain d;
    d.components = {Disk{0.0, 2}, Disk{5.0, 1}};
    const Domain img = mobius_apply(Mobius{0, 1, 1, 0}, d);
    ASSERT_TRUE(std::holds_alternative<OuterDisk>(img.components[0]));
    EXPECT_NEAR(std::get<OuterDisk>(img.components[0]).radius, 0.5, 1e-15);
    EXPECT_NO_THROW(img.validate());
}

TEST(Mobius, CompositionLawOnSamples)
{
    const Mobius t1{cplx(1, 1), 2, cplx(0.5, 0), cplx(3, -1)};
    const Mobius t2{2, cplx(0, 1), cplx(-1, 0.2), 4};
    const Mobius both = t2.after(t1);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 200; ++i) {
        const cplx z(u(rng), u(rng));
        const cplx a = t2(t1(z)), b = both(z);
        EXPECT_LE(std::abs(a - b), 1e-12 * std::max(1.0, std::abs(a)));
    }
    const cplx z(0.3, 0.7);
    EXPECT_NEAR(std::abs(t1.inverse()(t1(z)) - z), 0, 1e-14);
}

TEST(Mobius, PreservesCountAndDisjointness)
{
    Domain d;
    d.components = {Disk{{-1, 0}, 0.5}, Disk{{1.2, 0.3}, 0.7}, Rect{-0.3, 0.3, 1, 1.5}};
    d.validate();
    const Mobius t{1, 0, 1, 3}; // pole at -3, away from every component
    const Domain img = mobius_apply(t, d);
    EXPECT_EQ(img.size(), d.size());
    EXPECT_NO_THROW(img.validate());
}

TEST(Mobius, PoleOnBoundaryIsRejected)
{
    Domain d;
    d.components = {Disk{0.0, 1}};
    EXPECT_EQ(code_of([&] { mobius_apply(Mobius{0, 1, 1, -1}, d); }), ErrorCode::pole_on_boundary);
    EXPECT_EQ(code_of([&] { mobius_apply(Mobius{1, 1, 1, 1}, d); }), ErrorCode::invalid_argument);
}

TEST(Domain, ValidationCatchesBadComponents)
{
    EXPECT_EQ(code_of([] { validate_component(Rect{1, 0, 0, 1}); }), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([] { validate_component(Disk{0.0, 0}); }), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([] { validate_component(Polyline{{0.0, 1.0}}); }), ErrorCode::invalid_argument);
    // clockwise
    EXPECT_EQ(code_of([] { validate_component(Polyline{{0.0, cplx(0, 1), 1.0}}); }), ErrorCode::invalid_argument);
    // bow tie
    EXPECT_EQ(code_of([] { validate_component(Polyline{{0.0, 1.0, cplx(0, 1), cplx(1, 1)}}); }),
              ErrorCode::invalid_argument);
}

TEST(Domain, OverlapAndTouchingAreRejected)
{
    Domain d;
    d.components = {Disk{0.0, 1}, Disk{1.5, 1}};
    EXPECT_EQ(code_of([&] { d.validate(); }), ErrorCode::overlap);
    d.components = {Rect{0, 1, 0, 1}, Rect{1, 2, 0, 1}};
    EXPECT_EQ(code_of([&] { d.validate(); }), ErrorCode::overlap);
}

TEST(Domain, ContainsAndClearance)
{
    Domain d;
    d.components = {OuterDisk{0.0, 1}, Disk{0.0, 0.25}};
    EXPECT_TRUE(d.contains(0.5));
    EXPECT_FALSE(d.contains(0.1));
    EXPECT_FALSE(d.contains(2.0));
    EXPECT_NEAR(d.clearance(0.5), 0.25, 1e-15);
    EXPECT_NEAR(d.min_gap(), 0.75, 1e-15);
}

TEST(Domain, FloodFillPassesValidDomains)
{
    Domain ring;
    ring.components = {OuterDisk{0.0, 1}, Disk{0.0, 0.5}};
    EXPECT_TRUE(is_connected(ring, 128));
    // a narrow channel between two bars must survive the grid
    Domain channel;
    channel.components = {OuterDisk{0.0, 3}, Rect{-2, 2, -0.1, 0.1}, Rect{-0.05, 0.05, -2, -0.2}};
    EXPECT_TRUE(is_connected(channel, 256));
}

TEST(Geometry, CollinearNoiseIsNotASelfIntersection)
{
    // resampled straight runs with tiny rounding noise
    std::vector<cplx> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({0.1 * i, 1e-17 * (i % 2)});
    pts.push_back({0.9, 0.5});
    pts.push_back({0.0, 0.5});
    EXPECT_TRUE(polygon_is_simple(pts));
    EXPECT_FALSE(segments_intersect(0.0, 0.1, cplx(0.1, 1e-17), 0.2));
    EXPECT_TRUE(segments_intersect(0.0, 1.0, cplx(0.5, -1), cplx(0.5, 1)));
}

TEST(DomainJson, RoundTripsEveryKind)
{
    Domain d;
    d.label = "all kinds";
    d.components = {OuterDisk{0.0, 10}, Disk{{1, 2}, 0.5}, Rect{-3, -2, 0, 1}, PointComponent{{4, 0}},
                    Polyline{{cplx(5, 5), cplx(6, 5), cplx(5.5, 6)}}};
    const Domain back = domain_from_json(json::parse(to_json(d).dump()));
    EXPECT_EQ(back.label, d.label);
    ASSERT_EQ(back.components.size(), d.components.size());
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(back.components[i], d.components[i]);
}

TEST(DomainJson, SchemaErrorsNameThePath)
{
    const json bad_kind = {{"label", "x"}, {"components", {{{"kind", "ellipse"}}}}};
    try {
        domain_from_json(bad_kind);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::config_error);
        EXPECT_NE(std::string(e.what()).find("components[0].kind"), std::string::npos);
    }
    const json extra = {{"label", "x"}, {"components", json::array()}, {"colour", "red"}};
    EXPECT_EQ(code_of([&] { domain_from_json(extra); }), ErrorCode::config_error);
    const json overlap = {{"label", "x"},
                          {"components",
                           {{{"kind", "disk"}, {"cx", 0}, {"cy", 0}, {"r", 1}}, {{"kind", "disk"}, {"cx", 1}, {"cy", 0}, {"r", 1}}}}};
    EXPECT_EQ(code_of([&] { domain_from_json(overlap); }), ErrorCode::overlap);
}

TEST(DomainJson, SamplesLoad)
{
    for (const char* name : {"annulus.json", "two_disks.json", "punctured_disk.json", "rect_and_triangle.json"}) {
        const Domain d = load_domain(std::string(SQUEEZE_SAMPLES_DIR) + "/" + name);
        EXPECT_GE(d.size(), 2u) << name;
        EXPECT_TRUE(is_connected(d, 128)) << name;
    }
}
