#include <gtest/gtest.h>

#include "squeeze/cantor.hpp"
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

// Regression baseline: minimum lower bound of the depth-1 (k = 8)
// certificate at delta = 0.1 with 8 samples per cube. Frozen after a solve
// with doubled series order and sampling agreed at the minimizing row.
constexpr double depth1_baseline = 0.66353883503060462;

} // namespace

TEST(Theorem1, OneSplit)
{
    const auto st = build_theorem1(0.5, 1, std::vector<int>{8});
    EXPECT_EQ(st.cubes.size(), 2u);
    EXPECT_EQ(st.measure, rational(3, 4));
    EXPECT_EQ(st.stage, 1);
}

TEST(Theorem1, TwoSplits)
{
    const auto st = build_theorem1(0.5, 2, std::vector<int>{8, 8});
    EXPECT_EQ(st.cubes.size(), 4u);
    EXPECT_EQ(st.measure, rational(9, 16));
    std::vector<ExactRect> rects;
    for (const auto& c : st.cubes) rects.push_back(c.rect);
    EXPECT_EQ(lebesgue_measure(std::span<const ExactRect>(rects)), st.measure);
}

TEST(Theorem1, AutoScheduleMeetsTheBound)
{
    const auto st = build_theorem1(0.1, 3);
    EXPECT_GE(st.measure, rational(9, 10));
    EXPECT_EQ(st.cubes.size(), 8u);
    const auto expect = oracle::alternating_measure(st.k_schedule);
    EXPECT_EQ(st.measure, rational(expect.num, expect.den));
}

TEST(Theorem1, DeskScaleMeasure)
{
    const auto st = build_theorem1(0.25, 3);
    EXPECT_GE(st.measure, rational(3, 4));
    const auto expect = oracle::alternating_measure(st.k_schedule);
    EXPECT_EQ(st.measure, rational(expect.num, expect.den));
}

TEST(Theorem1, CubesStayDisjointAndShrink)
{
    const auto st = build_theorem1(0.2, 4);
    const Domain d = st.domain();
    EXPECT_NO_THROW(d.validate());
    double prev = std::sqrt(2.0);
    Theorem1State s = theorem1_initial(0.2);
    for (int k : st.k_schedule) {
        advance_theorem1(s, k);
        double diam = 0;
        for (const auto& c : s.cubes) diam = std::max(diam, diameter(Component(c.rect.to_rect())));
        EXPECT_LT(diam, prev);
        prev = diam;
    }
}

TEST(Theorem1, Errors)
{
    EXPECT_EQ(code_of([] { build_theorem1(0.5, 2, std::vector<int>{4, 4}); }), ErrorCode::measure_bound_violated);
    EXPECT_EQ(code_of([] { build_theorem1(0.9, 2, std::vector<int>{3, 2}); }), ErrorCode::schedule_too_aggressive);
    EXPECT_EQ(code_of([] { build_theorem1(0.5, 2, std::vector<int>{8}); }), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([] { build_theorem1(1.5, 2); }), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([] { build_theorem1(0.5, 0); }), ErrorCode::invalid_argument);
}

TEST(Theorem1, StateRoundTripsAndResumes)
{
    const auto full = build_theorem1(0.25, 3);
    const auto back = theorem1_from_json(json::parse(to_json(full).dump()));
    EXPECT_EQ(back.cubes, full.cubes);
    EXPECT_EQ(back.measure, full.measure);
    EXPECT_EQ(back.k_schedule, full.k_schedule);

    // resuming a shallower state with the rest of the schedule lands on the same state
    auto part = build_theorem1(0.25, 1, std::vector<int>{full.k_schedule[0]});
    auto resumed = theorem1_from_json(json::parse(to_json(part).dump()));
    for (std::size_t s = 1; s < full.k_schedule.size(); ++s) advance_theorem1(resumed, full.k_schedule[s]);
    EXPECT_EQ(resumed.cubes, full.cubes);
    EXPECT_EQ(resumed.measure, full.measure);
}

TEST(Theorem1, StateVersionIsChecked)
{
    json j = to_json(build_theorem1(0.5, 1, std::vector<int>{8}));
    j["version"] = 99;
    EXPECT_EQ(code_of([&] { theorem1_from_json(j); }), ErrorCode::config_error);
}

TEST(CertifyTheorem1, DepthOneBaseline)
{
    const auto st = build_theorem1(0.5, 1, std::vector<int>{8});
    Theorem1Options opt;
    opt.delta = 0.1;
    opt.samples = 8;
    const auto cert = certify_theorem1(st, opt);
    EXPECT_EQ(cert.failures, 0u);
    EXPECT_EQ(cert.rows.size(), 16u);
    ASSERT_EQ(cert.min_lower.count(1), 1u);
    EXPECT_NEAR(cert.min_lower.at(1), depth1_baseline, 1e-9);
    EXPECT_EQ(cert.threshold, 0.5);
    EXPECT_TRUE(cert.pass);
    for (const auto& r : cert.rows) {
        EXPECT_LE(r.lower, r.upper + 1e-4);
        EXPECT_EQ(r.pass, r.lower >= cert.threshold);
    }
    const auto worst = std::min_element(cert.rows.begin(), cert.rows.end(),
                                        [](const auto& a, const auto& b) { return a.lower < b.lower; });
    SlitParams fine;
    fine.series_order *= 2;
    fine.collocation *= 2;
    EXPECT_NEAR(r_value(st.domain(), worst->x, fine).lower, depth1_baseline, 1e-6);
    // reruns are bitwise identical
    const auto again = certify_theorem1(st, opt);
    ASSERT_EQ(again.rows.size(), cert.rows.size());
    for (std::size_t i = 0; i < cert.rows.size(); ++i) {
        EXPECT_EQ(again.rows[i].x, cert.rows[i].x);
        EXPECT_EQ(again.rows[i].lower, cert.rows[i].lower);
    }
}

TEST(CertifyTheorem1, ThresholdViolationFailsTheCertificate)
{
    const auto st = build_theorem1(0.5, 1, std::vector<int>{8});
    Theorem1Options opt;
    opt.delta = 0.1;
    opt.samples = 4;
    opt.threshold = 0.999;
    const auto cert = certify_theorem1(st, opt);
    EXPECT_FALSE(cert.pass);
    EXPECT_EQ(cert.failures, 0u);
}

TEST(CertifyTheorem1, SolverFailuresAreCountedNotFailed)
{
    const auto st = build_theorem1(0.5, 1, std::vector<int>{8});
    Theorem1Options opt;
    opt.delta = 0.1;
    opt.samples = 4;
    opt.params.tol = 1e-15;
    opt.params.max_refinements = 0;
    const auto cert = certify_theorem1(st, opt);
    EXPECT_EQ(cert.failures, cert.rows.size());
    EXPECT_TRUE(cert.pass);
    EXPECT_TRUE(cert.min_lower.empty());
}

TEST(CertifyTheorem1, Preconditions)
{
    EXPECT_EQ(code_of([] { certify_theorem1(theorem1_initial(0.5)); }), ErrorCode::invalid_argument);
    Theorem1Options opt;
    opt.delta = 0;
    EXPECT_EQ(code_of([&] { certify_theorem1(build_theorem1(0.5, 1, std::vector<int>{8}), opt); }),
              ErrorCode::invalid_argument);
}

TEST(CertifyTheorem1, KLadderIsNondecreasing)
{
    const std::vector<int> ks{4, 8, 16};
    const std::vector<cplx> pts{cplx(-0.05, 0.5), cplx(1.05, 0.3), cplx(0.5, -0.05)};
    const auto rows = theorem1_k_ladder(0.5, ks, pts);
    ASSERT_EQ(rows.size(), 9u);
    for (std::size_t p = 0; p < pts.size(); ++p) {
        for (std::size_t r = 1; r < ks.size(); ++r) {
            const auto& a = rows[(r - 1) * pts.size() + p];
            const auto& b = rows[r * pts.size() + p];
            ASSERT_TRUE(a.error.empty() && b.error.empty()) << a.error << b.error;
            EXPECT_EQ(a.x, b.x);
            EXPECT_GE(b.lower, a.lower - 1e-3) << "k " << a.k << " -> " << b.k << " at " << a.x;
        }
    }
}

TEST(VerifyStage, DiskControlLoop)
{
    Domain d;
    d.components = {OuterDisk{0.0, 1}};
    const LoopCheck loop{1, "ii'", oracle::circle(0.0, 0.3, 32), 4, 1 - 5.0 / 6, true};
    const auto rows = verify_stage(d, std::span<const LoopCheck>(&loop, 1), {});
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& r : rows) {
        EXPECT_NEAR(r.value, 1.0, 1e-9);
        EXPECT_TRUE(r.pass);
        EXPECT_EQ(r.threshold, 1 - 5.0 / 6);
    }
}

TEST(VerifyStage, CircleAroundAPuncture)
{
    Domain d;
    d.components = {OuterDisk{0.0, 1}, PointComponent{0.0}};
    const CircleCheck c{1, "i'", 0.0, 1e-3, 0.3};
    const auto rows = verify_stage(d, {}, std::span<const CircleCheck>(&c, 1));
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(rows[0].value, oracle::puncture_bound(1.0, 1e-3), 1e-4);
    EXPECT_TRUE(rows[0].pass);
    EXPECT_NE(rows[0].witness.find("punctured"), std::string::npos);
}

TEST(VerifyStage, EmptyListsGiveAnEmptyReport)
{
    Domain d;
    d.components = {OuterDisk{0.0, 1}};
    EXPECT_TRUE(verify_stage(d, {}, {}).empty());
}

TEST(VerifyStage, Reproducible)
{
    const auto st = build_theorem1(0.5, 1, std::vector<int>{8});
    const LoopCheck loop{1, "ii'", rounded_rect(Rect{0, 0.375, 0, 1}, 0.05, 64), 4, 0.5, true};
    const auto a = verify_stage(st.domain(), std::span<const LoopCheck>(&loop, 1), {});
    const auto b = verify_stage(st.domain(), std::span<const LoopCheck>(&loop, 1), {});
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].value, b[i].value);
        EXPECT_EQ(a[i].witness, b[i].witness);
    }
}

class Theorem2StageOne : public ::testing::Test {
protected:
    static void SetUpTestSuite() { state = new Theorem2State(build_theorem2(1)); }
    static void TearDownTestSuite()
    {
        delete state;
        state = nullptr;
    }
    static Theorem2State* state;
};

Theorem2State* Theorem2StageOne::state = nullptr;

TEST_F(Theorem2StageOne, Structure)
{
    const auto& st = *state;
    ASSERT_EQ(st.stages.size(), 1u);
    const auto& stage = st.stages[0];
    EXPECT_EQ(stage.j, 2);
    EXPECT_GE(stage.loops.size(), 1u);
    EXPECT_GE(stage.points.size(), 1u);
    EXPECT_FALSE(stage.policy.empty());
    // every cube of I^2 and every small cube is split into four
    EXPECT_EQ(st.cubes.size(), 4 * (1 + stage.points.size()));
    EXPECT_NO_THROW(st.domain().validate());
}

TEST_F(Theorem2StageOne, PointsFormANetOfTheBoundary)
{
    const auto& stage = state->stages[0];
    const Rect unit{0, 1, 0, 1};
    for (cplx b : sample_boundary(Component(unit), 256)) {
        double best = INFINITY;
        for (const auto& q : stage.points) best = std::min(best, std::abs(q.p - b));
        EXPECT_LE(best, 0.5 + 1e-12) << b;
    }
}

TEST_F(Theorem2StageOne, GeometryIsDisjoint)
{
    const auto& st = *state;
    const auto& stage = st.stages[0];
    const Domain d = st.domain();
    for (const auto& q : stage.points) {
        const Rect& s = q.small_cube;
        // the small cube sits inside its disk
        for (cplx c : s.corners()) EXPECT_LT(std::abs(c - q.p), q.delta);
        EXPECT_GT(q.delta, 0);
    }
    for (const auto& l : stage.loops) {
        for (cplx z : rounded_rect(l.rect, l.offset, 128)) {
            EXPECT_TRUE(d.contains(z)) << z;
        }
    }
}

TEST_F(Theorem2StageOne, CertificatesCarryValueAndThreshold)
{
    const auto& st = *state;
    std::size_t loops = 0, upper = 0, lower = 0;
    for (const auto& r : st.certificates) {
        EXPECT_FALSE(r.solver_failure) << r.witness;
        EXPECT_TRUE(std::isfinite(r.value));
        EXPECT_TRUE(r.pass) << r.kind << " at " << r.x << ": " << r.value << " vs " << r.threshold;
        if (r.kind == "loop") ++loops;
        if (r.kind == "i'") {
            ++upper;
            EXPECT_EQ(r.threshold, 1.5);
        }
        if (r.kind == "ii'") {
            ++lower;
            EXPECT_EQ(r.threshold, 1 - 5.0 / 2);
        }
    }
    EXPECT_GT(loops, 0u);
    EXPECT_EQ(upper, st.stages[0].points.size());
    EXPECT_GT(lower, 0u);
}

TEST_F(Theorem2StageOne, StateRoundTrips)
{
    const auto back = theorem2_from_json(json::parse(to_json(*state).dump()));
    EXPECT_EQ(back.cubes, state->cubes);
    ASSERT_EQ(back.stages.size(), 1u);
    EXPECT_EQ(back.stages[0].points.size(), state->stages[0].points.size());
    ASSERT_EQ(back.certificates.size(), state->certificates.size());
    for (std::size_t i = 0; i < back.certificates.size(); ++i) {
        EXPECT_EQ(back.certificates[i].value, state->certificates[i].value);
        EXPECT_EQ(back.certificates[i].kind, state->certificates[i].kind);
    }
}

TEST(Theorem2, StageIndexIsChecked)
{
    EXPECT_EQ(code_of([] { build_theorem2_stage(Theorem2State{}, 1); }), ErrorCode::invalid_argument);
}
