#include "carnot/comparison.hpp"
#include "carnot/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace carnot;

namespace {

struct Scenario {
    CarnotGroup g;
    GridDomain dom;
    NonlinearOperator F;
    Expr u, v;

    ComparisonReport run(ComparisonOptions opts = {}, bool with_exprs = true) const
    {
        if (with_exprs) {
            opts.u_expr = u;
            opts.v_expr = v;
        }
        return run_comparison(g, F, sample(u, g, dom), sample(v, g, dom), opts);
    }
};

Scenario euclidean_bump(const char* u, const char* v, NonlinearOperator F)
{
    return {CarnotGroup::euclidean(2), GridDomain::cube(2, -1, 1, 21), std::move(F), parse(u), parse(v)};
}

} // namespace

TEST(Classical, Examples)
{
    const auto e = CarnotGroup::euclidean(2);
    const GridDomain dom = GridDomain::cube(2, -1, 1, 11);
    const auto F = trace_minus_u(2, 1.0);
    const auto sub = classify_classical(e, F, parse("-0.5*(1 - x1^2 - x2^2)"), dom, SolutionKind::sub);
    EXPECT_TRUE(sub.passed);
    // Interior nodes reach |x|² = 1.28, where 2 − u = 2 − 0.14.
    EXPECT_NEAR(sub.extreme_residual, 1.86, 1e-12);
    for (auto kind : {SolutionKind::sub, SolutionKind::super}) {
        const auto r = classify_classical(e, F, parse("0"), dom, kind);
        EXPECT_TRUE(r.passed);
        EXPECT_EQ(r.extreme_residual, 0.0);
    }
    const auto h = CarnotGroup::heisenberg(1);
    for (auto kind : {SolutionKind::sub, SolutionKind::super})
        EXPECT_TRUE(classify_classical(h, trace_minus_u(2, 0.0), parse("x1"), GridDomain::cube(3, -1, 1, 5), kind)
                        .passed);
    const auto bad = classify_classical(e, F, parse("0.5*(1 - x1^2 - x2^2)"), dom, SolutionKind::sub);
    EXPECT_FALSE(bad.passed);
    EXPECT_EQ(bad.location, (Point{0, 0})); // residual −2 − u is most negative at the centre
    EXPECT_NEAR(bad.extreme_residual, -2.5, 1e-12);
    EXPECT_THROW(classify_classical(e, F, parse("abs(x1)"), dom, SolutionKind::sub), NonsmoothError);
}

TEST(BlowUp, Examples)
{
    const auto e = CarnotGroup::euclidean(2);
    const GridDomain dom = GridDomain::cube(2, -1, 1, 41);
    const GridDomain ref = GridDomain::cube(2, -2, 2, 9);
    const std::size_t centre = dom.node_count() / 2;
    const GridField sq = sample(parse("x1^2 + x2^2"), e, dom);
    const GridField expect = sample(parse("x1^2 + x2^2"), e, ref);
    for (double rho : {0.1, 0.2}) {
        const GridField b = blow_up(sq, centre, Eigen::Vector2d::Zero(), rho, ref);
        for (std::size_t i = 0; i < ref.node_count(); ++i)
            EXPECT_NEAR(b[i], expect[i], 1e-12);
    }
    const GridField lin = sample(parse("3*x1 - x2 + 1"), e, dom);
    const GridField z = blow_up(lin, centre, Eigen::Vector2d(3, -1), 0.1, ref);
    for (std::size_t i = 0; i < ref.node_count(); ++i)
        EXPECT_NEAR(z[i], 0.0, 1e-12);
    const GridField one = blow_up(sq, centre, Eigen::Vector2d::Zero(), 0.5, GridDomain::cube(2, -1, 1, 5));
    EXPECT_NEAR(one[0], sq.interpolate(std::vector<double>{-0.5, -0.5}) / 0.25, 1e-12);
    EXPECT_THROW(blow_up(sq, centre, Eigen::Vector2d::Zero(), 1.0, ref), BoundaryError);
}

TEST(Jensen, Examples)
{
    const auto e2 = CarnotGroup::euclidean(2);
    const GridDomain dom = GridDomain::cube(2, -1, 1, 21);
    const std::size_t centre = dom.node_count() / 2;
    const auto w = jensen_witness(sample(parse("-(x1^2 + x2^2)"), e2, dom), centre, 0.3, 1e-6);
    ASSERT_TRUE(w.found);
    EXPECT_EQ(w.node, centre);
    EXPECT_TRUE(w.hessian.isApprox(-2.0 * Eigen::Matrix2d::Identity(), 1e-9));

    const auto c = jensen_witness(GridField::constant(dom, 1.0), centre, 0.3, 1e-6);
    ASSERT_TRUE(c.found);
    EXPECT_NEAR(c.hessian.norm(), 0.0, 1e-9);

    const auto e1 = CarnotGroup::euclidean(1);
    const GridDomain line = GridDomain::cube(1, -1, 1, 201);
    const GridField kink = sample(parse("-x1^2 + 0.1*abs(x1)"), e1, line);
    const std::size_t x0 = line.nearest_node(std::vector<double>{0.05});
    const auto k = jensen_witness(kink, x0, 0.05, 1e-6);
    ASSERT_TRUE(k.found);
    EXPECT_NEAR(line.coordinate(k.node, 0), 0.05, 0.03);
    EXPECT_NEAR(k.hessian(0, 0), -2.0, 1e-6);

    // Convex bowl: no node has a negative semidefinite Hessian.
    EXPECT_FALSE(jensen_witness(sample(parse("x1^2 + x2^2"), e2, dom), centre, 0.3, 1e-6).found);
    EXPECT_THROW(jensen_witness(GridField::constant(GridDomain::cube(2, -1, 1, 4), 0.0), 0, 0.1, 1e-6), InputError);
}

TEST(Comparison, HoldsWhenUBelowV)
{
    const auto s = euclidean_bump("-0.5*(1 - x1^2 - x2^2)", "0", trace_minus_u(2, 1.0));
    const auto rep = s.run();
    EXPECT_EQ(rep.verdict, Verdict::holds);
    EXPECT_EQ(rep.delta0, 0.0);
    EXPECT_EQ(exit_code(rep.verdict), 0);
}

TEST(Comparison, HoldsForEqualFields)
{
    const auto s = euclidean_bump("sin(x1) + x2^3", "sin(x1) + x2^3", trace_minus_u(2, 0.0));
    const auto rep = s.run();
    EXPECT_EQ(rep.verdict, Verdict::holds);
    EXPECT_EQ(rep.delta0, 0.0);
    EXPECT_EQ(rep.c_plus, 0.0);
}

TEST(Comparison, NonSubsolutionIsFlagged)
{
    const auto s = euclidean_bump("0.5*(1 - x1^2 - x2^2)", "0", trace_minus_u(2, 1.0));
    const auto rep = s.run();
    EXPECT_EQ(rep.verdict, Verdict::hypothesis_violation);
    EXPECT_EQ(rep.reason, "classical subsolution");
    EXPECT_EQ(rep.details["offending"]["location"], nlohmann::json({0.0, 0.0}));
    EXPECT_LT(rep.details["offending"]["residual"].get<double>(), 0.0);
    EXPECT_EQ(exit_code(rep.verdict), 1);
}

TEST(Comparison, BadOperatorIsFlagged)
{
    const auto s = euclidean_bump("0.5*(1 - x1^2 - x2^2)", "0", neg_trace_minus_u(2, 1.0));
    const auto rep = s.run();
    EXPECT_EQ(rep.verdict, Verdict::hypothesis_violation);
    EXPECT_EQ(rep.reason, "operator structure: degenerate_subelliptic");
    EXPECT_FALSE(rep.details["offending"]["tuple"].is_null());
}

TEST(Comparison, GridOnlyPipelineNamesTheBrokenAssumption)
{
    // Without expressions the classical pre-check is skipped and the full
    // pipeline has to locate the failure at a Jensen witness.
    const auto s = euclidean_bump("0.5*(1 - x1^2 - x2^2)", "0", trace_minus_u(2, 1.0));
    const auto rep = s.run({}, false);
    ASSERT_EQ(rep.verdict, Verdict::counterexample_candidate) << rep.to_json().dump(2);
    EXPECT_EQ(rep.reason, "subsolution");
    EXPECT_TRUE(rep.details["chain"]["monotonicity"].get<bool>());
    EXPECT_GT(rep.delta0, 0.0);
}

TEST(Comparison, ShiftInvariance)
{
    for (const char* u : {"-0.5*(1 - x1^2 - x2^2)", "0.5*(1 - x1^2 - x2^2)"}) {
        const auto a = euclidean_bump(u, "0", trace_minus_u(2, 1.0));
        auto b = a;
        b.u = a.u + Expr::number(0.25);
        b.v = a.v + Expr::number(0.25);
        const auto ra = a.run({}, false), rb = b.run({}, false);
        EXPECT_EQ(ra.verdict, rb.verdict) << u;
        EXPECT_NEAR(ra.delta0, rb.delta0, 1e-15) << u;
    }
}

TEST(Comparison, BoundaryShiftReduction)
{
    // u − v has boundary excess 0.2; comparing against v + c⁺ gives the same verdict.
    const auto a = euclidean_bump("x1 + 0.2", "x1", trace_minus_u(2, 0.0));
    const auto ra = a.run();
    EXPECT_NEAR(ra.c_plus, 0.2, 1e-15);
    auto b = a;
    b.v = a.v + Expr::number(ra.c_plus);
    EXPECT_EQ(b.run().verdict, ra.verdict);
    EXPECT_EQ(ra.verdict, Verdict::holds);
}

TEST(Comparison, EmptyShrunkDomain)
{
    const auto s = euclidean_bump("0.5*(1 - x1^2 - x2^2)", "0", trace_minus_u(2, 1.0));
    ComparisonOptions opts;
    opts.epsilon = 10.0;
    opts.delta = 10.0;
    // δ and ε are capped by δ₀, so force a huge radius through a large field instead.
    const auto big = euclidean_bump("50*(1 - x1^2 - x2^2)", "0", trace_minus_u(2, 1.0));
    EXPECT_THROW(big.run(opts, false), InputError);
}

TEST(Comparison, GridMismatch)
{
    const auto e = CarnotGroup::euclidean(2);
    const GridField u = GridField::constant(GridDomain::cube(2, -1, 1, 5), 0);
    const GridField v = GridField::constant(GridDomain::cube(2, -1, 1, 7), 0);
    EXPECT_THROW(run_comparison(e, trace_minus_u(2, 1), u, v, {}), InputError);
}

TEST(Comparison, Deterministic)
{
    const auto s = euclidean_bump("0.5*(1 - x1^2 - x2^2)", "0", trace_minus_u(2, 1.0));
    EXPECT_EQ(s.run({}, false).to_json().dump(), s.run({}, false).to_json().dump());
}
