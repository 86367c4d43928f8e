#include "carnot/errors.hpp"
#include "carnot/expr.hpp"
#include "carnot/transforms.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace carnot;

namespace {

// Textbook sup-convolution on the line, written independently of the library kernel.
std::vector<double> line_sup_convolution(const std::vector<double>& x, const std::vector<double>& u, double eps)
{
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double best = -INFINITY;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double d = x[i] - x[j];
            best = std::max(best, u[j] - d * d / (2.0 * eps));
        }
        out[i] = best;
    }
    return out;
}

} // namespace

TEST(Transforms, ConstantField)
{
    const auto h = CarnotGroup::heisenberg(1);
    const GridDomain dom = GridDomain::cube(3, -1, 1, 5);
    const auto r = convolve(h, GridField::constant(dom, 2.5), 0.1, ConvolutionMode::sup);
    for (std::size_t i = 0; i < dom.node_count(); ++i) {
        EXPECT_EQ(r.field[i], 2.5);
        EXPECT_EQ(r.witnesses[i], i);
    }
}

TEST(Transforms, ClosedFormOnTheLine)
{
    const auto e = CarnotGroup::euclidean(1);
    const GridDomain dom = GridDomain::cube(1, -1, 1, 201);
    const double eps = 1.0, h = dom.spacing(0);
    const auto r = convolve(e, sample(parse("-x1^2/2"), e, dom), eps, ConvolutionMode::sup);
    for (std::size_t i = 0; i < dom.node_count(); ++i) {
        const double x = dom.coordinate(i, 0);
        EXPECT_NEAR(r.field[i], -x * x / (2 * (1 + eps)), 2 * h);
    }
    EXPECT_EQ(r.kernel_constant, 2.0);
}

TEST(Transforms, EuclideanOracleBitExact)
{
    const auto e = CarnotGroup::euclidean(1);
    const GridDomain dom = GridDomain::cube(1, -1, 1, 101);
    const GridField u = sample(parse("sin(3*x1) - abs(x1)"), e, dom);
    std::vector<double> xs(dom.node_count());
    for (std::size_t i = 0; i < xs.size(); ++i)
        xs[i] = dom.coordinate(i, 0);
    const auto r = convolve(e, u, 0.05, ConvolutionMode::sup);
    EXPECT_EQ(r.field.values(), line_sup_convolution(xs, u.values(), 0.05));
}

TEST(Transforms, PointwiseBoundsDualityAndWitnesses)
{
    const auto h = CarnotGroup::heisenberg(1);
    const GridDomain dom = GridDomain::cube(3, -1, 1, 7);
    const GridField u = sample(parse("x1*x2 - x3^2 + 0.3*x1"), h, dom);
    const auto sup = convolve(h, u, 0.2, ConvolutionMode::sup);
    const auto inf = convolve(h, u, 0.2, ConvolutionMode::inf);
    const auto dual = convolve(h, -u, 0.2, ConvolutionMode::sup);
    for (std::size_t i = 0; i < u.size(); ++i) {
        EXPECT_GE(sup.field[i], u[i]);
        EXPECT_LE(inf.field[i], u[i]);
        EXPECT_EQ(inf.field[i], -dual.field[i]);
        const std::size_t w = sup.witnesses[i];
        EXPECT_GE(u[w], sup.field[i]);
        EXPECT_EQ(sup.field[i], u[w] - h.kernel(dom.point(i).coords(), dom.point(w).coords()) / (2.0 * 0.2));
    }
}

TEST(Transforms, MonotoneInEpsilon)
{
    const auto g = CarnotGroup::engel();
    const GridDomain dom = GridDomain::cube(4, -1, 1, 5);
    const GridField u = sample(parse("cos(2*x1) + x4*x2"), g, dom);
    const double kc = kernel_constant(g, dom);
    const auto a = convolve(g, u, 0.05, ConvolutionMode::sup, kc);
    const auto b = convolve(g, u, 0.1, ConvolutionMode::sup, kc);
    for (std::size_t i = 0; i < u.size(); ++i)
        EXPECT_LE(a.field[i], b.field[i]);
}

TEST(Transforms, ParallelMatchesSerial)
{
    const auto h = CarnotGroup::heisenberg(1);
    const GridDomain dom = GridDomain::cube(3, -1, 1, 7);
    const GridField u = sample(parse("exp(x1) - x3*x2"), h, dom);
    for (auto mode : {ConvolutionMode::sup, ConvolutionMode::inf}) {
        const auto p = convolve(h, u, 0.1, mode, 1.0);
        const auto s = serial::convolve(h, u, 0.1, mode, 1.0);
        EXPECT_EQ(p.field.values(), s.field.values());
        EXPECT_EQ(p.witnesses, s.witnesses);
    }
    EXPECT_EQ(shrink_domain(h, dom, 0.4), serial::shrink_domain(h, dom, 0.4));
}

TEST(Transforms, InvalidEpsilon)
{
    const auto e = CarnotGroup::euclidean(1);
    const GridField u = GridField::constant(GridDomain::cube(1, 0, 1, 3), 0);
    EXPECT_THROW(convolve(e, u, 0.0, ConvolutionMode::sup), InputError);
    EXPECT_THROW(convolve(e, u, -1.0, ConvolutionMode::sup), InputError);
    EXPECT_THROW(convolve(CarnotGroup::heisenberg(1), u, 0.1, ConvolutionMode::sup), InputError);
}

TEST(Transforms, ShrinkDomain)
{
    const auto e = CarnotGroup::euclidean(1);
    const GridDomain dom = GridDomain::cube(1, 0, 1, 11);
    const auto all = shrink_domain(e, dom, 0.0);
    for (std::size_t i = 0; i < dom.node_count(); ++i)
        EXPECT_EQ(all[i], !dom.on_boundary(i));
    const auto mid = shrink_domain(e, dom, 0.2);
    for (std::size_t i = 0; i < dom.node_count(); ++i) {
        const double x = dom.coordinate(i, 0);
        EXPECT_EQ(mid[i], x >= 0.2 - 1e-12 && x <= 0.8 + 1e-12) << x;
    }
    const auto none = shrink_domain(e, dom, 2.0);
    for (bool b : none)
        EXPECT_FALSE(b);
}

TEST(Transforms, SemiconvexityCertificate)
{
    const auto e = CarnotGroup::euclidean(2);
    const GridDomain dom = GridDomain::cube(2, -1, 1, 11);
    EXPECT_TRUE(semiconvexity_certificate(sample(parse("x1^2 + x2^2"), e, dom), 0.0, 1e-9).passed);
    const GridField neg = sample(parse("-(x1^2 + x2^2)"), e, dom);
    const auto fail = semiconvexity_certificate(neg, 0.0, 1e-9);
    EXPECT_FALSE(fail.passed);
    EXPECT_NEAR(fail.worst_eigenvalue, -2.0, 1e-9);
    EXPECT_TRUE(semiconvexity_certificate(neg, 1.0, 1e-9).passed);
    EXPECT_FALSE(semiconvexity_certificate(neg, 0.9, 1e-9).passed);
    EXPECT_EQ(fail.nodes_checked, 81u);
}

TEST(Transforms, ConvolvedFieldsAreSemiconvex)
{
    for (const auto& g : {CarnotGroup::euclidean(2), CarnotGroup::heisenberg(1)}) {
        const GridDomain dom = GridDomain::cube(g.dim(), -1, 1, g.dim() == 2 ? 21 : 9);
        const GridField u = sample(parse("0.5*(1 - x1^2 - x2^2)"), g, dom);
        for (double eps : {0.05, 0.2}) {
            const auto r = convolve(g, u, eps, ConvolutionMode::sup);
            const double C = r.semiconvexity_constant();
            EXPECT_TRUE(semiconvexity_certificate(r.field, C, 1e-8 * (1 + C)).passed) << g.name() << " " << eps;
        }
    }
}

TEST(Transforms, KernelConstant)
{
    EXPECT_EQ(kernel_constant(CarnotGroup::euclidean(2), GridDomain::cube(2, -1, 1, 21)), 2.0);
    const auto h = CarnotGroup::heisenberg(1);
    const double coarse = kernel_constant(h, GridDomain::cube(3, -1, 1, 6), 1);
    const double fine = kernel_constant(h, GridDomain::cube(3, -1, 1, 11), 1);
    EXPECT_GT(coarse, 0.0);
    EXPECT_LE(coarse, fine * (1 + 1e-12)); // finer sampling contains the coarse nodes
    EXPECT_NEAR(coarse, fine, 0.05 * fine);
    EXPECT_GE(kernel_constant(h, GridDomain::cube(3, 0, 1e-9, 3)), 0.0);
}

TEST(Transforms, ModulusOfContinuity)
{
    const auto e = CarnotGroup::euclidean(1);
    const GridField u = sample(parse("abs(x1)"), e, GridDomain::cube(1, -1, 1, 21));
    EXPECT_EQ(modulus_of_continuity(u, 0.0), 0.0);
    EXPECT_NEAR(modulus_of_continuity(u, 0.3), 0.3, 1e-12);
    EXPECT_NEAR(modulus_of_continuity(u, 5.0), 1.0, 1e-12);
}

TEST(Transforms, ConvergenceReport)
{
    const auto e = CarnotGroup::euclidean(1);
    const GridDomain dom = GridDomain::cube(1, -1, 1, 201);
    const auto rep = convergence_report(e, sample(parse("abs(x1)"), e, dom), {0.1, 0.05, 0.025});
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_TRUE(rep.gaps_nonincreasing);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        EXPECT_TRUE(rep.rows[i].monotone);
        EXPECT_TRUE(rep.rows[i].bound_holds);
        // Gap at 0 is ε/2 up to grid resolution.
        EXPECT_NEAR(rep.rows[i].max_gap, rep.rows[i].epsilon / 2, 0.01);
        if (i > 0)
            EXPECT_LT(rep.rows[i].max_gap, rep.rows[i - 1].max_gap);
    }
    const auto flat = convergence_report(e, GridField::constant(dom, 3.0), {0.1, 0.05});
    for (const auto& row : flat.rows)
        EXPECT_EQ(row.max_gap, 0.0);
    EXPECT_THROW(convergence_report(e, GridField::constant(dom, 0), {0.05, 0.1}), InputError);
}
