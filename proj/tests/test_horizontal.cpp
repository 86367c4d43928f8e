#include "carnot/errors.hpp"
#include "carnot/expr.hpp"
#include "carnot/horizontal.hpp"
#include "carnot/random.hpp"

#include <gtest/gtest.h>

using namespace carnot;

namespace {

HorizontalJet symbolic_jet(const CarnotGroup& g, const Expr& f, const Point& x)
{
    const SymbolicJet jet(f, g.dim());
    return horizontal_jet_from_euclidean(g, x, jet.value(x.coords()), jet.gradient_at(x.coords()),
                                         jet.hessian_at(x.coords()));
}

} // namespace

TEST(Horizontal, HeisenbergCoefficients)
{
    const auto h = CarnotGroup::heisenberg(1);
    Eigen::MatrixXd expect(2, 3);
    expect << 1, 0, -1.0, 0, 1, 0.25;
    EXPECT_TRUE(coefficient_matrix(h, {0.5, 2.0, 7.0}).isApprox(expect));
}

TEST(Horizontal, CoefficientsAtIdentity)
{
    for (const auto& g : {CarnotGroup::heisenberg(2), CarnotGroup::engel(), CarnotGroup::euclidean(3)}) {
        const Eigen::MatrixXd a = coefficient_matrix(g, g.identity());
        Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(g.horizontal_dim(), g.dim());
        expect.leftCols(g.horizontal_dim()).setIdentity();
        EXPECT_EQ(a, expect) << g.name();
    }
    EXPECT_EQ(coefficient_matrix(CarnotGroup::euclidean(2), {3, -4}), Eigen::MatrixXd::Identity(2, 2));
}

TEST(Horizontal, EngelCoefficientsFromLeftTranslation)
{
    // Oracle: finite differences of y ↦ x·y at y = 0.
    const auto g = CarnotGroup::engel();
    const Point x{0.4, -0.3, 0.8, 1.2};
    const Eigen::MatrixXd a = coefficient_matrix(g, x);
    for (int l = 0; l < 2; ++l) {
        Point yp(4), ym(4);
        const double h = 1e-6;
        yp[l] = h;
        ym[l] = -h;
        const Point fp = g.multiply(x, yp), fm = g.multiply(x, ym);
        for (int k = 0; k < 4; ++k)
            EXPECT_NEAR(a(l, k), (fp[k] - fm[k]) / (2 * h), 1e-8);
    }
}

TEST(Horizontal, JetExamples)
{
    const auto h = CarnotGroup::heisenberg(1);
    const HorizontalJet j = symbolic_jet(h, parse("x1^2"), {1, 2, 3});
    EXPECT_TRUE(j.gradient.isApprox(Eigen::Vector2d(2, 0)));
    EXPECT_TRUE(j.hessian.isApprox(Eigen::Matrix2d{{2, 0}, {0, 0}}));

    const HorizontalJet t = symbolic_jet(h, parse("x3"), {0.6, -1.4, 2});
    EXPECT_TRUE(t.gradient.isApprox(Eigen::Vector2d(0.7, 0.3)));
    EXPECT_EQ(t.hessian, Eigen::Matrix2d::Zero());

    const auto e = CarnotGroup::euclidean(2);
    const HorizontalJet j2 = symbolic_jet(e, parse("x1*x2 + x1^3"), {0.5, 2});
    EXPECT_TRUE(j2.gradient.isApprox(Eigen::Vector2d(2 + 0.75, 0.5)));
    EXPECT_TRUE(j2.hessian.isApprox(Eigen::Matrix2d{{3, 1}, {1, 0}}));
}

TEST(Horizontal, HessianIsSymmetrized)
{
    const HorizontalJet j(0.0, Eigen::Vector2d::Zero(), Eigen::Matrix2d{{0, 1}, {0, 0}});
    EXPECT_EQ(j.hessian, (Eigen::Matrix2d{{0, 0.5}, {0.5, 0}}));
    const auto h = CarnotGroup::heisenberg(1);
    EXPECT_THROW(horizontal_jet_from_euclidean(h, h.identity(), 0, Eigen::Vector3d::Zero(),
                                               Eigen::Matrix3d{{0, 1, 0}, {0, 0, 0}, {0, 0, 0}}),
                 InputError);
    EXPECT_THROW(horizontal_jet_from_euclidean(h, h.identity(), 0, Eigen::Vector2d::Zero(), Eigen::Matrix2d::Zero()),
                 InputError);
}

TEST(Horizontal, DiscreteJets)
{
    const auto h = CarnotGroup::heisenberg(1);
    // Grid with spacing 0.05 containing (1, 2, 3).
    const GridDomain dom({{0.9, 1.1, 5}, {1.9, 2.1, 5}, {2.9, 3.1, 5}});
    const std::size_t centre = dom.flat_index(std::vector<std::size_t>{2, 2, 2});
    const GridField f = sample(parse("x1^2"), h, dom);
    const HorizontalJet j = discrete_horizontal_jet(h, f, centre);
    EXPECT_NEAR(j.gradient[0], 2.0, 5e-3);
    EXPECT_NEAR(j.gradient[1], 0.0, 5e-3);

    const HorizontalJet c = discrete_horizontal_jet(h, GridField::constant(dom, 4.0), centre);
    EXPECT_EQ(c.gradient, Eigen::Vector2d::Zero());
    EXPECT_EQ(c.hessian, Eigen::Matrix2d::Zero());

    const auto e = CarnotGroup::euclidean(2);
    const GridDomain d2 = GridDomain::cube(2, -1, 1, 21);
    const HorizontalJet k = discrete_horizontal_jet(e, sample(parse("x1*x2"), e, d2), d2.node_count() / 2);
    EXPECT_NEAR(k.hessian(0, 1), 1.0, 5e-3);
    EXPECT_NEAR(k.hessian(0, 0), 0.0, 5e-3);

    EXPECT_THROW(discrete_horizontal_jet(h, f, 0), BoundaryError);
    EXPECT_THROW(discrete_horizontal_jet(h, f, centre, 3), BoundaryError);
}

TEST(Horizontal, DiscreteJetExactOnQuadratics)
{
    const auto h = CarnotGroup::heisenberg(1);
    const GridDomain dom = GridDomain::cube(3, -1, 1, 9);
    const Expr f = parse("x1^2 - 3*x1*x3 + x2*x3 + 0.5*x3^2");
    const GridField s = sample(f, h, dom);
    const std::size_t node = dom.flat_index(std::vector<std::size_t>{3, 5, 4});
    const HorizontalJet d = discrete_horizontal_jet(h, s, node);
    const HorizontalJet x = symbolic_jet(h, f, dom.point(node));
    EXPECT_LT((d.gradient - x.gradient).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((d.hessian - x.hessian).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Horizontal, LeftInvarianceOfFrame)
{
    // (X_l f)(a·x) = X_l(f∘L_a)(x), with f∘L_a built by substituting the product table.
    Uniform rng(41);
    for (const auto& g : {CarnotGroup::heisenberg(1), CarnotGroup::engel()}) {
        const int n = g.dim();
        const Expr f = parse(n == 3 ? "x1^2*x3 + x2*x3^2 - x1*x2" : "x1*x4 + x3^2*x2 - x4^2 + x1^3");
        for (int s = 0; s < 10; ++s) {
            Point a(n), x(n);
            for (int i = 0; i < n; ++i) {
                a[i] = rng(-1, 1);
                x[i] = rng(-1, 1);
            }
            std::vector<Expr> subs;
            for (int c = 0; c < n; ++c) {
                // Product polynomial with the first n variables fixed to a.
                std::vector<Expr> fix;
                for (int k = 0; k < n; ++k)
                    fix.push_back(Expr::number(a[k]));
                for (int k = 0; k < n; ++k)
                    fix.push_back(Expr::coordinate(k));
                subs.push_back(substitute(polynomial_expr(g.product_table()[c]), fix));
            }
            const Expr translated = substitute(f, subs);
            const HorizontalJet lhs = symbolic_jet(g, f, g.multiply(a, x));
            const HorizontalJet rhs = symbolic_jet(g, translated, x);
            EXPECT_LT((lhs.gradient - rhs.gradient).cwiseAbs().maxCoeff(), 1e-8) << g.name();
            EXPECT_LT((lhs.hessian - rhs.hessian).cwiseAbs().maxCoeff(), 1e-8) << g.name();
        }
    }
}
