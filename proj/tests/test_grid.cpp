#include "carnot/errors.hpp"
#include "carnot/expr.hpp"
#include "carnot/grid.hpp"

#include <gtest/gtest.h>

using namespace carnot;

TEST(Grid, Layout)
{
    const GridDomain dom({{0.0, 1.0, 3}, {-1.0, 1.0, 5}});
    EXPECT_EQ(dom.node_count(), 15u);
    EXPECT_EQ(dom.stride(0), 5u);
    EXPECT_EQ(dom.stride(1), 1u);
    // Last coordinate varies fastest.
    EXPECT_EQ(dom.point(1), (Point{0.0, -0.5}));
    EXPECT_EQ(dom.point(5), (Point{0.5, -1.0}));
    EXPECT_EQ(dom.point(14), (Point{1.0, 1.0}));
    const std::vector<std::size_t> idx{2, 3};
    EXPECT_EQ(dom.flat_index(idx), 13u);
    EXPECT_EQ(dom.multi_index(13), idx);
}

TEST(Grid, Validation)
{
    EXPECT_THROW(GridDomain({{0.0, 1.0, 2}}), InputError);
    EXPECT_THROW(GridDomain({{1.0, 0.0, 3}}), InputError);
    EXPECT_THROW(GridField(GridDomain::cube(1, 0, 1, 3), {1.0, 2.0}), InputError);
    EXPECT_THROW(GridField(GridDomain::cube(1, 0, 1, 3), {1.0, NAN, 2.0}), InputError);
    EXPECT_THROW(GridDomain::from_json({{"intervals", {{0, 1}}}, {"nodes", {3, 4}}}), InputError);
}

TEST(Grid, BoundaryMaskMarksFaces)
{
    const GridDomain dom = GridDomain::cube(2, 0.0, 1.0, 4);
    const auto mask = GridField::constant(dom, 0.0).boundary_mask();
    std::size_t count = 0;
    for (bool b : mask)
        count += b;
    EXPECT_EQ(count, 12u); // 16 nodes minus the 2×2 interior
    EXPECT_FALSE(mask[dom.flat_index(std::vector<std::size_t>{1, 2})]);
    EXPECT_TRUE(mask[dom.flat_index(std::vector<std::size_t>{0, 2})]);
}

TEST(Grid, MarginAndNearest)
{
    const GridDomain dom = GridDomain::cube(2, 0.0, 1.0, 5);
    EXPECT_TRUE(dom.has_margin(dom.flat_index(std::vector<std::size_t>{2, 2}), 2));
    EXPECT_FALSE(dom.has_margin(dom.flat_index(std::vector<std::size_t>{1, 2}), 2));
    EXPECT_EQ(dom.nearest_node(std::vector<double>{0.26, 0.9}), dom.flat_index(std::vector<std::size_t>{1, 4}));
    EXPECT_EQ(dom.nearest_node(std::vector<double>{-5, 5}), dom.flat_index(std::vector<std::size_t>{0, 4}));
}

TEST(Grid, InterpolationIsExactOnBilinear)
{
    const auto g = CarnotGroup::euclidean(2);
    const GridDomain dom = GridDomain::cube(2, -1.0, 1.0, 5);
    const GridField f = sample(parse("1 + 2*x1 - x2 + 3*x1*x2"), g, dom);
    const std::vector<double> x{0.13, -0.71};
    EXPECT_NEAR(f.interpolate(x), 1 + 2 * 0.13 + 0.71 + 3 * 0.13 * -0.71, 1e-14);
    EXPECT_EQ(f.interpolate(std::vector<double>{1.0, 1.0}), f[dom.node_count() - 1]);
    EXPECT_THROW(f.interpolate(std::vector<double>{1.1, 0.0}), BoundaryError);
}

TEST(Grid, Arithmetic)
{
    const GridDomain dom = GridDomain::cube(1, 0, 1, 3);
    const GridField a(dom, {1, 2, 3}), b(dom, {0.5, 0.5, 4});
    EXPECT_EQ((a - b).values(), (std::vector<double>{0.5, 1.5, -1}));
    EXPECT_EQ((-a).values(), (std::vector<double>{-1, -2, -3}));
    EXPECT_EQ((a + 1.0).values(), (std::vector<double>{2, 3, 4}));
    EXPECT_EQ(b.max_abs(), 4.0);
    EXPECT_THROW(a - GridField::constant(GridDomain::cube(1, 0, 2, 3), 0), InputError);
}

TEST(Grid, Csv)
{
    const GridDomain dom = GridDomain::cube(1, 0, 1, 3);
    const GridField a(dom, {1, 0.25, -3});
    EXPECT_EQ(field_csv(a), "x1,value\n0,1\n0.5,0.25\n1,-3\n");
    EXPECT_EQ(field_csv(a, std::vector<std::size_t>{0, 0, 2}), "x1,value,witness\n0,1,0\n0.5,0.25,0\n1,-3,2\n");
}

TEST(Grid, JsonRoundTrip)
{
    const GridDomain dom({{0.0, 1.0, 3}, {-1.0, 1.0, 5}});
    EXPECT_TRUE(GridDomain::from_json(dom.to_json()) == dom);
}
