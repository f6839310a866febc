#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pinv/error.hpp"
#include "pinv/field.hpp"
#include "support.hpp"

using namespace pinv;
using testing_support::grid1d;
using testing_support::grid2d;

namespace {

std::vector<double> sample(const SpaceTimeGrid& g, auto f) {
    std::vector<double> v(g.node_count());
    for (std::size_t id = 0; id < v.size(); ++id) v[id] = f(g.coord(id));
    return v;
}

double laplacian_sin_error(int nx) {
    auto g = grid1d(nx, 4);
    const double pi = std::numbers::pi;
    auto f = sample(*g, [&](const Coord& x) { return std::sin(pi * x[0]); });
    auto lap = g->laplacian(f);
    double err = 0.0;
    for (std::size_t k = 0; k < lap.size(); ++k) {
        const double x = g->coord(g->interior_nodes()[k])[0];
        err = std::max(err, std::abs(lap[k] + pi * pi * std::sin(pi * x)));
    }
    return err;
}

double normal_sin_error(int nx) {
    auto g = grid1d(nx, 4);
    const double pi = std::numbers::pi;
    auto f = sample(*g, [&](const Coord& x) { return std::sin(pi * x[0]); });
    auto dn = g->normal_derivative(f);
    // outward derivative: -f'(0) = -pi, +f'(1) = -pi
    return std::max(std::abs(dn[0] + pi), std::abs(dn[1] + pi));
}

}  // namespace

TEST(Grid, SpacingArithmetic1D) {
    auto g = SpaceTimeGrid::build({1, {1.0}, {3}, 4, 1.0});
    EXPECT_DOUBLE_EQ(g->spacing(0), 0.25);
    EXPECT_DOUBLE_EQ(g->dt(), 0.25);
    EXPECT_EQ(g->node_count(), 5u);
    EXPECT_EQ(g->interior_nodes().size(), 3u);
    EXPECT_EQ(g->boundary_nodes().size(), 2u);
}

TEST(Grid, SpacingArithmetic2D) {
    auto g = SpaceTimeGrid::build({2, {1.0, 1.0}, {9, 9}, 10, 0.5});
    EXPECT_DOUBLE_EQ(g->spacing(0), 0.1);
    EXPECT_DOUBLE_EQ(g->spacing(1), 0.1);
    EXPECT_DOUBLE_EQ(g->dt(), 0.05);
    EXPECT_EQ(g->node_count(), 121u);
    EXPECT_EQ(g->interior_nodes().size(), 81u);
    EXPECT_EQ(g->boundary_nodes().size(), 36u);
    EXPECT_EQ(g->corner_nodes().size(), 4u);
}

TEST(Grid, RejectsBadConfigs) {
    EXPECT_THROW(SpaceTimeGrid::build({1, {1.0}, {2}, 4, 1.0}), InvalidArgument);
    EXPECT_THROW(SpaceTimeGrid::build({3, {1.0, 1.0, 1.0}, {5, 5, 5}, 4, 1.0}), InvalidArgument);
    EXPECT_THROW(SpaceTimeGrid::build({1, {-1.0}, {5}, 4, 1.0}), InvalidArgument);
    EXPECT_THROW(SpaceTimeGrid::build({1, {1.0}, {5}, 1, 1.0}), InvalidArgument);
    EXPECT_THROW(SpaceTimeGrid::build({1, {1.0}, {5}, 4, 0.0}), InvalidArgument);
}

TEST(Grid, BoundaryNodesHaveOneNormalAndSkipCorners) {
    auto g = grid2d(7, 4);
    for (const auto& b : g->boundary_nodes()) {
        EXPECT_TRUE(b.axis == 0 || b.axis == 1);
        EXPECT_TRUE(b.sign == -1 || b.sign == 1);
        for (std::size_t c : g->corner_nodes()) EXPECT_NE(b.node, c);
    }
}

TEST(Grid, LaplacianOfConstantAndLinearVanishes) {
    for (auto g : {grid1d(11, 4), grid2d(9, 4)}) {
        auto c = sample(*g, [](const Coord&) { return 3.5; });
        auto lin = sample(*g, [](const Coord& x) { return 2.0 * x[0] - x[1] + 0.25; });
        for (double v : g->laplacian(c)) EXPECT_NEAR(v, 0.0, 1e-9);
        for (double v : g->laplacian(lin)) EXPECT_NEAR(v, 0.0, 1e-9);
    }
}

TEST(Grid, LaplacianOfSine) {
    EXPECT_LE(laplacian_sin_error(199), 1e-3);
    const double e1 = laplacian_sin_error(49), e2 = laplacian_sin_error(99);
    EXPECT_GE(std::log2(e1 / e2), 1.8);
}

TEST(Grid, LaplacianIsSymmetric) {
    auto g = grid2d(8, 4);
    // interior-supported fields
    auto f = sample(*g, [](const Coord& x) { return x[0] * (1 - x[0]) * std::exp(x[1]) * x[1] * (1 - x[1]); });
    auto h = sample(*g, [](const Coord& x) { return std::sin(3 * x[0]) * x[0] * (1 - x[0]) * x[1] * (1 - x[1]); });
    for (const auto& b : g->boundary_nodes()) f[b.node] = h[b.node] = 0.0;
    for (std::size_t c : g->corner_nodes()) f[c] = h[c] = 0.0;
    auto lf = g->laplacian(f), lh = g->laplacian(h);
    double a = 0.0, b = 0.0;
    for (std::size_t k = 0; k < lf.size(); ++k) {
        a += lf[k] * h[g->interior_nodes()[k]];
        b += f[g->interior_nodes()[k]] * lh[k];
    }
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a)));
}

TEST(Grid, NormalDerivativeOfLinearAndConstant) {
    auto g = grid1d(9, 4);
    auto x = sample(*g, [](const Coord& c) { return c[0]; });
    auto dn = g->normal_derivative(x);
    EXPECT_NEAR(dn[0], -1.0, 1e-12);
    EXPECT_NEAR(dn[1], 1.0, 1e-12);
    auto c = sample(*g, [](const Coord&) { return 2.0; });
    for (double v : g->normal_derivative(c)) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Grid, NormalDerivativeOfSine) {
    EXPECT_LE(normal_sin_error(199), 1e-3);
    EXPECT_GE(std::log2(normal_sin_error(49) / normal_sin_error(99)), 1.8);
}

TEST(Grid, NormalDerivative2DUsesOutwardSign) {
    auto g = grid2d(19, 4);
    auto f = sample(*g, [](const Coord& x) { return x[1]; });
    auto dn = g->normal_derivative(f);
    for (std::size_t k = 0; k < dn.size(); ++k) {
        const auto& b = g->boundary_nodes()[k];
        const double expect = b.axis == 1 ? b.sign : 0.0;
        EXPECT_NEAR(dn[k], expect, 1e-10);
    }
}

TEST(Grid, ShapeMismatchThrows) {
    auto g = grid1d(5, 4);
    std::vector<double> wrong(3, 0.0);
    EXPECT_THROW(g->laplacian(wrong), InvalidArgument);
    EXPECT_THROW(g->normal_derivative(wrong), InvalidArgument);
}

TEST(Field, LevelZeroStartsAtZeroAndNormsWork) {
    auto g = grid1d(5, 4);
    Field f(g, 5);
    EXPECT_EQ(f.sup_norm(), 0.0);
    f(2, 3) = -4.0;
    EXPECT_EQ(f.sup_norm(), 4.0);
    EXPECT_EQ(f.min(), -4.0);
    EXPECT_TRUE(f.all_finite());
    f(1, 1) = std::nan("");
    EXPECT_FALSE(f.all_finite());
}

TEST(Field, ScatterBoundaryFillsCornersWithEdgeMean) {
    auto g = grid2d(3, 4);
    std::vector<double> level(g->node_count(), 0.0);
    std::vector<double> b(g->boundary_nodes().size());
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = static_cast<double>(k + 1);
    scatter_boundary(*g, b, level);
    const double expect = 0.5 * (level[g->node_id(1, 0)] + level[g->node_id(0, 1)]);
    EXPECT_DOUBLE_EQ(level[g->node_id(0, 0)], expect);
}
