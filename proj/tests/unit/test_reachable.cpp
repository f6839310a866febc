#include <gtest/gtest.h>

#include <cmath>

#include "pinv/error.hpp"
#include "pinv/reachable.hpp"
#include "support.hpp"

using namespace pinv;
using testing_support::chi_for;
using testing_support::family;
using testing_support::grid1d;
using testing_support::grid2d;

namespace {

const SpaceTimeFn kZero = [](double, const Coord&) { return 0.0; };
const SpaceTimeFn kOne = [](double, const Coord&) { return 1.0; };

}  // namespace

TEST(Window, StartsAfterDelta1) {
    auto g = grid1d(9, 20);
    auto w = make_window(*g, 0.2, 1.0);
    EXPECT_EQ(w.first_level, 5);
    EXPECT_EQ(w.last_level, 20);
    EXPECT_GT(g->time(w.first_level), 0.2);
    EXPECT_EQ(make_window(*g, 0.21, 0.5).first_level, 5);
    EXPECT_EQ(make_window(*g, 0.21, 0.5).last_level, 10);
    EXPECT_THROW(make_window(*g, 0.5, 0.5), InvalidArgument);
}

TEST(Constants, EqualWhenPotentialsCoincide) {
    auto g = grid1d(49, 100);
    auto chi = chi_for(g);
    auto c = compute_constants(kZero, 0.0, chi);
    EXPECT_EQ(c.a1, c.a2);
    EXPECT_EQ(sup_distance(c.w, c.y), 0.0);
    EXPECT_GT(c.a1, 0.0);
    EXPECT_LT(c.a1, chi.delta2);
    EXPECT_GT(g->time(c.a1_at.level), chi.delta1);
}

TEST(Constants, DecreaseWithKappa) {
    auto g = grid2d(9, 40);
    auto chi = chi_for(g);
    double prev = compute_constants(kZero, 0.0, chi).a2;
    for (double k : {1.0, 10.0}) {
        const double a2 = compute_constants(kZero, k, chi).a2;
        EXPECT_LE(a2, prev);
        EXPECT_GT(a2, 0.0);
        prev = a2;
    }
    EXPECT_THROW(compute_constants(kZero, -1.0, chi), InvalidArgument);
}

TEST(Constants, NonPositiveMinimumIsReported) {
    auto g = grid1d(19, 40);
    auto chi = chi_for(g);
    // so much absorption that the window minimum underflows
    try {
        compute_constants(kZero, 1e5, chi);
        FAIL() << "expected an invariant violation";
    } catch (const InvariantViolation& e) {
        EXPECT_NE(std::string(e.witness()).find("t="), std::string::npos);
    }
}

TEST(Invert, LinearTermMatchesClosedForm) {
    auto g = grid1d(29, 60);
    auto chi = chi_for(g);
    auto b = build_bundle(family("linear_potential"), chi, 1.0, 9);
    const Field& v10 = b.v1(b.zero_index());
    const auto w = make_window(*g, chi.delta1, 1.0);
    for (int level : {w.first_level, 40, w.last_level}) {
        for (std::size_t node : {3u, 14u, 25u}) {
            const double base = v10(level, node);
            for (double frac : {-0.9, -0.33, 0.0, 0.1, 0.77}) {
                const double s = frac * base;
                const auto r = invert_lambda(b, level, node, s);
                EXPECT_NEAR(r.lambda, frac, 1e-8);
                EXPECT_LE(r.bracket.first, r.lambda);
                EXPECT_GE(r.bracket.second, r.lambda);
            }
        }
    }
}

TEST(Invert, GridValuesAndZero) {
    auto g = grid1d(29, 60);
    auto chi = chi_for(g);
    auto b = build_bundle(family("cubic_absorbing"), chi, 1.0, 11);
    const int level = 40;
    const std::size_t node = 10;
    EXPECT_EQ(invert_lambda(b, level, node, 0.0).lambda, 0.0);
    for (std::size_t k = 0; k < b.size(); ++k) {
        EXPECT_EQ(invert_lambda(b, level, node, b.v(k)(level, node)).lambda, b.lambda_grid()[k]);
    }
    const double top = b.v(b.size() - 1)(level, node);
    EXPECT_THROW(invert_lambda(b, level, node, 1.01 * top + 1e-3), OutOfRange);
    EXPECT_THROW(invert_lambda(b, level, node, -1.01 * top - 1e-3), OutOfRange);
    EXPECT_THROW(invert_lambda(b, 61, node, 0.0), InvalidArgument);

    // (t, x) overload at a node, and off-grid rejection
    const double t = g->time(level), x = g->coord(node)[0];
    EXPECT_EQ(invert_lambda(b, t, {x, 0.0}, 0.0).lambda, 0.0);
    EXPECT_THROW(invert_lambda(b, t, {x + 0.3 * g->spacing(0), 0.0}, 0.0), InvalidArgument);
    EXPECT_THROW(invert_lambda(b, t + 0.3 * g->dt(), {x, 0.0}, 0.0), InvalidArgument);
    EXPECT_EQ(node_at(*g, {x, 0.0}), node);
    EXPECT_THROW(node_at(*g, {1.5, 0.0}), InvalidArgument);
}

TEST(Invert, GuaranteedRangeIsReachable) {
    auto g = grid1d(49, 100);
    auto chi = chi_for(g);
    const double r = 1.0;
    auto b = build_bundle(family("cubic_absorbing"), chi, r, 21);
    auto c = compute_constants(kZero, family("cubic_absorbing")->metadata().kappa0, chi);
    const double s = 0.95 * c.a2 * r;
    for (int level = c.window.first_level; level <= c.window.last_level; ++level) {
        for (std::size_t id : g->interior_nodes()) {
            for (double sign : {1.0, -1.0}) {
                const auto res = invert_lambda(b, level, id, sign * s);
                ASSERT_LE(std::abs(res.lambda), r);
                ASSERT_LE(res.residual, 1e-10);
            }
        }
    }
}

TEST(Constants, LowerBoundChain) {
    // dF/du <= 0 <= 1 for the cubic, so the first linearization at 0 sits
    // above the solution with potential 1.
    auto g = grid1d(49, 100);
    auto chi = chi_for(g);
    auto b = build_bundle(family("cubic_absorbing"), chi, 1.0, 5);
    auto c = compute_constants(kOne, 0.0, chi);
    const Field& v10 = b.v1(b.zero_index());
    for (int n = c.window.first_level; n <= c.window.last_level; ++n) {
        for (std::size_t id : g->interior_nodes()) ASSERT_GE(v10(n, id), c.w(n, id) - 1e-8);
    }
    EXPECT_LE(c.a1, c.a2);
}
