#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pinv/error.hpp"
#include "pinv/linearize.hpp"
#include "support.hpp"

using namespace pinv;
using testing_support::chi_for;
using testing_support::family;
using testing_support::grid1d;
using testing_support::grid2d;

namespace {

const std::vector<double> kSteps{0.1, 0.05, 0.025, 0.0125};

BoundarySeries probe(const GridPtr& g) {
    PerturbationSpec spec;
    spec.shape = PerturbationShape::random_smooth;
    spec.seed = 4;
    return make_perturbation(g, spec, 0.025, 0.05, g->final_time()).values;
}

}  // namespace

TEST(LambdaGrid, SymmetricWithZero) {
    auto l = symmetric_lambda_grid(1.0, 41);
    ASSERT_EQ(l.size(), 41u);
    EXPECT_EQ(l[20], 0.0);
    for (std::size_t k = 0; k < l.size(); ++k) EXPECT_EQ(l[k], -l[l.size() - 1 - k]);
    EXPECT_EQ(l.front(), -1.0);
    EXPECT_THROW(symmetric_lambda_grid(1.0, 4), InvalidArgument);
    EXPECT_THROW(symmetric_lambda_grid(1.0, 3), InvalidArgument);
}

TEST(Bundle, RejectsBadLambdaGrids) {
    auto g = grid1d(9, 20);
    auto chi = chi_for(g);
    EXPECT_THROW(LinearizationBundle(family("zero"), chi, 1.0, {-1, -0.5, 0, 0.5, 0.9}, {}), InvalidArgument);
    EXPECT_THROW(LinearizationBundle(family("zero"), chi, 1.0, {-1, -0.5, 0.5, 0.7, 1}, {}), InvalidArgument);
}

TEST(Bundle, ZeroNonlinearityIsLinear) {
    auto g = grid1d(29, 60);
    auto chi = chi_for(g);
    auto b = build_bundle(family("zero"), chi, 1.0, 9);
    const Field& base = b.v1(b.zero_index());
    for (std::size_t k = 0; k < b.size(); ++k) {
        EXPECT_EQ(b.V(k).sup_norm(), 0.0);
        EXPECT_EQ(b.v2(k).sup_norm(), 0.0);
        const double lambda = b.lambda_grid()[k];
        double err = 0.0;
        for (std::size_t j = 0; j < base.values().size(); ++j) {
            err = std::max(err, std::abs(b.v(k).values()[j] - lambda * base.values()[j]));
        }
        EXPECT_LE(err, 1e-13);
    }
    EXPECT_LE(integral_identity_check(b), 1e-10);
}

TEST(Bundle, LinearPotentialIsLambdaIndependent) {
    auto g = grid2d(9, 40);
    auto chi = chi_for(g);
    auto b = build_bundle(family("linear_potential"), chi, 1.0, 5);
    for (std::size_t k = 0; k < b.size(); ++k) {
        EXPECT_EQ(sup_distance(b.V(k), b.V(0)), 0.0);
        EXPECT_EQ(sup_distance(b.v1(k), b.v1(0)), 0.0);
        EXPECT_EQ(b.v2(k).sup_norm(), 0.0);
    }
}

TEST(Bundle, CubicSignLadderAndConvexity) {
    auto g = grid1d(49, 100);
    auto chi = chi_for(g);
    LinearizeOptions opt;
    opt.threads = 2;
    auto b = build_bundle(family("cubic_absorbing"), chi, 1.0, 21, opt);
    const std::size_t k0 = b.zero_index();
    EXPECT_EQ(b.v(k0).sup_norm(), 0.0);
    const Field& v10 = b.v1(k0);
    for (std::size_t k = 0; k < b.size(); ++k) {
        const double lambda = b.lambda_grid()[k];
        EXPECT_GE(b.v1(k).min(), -1e-10);
        if (lambda >= 0) {
            EXPECT_GE(b.v(k).min(), -1e-10);
            EXPECT_GE(b.v2(k).min(), -1e-10);
            for (std::size_t j = 0; j < v10.values().size(); ++j) {
                ASSERT_GE(b.v(k).values()[j], lambda * v10.values()[j] - 1e-8);
            }
        } else {
            double vmax = -1e9, v2max = -1e9;
            for (double v : b.v(k).values()) vmax = std::max(vmax, v);
            for (double v : b.v2(k).values()) v2max = std::max(v2max, v);
            EXPECT_LE(vmax, 1e-10);
            EXPECT_LE(v2max, 1e-10);
        }
        // monotone in lambda at every node
        if (k > 0) {
            for (std::size_t j = 0; j < v10.values().size(); ++j) {
                ASSERT_GE(b.v(k).values()[j], b.v(k - 1).values()[j] - 1e-12);
            }
        }
    }
    // the parallel build is deterministic
    auto b1 = build_bundle(family("cubic_absorbing"), chi, 1.0, 21);
    for (std::size_t k = 0; k < b.size(); ++k) EXPECT_EQ(sup_distance(b.v2(k), b1.v2(k)), 0.0);
}

TEST(Bundle, SolverErrorsCarryLambda) {
    auto g = grid1d(19, 40);
    auto chi = chi_for(g);
    auto F = std::make_shared<const SemilinearTerm>(
        "explosive", [](double, const Coord&, double u) { return -1e4 * u * u * u; },
        [](double, const Coord&, double u) { return -3e4 * u * u; },
        [](double, const Coord&, double u) { return -6e4 * u; });
    try {
        build_bundle(F, chi, 50.0, 5);
        FAIL() << "expected a solver failure";
    } catch (const SolverError& e) {
        EXPECT_NE(std::string(e.what()).find("lambda"), std::string::npos) << e.what();
    }
}

TEST(Frechet, SZeroNonlinearityIsExact) {
    auto g = grid1d(29, 60);
    auto chi = chi_for(g);
    auto rep = check_frechet_s(*family("zero"), chi, 0.7, probe(g), kSteps);
    for (double e : rep.errors) EXPECT_LE(e, 1e-10);
    BoundarySeries zero(g, 61);
    auto rep0 = check_frechet_s(*family("cubic_absorbing"), chi, 0.5, zero, kSteps);
    for (double e : rep0.errors) EXPECT_EQ(e, 0.0);
}

TEST(Frechet, SCubicIsFirstOrder) {
    auto g = grid1d(49, 100);
    auto chi = chi_for(g);
    auto rep = check_frechet_s(*family("cubic_absorbing"), chi, 0.5, probe(g), kSteps);
    EXPECT_EQ(rep.steps.size(), 4u);
    EXPECT_GE(rep.slope, 0.9);
    EXPECT_THROW(check_frechet_s(*family("zero"), chi, 0.5, probe(g), std::vector<double>{0.1, 0.05}),
                 InvalidArgument);
    EXPECT_THROW(check_frechet_s(*family("zero"), chi, 0.5, probe(g), std::vector<double>{0.1, 0.2, 0.05}),
                 InvalidArgument);
}

TEST(Frechet, LambdaChecks) {
    auto g = grid1d(49, 100);
    auto chi = chi_for(g);
    auto lin = build_bundle(family("linear_potential"), chi, 1.0, 5);
    for (double e : check_frechet_lambda(lin, 0.25, kSteps).errors) EXPECT_LE(e, 1e-10);

    auto cubic = build_bundle(family("cubic_absorbing"), chi, 1.0, 5);
    auto rep = check_frechet_lambda(cubic, 0.25, kSteps);
    EXPECT_GE(rep.slope, 0.9);
    EXPECT_THROW(check_frechet_lambda(cubic, 0.25, std::vector<double>{0.1, 0.05}), InvalidArgument);
    EXPECT_THROW(check_frechet_lambda(cubic, 0.95, kSteps), InvalidArgument);
}

TEST(IntegralIdentity, CubicConvergesAtSecondOrder) {
    auto g = grid1d(29, 60);
    auto chi = chi_for(g);
    const double e41 = integral_identity_check(build_bundle(family("cubic_absorbing"), chi, 1.0, 41));
    const double e81 = integral_identity_check(build_bundle(family("cubic_absorbing"), chi, 1.0, 81));
    EXPECT_LE(e41, 1e-3);
    EXPECT_GE(e41 / e81, 3.5);
}

TEST(Trapezoid, ZeroNodeIsZeroAndLinearIsExact) {
    auto g = grid1d(5, 4);
    std::vector<double> lambdas = symmetric_lambda_grid(1.0, 5);
    std::vector<Field> f;
    for (double l : lambdas) f.push_back(testing_support::constant_field(g, 5, 3.0 * l + 1.0));
    std::vector<const Field*> ptr;
    for (const auto& x : f) ptr.push_back(&x);
    auto q = trapezoid_from_zero(lambdas, 2, ptr);
    EXPECT_EQ(q[2].sup_norm(), 0.0);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const double l = lambdas[k];
        EXPECT_NEAR(q[k](3, 2), 1.5 * l * l + l, 1e-14);
    }
}

TEST(Loglog, SlopeOfPowerLaw) {
    std::vector<double> x{1, 2, 4, 8}, y{3, 12, 48, 192};
    EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-12);
}
