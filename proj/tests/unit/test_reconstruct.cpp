#include <gtest/gtest.h>

#include <cmath>

#include "pinv/error.hpp"
#include "pinv/reconstruct.hpp"
#include "support.hpp"

using namespace pinv;
using testing_support::chi_for;
using testing_support::family;
using testing_support::grid1d;
using testing_support::grid2d;

namespace {

double guaranteed_a2(const BoundaryProfile& chi, double kappa0) {
    return compute_constants([](double, const Coord&) { return 0.0; }, kappa0, chi).a2;
}

struct Built {
    BoundaryProfile chi;
    LinearizationBundle bundle;
    ReconstructedNonlinearity rec;
};

Built build(const GridPtr& g, const std::shared_ptr<const SemilinearTerm>& F, int n_lambda, double r = 1.0) {
    auto chi = chi_for(g);
    auto b = build_bundle(F, chi, r, n_lambda);
    ReconstructOptions ro;
    ro.a2r = guaranteed_a2(chi, F->metadata().kappa0) * r;
    auto rec = reconstruct(potentials_from(b), chi, ro);
    return {std::move(chi), std::move(b), std::move(rec)};
}

double cubic_error(int nx, int nt, int n_lambda) {
    auto g = grid1d(nx, nt);
    auto F = family("cubic_absorbing");
    auto chi = chi_for(g);
    ReconstructOptions ro;
    ro.a2r = guaranteed_a2(chi, 0.0);
    auto rec = reconstruct(potentials_on_demand(F, chi, symmetric_lambda_grid(1.0, n_lambda), {}), chi, ro);
    return compare_to_truth(rec, *F, 21, false).sup_error;
}

}  // namespace

TEST(Reconstruct, ZeroTermGivesZero) {
    auto g = grid1d(19, 40);
    auto r = build(g, family("zero"), 7);
    auto err = compare_to_truth(r.rec, *family("zero"), 11);
    EXPECT_EQ(err.sup_error, 0.0);
    EXPECT_GT(err.samples, 0u);
}

TEST(Reconstruct, LinearTermIsExactAtNodes) {
    auto g = grid2d(9, 40);
    auto F = family("linear_potential");
    auto r = build(g, F, 7);
    auto q = linear_potential_coefficient({});
    const auto& box = r.rec.valid_box();
    for (std::size_t i = 0; i < r.rec.levels().size(); i += 5) {
        const double t = g->time(r.rec.levels()[i]);
        for (std::size_t id : {0u, 12u, 40u, 80u}) {
            const Coord x = g->coord(id);
            for (double s : {-box.s_max, -0.3 * box.s_max, 0.0, 0.6 * box.s_max, box.s_max}) {
                EXPECT_NEAR(r.rec(t, x, s), q(t, x) * s, 1e-10);
            }
        }
    }
}

TEST(Reconstruct, TablesAreOrderedAndMatchTheBundle) {
    auto g = grid1d(29, 60);
    auto r = build(g, family("cubic_absorbing"), 41);
    const std::size_t k0 = r.rec.table_size() / 2;
    double scale = 0.0, gap = 0.0;
    for (std::size_t i = 0; i < r.rec.levels().size(); ++i) {
        const int level = r.rec.levels()[i];
        for (std::size_t id = 0; id < g->node_count(); ++id) {
            const auto s = r.rec.s_table(i, id), F = r.rec.F_table(i, id), dF = r.rec.dF_table(i, id);
            EXPECT_EQ(s[k0], 0.0);
            EXPECT_EQ(F[k0], 0.0);
            for (std::size_t k = 0; k < s.size(); ++k) {
                if (k > 0) ASSERT_GT(s[k], s[k - 1]);
                EXPECT_EQ(dF[k], r.bundle.V(k)(level, id));
                scale = std::max(scale, std::abs(r.bundle.v(k)(level, id)));
                gap = std::max(gap, std::abs(s[k] - r.bundle.v(k)(level, id)));
            }
        }
    }
    EXPECT_LE(gap, 1e-3 * scale);
}

TEST(Reconstruct, CubicIsOddAndConverges) {
    auto g = grid1d(29, 60);
    auto r = build(g, family("cubic_absorbing"), 21);
    const auto& box = r.rec.valid_box();
    for (double t : {box.t_lo, 0.5 * (box.t_lo + box.t_hi), box.t_hi}) {
        for (double x : {0.1, 0.37, 0.5, 0.9}) {
            for (double s : {0.1 * box.s_max, 0.5 * box.s_max, box.s_max}) {
                EXPECT_NEAR(r.rec(t, {x, 0}, s), -r.rec(t, {x, 0}, -s), 1e-12);
            }
        }
    }
    const double e1 = cubic_error(19, 40, 11), e2 = cubic_error(39, 80, 21);
    EXPECT_LT(e1, 5e-3);
    EXPECT_GE(std::log2(e1 / e2), 1.5) << e1 << " " << e2;
}

TEST(Reconstruct, SeesOnlyTheReachableSet) {
    auto g = grid1d(19, 40);
    auto F = family("cubic_absorbing");
    auto r = build(g, F, 11);
    const auto lambdas = symmetric_lambda_grid(1.0, 11);
    const double R = attained_sup(*F, r.chi, lambdas, {});
    auto alt = std::make_shared<const SemilinearTerm>(F->plus(u_bump(3.0 * R, 0.9 * R, 1.0), 1.0));
    auto r_alt = build(g, alt, 11);
    auto a = compare_to_truth(r.rec, *F), b = compare_to_truth(r_alt.rec, *alt);
    EXPECT_EQ(a.sup_error, b.sup_error);
    EXPECT_EQ(a.l2_error, b.l2_error);
}

TEST(Reconstruct, BoxAndOptionChecks) {
    auto g = grid1d(19, 40);
    auto chi = chi_for(g);
    auto b = build_bundle(family("cubic_absorbing"), chi, 1.0, 7);
    ReconstructOptions ro;
    EXPECT_THROW(reconstruct(potentials_from(b), chi, ro), InvalidArgument);
    ro.a2r = 0.01;
    ro.margin = 1.0;
    EXPECT_THROW(reconstruct(potentials_from(b), chi, ro), InvalidArgument);
    ro.margin = 0.05;
    ro.level_stride = 0;
    EXPECT_THROW(reconstruct(potentials_from(b), chi, ro), InvalidArgument);

    ro.level_stride = 4;
    ro.a2r = 1e-9;
    auto tiny = reconstruct(potentials_from(b), chi, ro);
    EXPECT_EQ(tiny.levels().back(), 40);
    EXPECT_THROW(compare_to_truth(tiny, b.F()), InvalidArgument);

    ro.a2r = guaranteed_a2(chi, 0.0);
    auto rec = reconstruct(potentials_from(b), chi, ro);
    const auto& box = rec.valid_box();
    EXPECT_NEAR(box.s_max, 0.95 * ro.a2r, 1e-15);
    EXPECT_GT(box.t_lo, chi.delta1);
    EXPECT_THROW(rec(box.t_lo, {0.5, 0}, 1.01 * box.s_max), OutOfRange);
    EXPECT_THROW(rec(0.5 * box.t_lo, {0.5, 0}, 0.0), OutOfRange);
    EXPECT_THROW(rec(box.t_hi, {1.2, 0}, 0.0), OutOfRange);
    EXPECT_NO_THROW(rec(box.t_hi, {1.0, 0}, -box.s_max));
}

TEST(Uniqueness, OnlyBumpsInsideTheRangeShowUp) {
    auto g = grid1d(19, 40);
    auto chi = chi_for(g);
    const SemilinearTerm F = builtin_family("cubic_absorbing");
    const auto lambdas = symmetric_lambda_grid(1.0, 5);
    const auto probes = random_probes(chi, 3, 7, 1.0);
    const double R = attained_sup(F, chi, lambdas, probes);
    EXPECT_GT(R, 0.0);

    auto same = uniqueness_probe(F, F, chi, lambdas, probes);
    EXPECT_EQ(same.max_trace_diff, 0.0);
    EXPECT_EQ(same.per_lambda.size(), lambdas.size());
    EXPECT_DOUBLE_EQ(same.attained_sup, R);

    auto out = uniqueness_probe(F, F.plus(u_bump(3.0 * R, 0.9 * R, 1.0), 1.0), chi, lambdas, probes);
    EXPECT_LE(out.max_trace_diff, 1e-9);
    auto in = uniqueness_probe(F, F.plus(u_bump(0.5 * R, 0.4 * R, 1.0), 1.0), chi, lambdas, probes);
    EXPECT_GE(in.max_trace_diff, 1e-8);
}
