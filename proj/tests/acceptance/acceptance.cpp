// Acceptance run: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number ("acceptance 3 7").
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "pinv/cli.hpp"
#include "pinv/io.hpp"
#include "pinv/linearize.hpp"
#include "pinv/reconstruct.hpp"
#include "pinv/stability.hpp"

using namespace pinv;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
        if (!ok) {
            pass = false;
            detail += " [x]";
        }
    }
};

GridPtr grid1d(int nx, int nt) { return SpaceTimeGrid::build({1, {1.0}, {nx}, nt, 1.0}); }
GridPtr grid2d(int n, int nt) { return SpaceTimeGrid::build({2, {1.0, 1.0}, {n, n}, nt, 1.0}); }

BoundaryProfile chi_for(const GridPtr& g) { return build_chi(g, 0.2, 0.1, 1.0, 0.05); }

std::shared_ptr<const SemilinearTerm> family(const std::string& name) {
    return std::make_shared<const SemilinearTerm>(builtin_family(name));
}

const SpaceTimeFn kZero = [](double, const Coord&) { return 0.0; };

double order(double coarse, double fine) { return std::log2(coarse / fine); }

// ---- 1: manufactured solution u* = t sin(pi x)

double manufactured_error(int nx, int nt, Scheme scheme, bool semi_discrete) {
    auto g = grid1d(nx, nt);
    auto zero = [](double, const Coord&, double) { return 0.0; };
    auto F = std::make_shared<const SemilinearTerm>(
        "manufactured", [](double t, const Coord& x, double) { return -(1.0 + pi * pi * t) * std::sin(pi * x[0]); },
        zero, zero);
    auto sol = solve_semilinear({g, F, BoundarySeries(g, nt + 1), 1.0}, scheme);
    // Temporal orders are measured against the exact solution of the
    // space-discrete system, which removes the O(h^2) floor.
    const double h = g->spacing(0);
    const double mu = 4.0 / (h * h) * std::pow(std::sin(pi * h / 2), 2);
    const double alpha = pi * pi / mu, beta = (1.0 - alpha) / mu;
    double err = 0.0;
    for (int n = 0; n <= nt; ++n) {
        const double t = g->time(n);
        const double a = semi_discrete ? alpha * t + beta - beta * std::exp(-mu * t) : t;
        for (std::size_t id = 0; id < g->node_count(); ++id) {
            err = std::max(err, std::abs(sol.u(n, id) - a * std::sin(pi * g->coord(id)[0])));
        }
    }
    return err;
}

Outcome c1() {
    Outcome o;
    auto orders = [](std::vector<double> e) { return std::min(order(e[0], e[1]), order(e[1], e[2])); };
    std::vector<double> ie, cn, sp;
    for (int nt : {40, 80, 160}) ie.push_back(manufactured_error(49, nt, Scheme::implicit_euler, true));
    for (int nt : {20, 40, 80}) cn.push_back(manufactured_error(49, nt, Scheme::crank_nicolson, true));
    for (int nx : {9, 19, 39}) sp.push_back(manufactured_error(nx, 200, Scheme::crank_nicolson, false));
    o.require(orders(ie) >= 0.9, fmt::format("IE temporal order {:.3f}", orders(ie)));
    o.require(orders(cn) >= 1.8, fmt::format("CN temporal order {:.3f}", orders(cn)));
    o.require(orders(sp) >= 1.8, fmt::format("spatial order {:.3f}", orders(sp)));
    return o;
}

// ---- 2: discrete maximum principle

Eigen::MatrixXd dense_step(const SpaceTimeGrid& g, const std::vector<double>& V) {
    const auto interior = g.interior_nodes();
    const auto m = static_cast<Eigen::Index>(interior.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        std::vector<double> e(g.node_count(), 0.0);
        e[interior[k]] = 1.0;
        auto col = g.laplacian(e);
        for (Eigen::Index r = 0; r < m; ++r) A(r, k) = -col[r];
        A(k, k) += 1.0 / g.dt() + V[k];
    }
    return A;
}

Outcome c2() {
    Outcome o;
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        auto g = trial % 2 ? grid2d(39, 200) : grid1d(199, 400);
        auto chi = chi_for(g);
        const double bound = std::uniform_real_distribution<double>(1.0, 80.0)(rng);
        std::uniform_real_distribution<double> d(-bound, bound), s(0.0, 1.0);
        Field V(g, g->nt() + 1), S;
        for (double& v : V.values()) v = d(rng);
        if (trial % 4 >= 2) {
            S = Field(g, g->nt() + 1);
            for (double& v : S.values()) v = s(rng);
        }
        BoundarySeries data = chi.values;
        const double scale = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
        for (double& v : data.values()) v *= scale;
        const Field u = positivity_shifted_solve({g, std::move(V), std::move(S), std::move(data), 1.0});
        worst = std::min(worst, u.min());
    }
    o.require(worst >= -1e-12, fmt::format("20 scenarios, min u {:.3e}", worst));

    double inv_min = std::numeric_limits<double>::infinity();
    for (auto g : {grid1d(5, 2), grid2d(5, 2)}) {
        const std::size_t m = g->interior_nodes().size();
        for (int trial = 0; trial < 20; ++trial) {
            std::uniform_real_distribution<double> d(-6.0, 6.0);
            std::vector<double> V(m);
            double sup = 0.0, neg = 0.0;
            for (double& v : V) {
                v = d(rng);
                sup = std::max(sup, std::abs(v));
                neg = std::max(neg, -v);
            }
            // shift applied by the solver whenever dt * max(-V) >= 1
            const double shift = g->dt() * neg < 1.0 ? 0.0 : sup;
            for (double& v : V) v += shift;
            inv_min = std::min(inv_min, dense_step(*g, V).inverse().minCoeff());
        }
    }
    o.require(inv_min >= 0.0, fmt::format("nx=5 step inverse min entry {:.3e}", inv_min));
    return o;
}

// ---- 3: Frechet checks

const std::vector<double> kSteps{0.1, 0.05, 0.025, 0.0125};

BoundarySeries probe(const GridPtr& g) {
    PerturbationSpec spec;
    spec.shape = PerturbationShape::random_smooth;
    spec.seed = 4;
    return make_perturbation(g, spec, 0.025, 0.05, 1.0).values;
}

Outcome c3() {
    Outcome o;
    auto g = grid1d(199, 400);
    auto chi = chi_for(g);
    const auto h = probe(g);
    for (const char* name : {"cubic_absorbing", "power_law_fnon"}) {
        auto F = family(name);
        const auto s = check_frechet_s(*F, chi, 0.5, h, kSteps);
        const auto l = check_frechet_lambda(build_bundle(F, chi, 1.0, 5), 0.25, kSteps);
        o.require(s.slope >= 0.9 && s.steps.size() == 4, fmt::format("{} s-slope {:.3f}", name, s.slope));
        o.require(l.slope >= 0.9 && l.steps.size() == 4, fmt::format("{} lambda-slope {:.3f}", name, l.slope));
    }
    auto lin = family("linear_potential");
    double e = 0.0;
    for (double v : check_frechet_s(*lin, chi, 0.5, h, kSteps).errors) e = std::max(e, v);
    for (double v : check_frechet_lambda(build_bundle(lin, chi, 1.0, 5), 0.25, kSteps).errors) e = std::max(e, v);
    o.require(e <= 1e-10, fmt::format("linear max error {:.2e}", e));
    return o;
}

// ---- 4: integral identity

Outcome c4() {
    Outcome o;
    auto g = grid1d(199, 400);
    auto chi = chi_for(g);
    const double e41 = integral_identity_check(build_bundle(family("cubic_absorbing"), chi, 1.0, 41));
    const double e81 = integral_identity_check(build_bundle(family("cubic_absorbing"), chi, 1.0, 81));
    o.require(e41 <= 1e-3, fmt::format("n=41 rel error {:.3e}", e41));
    o.require(e41 / e81 >= 3.5, fmt::format("n=81 ratio {:.2f}", e41 / e81));
    return o;
}

// ---- 5: reachable constants

Outcome c5() {
    Outcome o;
    const std::vector<double> kappas{0.0, 1.0, 10.0};
    std::vector<double> coarse, fine;  // a1, a2(kappa)...
    for (auto [g, out] : {std::pair{grid1d(199, 400), &coarse}, std::pair{grid1d(399, 800), &fine}}) {
        auto chi = chi_for(g);
        for (double k : kappas) {
            const auto c = compute_constants(kZero, k, chi);
            if (out->empty()) out->push_back(c.a1);
            out->push_back(c.a2);
        }
    }
    const double lowest = *std::min_element(coarse.begin(), coarse.end());
    o.require(lowest > 1e-6, fmt::format("a1 {:.5f} a2(0,1,10) {:.5f} {:.5f} {:.5f}", coarse[0], coarse[1], coarse[2],
                                         coarse[3]));
    double rel = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) rel = std::max(rel, std::abs(coarse[i] - fine[i]) / fine[i]);
    o.require(rel <= 0.05, fmt::format("nx 199 vs 399 max rel diff {:.2e}", rel));
    o.require(coarse[3] <= coarse[2] && coarse[2] <= coarse[1], "a2(10) <= a2(1) <= a2(0)");
    return o;
}

// ---- 6: range guarantee and lower bound

Outcome c6() {
    Outcome o;
    auto g = grid1d(199, 400);
    auto chi = chi_for(g);
    const double r = 1.0;
    auto b = build_bundle(family("cubic_absorbing"), chi, r, 41);
    const auto c = compute_constants(kZero, 0.0, chi);
    const Field& top = b.v(b.size() - 1);
    const Field& bottom = b.v(0);
    const Field& v10 = b.v1(b.zero_index());
    double range = std::numeric_limits<double>::infinity(), bound = range;
    for (int n = c.window.first_level; n <= c.window.last_level; ++n) {
        for (std::size_t id : g->interior_nodes()) {
            range = std::min({range, top(n, id) - c.a2 * r, -bottom(n, id) - c.a2 * r});
            for (std::size_t k = b.zero_index(); k < b.size(); ++k) {
                bound = std::min(bound, b.v(k)(n, id) - b.lambda_grid()[k] * v10(n, id));
            }
        }
    }
    o.require(range >= -1e-8, fmt::format("min v_{{+-r}} -+ a2 r = {:.3e} (a2 {:.5f})", range, c.a2));
    o.require(bound >= -1e-8, fmt::format("min v_lambda - lambda v1_0 = {:.3e}", bound));
    return o;
}

// ---- 7: end-to-end reconstruction

Outcome c7() {
    Outcome o;
    for (const char* name : {"cubic_absorbing", "linear_potential", "power_law_fnon"}) {
        auto F = family(name);
        std::vector<double> errs;
        double node_err = 0.0;
        for (int m : {1, 2, 4}) {
            auto g = grid1d(50 * m - 1, 100 * m);
            auto chi = chi_for(g);
            const SpaceTimeFn q = std::string(name) == "linear_potential" ? linear_potential_coefficient({}) : kZero;
            ReconstructOptions ro;
            ro.a2r = compute_constants(q, F->metadata().kappa0, chi).a2;
            auto rec = reconstruct(potentials_on_demand(F, chi, symmetric_lambda_grid(1.0, 10 * m + 1), {}), chi, ro);
            errs.push_back(compare_to_truth(rec, *F).sup_error);
            if (std::string(name) == "linear_potential") {
                node_err = std::max(node_err, compare_to_truth(rec, *F, 41, false).sup_error);
            }
        }
        const double ord = std::min(order(errs[0], errs[1]), order(errs[1], errs[2]));
        o.require(errs[0] <= 5e-3 && ord >= 1.5,
                  fmt::format("{} sup {:.2e} {:.2e} {:.2e} order {:.2f}", name, errs[0], errs[1], errs[2], ord));
        if (std::string(name) == "linear_potential") {
            o.require(node_err <= 1e-10, fmt::format("q*s at grid nodes {:.1e}", node_err));
        }
    }
    return o;
}

// ---- 8: uniqueness probe

Outcome c8() {
    Outcome o;
    auto g = grid1d(199, 400);
    auto chi = chi_for(g);
    const SemilinearTerm F = builtin_family("cubic_absorbing");
    const auto lambdas = symmetric_lambda_grid(1.0, 41);
    const auto probes = random_probes(chi, 8, 1, 1.0);
    const double tol = SolverOptions{}.newton_tol;
    const double R = attained_sup(F, chi, lambdas, probes);
    const auto out = uniqueness_probe(F, F.plus(u_bump(3.0 * R, 0.9 * R, 1.0), 1.0), chi, lambdas, probes);
    const auto in = uniqueness_probe(F, F.plus(u_bump(0.5 * R, 0.4 * R, 1.0), 1.0), chi, lambdas, probes);
    o.require(out.max_trace_diff <= 10 * tol, fmt::format("outside bump {:.2e}", out.max_trace_diff));
    o.require(in.max_trace_diff >= 100 * tol, fmt::format("inside bump {:.2e} (range {:.4f})", in.max_trace_diff, R));
    return o;
}

// ---- 9: stability trend

Outcome c9() {
    Outcome o;
    auto g = grid1d(199, 400);
    auto chi = chi_for(g);
    const SemilinearTerm F = builtin_family("cubic_absorbing");
    const auto P = spatially_weighted(F,
                                      [](double, const Coord& x) {
                                          const double z = (x[0] - 0.5) / 0.3;
                                          return std::abs(z) >= 1.0 ? 0.0 : std::pow(1.0 - z * z, 3);
                                      },
                                      "cubic*bump");
    StabilityOptions so;
    so.lambdas = {-1.0, -0.5, 0.5, 1.0};
    so.s_max = 0.95 * compute_constants(kZero, 0.0, chi).a2;
    so.seed = 9;
    const auto run = run_stability(F, P, {0.0, 0.0125, 0.025, 0.05, 0.1}, chi, so);
    const auto& zero = run.records.front();
    o.require(run.spearman_rho >= 0.9, fmt::format("spearman {:.3f}", run.spearman_rho));
    o.require(zero.sup_F_diff <= 1e-12 && zero.dn_discrepancy <= 1e-12,
              fmt::format("eps=0 gives {:.1e} / {:.1e}", zero.sup_F_diff, zero.dn_discrepancy));
    std::string trail;
    for (const auto& r : run.records) trail += fmt::format(" {:.1e}/{:.1e}", r.sup_F_diff, r.dn_discrepancy);
    o.require(true, "F/DN:" + trail);
    return o;
}

// ---- 10: determinism

Outcome c10() {
    Outcome o;
    const fs::path scen = fs::path(PINV_SOURCE_DIR) / "scenarios";
    const fs::path root = fs::temp_directory_path() / fmt::format("pinv_accept_{}", ::getpid());
    std::size_t compared = 0;
    std::vector<std::string> differ;
    for (const auto& s : list_scenarios(scen)) {
        std::set<std::string> files[2];
        for (int k = 0; k < 2; ++k) {
            const fs::path out = root / std::to_string(k) / s.name;
            fs::remove_all(out);
            std::ostringstream log, err;
            RunOverrides ro;
            ro.output = out;
            run_scenario(s.path, ro, log, err);
            if (!fs::exists(out)) continue;
            for (const auto& e : fs::recursive_directory_iterator(out)) {
                if (e.path().extension() == ".csv") files[k].insert(fs::relative(e.path(), out).string());
            }
        }
        if (files[0] != files[1]) differ.push_back(s.name + " (file set)");
        for (const auto& f : files[0]) {
            ++compared;
            if (sha256_file(root / "0" / s.name / f) != sha256_file(root / "1" / s.name / f)) {
                differ.push_back(s.name + "/" + f);
            }
        }
    }
    fs::remove_all(root);
    o.require(differ.empty() && compared > 0,
              fmt::format("{} CSVs compared, {} differ{}", compared, differ.size(),
                          differ.empty() ? "" : " (first " + differ.front() + ")"));
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"manufactured convergence", c1}, {"maximum principle", c2}, {"Frechet derivatives", c3},
        {"integral identity", c4},        {"reachable constants", c5}, {"range guarantee", c6},
        {"end-to-end reconstruction", c7}, {"uniqueness probe", c8}, {"stability trend", c9},
        {"determinism", c10}};
    std::set<int> pick;
    for (int i = 1; i < argc; ++i) pick.insert(std::stoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!pick.empty() && !pick.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = fmt::format("exception: {}", e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s  %2d %-26s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
