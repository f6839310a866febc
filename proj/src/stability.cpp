#include "pinv/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "pinv/linearize.hpp"

namespace pinv {

namespace {

std::vector<double> ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("spearman: need two equal-length samples (>= 2)");
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - mean) * (rb[i] - mean);
        saa += (ra[i] - mean) * (ra[i] - mean);
        sbb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

SemilinearTerm spatially_weighted(const SemilinearTerm& base, SpaceTimeFn weight, std::string name) {
    auto b = std::make_shared<SemilinearTerm>(base);
    auto w = std::make_shared<SpaceTimeFn>(std::move(weight));
    HypothesisMetadata meta;
    meta.satisfies_t1a = base.metadata().satisfies_t1a;
    return SemilinearTerm(
        std::move(name), [b, w](double t, const Coord& x, double u) { return (*w)(t, x) * b->value(t, x, u); },
        [b, w](double t, const Coord& x, double u) { return (*w)(t, x) * b->du(t, x, u); },
        [b, w](double t, const Coord& x, double u) { return (*w)(t, x) * b->d2u(t, x, u); }, meta);
}

StabilityRun run_stability(const SemilinearTerm& F1, const SemilinearTerm& P, std::vector<double> epsilons,
                           const BoundaryProfile& chi, const StabilityOptions& options) {
    if (epsilons.empty()) throw InvalidArgument("run_stability: empty epsilon list");
    if (options.lambdas.empty()) throw InvalidArgument("run_stability: no lambda values");
    if (!(options.s_max > 0.0)) throw InvalidArgument("run_stability: s_max must be positive");
    std::sort(epsilons.begin(), epsilons.end());
    const auto& grid = chi.values.grid();
    const double horizon = options.linearize.horizon > 0.0 ? options.linearize.horizon : grid.final_time();
    const Window window = make_window(grid, chi.delta1, horizon);

    StabilityRun run;
    for (double eps : epsilons) {
        if (!(eps >= 0.0)) throw InvalidArgument("run_stability: epsilon must be nonnegative");
        const SemilinearTerm F2 = F1.plus(P, eps);
        const double u_max = std::max(1.0, options.s_max);
        for (const auto& rep : {check_t1a(F2, grid), check_t1b(F2, grid, u_max)}) {
            for (const auto& e : rep.entries) {
                if (e.status != HypothesisStatus::fail) continue;
                const auto& w = *e.witness;
                throw InvariantViolation(
                    fmt::format("perturbed term (epsilon = {}) fails {}", eps, e.name),
                    fmt::format("t={} x=({}, {}) u={} value={}", w.t, w.x[0], w.x[1], w.u, e.worst_value));
            }
        }

        StabilityRecord rec;
        rec.epsilon = eps;
        for (int n = window.first_level; n <= window.last_level; ++n) {
            const double t = grid.time(n);
            for (std::size_t id = 0; id < grid.node_count(); ++id) {
                const auto& x = grid.coord(id);
                for (int j = 0; j < options.s_points; ++j) {
                    const double s = -options.s_max + 2.0 * options.s_max * j / (options.s_points - 1);
                    rec.sup_F_diff = std::max(rec.sup_F_diff, std::abs(F2.value(t, x, s) - F1.value(t, x, s)));
                }
            }
        }
        for (double lambda : options.lambdas) {
            const auto est =
                estimate_discrepancy(F1, F2, chi, lambda, options.probe_count, options.seed, options.linearize);
            rec.per_lambda.push_back(est.value);
            rec.dn_discrepancy = std::max(rec.dn_discrepancy, est.value);
        }
        run.records.push_back(std::move(rec));
    }

    std::vector<double> fd, dn, x, y;
    for (const auto& r : run.records) {
        if (r.epsilon <= 0.0) continue;
        fd.push_back(r.sup_F_diff);
        dn.push_back(r.dn_discrepancy);
        if (r.sup_F_diff > 0.0 && r.dn_discrepancy > 0.0) {
            x.push_back(std::log(std::log(3.0 + 1.0 / r.dn_discrepancy)));
            y.push_back(std::log(r.sup_F_diff));
        }
    }
    if (fd.size() >= 2) run.spearman_rho = spearman(fd, dn);
    if (x.size() >= 2) {
        const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
        const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
        run.fitted_exponent = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    run.trend_holds = run.spearman_rho >= 0.9;
    return run;
}

}  // namespace pinv
