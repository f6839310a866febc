#include "pinv/dnmap.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pinv/parallel.hpp"

namespace pinv {

DNTrace trace_of(const Field& u) {
    const auto& grid = u.grid();
    DNTrace out{BoundarySeries(u.grid_ptr(), u.levels())};
    for (int n = 0; n < u.levels(); ++n) {
        const auto d = grid.normal_derivative(u.level(n));
        std::copy(d.begin(), d.end(), out.values.level(n).begin());
    }
    return out;
}

double boundary_l2(const BoundarySeries& g) {
    const auto& grid = g.grid();
    double sum = 0.0;
    for (int n = 1; n < g.levels(); ++n) {
        for (std::size_t b = 0; b < g.width(); ++b) sum += grid.boundary_weight(b) * g(n, b) * g(n, b);
    }
    return std::sqrt(grid.dt() * sum);
}

double boundary_l2_distance(const BoundarySeries& a, const BoundarySeries& b) {
    const int levels = std::min(a.levels(), b.levels());
    return boundary_l2(axpy(a.truncated(levels), -1.0, b.truncated(levels)));
}

namespace {

double horizon_of(const LinearizeOptions& o, const SpaceTimeGrid& grid) {
    return o.horizon > 0.0 ? o.horizon : grid.final_time();
}

std::shared_ptr<const SemilinearTerm> borrow(const SemilinearTerm& F) {
    return {&F, [](const SemilinearTerm*) {}};
}

}  // namespace

DNTrace nonlinear_dn(const SemilinearTerm& F, const BoundaryProfile& chi, double lambda, const Perturbation& h,
                     const LinearizeOptions& options) {
    if (h.norm_surrogate > chi.epsilon * (1.0 + 1e-12)) {
        throw InvalidArgument(fmt::format("perturbation norm {} exceeds epsilon = {}", h.norm_surrogate, chi.epsilon));
    }
    const GridPtr& grid = chi.values.grid_ptr();
    const double horizon = horizon_of(options, *grid);
    const int levels = horizon_levels(*grid, horizon);
    BoundarySeries data = chi.values.truncated(levels);
    for (double& v : data.values()) v *= lambda;
    if (h.values.levels() > 0) data = axpy(data, 1.0, h.values.truncated(levels));
    const auto sol = solve_semilinear({grid, borrow(F), std::move(data), horizon}, options.scheme, options.solver);
    return trace_of(sol.u);
}

DNTrace linearized_dn(const Field& V, const BoundarySeries& h, const LinearizeOptions& options) {
    const GridPtr& grid = V.grid_ptr();
    const double horizon = horizon_of(options, *grid);
    const int levels = horizon_levels(*grid, horizon);
    return trace_of(solve_linear({grid, V, Field(), h.truncated(levels), horizon}, options.scheme));
}

Field background_potential(const SemilinearTerm& F, const BoundaryProfile& chi, double lambda,
                           const LinearizeOptions& options) {
    const GridPtr& grid = chi.values.grid_ptr();
    const double horizon = horizon_of(options, *grid);
    const int levels = horizon_levels(*grid, horizon);
    BoundarySeries data = chi.values.truncated(levels);
    for (double& v : data.values()) v *= lambda;
    const Field v = solve_semilinear({grid, borrow(F), std::move(data), horizon}, options.scheme, options.solver).u;
    Field V(grid, levels);
    for (int n = 0; n < levels; ++n) {
        for (std::size_t id = 0; id < v.nodes(); ++id) V(n, id) = F.du(grid->time(n), grid->coord(id), v(n, id));
    }
    return V;
}

std::uint64_t probe_seed(std::uint64_t seed, std::uint64_t i) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (i + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<Perturbation> random_probes(const BoundaryProfile& chi, int probe_count, std::uint64_t seed,
                                        double horizon) {
    std::vector<Perturbation> out;
    out.reserve(static_cast<std::size_t>(probe_count));
    for (int i = 0; i < probe_count; ++i) {
        PerturbationSpec spec;
        spec.shape = PerturbationShape::random_smooth;
        spec.seed = probe_seed(seed, static_cast<std::uint64_t>(i));
        out.push_back(make_perturbation(chi.values.grid_ptr(), spec, 0.5 * chi.epsilon, chi.epsilon, horizon));
    }
    return out;
}

DiscrepancyEstimate estimate_discrepancy(const SemilinearTerm& F1, const SemilinearTerm& F2,
                                         const BoundaryProfile& chi, double lambda, int probe_count,
                                         std::uint64_t seed, const LinearizeOptions& options) {
    if (probe_count < 8) throw InvalidArgument(fmt::format("probe_count = {} must be >= 8", probe_count));
    if (!(chi.epsilon > 0.0)) throw InvalidArgument("estimate_discrepancy needs epsilon > 0 to draw probes");
    const double horizon = horizon_of(options, chi.values.grid());
    const Field V1 = background_potential(F1, chi, lambda, options);
    const Field V2 = background_potential(F2, chi, lambda, options);
    const auto probes = random_probes(chi, probe_count, seed, horizon);

    DiscrepancyEstimate est;
    est.probes_used = probe_count;
    est.norm_kind = "L2(lateral boundary x (0,T1)) ratio, max over seeded random_smooth probes";
    est.per_probe.resize(probes.size());
    parallel_for(probes.size(), options.threads, [&](std::size_t i) {
        const auto a = linearized_dn(V1, probes[i].values, options);
        const auto b = linearized_dn(V2, probes[i].values, options);
        const double denom = boundary_l2(probes[i].values.truncated(a.values.levels()));
        est.per_probe[i] = boundary_l2_distance(a.values, b.values) / denom;
    });
    double running = 0.0;
    for (double v : est.per_probe) {
        running = std::max(running, v);
        est.running_max.push_back(running);
    }
    est.value = running;
    return est;
}

}  // namespace pinv
