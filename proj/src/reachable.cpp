#include "pinv/reachable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pinv/interp.hpp"

namespace pinv {

Window make_window(const SpaceTimeGrid& grid, double delta1, double horizon) {
    const int last = horizon_levels(grid, horizon) - 1;
    int first = grid.level_at_or_before(delta1) + 1;
    if (first > last) throw InvalidArgument(fmt::format("window (delta1 = {}, {}] has no time levels", delta1, horizon));
    return {first, last};
}

WindowMin window_min(const Field& f, const Window& w) {
    WindowMin m{std::numeric_limits<double>::infinity(), -1, 0};
    for (int n = w.first_level; n <= w.last_level; ++n) {
        const auto lvl = f.level(n);
        for (std::size_t id : f.grid().interior_nodes()) {
            if (lvl[id] < m.value) m = {lvl[id], n, id};
        }
    }
    return m;
}

ReachableConstants compute_constants(const SpaceTimeFn& q, double kappa0, const BoundaryProfile& chi,
                                     double horizon) {
    if (!(kappa0 >= 0.0) || !std::isfinite(kappa0)) {
        throw InvalidArgument(fmt::format("kappa0 = {} must be finite and nonnegative", kappa0));
    }
    const GridPtr& grid = chi.values.grid_ptr();
    if (horizon <= 0.0) horizon = grid->final_time();
    const int levels = horizon_levels(*grid, horizon);
    const BoundarySeries g = chi.values.truncated(levels);

    ReachableConstants out;
    out.window = make_window(*grid, chi.delta1, horizon);
    Field qf = sample_potential(grid, horizon, q);
    Field kf = sample_potential(grid, horizon, [kappa0](double, const Coord&) { return kappa0; });
    out.w = positivity_shifted_solve({grid, std::move(qf), Field(), g, horizon});
    out.y = positivity_shifted_solve({grid, std::move(kf), Field(), g, horizon});
    out.a1_at = window_min(out.w, out.window);
    out.a2_at = window_min(out.y, out.window);
    out.a1 = out.a1_at.value;
    out.a2 = out.a2_at.value;
    auto require_positive = [&](const char* name, const WindowMin& m) {
        if (!(m.value > 1e-12)) {
            const auto& x = grid->coord(m.node);
            throw InvariantViolation(fmt::format("{} = {:.3e} is not positive", name, m.value),
                                     fmt::format("t={} x=({}, {})", grid->time(m.level), x[0], x[1]));
        }
    };
    require_positive("a1", out.a1_at);
    require_positive("a2", out.a2_at);
    return out;
}

InversionResult invert_lambda(const LinearizationBundle& bundle, int level, std::size_t node, double s) {
    const auto& lam = bundle.lambda_grid();
    const std::size_t n = lam.size();
    if (level < 0 || level >= bundle.levels()) throw InvalidArgument("invert_lambda: level out of range");
    std::vector<double> vals(n);
    for (std::size_t k = 0; k < n; ++k) vals[k] = bundle.v(k)(level, node);
    for (std::size_t k = 1; k < n; ++k) {
        if (vals[k] < vals[k - 1]) {
            throw InvariantViolation("lambda -> v_lambda is not monotone",
                                     fmt::format("level={} node={} lambda={} v={} > v={}", level, node, lam[k - 1],
                                                 vals[k - 1], vals[k]));
        }
    }
    const double tol = 1e-8 * std::max(1.0, std::abs(s));
    if (s < vals.front() - tol || s > vals.back() + tol) {
        throw OutOfRange(fmt::format("s = {} outside the sampled range [{}, {}] at level {} node {}", s,
                                     vals.front(), vals.back(), level, node));
    }
    // First sample >= s; equal samples resolve to the smallest lambda.
    const auto it = std::lower_bound(vals.begin(), vals.end(), s);
    if (it == vals.end()) return {lam.back(), {lam[n - 2], lam.back()}, std::abs(vals.back() - s)};
    const std::size_t hi = static_cast<std::size_t>(it - vals.begin());
    if (*it == s || hi == 0) return {lam[hi], {lam[hi], lam[hi]}, std::abs(*it - s)};
    const std::size_t lo = hi - 1;

    // The interpolant of (lambda, v) is monotone when v is; flat stretches
    // are bisected toward the left end.
    double a = lam[lo], b = lam[hi];
    for (int it2 = 0; it2 < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it2) {
        const double m = 0.5 * (a + b);
        const double fm = pchip_eval(lam, vals, m) - s;
        if (fm >= 0.0) b = m;
        else a = m;
    }
    const double res = std::abs(pchip_eval(lam, vals, b) - s);
    return {b, {lam[lo], lam[hi]}, res};
}

std::size_t node_at(const SpaceTimeGrid& grid, const Coord& x) {
    int idx[2] = {0, 0};
    for (int axis = 0; axis < grid.dim(); ++axis) {
        const double pos = x[axis] / grid.spacing(axis);
        idx[axis] = static_cast<int>(std::lround(pos));
        if (std::abs(pos - idx[axis]) > 1e-9 || idx[axis] < 0 || idx[axis] >= grid.points(axis)) {
            throw InvalidArgument(fmt::format("x[{}] = {} is not a grid node", axis, x[axis]));
        }
    }
    return grid.node_id(idx[0], idx[1]);
}

InversionResult invert_lambda(const LinearizationBundle& bundle, double t, const Coord& x, double s) {
    const auto& grid = *bundle.grid_ptr();
    const int level = grid.level_at_or_before(t);
    if (std::abs(grid.time(level) - t) > 1e-9 * std::max(1.0, t)) {
        throw InvalidArgument(fmt::format("t = {} is not a time level", t));
    }
    return invert_lambda(bundle, level, node_at(grid, x), s);
}

}  // namespace pinv
