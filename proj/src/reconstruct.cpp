#include "pinv/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pinv/interp.hpp"
#include "pinv/parallel.hpp"

namespace pinv {

PotentialData potentials_from(const LinearizationBundle& bundle) {
    return {bundle.lambda_grid(), [&bundle](std::size_t k) { return bundle.V(k); }};
}

PotentialData potentials_on_demand(std::shared_ptr<const SemilinearTerm> F, const BoundaryProfile& chi,
                                   std::vector<double> lambda_grid, const LinearizeOptions& options) {
    auto lambdas = lambda_grid;
    return {std::move(lambda_grid), [F = std::move(F), chi, lambdas = std::move(lambdas), options](std::size_t k) {
                return background_potential(*F, chi, lambdas.at(k), options);
            }};
}

ReconstructedNonlinearity::ReconstructedNonlinearity(GridPtr grid, std::vector<int> levels,
                                                     std::vector<double> lambdas, std::vector<double> s,
                                                     std::vector<double> F, std::vector<double> dF, ValidBox box)
    : grid_(std::move(grid)),
      levels_(std::move(levels)),
      lambdas_(std::move(lambdas)),
      s_(std::move(s)),
      F_(std::move(F)),
      dF_(std::move(dF)),
      box_(box) {
    for (int n : levels_) times_.push_back(grid_->time(n));
}

std::size_t ReconstructedNonlinearity::offset(std::size_t i, std::size_t node) const {
    return (i * grid_->node_count() + node) * lambdas_.size();
}

std::span<const double> ReconstructedNonlinearity::s_table(std::size_t i, std::size_t node) const {
    return {s_.data() + offset(i, node), lambdas_.size()};
}
std::span<const double> ReconstructedNonlinearity::F_table(std::size_t i, std::size_t node) const {
    return {F_.data() + offset(i, node), lambdas_.size()};
}
std::span<const double> ReconstructedNonlinearity::dF_table(std::size_t i, std::size_t node) const {
    return {dF_.data() + offset(i, node), lambdas_.size()};
}

double ReconstructedNonlinearity::node_value(std::size_t i, std::size_t node, double s) const {
    return pchip_eval(s_table(i, node), F_table(i, node), s);
}

double ReconstructedNonlinearity::operator()(double t, const Coord& x, double s) const {
    const double tol = 1e-12;
    if (!(t >= box_.t_lo - tol && t <= box_.t_hi + tol)) {
        throw OutOfRange(fmt::format("t = {} outside the valid box [{}, {}]", t, box_.t_lo, box_.t_hi));
    }
    if (!(std::abs(s) <= box_.s_max * (1.0 + 1e-12))) {
        throw OutOfRange(fmt::format("s = {} outside the valid box |s| <= {}", s, box_.s_max));
    }
    // Time cell.
    std::size_t i0 = 0;
    double wt = 0.0;
    if (times_.size() > 1) {
        const double tc = std::clamp(t, times_.front(), times_.back());
        i0 = std::min<std::size_t>(
            static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), tc) - times_.begin()) - 1,
            times_.size() - 2);
        wt = (tc - times_[i0]) / (times_[i0 + 1] - times_[i0]);
    }
    // Space cell per axis.
    int base[2] = {0, 0};
    double wx[2] = {0.0, 0.0};
    for (int axis = 0; axis < grid_->dim(); ++axis) {
        const double h = grid_->spacing(axis);
        const double L = grid_->extent(axis);
        if (!(x[axis] >= -tol && x[axis] <= L + tol)) {
            throw OutOfRange(fmt::format("x[{}] = {} outside the domain", axis, x[axis]));
        }
        const double pos = std::clamp(x[axis], 0.0, L) / h;
        base[axis] = std::min(static_cast<int>(pos), grid_->points(axis) - 2);
        wx[axis] = pos - base[axis];
    }
    double sum = 0.0;
    const int cy = grid_->dim() == 2 ? 2 : 1;
    for (int a = 0; a < 2; ++a) {
        const double w_t = a == 0 ? 1.0 - wt : wt;
        if (w_t == 0.0) continue;
        for (int bx = 0; bx < 2; ++bx) {
            const double w_x = bx == 0 ? 1.0 - wx[0] : wx[0];
            if (w_x == 0.0) continue;
            for (int by = 0; by < cy; ++by) {
                const double w_y = cy == 1 ? 1.0 : (by == 0 ? 1.0 - wx[1] : wx[1]);
                if (w_y == 0.0) continue;
                const std::size_t node = grid_->node_id(base[0] + bx, cy == 1 ? 0 : base[1] + by);
                sum += w_t * w_x * w_y * node_value(i0 + a, node, s);
            }
        }
    }
    return sum;
}

namespace {

struct Extract {
    std::vector<double> v1, flux, V;  // at table points
};

}  // namespace

ReconstructedNonlinearity reconstruct(const PotentialData& data, const BoundaryProfile& chi,
                                      const ReconstructOptions& options) {
    const GridPtr& grid = chi.values.grid_ptr();
    const double horizon = options.horizon > 0.0 ? options.horizon : grid->final_time();
    const int total_levels = horizon_levels(*grid, horizon);
    if (!(options.a2r > 0.0)) throw InvalidArgument("reconstruct: a2r must be positive");
    if (!(options.margin >= 0.0 && options.margin < 1.0)) throw InvalidArgument("reconstruct: margin must lie in [0, 1)");
    if (options.level_stride < 1) throw InvalidArgument("reconstruct: level_stride must be >= 1");
    const auto& lam = data.lambda_grid;
    const std::size_t n = lam.size();
    if (n < 5 || n % 2 == 0 || lam[n / 2] != 0.0 || !data.potential) {
        throw InvalidArgument("reconstruct: need an odd lambda grid centred on 0 and a potential source");
    }
    const std::size_t k0 = n / 2;

    const Window window = make_window(*grid, chi.delta1, horizon);
    std::vector<int> levels;
    for (int l = window.first_level; l <= window.last_level; l += options.level_stride) levels.push_back(l);
    if (levels.back() != window.last_level) levels.push_back(window.last_level);
    const std::size_t nodes = grid->node_count();
    const std::size_t W = levels.size() * nodes;

    const BoundarySeries chi_h = chi.values.truncated(total_levels);
    auto extract = [&](std::size_t k) {
        const Field V = data.potential(k);
        if (V.levels() < total_levels) throw InvalidArgument("reconstruct: potential has too few levels");
        LinearProblem p{grid, V, Field(), chi_h, horizon};
        const Field v1 =
            options.scheme == Scheme::implicit_euler ? positivity_shifted_solve(p) : solve_linear(p, options.scheme);
        Extract e;
        e.v1.resize(W);
        e.flux.resize(W);
        e.V.resize(W);
        for (std::size_t i = 0; i < levels.size(); ++i) {
            const auto a = v1.level(levels[i]);
            const auto b = V.level(levels[i]);
            for (std::size_t id = 0; id < nodes; ++id) {
                e.v1[i * nodes + id] = a[id];
                e.V[i * nodes + id] = b[id];
                e.flux[i * nodes + id] = b[id] * a[id];
            }
        }
        return e;
    };

    std::vector<double> s(W * n), F(W * n), dF(W * n);
    auto store = [&](std::size_t k, const Extract& e, const Extract* prev, std::size_t kp) {
        for (std::size_t w = 0; w < W; ++w) {
            double* sw = &s[w * n];
            double* Fw = &F[w * n];
            dF[w * n + k] = e.V[w];
            if (!prev) {
                sw[k] = 0.0;
                Fw[k] = 0.0;
                continue;
            }
            const double half = 0.5 * (lam[k] - lam[kp]);
            sw[k] = sw[kp] + half * (prev->v1[w] + e.v1[w]);
            Fw[k] = Fw[kp] + half * (prev->flux[w] + e.flux[w]);
        }
    };

    // March outward from 0 in both directions, solving `threads` slices at a time.
    const Extract zero = extract(k0);
    store(k0, zero, nullptr, k0);
    const std::size_t batch = static_cast<std::size_t>(std::max(1, options.threads));
    for (int dir : {+1, -1}) {
        std::vector<std::size_t> order;
        if (dir > 0) {
            for (std::size_t k = k0 + 1; k < n; ++k) order.push_back(k);
        } else {
            for (std::size_t k = k0; k-- > 0;) order.push_back(k);
        }
        Extract prev = zero;
        std::size_t kp = k0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t count = std::min(batch, order.size() - start);
            std::vector<Extract> got(count);
            parallel_for(count, options.threads, [&](std::size_t j) { got[j] = extract(order[start + j]); });
            for (std::size_t j = 0; j < count; ++j) {
                store(order[start + j], got[j], &prev, kp);
                kp = order[start + j];
                prev = std::move(got[j]);
            }
        }
    }

    for (std::size_t w = 0; w < W; ++w) {
        const double* sw = &s[w * n];
        for (std::size_t k = 1; k < n; ++k) {
            if (!(sw[k] > sw[k - 1])) {
                const std::size_t i = w / nodes, id = w % nodes;
                const auto& x = grid->coord(id);
                throw InvariantViolation(
                    "reachable s-table is not strictly increasing",
                    fmt::format("t={} x=({}, {}) lambda={} s={} then s={}", grid->time(levels[i]), x[0], x[1],
                                lam[k], sw[k - 1], sw[k]));
            }
        }
    }

    ValidBox box{grid->time(levels.front()), grid->time(levels.back()), options.a2r * (1.0 - options.margin)};
    return ReconstructedNonlinearity(grid, std::move(levels), lam, std::move(s), std::move(F), std::move(dF), box);
}

ReconstructionError compare_to_truth(const ReconstructedNonlinearity& rec, const SemilinearTerm& F_true,
                                     int s_points, bool midpoints, std::size_t keep_worst) {
    const auto& grid = rec.grid();
    const auto& box = rec.valid_box();
    const std::size_t k0 = rec.table_size() / 2;
    double min_spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rec.levels().size(); ++i) {
        for (std::size_t id = 0; id < grid.node_count(); ++id) {
            const auto st = rec.s_table(i, id);
            min_spacing = std::min(min_spacing, st[k0 + 1] - st[k0]);
        }
    }
    if (!(box.s_max > 0.0) || box.s_max < min_spacing) {
        throw InvalidArgument(fmt::format("valid box is empty: s_max = {} below the s-table spacing {}", box.s_max,
                                          min_spacing));
    }
    if (s_points < 2) throw InvalidArgument("compare_to_truth: need at least two s samples");

    std::vector<double> ts;
    for (std::size_t i = 0; i < rec.levels().size(); ++i) {
        const double t = grid.time(rec.levels()[i]);
        if (midpoints && i > 0) ts.push_back(0.5 * (ts.back() + t));
        ts.push_back(t);
    }
    std::vector<double> axes[2];
    for (int axis = 0; axis < grid.dim(); ++axis) {
        const int pts = grid.points(axis);
        const double h = grid.spacing(axis);
        for (int i = 0; i < pts; ++i) {
            if (midpoints && i > 0) axes[axis].push_back((i - 0.5) * h);
            axes[axis].push_back(i * h);
        }
    }
    if (grid.dim() == 1) axes[1] = {0.0};

    ReconstructionError rep;
    double sum_sq = 0.0;
    auto consider = [&](const ErrorSample& e) {
        if (rep.worst.size() < keep_worst || e.error > rep.worst.back().error) {
            auto it = std::upper_bound(rep.worst.begin(), rep.worst.end(), e,
                                       [](const ErrorSample& a, const ErrorSample& b) { return a.error > b.error; });
            rep.worst.insert(it, e);
            if (rep.worst.size() > keep_worst) rep.worst.pop_back();
        }
    };
    for (double t : ts) {
        for (double y : axes[1]) {
            for (double x0 : axes[0]) {
                const Coord x{x0, y};
                for (int j = 0; j < s_points; ++j) {
                    const double s = -box.s_max + 2.0 * box.s_max * j / (s_points - 1);
                    const double err = std::abs(rec(t, x, s) - F_true.value(t, x, s));
                    rep.sup_error = std::max(rep.sup_error, err);
                    sum_sq += err * err;
                    ++rep.samples;
                    if (keep_worst > 0) consider({t, x, s, err});
                }
            }
        }
    }
    rep.l2_error = std::sqrt(sum_sq / static_cast<double>(rep.samples));
    return rep;
}

namespace {

struct ProbeRun {
    Field u;
    DNTrace trace;
};

ProbeRun run_probe(const SemilinearTerm& F, const BoundaryProfile& chi, double lambda, const Perturbation* h,
                   const LinearizeOptions& options) {
    const GridPtr& grid = chi.values.grid_ptr();
    const double horizon = options.horizon > 0.0 ? options.horizon : grid->final_time();
    const int levels = horizon_levels(*grid, horizon);
    BoundarySeries g = chi.values.truncated(levels);
    for (double& v : g.values()) v *= lambda;
    if (h) g = axpy(g, 1.0, h->values.truncated(levels));
    auto F_ptr = std::shared_ptr<const SemilinearTerm>(&F, [](const SemilinearTerm*) {});
    Field u = solve_semilinear({grid, F_ptr, std::move(g), horizon}, options.scheme, options.solver).u;
    DNTrace tr = trace_of(u);
    return {std::move(u), std::move(tr)};
}

}  // namespace

UniquenessReport uniqueness_probe(const SemilinearTerm& F1, const SemilinearTerm& F2, const BoundaryProfile& chi,
                                  std::span<const double> lambdas, const std::vector<Perturbation>& probes,
                                  const LinearizeOptions& options) {
    const std::size_t per = probes.size() + 1;
    const std::size_t total = lambdas.size() * per;
    std::vector<double> diff(total, 0.0), sup(total, 0.0);
    parallel_for(total, options.threads, [&](std::size_t i) {
        const double lambda = lambdas[i / per];
        const std::size_t p = i % per;
        const Perturbation* h = p == 0 ? nullptr : &probes[p - 1];
        const auto a = run_probe(F1, chi, lambda, h, options);
        const auto b = run_probe(F2, chi, lambda, h, options);
        double d = 0.0;
        const auto av = a.trace.values.values(), bv = b.trace.values.values();
        for (std::size_t j = 0; j < av.size(); ++j) d = std::max(d, std::abs(av[j] - bv[j]));
        diff[i] = d;
        sup[i] = a.u.sup_norm();
    });
    UniquenessReport rep;
    rep.per_lambda.assign(lambdas.size(), 0.0);
    for (std::size_t i = 0; i < total; ++i) {
        rep.per_lambda[i / per] = std::max(rep.per_lambda[i / per], diff[i]);
        rep.max_trace_diff = std::max(rep.max_trace_diff, diff[i]);
        rep.attained_sup = std::max(rep.attained_sup, sup[i]);
    }
    rep.solves = static_cast<int>(2 * total);
    return rep;
}

double attained_sup(const SemilinearTerm& F, const BoundaryProfile& chi, std::span<const double> lambdas,
                    const std::vector<Perturbation>& probes, const LinearizeOptions& options) {
    const std::size_t per = probes.size() + 1;
    std::vector<double> sup(lambdas.size() * per, 0.0);
    parallel_for(sup.size(), options.threads, [&](std::size_t i) {
        const std::size_t p = i % per;
        sup[i] = run_probe(F, chi, lambdas[i / per], p == 0 ? nullptr : &probes[p - 1], options).u.sup_norm();
    });
    return sup.empty() ? 0.0 : *std::max_element(sup.begin(), sup.end());
}

}  // namespace pinv
