#include "pinv/linearize.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pinv/parallel.hpp"

namespace pinv {

std::vector<double> symmetric_lambda_grid(double r, int n) {
    if (!(r > 0.0)) throw InvalidArgument(fmt::format("excitation radius r = {} must be positive", r));
    if (n < 5 || n % 2 == 0) throw InvalidArgument(fmt::format("n_lambda = {} must be odd and >= 5", n));
    std::vector<double> out(static_cast<std::size_t>(n));
    const int half = n / 2;
    for (int k = 0; k < n; ++k) out[k] = r * static_cast<double>(k - half) / half;
    return out;
}

namespace {

double resolved_horizon(const LinearizeOptions& o, const SpaceTimeGrid& grid) {
    return o.horizon > 0.0 ? o.horizon : grid.final_time();
}

BoundarySeries scaled(const BoundarySeries& g, double s, int levels) {
    BoundarySeries out = g.truncated(levels);
    for (double& v : out.values()) v *= s;
    return out;
}

Field potential_of(const SemilinearTerm& F, const Field& v) {
    const auto& grid = v.grid();
    Field V(v.grid_ptr(), v.levels());
    for (int n = 0; n < v.levels(); ++n) {
        const double t = grid.time(n);
        for (std::size_t id = 0; id < v.nodes(); ++id) V(n, id) = F.du(t, grid.coord(id), v(n, id));
    }
    return V;
}

Field first_order(const GridPtr& grid, const Field& V, const BoundarySeries& chi, double horizon, Scheme scheme) {
    LinearProblem p{grid, V, Field(), chi, horizon};
    return scheme == Scheme::implicit_euler ? positivity_shifted_solve(p) : solve_linear(p, scheme);
}

}  // namespace

LambdaSlice solve_cascade(const SemilinearTerm& F, const BoundaryProfile& chi, double lambda,
                          const LinearizeOptions& options) {
    const GridPtr& grid = chi.values.grid_ptr();
    const double horizon = resolved_horizon(options, *grid);
    const int levels = horizon_levels(*grid, horizon);
    const BoundarySeries chi_h = chi.values.truncated(levels);

    LambdaSlice out;
    out.lambda = lambda;
    auto F_ptr = std::shared_ptr<const SemilinearTerm>(&F, [](const SemilinearTerm*) {});
    try {
        out.v = solve_semilinear({grid, F_ptr, scaled(chi_h, lambda, levels), horizon}, options.scheme,
                                 options.solver).u;
    } catch (const SolverError& e) {
        throw SolverError(e.kind(), fmt::format("lambda = {}: {}", lambda, e.what()), e.report());
    }
    out.V = potential_of(F, out.v);
    out.v1 = first_order(grid, out.V, chi_h, horizon, options.scheme);

    Field source(grid, levels);
    for (int n = 0; n < levels; ++n) {
        const double t = grid->time(n);
        for (std::size_t id = 0; id < source.nodes(); ++id) {
            const double w = out.v1(n, id);
            source(n, id) = -F.d2u(t, grid->coord(id), out.v(n, id)) * w * w;
        }
    }
    out.v2 = solve_linear({grid, out.V, std::move(source), BoundarySeries(grid, levels), horizon}, options.scheme);
    return out;
}

LinearizationBundle::LinearizationBundle(std::shared_ptr<const SemilinearTerm> F, BoundaryProfile chi, double r,
                                         std::vector<double> lambda_grid, LinearizeOptions options)
    : F_(std::move(F)), chi_(std::move(chi)), r_(r), lambdas_(std::move(lambda_grid)), options_(options) {
    const std::size_t n = lambdas_.size();
    if (n < 5 || n % 2 == 0 || lambdas_[n / 2] != 0.0) {
        throw InvalidArgument("lambda grid must have an odd number (>= 5) of points centred on 0");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(lambdas_[k] + lambdas_[n - 1 - k]) > 1e-14 * r_ || (k > 0 && !(lambdas_[k] > lambdas_[k - 1]))) {
            throw InvalidArgument("lambda grid must be increasing and symmetric about 0");
        }
    }
    slices_.resize(n);
    parallel_for(lambdas_.size(), options_.threads,
                 [&](std::size_t k) { slices_[k] = solve_cascade(*F_, chi_, lambdas_[k], options_); });
}

int LinearizationBundle::levels() const { return slices_.empty() ? 0 : slices_.front().v.levels(); }

LambdaSlice LinearizationBundle::solve_at(double lambda) const { return solve_cascade(*F_, chi_, lambda, options_); }

LinearizationBundle build_bundle(std::shared_ptr<const SemilinearTerm> F, const BoundaryProfile& chi, double r,
                                 int n_lambda, const LinearizeOptions& options) {
    if (!F) throw InvalidArgument("build_bundle: missing nonlinearity");
    return LinearizationBundle(std::move(F), chi, r, symmetric_lambda_grid(r, n_lambda), options);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!(y[i] > 0.0) || !(x[i] > 0.0)) continue;
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a, sy += b, sxx += a * a, sxy += a * b;
        ++m;
    }
    if (m < 2) return 0.0;
    const double den = m * sxx - sx * sx;
    return den == 0.0 ? 0.0 : (m * sxy - sx * sy) / den;
}

namespace {

void require_steps(std::span<const double> steps, const char* what) {
    if (steps.size() < 3) throw InvalidArgument(fmt::format("{}: need at least 3 step sizes", what));
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!(steps[i] > 0.0)) throw InvalidArgument(fmt::format("{}: step sizes must be positive", what));
        if (i > 0 && !(steps[i] < steps[i - 1])) {
            throw InvalidArgument(fmt::format("{}: step sizes must decrease", what));
        }
    }
}

}  // namespace

DerivativeCheckReport check_frechet_s(const SemilinearTerm& F, const BoundaryProfile& chi, double lambda,
                                      const BoundarySeries& h, std::span<const double> steps,
                                      const LinearizeOptions& options) {
    require_steps(steps, "check_frechet_s");
    const GridPtr& grid = chi.values.grid_ptr();
    const double horizon = resolved_horizon(options, *grid);
    const int levels = horizon_levels(*grid, horizon);
    const BoundarySeries base = scaled(chi.values, lambda, levels);
    const BoundarySeries h_trunc = h.truncated(levels);
    auto F_ptr = std::shared_ptr<const SemilinearTerm>(&F, [](const SemilinearTerm*) {});

    const Field u0 = solve_semilinear({grid, F_ptr, base, horizon}, options.scheme, options.solver).u;
    const Field u1 = solve_linear({grid, potential_of(F, u0), Field(), h_trunc, horizon}, options.scheme);

    DerivativeCheckReport rep{"frechet_s", lambda, {steps.begin(), steps.end()}, {}, 0.0};
    rep.errors.resize(steps.size());
    parallel_for(steps.size(), options.threads, [&](std::size_t i) {
        const double s = steps[i];
        const Field us =
            solve_semilinear({grid, F_ptr, axpy(base, s, h_trunc), horizon}, options.scheme, options.solver).u;
        double err = 0.0;
        for (std::size_t j = 0; j < us.values().size(); ++j) {
            err = std::max(err, std::abs((us.values()[j] - u0.values()[j]) / s - u1.values()[j]));
        }
        rep.errors[i] = err;
    });
    rep.slope = loglog_slope(rep.steps, rep.errors);
    return rep;
}

DerivativeCheckReport check_frechet_lambda(const LinearizationBundle& bundle, double lambda,
                                           std::span<const double> deltas) {
    require_steps(deltas, "check_frechet_lambda");
    const double r = bundle.r();
    for (double d : deltas) {
        if (std::abs(lambda) > r * (1 + 1e-12) || std::abs(lambda + d) > r * (1 + 1e-12)) {
            throw InvalidArgument(fmt::format("lambda {} + delta {} leaves [-r, r]", lambda, d));
        }
    }
    const LambdaSlice base = bundle.solve_at(lambda);
    DerivativeCheckReport rep{"frechet_lambda", lambda, {deltas.begin(), deltas.end()}, {}, 0.0};
    rep.errors.resize(deltas.size());
    parallel_for(deltas.size(), bundle.options().threads, [&](std::size_t i) {
        const double d = deltas[i];
        const LambdaSlice shifted = bundle.solve_at(lambda + d);
        double err = 0.0;
        const auto a = shifted.v1.values(), b = base.v1.values(), c = base.v2.values();
        for (std::size_t j = 0; j < a.size(); ++j) err = std::max(err, std::abs((a[j] - b[j]) / d - c[j]));
        rep.errors[i] = err;
    });
    rep.slope = loglog_slope(rep.steps, rep.errors);
    return rep;
}

std::vector<Field> trapezoid_from_zero(std::span<const double> lambdas, std::size_t zero_index,
                                       const std::vector<const Field*>& samples) {
    const std::size_t n = lambdas.size();
    if (samples.size() != n || zero_index >= n) throw InvalidArgument("trapezoid_from_zero: size mismatch");
    std::vector<Field> out(n);
    out[zero_index] = Field(samples[zero_index]->grid_ptr(), samples[zero_index]->levels());
    auto step = [&](std::size_t from, std::size_t to) {
        const double w = 0.5 * (lambdas[to] - lambdas[from]);
        out[to] = out[from];
        auto dst = out[to].values();
        const auto a = samples[from]->values(), b = samples[to]->values();
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * (a[j] + b[j]);
    };
    for (std::size_t k = zero_index + 1; k < n; ++k) step(k - 1, k);
    for (std::size_t k = zero_index; k-- > 0;) step(k + 1, k);
    return out;
}

double integral_identity_check(const LinearizationBundle& bundle) {
    std::vector<const Field*> v1;
    for (std::size_t k = 0; k < bundle.size(); ++k) v1.push_back(&bundle.v1(k));
    const auto q = trapezoid_from_zero(bundle.lambda_grid(), bundle.zero_index(), v1);
    double worst = 0.0;
    for (std::size_t k = 0; k < bundle.size(); ++k) {
        const double scale = bundle.v(k).sup_norm();
        const double diff = sup_distance(bundle.v(k), q[k]);
        if (scale > 0.0) worst = std::max(worst, diff / scale);
        else worst = std::max(worst, diff);
    }
    return worst;
}

}  // namespace pinv
