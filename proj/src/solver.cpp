#include "pinv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <fmt/format.h>

namespace pinv {

Scheme parse_scheme(const std::string& name) {
    if (name == "implicit_euler") return Scheme::implicit_euler;
    if (name == "crank_nicolson") return Scheme::crank_nicolson;
    throw InvalidArgument(fmt::format("unknown scheme '{}'", name));
}

const char* to_string(Scheme s) {
    return s == Scheme::implicit_euler ? "implicit_euler" : "crank_nicolson";
}

int horizon_levels(const SpaceTimeGrid& grid, double horizon) {
    if (!(horizon > 0.0) || horizon > grid.final_time() * (1.0 + 1e-12)) {
        throw InvalidArgument(fmt::format("horizon {} must lie in (0, T={}]", horizon, grid.final_time()));
    }
    const int n1 = grid.level_at_or_before(horizon);
    if (n1 < 1) throw InvalidArgument("horizon shorter than one time step");
    return n1 + 1;
}

// --- StepMatrix -------------------------------------------------------------

struct StepMatrix::Impl {
    const SpaceTimeGrid* grid;
    // 1D elimination factors.
    std::vector<double> pivots, lower;
    double offdiag = 0.0;
    // 2D sparse LU.
    Eigen::SparseMatrix<double> matrix;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
};

StepMatrix::StepMatrix(const SpaceTimeGrid& grid) : impl_(std::make_unique<Impl>()) { impl_->grid = &grid; }
StepMatrix::~StepMatrix() = default;
StepMatrix::StepMatrix(StepMatrix&&) noexcept = default;
StepMatrix& StepMatrix::operator=(StepMatrix&&) noexcept = default;

void StepMatrix::factor(std::span<const double> diagonal, double kappa) {
    const auto& g = *impl_->grid;
    const std::size_t m = g.interior_nodes().size();
    if (diagonal.size() != m) throw InvalidArgument("step matrix: diagonal size mismatch");
    if (g.dim() == 1) {
        const double ih2 = kappa / (g.spacing(0) * g.spacing(0));
        impl_->offdiag = -ih2;
        impl_->pivots.resize(m);
        impl_->lower.assign(m, 0.0);
        double scale = 0.0;
        for (double d : diagonal) scale = std::max(scale, std::abs(d) + 2.0 * ih2);
        for (std::size_t i = 0; i < m; ++i) {
            double w = diagonal[i] + 2.0 * ih2;
            if (i > 0) {
                impl_->lower[i] = -ih2 / impl_->pivots[i - 1];
                w -= impl_->lower[i] * (-ih2);
            }
            if (!(std::abs(w) > 1e-14 * scale)) {
                throw SolverError(SolverError::Kind::singular, fmt::format("singular step matrix at row {}", i));
            }
            impl_->pivots[i] = w;
        }
        return;
    }
    const double cx = kappa / (g.spacing(0) * g.spacing(0));
    const double cy = kappa / (g.spacing(1) * g.spacing(1));
    const int nx = g.interior_points(0);
    const int ny = g.interior_points(1);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * m);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int row = j * nx + i;
            trip.emplace_back(row, row, diagonal[row] + 2.0 * cx + 2.0 * cy);
            if (i > 0) trip.emplace_back(row, row - 1, -cx);
            if (i + 1 < nx) trip.emplace_back(row, row + 1, -cx);
            if (j > 0) trip.emplace_back(row, row - nx, -cy);
            if (j + 1 < ny) trip.emplace_back(row, row + nx, -cy);
        }
    }
    impl_->matrix.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    impl_->matrix.setFromTriplets(trip.begin(), trip.end());
    if (!impl_->analyzed) {
        impl_->lu.analyzePattern(impl_->matrix);
        impl_->analyzed = true;
    }
    impl_->lu.factorize(impl_->matrix);
    if (impl_->lu.info() != Eigen::Success) {
        throw SolverError(SolverError::Kind::singular, "singular step matrix (sparse LU failed)");
    }
}

void StepMatrix::solve(std::span<double> rhs) const {
    const auto& g = *impl_->grid;
    const std::size_t m = rhs.size();
    if (g.dim() == 1) {
        for (std::size_t i = 1; i < m; ++i) rhs[i] -= impl_->lower[i] * rhs[i - 1];
        rhs[m - 1] /= impl_->pivots[m - 1];
        for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - impl_->offdiag * rhs[i + 1]) / impl_->pivots[i];
        return;
    }
    Eigen::Map<Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(m));
    Eigen::VectorXd x = impl_->lu.solve(b);
    b = x;
}

// Interior nodes are ordered row-major (axis 0 fastest), matching the
// row numbering used by StepMatrix.
void add_boundary_coupling(const SpaceTimeGrid& grid, std::span<const double> values, double kappa,
                           std::span<double> rhs) {
    const auto interior = grid.interior_nodes();
    const int px = grid.points(0);
    const double cx = kappa / (grid.spacing(0) * grid.spacing(0));
    if (grid.dim() == 1) {
        rhs.front() += cx * values[0];
        rhs.back() += cx * values[static_cast<std::size_t>(px - 1)];
        return;
    }
    const double cy = kappa / (grid.spacing(1) * grid.spacing(1));
    const int py = grid.points(1);
    const std::size_t stride = static_cast<std::size_t>(px);
    for (std::size_t k = 0; k < interior.size(); ++k) {
        const std::size_t id = interior[k];
        const int i = static_cast<int>(id % stride);
        const int j = static_cast<int>(id / stride);
        if (i == 1) rhs[k] += cx * values[id - 1];
        if (i == px - 2) rhs[k] += cx * values[id + 1];
        if (j == 1) rhs[k] += cy * values[id - stride];
        if (j == py - 2) rhs[k] += cy * values[id + stride];
    }
}

Field sample_potential(const GridPtr& grid, double horizon, const SpaceTimeFn& q) {
    Field out(grid, horizon_levels(*grid, horizon));
    for (int n = 0; n < out.levels(); ++n) {
        const double t = grid->time(n);
        auto lvl = out.level(n);
        for (std::size_t id = 0; id < lvl.size(); ++id) lvl[id] = q(t, grid->coord(id));
    }
    return out;
}

namespace {

void require_dirichlet(const SpaceTimeGrid& grid, const BoundarySeries& g, int levels) {
    if (g.width() != grid.boundary_nodes().size()) {
        throw InvalidArgument("Dirichlet data does not match the grid");
    }
    if (g.levels() < levels) {
        throw InvalidArgument(fmt::format("Dirichlet data has {} levels, solve needs {}", g.levels(), levels));
    }
    for (double v : g.level(0)) {
        if (v != 0.0) throw InvalidArgument("Dirichlet data must vanish at t = 0 (zero initial state)");
    }
}

void require_finite_field(const Field& f, int levels, const char* what) {
    if (f.levels() < levels) {
        throw InvalidArgument(fmt::format("{} has {} levels, solve needs {}", what, f.levels(), levels));
    }
    if (!f.all_finite()) throw InvalidArgument(fmt::format("{} has non-finite entries", what));
}

}  // namespace

SemilinearSolution solve_semilinear(const SemilinearProblem& p, Scheme scheme, const SolverOptions& options) {
    const auto& grid = *p.grid;
    if (!p.F) throw InvalidArgument("semilinear problem without a nonlinearity");
    const int levels = horizon_levels(grid, p.horizon);
    require_dirichlet(grid, p.dirichlet, levels);

    const auto interior = grid.interior_nodes();
    const std::size_t m = interior.size();
    const double dt = grid.dt();
    const double theta = scheme == Scheme::implicit_euler ? 1.0 : 0.5;
    const auto& F = *p.F;

    SemilinearSolution out{Field(p.grid, levels), {}};
    auto& report = out.report;
    report.newton_iterations.reserve(static_cast<std::size_t>(levels - 1));
    StepMatrix jac(grid);
    std::vector<double> residual(m), diag(m), step(m), trial(m), explicit_part(m, 0.0), current(m);

    auto fail = [&](SolverError::Kind kind, int level, const std::string& msg) {
        report.blowup = true;
        report.first_bad_level = level;
        throw SolverError(kind, msg, report);
    };

    for (int n = 0; n + 1 < levels; ++n) {
        const double t_new = grid.time(n + 1);
        auto old_level = out.u.level(n);
        auto new_level = out.u.level(n + 1);
        scatter_boundary(grid, p.dirichlet.level(n + 1), new_level);

        if (theta < 1.0) {
            const auto lap_old = grid.laplacian(old_level);
            const double t_old = grid.time(n);
            for (std::size_t k = 0; k < m; ++k) {
                const std::size_t id = interior[k];
                explicit_part[k] = (1.0 - theta) * (-lap_old[k] + F.value(t_old, grid.coord(id), old_level[id]));
            }
        }
        for (std::size_t k = 0; k < m; ++k) new_level[interior[k]] = old_level[interior[k]];

        // dt * ||R||_inf for the interior values currently in new_level.
        auto evaluate = [&](std::vector<double>& r) {
            const auto lap = grid.laplacian(new_level);
            double norm = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const std::size_t id = interior[k];
                r[k] = (new_level[id] - old_level[id]) / dt - theta * lap[k] +
                       theta * F.value(t_new, grid.coord(id), new_level[id]) + explicit_part[k];
                const double a = std::abs(r[k]);
                norm = std::isfinite(a) ? std::max(norm, a) : std::numeric_limits<double>::infinity();
            }
            return dt * norm;
        };

        double rnorm = evaluate(residual);
        int iterations = 0;
        while (rnorm > options.newton_tol) {
            if (iterations == options.max_newton || !std::isfinite(rnorm)) {
                fail(SolverError::Kind::newton_divergence, n + 1,
                     fmt::format("Newton failed at level {} (t = {}): residual {:.3e} after {} iterations", n + 1,
                                 t_new, rnorm, iterations));
            }
            for (std::size_t k = 0; k < m; ++k) {
                const std::size_t id = interior[k];
                current[k] = new_level[id];
                diag[k] = 1.0 / dt + theta * F.du(t_new, grid.coord(id), new_level[id]);
                step[k] = -residual[k];
            }
            try {
                jac.factor(diag, theta);
            } catch (const SolverError&) {
                fail(SolverError::Kind::newton_divergence, n + 1,
                     fmt::format("singular Newton Jacobian at level {}", n + 1));
            }
            jac.solve(step);

            double alpha = 1.0;
            double trial_norm = 0.0;
            int halvings = 0;
            for (;;) {
                for (std::size_t k = 0; k < m; ++k) new_level[interior[k]] = current[k] + alpha * step[k];
                trial_norm = evaluate(trial);
                if (trial_norm <= (1.0 - 1e-4 * alpha) * rnorm || trial_norm <= options.newton_tol) break;
                if (++halvings > options.max_halvings) {
                    fail(SolverError::Kind::newton_divergence, n + 1,
                         fmt::format("Newton line search stalled at level {} (residual {:.3e})", n + 1, rnorm));
                }
                alpha *= 0.5;
            }
            residual.swap(trial);
            rnorm = trial_norm;
            ++iterations;
        }
        report.newton_iterations.push_back(iterations);
        report.max_residual = std::max(report.max_residual, rnorm);

        double sup = 0.0;
        for (double v : new_level) sup = std::max(sup, std::abs(v));
        report.sup_norm = std::max(report.sup_norm, sup);
        if (!(sup <= options.blowup_cap)) {
            fail(SolverError::Kind::blow_up, n + 1,
                 fmt::format("blow-up at level {} (t = {}): sup norm {:.3e} exceeds cap {:.3e}", n + 1, t_new, sup,
                             options.blowup_cap));
        }
    }
    return out;
}

Field solve_linear(const LinearProblem& p, Scheme scheme) {
    const auto& grid = *p.grid;
    const int levels = horizon_levels(grid, p.horizon);
    require_dirichlet(grid, p.dirichlet, levels);
    require_finite_field(p.potential, levels, "potential");
    const bool has_source = p.source.levels() > 0;
    if (has_source) require_finite_field(p.source, levels, "source");

    const auto interior = grid.interior_nodes();
    const std::size_t m = interior.size();
    const double dt = grid.dt();
    const double theta = scheme == Scheme::implicit_euler ? 1.0 : 0.5;

    Field u(p.grid, levels);
    StepMatrix step(grid);
    std::vector<double> diag(m), rhs(m);
    for (int n = 0; n + 1 < levels; ++n) {
        auto old_level = u.level(n);
        auto new_level = u.level(n + 1);
        scatter_boundary(grid, p.dirichlet.level(n + 1), new_level);
        const auto v_new = p.potential.level(n + 1);
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t id = interior[k];
            diag[k] = 1.0 / dt + theta * v_new[id];
            rhs[k] = old_level[id] / dt + (has_source ? theta * p.source(n + 1, id) : 0.0);
        }
        if (theta < 1.0) {
            const auto lap_old = grid.laplacian(old_level);
            const auto v_old = p.potential.level(n);
            for (std::size_t k = 0; k < m; ++k) {
                const std::size_t id = interior[k];
                rhs[k] += (1.0 - theta) * (lap_old[k] - v_old[id] * old_level[id] +
                                           (has_source ? p.source(n, id) : 0.0));
            }
        }
        add_boundary_coupling(grid, new_level, theta, rhs);
        step.factor(diag, theta);
        step.solve(rhs);
        for (std::size_t k = 0; k < m; ++k) new_level[interior[k]] = rhs[k];
    }
    return u;
}

double positivity_shift(const LinearProblem& p) {
    const auto& grid = *p.grid;
    const int levels = horizon_levels(grid, p.horizon);
    require_finite_field(p.potential, levels, "potential");
    double most_negative = 0.0, sup = 0.0;
    for (int n = 1; n < levels; ++n) {
        const auto lvl = p.potential.level(n);
        for (std::size_t id : grid.interior_nodes()) {
            most_negative = std::max(most_negative, -lvl[id]);
            sup = std::max(sup, std::abs(lvl[id]));
        }
    }
    return grid.dt() * most_negative < 1.0 ? 0.0 : sup;
}

Field positivity_shifted_solve(const LinearProblem& p) {
    const double shift = positivity_shift(p);
    if (shift == 0.0) return solve_linear(p, Scheme::implicit_euler);

    const auto& grid = *p.grid;
    const int levels = horizon_levels(grid, p.horizon);
    LinearProblem shifted{p.grid, Field(p.grid, levels), Field(), BoundarySeries(p.grid, levels), p.horizon};
    const bool has_source = p.source.levels() > 0;
    if (has_source) shifted.source = Field(p.grid, levels);
    for (int n = 0; n < levels; ++n) {
        const double decay = std::exp(-shift * grid.time(n));
        auto v_dst = shifted.potential.level(n);
        const auto v_src = p.potential.level(n);
        for (std::size_t id = 0; id < v_dst.size(); ++id) v_dst[id] = v_src[id] + shift;
        if (has_source) {
            auto s_dst = shifted.source.level(n);
            const auto s_src = p.source.level(n);
            for (std::size_t id = 0; id < s_dst.size(); ++id) s_dst[id] = decay * s_src[id];
        }
        auto g_dst = shifted.dirichlet.level(n);
        const auto g_src = p.dirichlet.level(n);
        for (std::size_t b = 0; b < g_dst.size(); ++b) g_dst[b] = decay * g_src[b];
    }
    Field w = solve_linear(shifted, Scheme::implicit_euler);
    for (int n = 0; n < levels; ++n) {
        const double growth = std::exp(shift * grid.time(n));
        for (double& v : w.level(n)) v *= growth;
    }
    return w;
}

}  // namespace pinv
