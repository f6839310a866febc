#include "pinv/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "pinv/error.hpp"

namespace pinv {

double discrete_holder_surrogate(const BoundarySeries& g) {
    const auto& grid = g.grid();
    const double dt = grid.dt();
    const double holder_scale = std::pow(dt, 0.25);
    double sup = 0.0, sup_dt = 0.0, sup_holder = 0.0, sup_tan = 0.0;
    for (int n = 0; n < g.levels(); ++n) {
        for (std::size_t b = 0; b < g.width(); ++b) {
            sup = std::max(sup, std::abs(g(n, b)));
            if (n + 1 < g.levels()) {
                const double d0 = (g(n + 1, b) - g(n, b)) / dt;
                sup_dt = std::max(sup_dt, std::abs(d0));
                if (n + 2 < g.levels()) {
                    const double d1 = (g(n + 2, b) - g(n + 1, b)) / dt;
                    sup_holder = std::max(sup_holder, std::abs(d1 - d0) / holder_scale);
                }
            }
        }
    }
    if (grid.dim() == 2) {
        const auto nodes = grid.boundary_nodes();
        for (int n = 0; n < g.levels(); ++n) {
            for (std::size_t b = 1; b + 1 < nodes.size(); ++b) {
                // Neighbours along the same edge are adjacent in the ordering.
                if (nodes[b - 1].axis != nodes[b].axis || nodes[b - 1].sign != nodes[b].sign) continue;
                if (nodes[b + 1].axis != nodes[b].axis || nodes[b + 1].sign != nodes[b].sign) continue;
                const double h = grid.spacing(1 - nodes[b].axis);
                const double d2 = (g(n, b - 1) - 2.0 * g(n, b) + g(n, b + 1)) / (h * h);
                sup_tan = std::max(sup_tan, std::abs(d2));
            }
        }
    }
    return std::max({sup, sup_dt, sup_holder, sup_tan});
}

double chi_ramp(double tau) {
    if (tau <= 0.25) return 0.0;
    if (tau >= 1.0) return 1.0;
    const double z = (tau - 0.25) / 0.75;
    return z * z * z * (10.0 + z * (-15.0 + 6.0 * z));
}

BoundaryProfile build_chi(const GridPtr& grid, double delta1, double delta2_initial, double horizon,
                          double epsilon) {
    if (!(horizon > 0.0) || horizon > grid->final_time() * (1.0 + 1e-12)) {
        throw InvalidArgument(fmt::format("horizon {} must lie in (0, T={}]", horizon, grid->final_time()));
    }
    if (!(delta1 > 0.0) || delta1 >= horizon) {
        throw InvalidArgument(fmt::format("delta1 = {} must satisfy 0 < delta1 < horizon = {}", delta1, horizon));
    }
    if (!(delta2_initial > 0.0)) throw InvalidArgument("delta2_initial must be positive");
    if (grid->dt() > 0.25 * delta1) {
        throw InvalidArgument(fmt::format("dt = {} too coarse to resolve the ramp (need dt <= delta1/4 = {})",
                                          grid->dt(), 0.25 * delta1));
    }
    if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be nonnegative");

    std::vector<double> ramp(static_cast<std::size_t>(grid->nt()) + 1);
    for (int n = 0; n <= grid->nt(); ++n) ramp[n] = chi_ramp(grid->time(n) / delta1);

    auto fill = [&](double amplitude) {
        BoundarySeries s(grid, grid->nt() + 1);
        for (int n = 0; n <= grid->nt(); ++n) {
            for (double& v : s.level(n)) v = amplitude * ramp[n];
        }
        return s;
    };

    const double raw_norm = discrete_holder_surrogate(fill(delta2_initial));
    BoundaryProfile chi;
    chi.delta1 = delta1;
    chi.delta2 = delta2_initial / raw_norm;
    chi.values = fill(chi.delta2);
    chi.norm_surrogate = discrete_holder_surrogate(chi.values);
    chi.epsilon = epsilon;
    return chi;
}

double perimeter_position(const SpaceTimeGrid& grid, std::size_t boundary_index) {
    const auto& b = grid.boundary_nodes()[boundary_index];
    const auto& x = grid.coord(b.node);
    if (grid.dim() == 1) return x[0];
    const double lx = grid.extent(0), ly = grid.extent(1);
    if (b.axis == 1 && b.sign < 0) return x[0];                         // bottom, left to right
    if (b.axis == 0 && b.sign > 0) return lx + x[1];                    // right, bottom to top
    if (b.axis == 1 && b.sign > 0) return lx + ly + (lx - x[0]);        // top, right to left
    return 2.0 * lx + ly + (ly - x[1]);                                 // left, top to bottom
}

namespace {

// C^2 compact bump (1 - z^2)^3.
double bump(double z) {
    if (std::abs(z) >= 1.0) return 0.0;
    const double a = 1.0 - z * z;
    return a * a * a;
}

double perimeter(const SpaceTimeGrid& grid) {
    return grid.dim() == 1 ? grid.extent(0) : 2.0 * (grid.extent(0) + grid.extent(1));
}

// Time window that keeps the first two levels at exactly zero.
std::pair<double, double> time_window(const SpaceTimeGrid& grid, double horizon) {
    return {2.0 * grid.dt(), horizon};
}

BoundarySeries time_bump_shape(const GridPtr& grid, double center, double width, double horizon,
                               const std::vector<double>& spatial) {
    const auto [lo, hi] = time_window(*grid, horizon);
    // Clip the support into the admissible window.
    double c = lo + center * (hi - lo);
    double w = width * (hi - lo);
    if (c - w < lo) w = c - lo;
    if (c + w > hi) w = std::min(w, hi - c);
    if (!(w > 0.0)) throw InvalidArgument("perturbation time support is empty");
    BoundarySeries s(grid, grid->nt() + 1);
    for (int n = 0; n <= grid->nt(); ++n) {
        const double tb = bump((grid->time(n) - c) / w);
        for (std::size_t b = 0; b < s.width(); ++b) s(n, b) = tb * spatial[b];
    }
    return s;
}

}  // namespace

Perturbation make_perturbation(const GridPtr& grid, const PerturbationSpec& spec, double amplitude,
                               double epsilon, double horizon) {
    if (!(horizon > 0.0) || horizon > grid->final_time() * (1.0 + 1e-12)) {
        throw InvalidArgument("perturbation horizon must lie in (0, T]");
    }
    const std::size_t width = grid->boundary_nodes().size();
    BoundarySeries shape;
    switch (spec.shape) {
        case PerturbationShape::time_bump:
            shape = time_bump_shape(grid, spec.center, spec.width, horizon, std::vector<double>(width, 1.0));
            break;
        case PerturbationShape::boundary_bump: {
            if (spec.boundary_index >= width) throw InvalidArgument("boundary_bump: boundary index out of range");
            std::vector<double> spatial(width, 0.0);
            if (grid->dim() == 1) {
                spatial[spec.boundary_index] = 1.0;
            } else {
                const double len = perimeter(*grid);
                const double s0 = perimeter_position(*grid, spec.boundary_index);
                const double w = spec.spatial_width * len;
                for (std::size_t b = 0; b < width; ++b) {
                    double d = std::abs(perimeter_position(*grid, b) - s0);
                    d = std::min(d, len - d);
                    spatial[b] = bump(d / w);
                }
            }
            shape = time_bump_shape(grid, spec.center, spec.width, horizon, spatial);
            break;
        }
        case PerturbationShape::random_smooth: {
            if (spec.modes < 1) throw InvalidArgument("random_smooth: need at least one mode");
            std::mt19937_64 rng(spec.seed);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::uniform_real_distribution<double> coef(-1.0, 1.0);
            shape = BoundarySeries(grid, grid->nt() + 1);
            const double len = perimeter(*grid);
            for (int m = 0; m < spec.modes; ++m) {
                const double center = 0.2 + 0.6 * unit(rng);
                const double w = 0.15 + 0.25 * unit(rng);
                std::vector<double> spatial(width);
                const double a0 = coef(rng), a1 = coef(rng), phase = 2.0 * std::numbers::pi * unit(rng);
                for (std::size_t b = 0; b < width; ++b) {
                    const double s = perimeter_position(*grid, b) / len;
                    spatial[b] = grid->dim() == 1 ? (b == 0 ? a0 : a1)
                                                  : a0 + a1 * std::cos(2.0 * std::numbers::pi * s + phase);
                }
                const auto part = time_bump_shape(grid, center, w, horizon, spatial);
                shape = axpy(shape, 1.0, part);
            }
            break;
        }
    }
    const double unit_norm = discrete_holder_surrogate(shape);
    if (!(unit_norm > 0.0)) throw InvalidArgument("perturbation shape has zero norm");

    Perturbation p;
    p.values = BoundarySeries(grid, grid->nt() + 1);
    const double scale = amplitude / unit_norm;
    auto dst = p.values.values();
    auto src = shape.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = scale * src[i];
    p.norm_surrogate = discrete_holder_surrogate(p.values);
    if (p.norm_surrogate > epsilon * (1.0 + 1e-12)) {
        throw InvalidArgument(
            fmt::format("perturbation norm {} exceeds the admissible radius epsilon = {}", p.norm_surrogate, epsilon));
    }
    return p;
}

Perturbation zero_perturbation(const GridPtr& grid) {
    return {BoundarySeries(grid, grid->nt() + 1), 0.0};
}

}  // namespace pinv
