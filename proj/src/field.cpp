#include "pinv/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pinv/error.hpp"

namespace pinv {

Field::Field(GridPtr grid, int levels)
    : grid_(std::move(grid)), levels_(levels), nodes_(grid_->node_count()),
      values_(static_cast<std::size_t>(levels) * nodes_, 0.0) {
    if (levels < 1) throw InvalidArgument("Field needs at least one time level");
}

bool Field::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double Field::min() const {
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

double sup_distance(const Field& a, const Field& b) {
    if (a.values().size() != b.values().size()) {
        throw InvalidArgument(fmt::format("field shape mismatch: {} vs {}", a.values().size(), b.values().size()));
    }
    double m = 0.0;
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) m = std::max(m, std::abs(av[i] - bv[i]));
    return m;
}

BoundarySeries::BoundarySeries(GridPtr grid, int levels)
    : grid_(std::move(grid)), levels_(levels), width_(grid_->boundary_nodes().size()),
      values_(static_cast<std::size_t>(levels) * width_, 0.0) {
    if (levels < 1) throw InvalidArgument("BoundarySeries needs at least one time level");
}

BoundarySeries BoundarySeries::truncated(int levels) const {
    if (levels < 1 || levels > levels_) {
        throw InvalidArgument(fmt::format("cannot truncate {} levels to {}", levels_, levels));
    }
    BoundarySeries out(grid_, levels);
    std::copy_n(values_.begin(), out.values_.size(), out.values_.begin());
    return out;
}

BoundarySeries axpy(const BoundarySeries& a, double scale, const BoundarySeries& b) {
    if (a.values().size() != b.values().size()) throw InvalidArgument("boundary series shape mismatch");
    BoundarySeries out = a;
    auto o = out.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += scale * bv[i];
    return out;
}

void scatter_boundary(const SpaceTimeGrid& grid, std::span<const double> boundary, std::span<double> level) {
    const auto nodes = grid.boundary_nodes();
    for (std::size_t k = 0; k < nodes.size(); ++k) level[nodes[k].node] = boundary[k];
    if (grid.dim() != 2) return;
    const int px = grid.points(0);
    const int py = grid.points(1);
    auto fix = [&](int i, int j, int ni, int nj) {
        level[grid.node_id(i, j)] = 0.5 * (level[grid.node_id(ni, j)] + level[grid.node_id(i, nj)]);
    };
    fix(0, 0, 1, 1);
    fix(px - 1, 0, px - 2, 1);
    fix(0, py - 1, 1, py - 2);
    fix(px - 1, py - 1, px - 2, py - 2);
}

}  // namespace pinv
