#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pinv/grid.hpp"

namespace pinv {

/// Scalar space-time function on a grid: one full spatial level (boundary
/// nodes included) per time level 0..levels()-1.
class Field {
public:
    Field() = default;
    Field(GridPtr grid, int levels);

    const SpaceTimeGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    int levels() const noexcept { return levels_; }
    std::size_t nodes() const noexcept { return nodes_; }

    std::span<double> level(int n) { return {values_.data() + offset(n), nodes_}; }
    std::span<const double> level(int n) const { return {values_.data() + offset(n), nodes_}; }

    double& operator()(int n, std::size_t node) { return values_[offset(n) + node]; }
    double operator()(int n, std::size_t node) const { return values_[offset(n) + node]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool all_finite() const;
    double sup_norm() const;
    double min() const;

private:
    std::size_t offset(int n) const { return static_cast<std::size_t>(n) * nodes_; }

    GridPtr grid_;
    int levels_ = 0;
    std::size_t nodes_ = 0;
    std::vector<double> values_;
};

/// Sup norm of a - b over all entries; both must share shape.
double sup_distance(const Field& a, const Field& b);

/// Values on the lateral boundary: one entry per (time level, boundary node),
/// boundary nodes ordered as SpaceTimeGrid::boundary_nodes().
class BoundarySeries {
public:
    BoundarySeries() = default;
    BoundarySeries(GridPtr grid, int levels);

    const SpaceTimeGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    int levels() const noexcept { return levels_; }
    std::size_t width() const noexcept { return width_; }

    std::span<double> level(int n) { return {values_.data() + n * width_, width_}; }
    std::span<const double> level(int n) const { return {values_.data() + n * width_, width_}; }
    double& operator()(int n, std::size_t b) { return values_[n * width_ + b]; }
    double operator()(int n, std::size_t b) const { return values_[n * width_ + b]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    /// Copy restricted to the first `levels` time levels.
    BoundarySeries truncated(int levels) const;

private:
    GridPtr grid_;
    int levels_ = 0;
    std::size_t width_ = 0;
    std::vector<double> values_;
};

/// Elementwise a + scale * b.
BoundarySeries axpy(const BoundarySeries& a, double scale, const BoundarySeries& b);

/// Writes one boundary level into a full spatial level. Corner nodes of a
/// rectangle receive the mean of their two edge neighbours.
void scatter_boundary(const SpaceTimeGrid& grid, std::span<const double> boundary, std::span<double> level);

}  // namespace pinv
