#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace pinv {

/// Spatial coordinate; the second component is 0 for 1D grids.
using Coord = std::array<double, 2>;

struct GridConfig {
    int dim = 1;
    std::vector<double> extents{1.0};
    std::vector<int> nx{99};
    int nt = 100;
    double T = 1.0;
};

/// A boundary node carrying its outward normal as an axis/sign pair.
struct BoundaryNode {
    std::size_t node;
    int axis;
    int sign;  // -1 for the low face, +1 for the high face
};

/// Uniform space-time grid on (0,T) x Omega, Omega an interval or a rectangle.
///
/// Spatial nodes are numbered row-major with axis 0 fastest and include the
/// boundary layer, so each axis carries nx+2 points. Rectangle corners are
/// kept as nodes but are excluded from the normal-trace set.
class SpaceTimeGrid {
public:
    /// Validates the configuration and builds the grid. Throws InvalidArgument.
    static std::shared_ptr<const SpaceTimeGrid> build(const GridConfig& config);

    int dim() const noexcept { return dim_; }
    double extent(int axis) const { return extents_.at(axis); }
    int interior_points(int axis) const { return nx_.at(axis); }
    int points(int axis) const { return nx_.at(axis) + 2; }
    double spacing(int axis) const { return h_.at(axis); }
    int nt() const noexcept { return nt_; }
    double final_time() const noexcept { return T_; }
    double dt() const noexcept { return dt_; }
    double time(int level) const noexcept { return level * dt_; }

    /// Largest level whose time does not exceed t (with a round-off guard).
    int level_at_or_before(double t) const;

    std::size_t node_count() const noexcept { return coords_.size(); }
    std::size_t node_id(int i, int j = 0) const;
    const Coord& coord(std::size_t node) const { return coords_[node]; }

    std::span<const std::size_t> interior_nodes() const noexcept { return interior_; }
    std::span<const BoundaryNode> boundary_nodes() const noexcept { return boundary_; }
    std::span<const std::size_t> corner_nodes() const noexcept { return corners_; }

    /// Position of a node inside interior_nodes(), or -1 for boundary nodes.
    long interior_index(std::size_t node) const { return interior_index_[node]; }

    /// Quadrature weight of a boundary node for discrete L2 norms on the
    /// lateral boundary (1 in 1D, tangential spacing in 2D).
    double boundary_weight(std::size_t boundary_index) const;

    /// Centered 3-point (1D) / 5-point (2D) Laplacian on interior nodes.
    /// `values` holds one full spatial level (boundary included).
    std::vector<double> laplacian(std::span<const double> values) const;

    /// One-sided second-order outward normal derivative at each boundary node.
    std::vector<double> normal_derivative(std::span<const double> values) const;

private:
    SpaceTimeGrid() = default;

    int dim_ = 1;
    std::vector<double> extents_;
    std::vector<int> nx_;
    std::vector<double> h_;
    int nt_ = 0;
    double T_ = 0.0;
    double dt_ = 0.0;
    std::vector<Coord> coords_;
    std::vector<std::size_t> interior_;
    std::vector<long> interior_index_;
    std::vector<BoundaryNode> boundary_;
    std::vector<std::size_t> corners_;
};

using GridPtr = std::shared_ptr<const SpaceTimeGrid>;

}  // namespace pinv
