#pragma once

#include <utility>

#include "pinv/linearize.hpp"

namespace pinv {

/// Time levels with t > delta1 up to the horizon, and the interior nodes.
struct Window {
    int first_level = 0;  // smallest level with t > delta1
    int last_level = 0;   // inclusive
};

Window make_window(const SpaceTimeGrid& grid, double delta1, double horizon);

struct WindowMin {
    double value = 0.0;
    int level = -1;
    std::size_t node = 0;
};

/// Minimum of f over the window's levels and interior nodes.
WindowMin window_min(const Field& f, const Window& w);

struct ReachableConstants {
    double a1 = 0.0;
    double a2 = 0.0;
    Field w;  // potential q
    Field y;  // potential kappa0
    Window window;
    WindowMin a1_at, a2_at;
};

/// Solves the two linear problems with boundary chi (positivity-shifted
/// implicit Euler) and takes window minima. Throws InvariantViolation when
/// either constant is <= 1e-12.
ReachableConstants compute_constants(const SpaceTimeFn& q, double kappa0, const BoundaryProfile& chi,
                                     double horizon = 0.0);

struct InversionResult {
    double lambda = 0.0;
    std::pair<double, double> bracket;
    double residual = 0.0;
};

/// lambda with v_lambda(level, node) = s: bracketing cell by monotonicity
/// on the lambda-grid, then bisection on the monotone cubic interpolant.
/// Ties resolve to the smallest lambda. Throws OutOfRange when s is outside
/// [v_{-r}, v_r] at the node, InvariantViolation if the samples are not monotone.
InversionResult invert_lambda(const LinearizationBundle& bundle, int level, std::size_t node, double s);

/// Same, with (t, x) required to be a grid point.
InversionResult invert_lambda(const LinearizationBundle& bundle, double t, const Coord& x, double s);

/// Node id of the grid point at x, or throws InvalidArgument if x is not a node.
std::size_t node_at(const SpaceTimeGrid& grid, const Coord& x);

}  // namespace pinv
