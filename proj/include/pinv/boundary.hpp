#pragma once

#include <cstdint>

#include "pinv/field.hpp"

namespace pinv {

/// Discrete surrogate for the parabolic Hoelder norm of lateral data:
///   max( sup|g|, sup|D_t g|, sup|D_t g(n+1) - D_t g(n)| / dt^(1/4),
///        sup|tangential second difference| (2D only) )
/// with D_t the forward time-difference quotient.
double discrete_holder_surrogate(const BoundarySeries& g);

/// The cutoff profile chi: zero near t = 0, plateau delta2 on [delta1, T].
struct BoundaryProfile {
    BoundarySeries values;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double norm_surrogate = 0.0;
    double epsilon = 0.0;  // radius of the admissible perturbation ball
};

/// Quintic smoothstep ramp: 0 on (-inf, 1/4], 1 on [1, inf), C^2 and monotone between.
double chi_ramp(double tau);

/// chi(t,x) = delta2 * chi_ramp(t/delta1), rescaled so its surrogate norm is 1.
/// Requires 0 < delta1 < horizon <= T and dt <= delta1/4 (so chi vanishes on
/// the first two levels).
BoundaryProfile build_chi(const GridPtr& grid, double delta1, double delta2_initial, double horizon,
                          double epsilon);

enum class PerturbationShape { time_bump, boundary_bump, random_smooth };

struct PerturbationSpec {
    PerturbationShape shape = PerturbationShape::time_bump;
    double center = 0.5;          // time center as a fraction of the horizon
    double width = 0.25;          // time half-width as a fraction of the horizon
    std::size_t boundary_index = 0;  // for boundary_bump
    double spatial_width = 0.25;  // boundary_bump: fraction of the perimeter (2D)
    int modes = 4;                // random_smooth: number of space-time modes
    std::uint64_t seed = 0;       // random_smooth
};

struct Perturbation {
    BoundarySeries values;
    double norm_surrogate = 0.0;
};

/// Builds the unit-norm shape and scales it by `amplitude`; rejects results
/// whose surrogate norm exceeds epsilon. Values vanish on the first two levels.
Perturbation make_perturbation(const GridPtr& grid, const PerturbationSpec& spec, double amplitude,
                               double epsilon, double horizon);

Perturbation zero_perturbation(const GridPtr& grid);

/// Arclength position of a boundary node going counter-clockwise from the
/// origin (2D); the node coordinate along axis 0 in 1D.
double perimeter_position(const SpaceTimeGrid& grid, std::size_t boundary_index);

}  // namespace pinv
