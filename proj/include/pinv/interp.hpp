#pragma once

#include <span>

namespace pinv {

/// Shape-preserving piecewise cubic Hermite interpolation (Fritsch-Butland
/// harmonic-mean slopes, three-point one-sided end slopes). Knots must be
/// strictly increasing. Slopes are computed locally, so evaluation costs one
/// binary search. Throws OutOfRange outside [x.front(), x.back()].
double pchip_eval(std::span<const double> x, std::span<const double> y, double xq);

/// Slope used by pchip_eval at knot k.
double pchip_slope(std::span<const double> x, std::span<const double> y, std::size_t k);

/// Index k with x[k] <= xq <= x[k+1] (the last cell for xq == x.back()).
std::size_t locate_cell(std::span<const double> x, double xq);

}  // namespace pinv
