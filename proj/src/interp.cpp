#include "pinv/interp.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pinv/error.hpp"

namespace pinv {

std::size_t locate_cell(std::span<const double> x, double xq) {
    if (x.size() < 2) throw InvalidArgument("interpolation needs at least two knots");
    if (!(xq >= x.front() && xq <= x.back())) {
        throw OutOfRange(fmt::format("query {} outside [{}, {}]", xq, x.front(), x.back()));
    }
    auto it = std::upper_bound(x.begin(), x.end(), xq);
    std::size_t k = static_cast<std::size_t>(it - x.begin());
    return k == 0 ? 0 : std::min(k - 1, x.size() - 2);
}

namespace {

double end_slope(double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return s;
}

}  // namespace

double pchip_slope(std::span<const double> x, std::span<const double> y, std::size_t k) {
    const std::size_t n = x.size();
    auto secant = [&](std::size_t i) { return (y[i + 1] - y[i]) / (x[i + 1] - x[i]); };
    if (n == 2) return secant(0);
    if (k == 0) return end_slope(x[1] - x[0], x[2] - x[1], secant(0), secant(1));
    if (k == n - 1) return end_slope(x[n - 1] - x[n - 2], x[n - 2] - x[n - 3], secant(n - 2), secant(n - 3));
    const double d0 = secant(k - 1), d1 = secant(k);
    if (d0 * d1 <= 0.0) return 0.0;
    const double h0 = x[k] - x[k - 1], h1 = x[k + 1] - x[k];
    const double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
    return (w1 + w2) / (w1 / d0 + w2 / d1);
}

double pchip_eval(std::span<const double> x, std::span<const double> y, double xq) {
    const std::size_t k = locate_cell(x, xq);
    const double h = x[k + 1] - x[k];
    const double s = (xq - x[k]) / h;
    const double m0 = pchip_slope(x, y, k) * h;
    const double m1 = pchip_slope(x, y, k + 1) * h;
    const double s2 = s * s, s3 = s2 * s;
    return (2.0 * s3 - 3.0 * s2 + 1.0) * y[k] + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y[k + 1] +
           (s3 - s2) * m1;
}

}  // namespace pinv
