#pragma once

#include <cmath>
#include <memory>

#include "pinv/boundary.hpp"
#include "pinv/grid.hpp"
#include "pinv/nonlinearity.hpp"
#include "pinv/solver.hpp"

namespace testing_support {

inline pinv::GridPtr grid1d(int nx, int nt, double T = 1.0) {
    return pinv::SpaceTimeGrid::build({1, {1.0}, {nx}, nt, T});
}

inline pinv::GridPtr grid2d(int n, int nt, double T = 1.0) {
    return pinv::SpaceTimeGrid::build({2, {1.0, 1.0}, {n, n}, nt, T});
}

inline pinv::BoundaryProfile chi_for(const pinv::GridPtr& g, double delta1 = 0.2, double epsilon = 0.05) {
    return pinv::build_chi(g, delta1, 0.1, g->final_time(), epsilon);
}

inline std::shared_ptr<const pinv::SemilinearTerm> family(const std::string& name,
                                                          const pinv::FamilyParams& p = {}) {
    return std::make_shared<const pinv::SemilinearTerm>(pinv::builtin_family(name, p));
}

inline pinv::Field constant_field(const pinv::GridPtr& g, int levels, double c) {
    pinv::Field f(g, levels);
    for (double& v : f.values()) v = c;
    return f;
}

// Boundary data copied from chi, optionally scaled.
inline pinv::BoundarySeries scaled(const pinv::BoundarySeries& s, double c) {
    pinv::BoundarySeries out = s;
    for (double& v : out.values()) v *= c;
    return out;
}

inline double sup_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace testing_support
