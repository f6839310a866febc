#pragma once

#include <cstdint>
#include <vector>

#include "pinv/dnmap.hpp"
#include "pinv/reachable.hpp"

namespace pinv {

/// Spearman rank correlation (average ranks for ties). Needs >= 2 pairs.
double spearman(std::span<const double> a, std::span<const double> b);

/// base(t,x,u) * weight(t,x): the perturbation family used by the stability harness.
SemilinearTerm spatially_weighted(const SemilinearTerm& base, SpaceTimeFn weight, std::string name);

struct StabilityRecord {
    double epsilon = 0.0;
    double sup_F_diff = 0.0;
    double dn_discrepancy = 0.0;               // sup over lambda
    std::vector<double> per_lambda;            // discrepancy for each lambda
};

struct StabilityRun {
    std::vector<StabilityRecord> records;  // ascending epsilon
    double spearman_rho = 0.0;             // over records with epsilon > 0
    double fitted_exponent = 0.0;          // slope of log sup_F_diff vs log log(3 + 1/dn)
    bool trend_holds = false;              // spearman_rho >= 0.9
};

struct StabilityOptions {
    std::vector<double> lambdas;  // lambda values where the DN discrepancy is estimated
    double s_max = 0.0;           // valid box half-width in s
    int probe_count = 8;
    int s_points = 41;
    std::uint64_t seed = 0;
    LinearizeOptions linearize;
};

/// For each epsilon: F2 = F1 + epsilon * P, hypothesis checks on F2 (abort
/// with InvariantViolation and the witness on failure), sup |F1 - F2| on the
/// valid box and the DN discrepancy surrogate sup over lambdas.
StabilityRun run_stability(const SemilinearTerm& F1, const SemilinearTerm& P, std::vector<double> epsilons,
                           const BoundaryProfile& chi, const StabilityOptions& options);

}  // namespace pinv
