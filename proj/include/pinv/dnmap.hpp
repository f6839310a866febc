#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pinv/linearize.hpp"

namespace pinv {

/// Outward normal derivative of a solution on the lateral boundary, one
/// level per time level 0..n1 (level 0 is the zero initial state).
struct DNTrace {
    BoundarySeries values;
};

DNTrace trace_of(const Field& u);

/// Discrete L2((0,T1) x boundary) norm: sum over levels 1..n1 of dt * boundary weights.
double boundary_l2(const BoundarySeries& g);
double boundary_l2_distance(const BoundarySeries& a, const BoundarySeries& b);

/// Trace of the semilinear solution with boundary data lambda*chi + h.
/// Throws InvalidArgument when h lies outside the epsilon ball of chi.
DNTrace nonlinear_dn(const SemilinearTerm& F, const BoundaryProfile& chi, double lambda, const Perturbation& h,
                     const LinearizeOptions& options = {});

/// Trace of the linear solve with potential V (zero source) and boundary h.
DNTrace linearized_dn(const Field& V, const BoundarySeries& h, const LinearizeOptions& options = {});

/// dF/du evaluated along the solution with boundary lambda*chi.
Field background_potential(const SemilinearTerm& F, const BoundaryProfile& chi, double lambda,
                           const LinearizeOptions& options = {});

struct DiscrepancyEstimate {
    double value = 0.0;
    int probes_used = 0;
    std::string norm_kind;
    std::vector<double> per_probe;     // ratio for each probe
    std::vector<double> running_max;   // running max in probe order
};

/// Seed for probe i of a run seeded with `seed` (splitmix64 of seed and i).
std::uint64_t probe_seed(std::uint64_t seed, std::uint64_t i);

/// Max over seeded random_smooth probes h of
/// ||Lambda_{V1} h - Lambda_{V2} h||_2 / ||h||_2, with V_i = dF_i/du(v_{i,lambda}).
DiscrepancyEstimate estimate_discrepancy(const SemilinearTerm& F1, const SemilinearTerm& F2,
                                         const BoundaryProfile& chi, double lambda, int probe_count,
                                         std::uint64_t seed, const LinearizeOptions& options = {});

/// The probe family used by estimate_discrepancy.
std::vector<Perturbation> random_probes(const BoundaryProfile& chi, int probe_count, std::uint64_t seed,
                                        double horizon);

}  // namespace pinv
