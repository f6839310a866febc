#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pinv/dnmap.hpp"
#include "pinv/reachable.hpp"

namespace pinv {

/// Tabulated potentials V_lambda on the lambda-grid; the only input the
/// reconstruction sees. `potential(k)` may compute on demand so large
/// refinements need not hold every V in memory.
struct PotentialData {
    std::vector<double> lambda_grid;
    std::function<Field(std::size_t)> potential;
};

/// Views the bundle's V fields (the bundle must outlive the result).
PotentialData potentials_from(const LinearizationBundle& bundle);

/// Computes V_lambda = dF/du(v_lambda) on demand, one semilinear solve per call.
PotentialData potentials_on_demand(std::shared_ptr<const SemilinearTerm> F, const BoundaryProfile& chi,
                                   std::vector<double> lambda_grid, const LinearizeOptions& options);

struct ReconstructOptions {
    double horizon = 0.0;   // 0: grid final time
    double a2r = 0.0;       // guaranteed half-range a2 * r of the reachable s-values
    double margin = 0.05;
    int level_stride = 1;   // keep every stride-th window level (last one always kept)
    Scheme scheme = Scheme::implicit_euler;
    int threads = 1;
};

struct ValidBox {
    double t_lo = 0.0, t_hi = 0.0;
    double s_max = 0.0;  // |s| <= s_max
};

class ReconstructedNonlinearity {
public:
    ReconstructedNonlinearity(GridPtr grid, std::vector<int> levels, std::vector<double> lambdas,
                              std::vector<double> s, std::vector<double> F, std::vector<double> dF, ValidBox box);

    const SpaceTimeGrid& grid() const { return *grid_; }
    const std::vector<int>& levels() const noexcept { return levels_; }
    const std::vector<double>& lambda_grid() const noexcept { return lambdas_; }
    const ValidBox& valid_box() const noexcept { return box_; }
    std::size_t table_size() const noexcept { return lambdas_.size(); }

    /// Per-node tables over the lambda-grid, for table index i = levels() position, node id.
    std::span<const double> s_table(std::size_t i, std::size_t node) const;
    std::span<const double> F_table(std::size_t i, std::size_t node) const;
    std::span<const double> dF_table(std::size_t i, std::size_t node) const;

    /// Monotone cubic in s at each surrounding table node, multilinear in (t, x).
    /// Throws OutOfRange outside the valid box.
    double operator()(double t, const Coord& x, double s) const;

private:
    std::size_t offset(std::size_t i, std::size_t node) const;
    double node_value(std::size_t i, std::size_t node, double s) const;

    GridPtr grid_;
    std::vector<int> levels_;
    std::vector<double> times_;
    std::vector<double> lambdas_;
    std::vector<double> s_, F_, dF_;
    ValidBox box_;
};

/// Rebuilds F on the reachable set from tabulated potentials only:
/// v1 from each V_lambda, then trapezoid integrals in lambda of v1 and V v1
/// from the zero node outward. Throws InvariantViolation on a non-monotone table.
ReconstructedNonlinearity reconstruct(const PotentialData& data, const BoundaryProfile& chi,
                                      const ReconstructOptions& options);

struct ErrorSample {
    double t = 0.0;
    Coord x{0.0, 0.0};
    double s = 0.0;
    double error = 0.0;
};

struct ReconstructionError {
    double sup_error = 0.0;
    double l2_error = 0.0;  // root mean square over the samples
    std::size_t samples = 0;
    std::vector<ErrorSample> worst;  // largest errors, descending
};

/// Samples table levels and nodes (plus midpoints when `midpoints`) and
/// s_points uniform values in the valid box. Throws InvalidArgument when the
/// box is empty (s_max below the smallest s-table spacing).
ReconstructionError compare_to_truth(const ReconstructedNonlinearity& rec, const SemilinearTerm& F_true,
                                     int s_points = 41, bool midpoints = true, std::size_t keep_worst = 10);

struct UniquenessReport {
    double max_trace_diff = 0.0;            // sup over lambda, probes, levels, boundary nodes
    std::vector<double> per_lambda;         // sup over probes for each lambda
    double attained_sup = 0.0;              // sup |u| over all F1 solves
    int solves = 0;
};

/// Nonlinear DN traces of F1 and F2 for boundary lambda*chi + h over the
/// given lambdas and probes (h = 0 included).
UniquenessReport uniqueness_probe(const SemilinearTerm& F1, const SemilinearTerm& F2, const BoundaryProfile& chi,
                                  std::span<const double> lambdas, const std::vector<Perturbation>& probes,
                                  const LinearizeOptions& options = {});

/// sup |u| over the semilinear solves for the same lambdas and probes.
double attained_sup(const SemilinearTerm& F, const BoundaryProfile& chi, std::span<const double> lambdas,
                    const std::vector<Perturbation>& probes, const LinearizeOptions& options = {});

}  // namespace pinv
