#pragma once

#include <memory>
#include <vector>

#include "pinv/boundary.hpp"
#include "pinv/solver.hpp"

namespace pinv {

struct LinearizeOptions {
    double horizon = 0.0;  // T1; 0 means the grid's final time
    Scheme scheme = Scheme::implicit_euler;
    SolverOptions solver;
    int threads = 1;
};

/// Uniform symmetric grid of n points on [-r, r]; n odd >= 5 so 0 is a node.
std::vector<double> symmetric_lambda_grid(double r, int n);

/// Per-lambda solutions for boundary data lambda*chi:
/// v (semilinear), V = dF/du(v), v1 (first linearization, boundary chi),
/// v2 (second linearization, zero boundary, source -d2F/du2(v) v1^2).
struct LambdaSlice {
    double lambda = 0.0;
    Field v, V, v1, v2;
};

class LinearizationBundle {
public:
    LinearizationBundle(std::shared_ptr<const SemilinearTerm> F, BoundaryProfile chi, double r,
                        std::vector<double> lambda_grid, LinearizeOptions options);

    const std::vector<double>& lambda_grid() const noexcept { return lambdas_; }
    double r() const noexcept { return r_; }
    std::size_t size() const noexcept { return slices_.size(); }
    const LambdaSlice& slice(std::size_t k) const { return slices_.at(k); }
    std::size_t zero_index() const noexcept { return slices_.size() / 2; }

    const Field& v(std::size_t k) const { return slices_.at(k).v; }
    const Field& V(std::size_t k) const { return slices_.at(k).V; }
    const Field& v1(std::size_t k) const { return slices_.at(k).v1; }
    const Field& v2(std::size_t k) const { return slices_.at(k).v2; }

    const SemilinearTerm& F() const { return *F_; }
    const std::shared_ptr<const SemilinearTerm>& F_ptr() const noexcept { return F_; }
    const BoundaryProfile& chi() const noexcept { return chi_; }
    const LinearizeOptions& options() const noexcept { return options_; }
    const GridPtr& grid_ptr() const { return chi_.values.grid_ptr(); }
    int levels() const;

    /// Solves the full cascade at an arbitrary lambda (not stored).
    LambdaSlice solve_at(double lambda) const;

private:
    std::shared_ptr<const SemilinearTerm> F_;
    BoundaryProfile chi_;
    double r_;
    std::vector<double> lambdas_;
    LinearizeOptions options_;
    std::vector<LambdaSlice> slices_;
};

/// Computes the cascade on symmetric_lambda_grid(r, n_lambda). Solver
/// failures are rethrown as SolverError with the offending lambda in the message.
LinearizationBundle build_bundle(std::shared_ptr<const SemilinearTerm> F, const BoundaryProfile& chi, double r,
                                 int n_lambda, const LinearizeOptions& options = {});

/// One cascade slice for boundary data lambda*chi; the building block of build_bundle.
LambdaSlice solve_cascade(const SemilinearTerm& F, const BoundaryProfile& chi, double lambda,
                          const LinearizeOptions& options);

struct DerivativeCheckReport {
    std::string name;
    double lambda = 0.0;
    std::vector<double> steps;
    std::vector<double> errors;
    double slope = 0.0;  // least-squares slope of log(error) vs log(step)
};

/// Least-squares slope of log(y) vs log(x); pairs with y <= 0 are skipped.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// E(s) = sup |(u_{lambda, s h} - u_{lambda, 0})/s - u1| with u1 the linear
/// solve with potential dF/du(u_{lambda,0}) and boundary h.
DerivativeCheckReport check_frechet_s(const SemilinearTerm& F, const BoundaryProfile& chi, double lambda,
                                      const BoundarySeries& h, std::span<const double> steps,
                                      const LinearizeOptions& options = {});

/// E(delta) = sup |(v1_{lambda+delta} - v1_lambda)/delta - v2_lambda|.
DerivativeCheckReport check_frechet_lambda(const LinearizationBundle& bundle, double lambda,
                                           std::span<const double> deltas);

/// Max over lambda of sup|v_lambda - trapz_0^lambda v1| / sup|v_lambda|.
double integral_identity_check(const LinearizationBundle& bundle);

/// Trapezoid partial integrals from the zero node outward: out[k] is the
/// integral of f over [lambda_0, lambda_k] for the zero index k0 of `lambdas`.
/// `samples[k]` are fields at lambda_k; returns one Field per k.
std::vector<Field> trapezoid_from_zero(std::span<const double> lambdas, std::size_t zero_index,
                                       const std::vector<const Field*>& samples);

}  // namespace pinv
