#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pinv/error.hpp"
#include "pinv/field.hpp"
#include "pinv/nonlinearity.hpp"

namespace pinv {

enum class Scheme { implicit_euler, crank_nicolson };

Scheme parse_scheme(const std::string& name);
const char* to_string(Scheme s);

struct SolverOptions {
    double newton_tol = 1e-10;  // on dt * ||residual||_inf
    int max_newton = 25;
    int max_halvings = 12;
    double blowup_cap = 1e6;
};

/// du/dt - Lap u + F(t,x,u) = 0 with Dirichlet data, zero initial state,
/// solved on [0, horizon].
struct SemilinearProblem {
    GridPtr grid;
    std::shared_ptr<const SemilinearTerm> F;
    BoundarySeries dirichlet;
    double horizon = 0.0;
};

/// du/dt - Lap u + V u = source with Dirichlet data, zero initial state.
/// `potential` and `source` are read on interior nodes only.
struct LinearProblem {
    GridPtr grid;
    Field potential;
    Field source;  // empty (levels() == 0) means zero
    BoundarySeries dirichlet;
    double horizon = 0.0;
};

struct SolveReport {
    std::vector<int> newton_iterations;  // per step
    double max_residual = 0.0;           // max over steps of dt * ||R||_inf at acceptance
    bool blowup = false;
    int first_bad_level = -1;
    double sup_norm = 0.0;
};

class SolverError : public Error {
public:
    enum class Kind { newton_divergence, blow_up, singular };

    SolverError(Kind kind, const std::string& what, SolveReport report = {})
        : Error(what), kind_(kind), report_(std::move(report)) {}

    Kind kind() const noexcept { return kind_; }
    const SolveReport& report() const noexcept { return report_; }

private:
    Kind kind_;
    SolveReport report_;
};

/// Level count of a solve on [0, horizon]: floor(horizon/dt) + 1.
int horizon_levels(const SpaceTimeGrid& grid, double horizon);

struct SemilinearSolution {
    Field u;
    SolveReport report;
};

/// Newton with step halving per implicit step. Throws SolverError on
/// Newton failure or when the sup norm exceeds options.blowup_cap.
SemilinearSolution solve_semilinear(const SemilinearProblem& p, Scheme scheme = Scheme::implicit_euler,
                                    const SolverOptions& options = {});

Field solve_linear(const LinearProblem& p, Scheme scheme = Scheme::implicit_euler);

/// Shift M applied by positivity_shifted_solve: 0 when the implicit Euler
/// step matrix I/dt - Lap + V is already an M-matrix (dt * max(-V) < 1),
/// sup|V| otherwise.
double positivity_shift(const LinearProblem& p);

/// Implicit Euler solve whose step matrices are M-matrices for any bounded V.
/// When a shift is needed the problem is solved for w = exp(-M t) u with
/// potential V + M and the result rescaled by exp(M t).
Field positivity_shifted_solve(const LinearProblem& p);

/// Factorization of the interior step matrix diag(D) - kappa * Lap_h.
/// Tridiagonal elimination in 1D, sparse LU in 2D.
class StepMatrix {
public:
    explicit StepMatrix(const SpaceTimeGrid& grid);
    ~StepMatrix();
    StepMatrix(StepMatrix&&) noexcept;
    StepMatrix& operator=(StepMatrix&&) noexcept;

    /// Throws SolverError(singular) when a pivot vanishes.
    void factor(std::span<const double> diagonal, double kappa);
    void solve(std::span<double> rhs) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Adds kappa * (boundary neighbour contributions of Lap_h) to rhs, using the
/// boundary values stored in the full spatial level `values`.
void add_boundary_coupling(const SpaceTimeGrid& grid, std::span<const double> values, double kappa,
                           std::span<double> rhs);

/// Samples q(t,x) on every node and level of a solve over [0, horizon].
Field sample_potential(const GridPtr& grid, double horizon, const SpaceTimeFn& q);

}  // namespace pinv
