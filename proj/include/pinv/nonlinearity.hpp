#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pinv/grid.hpp"

namespace pinv {

/// (t, x, u) -> real.
using TermFn = std::function<double(double, const Coord&, double)>;
/// (t, x) -> real.
using SpaceTimeFn = std::function<double(double, const Coord&)>;

/// Declared hypothesis flags carried alongside a semilinear term.
struct HypothesisMetadata {
    bool satisfies_t1a = false;  // F(t,x,0) = 0
    bool satisfies_t1b = false;  // d2F/du2 <= 0 for u >= 0, >= 0 for u <= 0
    double kappa0 = 0.0;         // bound on sum_k ||d^k F/du^k (.,0)||_{W^{1,inf}}, k <= 2
    std::function<double(double)> mu;  // growth bound |F(t,x,u)| <= mu(|u|), empty if unknown
    std::optional<double> b1;          // F(t,x,u) u >= -b1 u^2 - b2
    std::optional<double> b2;
};

/// Evaluatable nonlinearity F(t,x,u) with its first two u-derivatives.
/// Immutable; safe to evaluate from several threads.
class SemilinearTerm {
public:
    SemilinearTerm(std::string name, TermFn value, TermFn du, TermFn d2u, HypothesisMetadata meta = {});

    double value(double t, const Coord& x, double u) const { return value_(t, x, u); }
    double du(double t, const Coord& x, double u) const { return du_(t, x, u); }
    double d2u(double t, const Coord& x, double u) const { return d2u_(t, x, u); }

    const std::string& name() const noexcept { return name_; }
    const HypothesisMetadata& metadata() const noexcept { return meta_; }

    /// this + scale * other; metadata flags are not inferred and must be re-checked.
    SemilinearTerm plus(const SemilinearTerm& other, double scale) const;

private:
    std::string name_;
    TermFn value_;
    TermFn du_;
    TermFn d2u_;
    HypothesisMetadata meta_;
};

using FamilyParams = std::map<std::string, double>;

/// Names accepted by builtin_family().
std::vector<std::string> builtin_family_names();

/// zero | linear_potential | cubic_absorbing | power_law_fnon | logistic.
/// Unspecified parameters take documented defaults; throws InvalidArgument
/// for unknown names/parameters or values outside the family's admissible set.
SemilinearTerm builtin_family(const std::string& name, const FamilyParams& params = {});

/// The spatial-temporal coefficient q(t,x) used by linear_potential.
SpaceTimeFn linear_potential_coefficient(const FamilyParams& params);

/// Compactly supported C^4 bump in u: amplitude * (1 - z^2)^5, z = (u - center)/width.
SemilinearTerm u_bump(double center, double width, double amplitude);

/// Multilinear interpolation of tabulated samples on a (t, x[, y], u) lattice.
/// `values` is row-major with u fastest, then x (then y), then t.
struct TermTable {
    std::vector<double> t_axis;
    std::vector<std::vector<double>> x_axes;  // one per spatial dimension
    std::vector<double> u_axis;
    std::vector<double> values;
};

/// The derivative in u is that of the piecewise-linear interpolant; d2u is 0.
SemilinearTerm tabulated_term(TermTable table);

// --- hypothesis checks -----------------------------------------------------

enum class HypothesisStatus { pass, fail, not_checked };

struct ProbePoint {
    double t = 0.0;
    Coord x{0.0, 0.0};
    double u = 0.0;
};

struct HypothesisEntry {
    std::string name;
    HypothesisStatus status = HypothesisStatus::not_checked;
    ProbePoint worst_point;
    double worst_value = 0.0;       // the checked quantity at worst_point
    std::optional<ProbePoint> witness;  // always set when status == fail
};

struct HypothesisReport {
    std::vector<HypothesisEntry> entries;

    bool passed() const;
    const HypothesisEntry& at(const std::string& name) const;
};

const char* to_string(HypothesisStatus s);

/// (t,x) probe sites: up to ~41 time levels and ~41 nodes per axis, endpoints kept.
std::vector<std::pair<double, Coord>> probe_sites(const SpaceTimeGrid& grid);

HypothesisReport check_t1a(const SemilinearTerm& f, const SpaceTimeGrid& grid);
HypothesisReport check_t1b(const SemilinearTerm& f, const SpaceTimeGrid& grid, double u_max);
HypothesisReport check_t1d(const SemilinearTerm& f, const SpaceTimeFn& q, const SpaceTimeGrid& grid);

/// du/d2u against centered differences of value/du on a probe lattice in (t,x,u).
HypothesisReport check_derivatives(const SemilinearTerm& f, const SpaceTimeGrid& grid, double u_max);

/// (P1)-(P3) from the declared metadata; entries without metadata are not_checked.
HypothesisReport check_growth(const SemilinearTerm& f, const SpaceTimeGrid& grid, double u_max);

}  // namespace pinv
