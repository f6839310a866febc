#include "pinv/nonlinearity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "pinv/error.hpp"

namespace pinv {

SemilinearTerm::SemilinearTerm(std::string name, TermFn value, TermFn du, TermFn d2u, HypothesisMetadata meta)
    : name_(std::move(name)), value_(std::move(value)), du_(std::move(du)), d2u_(std::move(d2u)),
      meta_(std::move(meta)) {}

SemilinearTerm SemilinearTerm::plus(const SemilinearTerm& other, double scale) const {
    auto a = *this;
    auto b = other;
    return SemilinearTerm(
        fmt::format("{}+{}*{}", name_, scale, other.name_),
        [a, b, scale](double t, const Coord& x, double u) { return a.value(t, x, u) + scale * b.value(t, x, u); },
        [a, b, scale](double t, const Coord& x, double u) { return a.du(t, x, u) + scale * b.du(t, x, u); },
        [a, b, scale](double t, const Coord& x, double u) { return a.d2u(t, x, u) + scale * b.d2u(t, x, u); });
}

namespace {

double param(const FamilyParams& p, const char* key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void require_known(const std::string& family, const FamilyParams& p, std::initializer_list<const char*> keys) {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : p) {
        if (!allowed.count(k)) throw InvalidArgument(fmt::format("{}: unknown parameter '{}'", family, k));
        if (!std::isfinite(v)) throw InvalidArgument(fmt::format("{}: parameter '{}' is not finite", family, k));
    }
}

double spatial_mode(const Coord& x) {
    return std::sin(std::numbers::pi * x[0]) * (x[1] == 0.0 ? 1.0 : std::sin(std::numbers::pi * x[1]));
}

// Quintic Hermite basis on [0,1] for (slope at 0) and (value, slope, curvature at 1);
// value and curvature at 0 are pinned to zero.
struct JoinBasis {
    std::array<double, 4> h, dh, d2h;
};

JoinBasis join_basis(double z) {
    const double z2 = z * z, z3 = z2 * z, z4 = z3 * z, z5 = z4 * z;
    return {{z - 6 * z3 + 8 * z4 - 3 * z5, 10 * z3 - 15 * z4 + 6 * z5, -4 * z3 + 7 * z4 - 3 * z5,
             0.5 * z3 - z4 + 0.5 * z5},
            {1 - 18 * z2 + 32 * z3 - 15 * z4, 30 * z2 - 60 * z3 + 30 * z4, -12 * z2 + 28 * z3 - 15 * z4,
             1.5 * z2 - 4 * z3 + 2.5 * z4},
            {-36 * z + 96 * z2 - 60 * z3, 60 * z - 180 * z2 + 120 * z3, -24 * z + 84 * z2 - 60 * z3,
             3 * z - 12 * z2 + 10 * z3}};
}

// One side of the power law: g(u) = q (1+u)^gamma for u >= eps, quintic join below.
struct PowerSide {
    double q, gamma, eps, slope0;

    std::array<double, 3> target() const {  // value, slope, curvature at eps
        const double b = 1.0 + eps;
        return {q * std::pow(b, gamma), q * gamma * std::pow(b, gamma - 1),
                q * gamma * (gamma - 1) * std::pow(b, gamma - 2)};
    }

    // Returns g, g', g'' at u >= 0.
    std::array<double, 3> eval(double u) const {
        if (u >= eps) {
            const double b = 1.0 + u;
            return {q * std::pow(b, gamma), q * gamma * std::pow(b, gamma - 1),
                    q * gamma * (gamma - 1) * std::pow(b, gamma - 2)};
        }
        const auto [f, f1, f2] = target();
        const std::array<double, 4> c{slope0 * eps, f, f1 * eps, f2 * eps * eps};
        const auto basis = join_basis(u / eps);
        std::array<double, 3> out{0, 0, 0};
        for (int k = 0; k < 4; ++k) {
            out[0] += c[k] * basis.h[k];
            out[1] += c[k] * basis.dh[k] / eps;
            out[2] += c[k] * basis.d2h[k] / (eps * eps);
        }
        return out;
    }
};

// Slope at 0 of the odd quintic a1 u + a3 u^3 + a5 u^5 matching (f, f', f'') at eps.
double odd_quintic_slope(double eps, double f, double f1, double f2) {
    // Eliminate a1 between the value and slope conditions.
    const double e2 = eps * eps, e4 = e2 * e2;
    // (slope) - (value)/eps:  2 a3 e2 + 4 a5 e4 = f1 - f/eps
    // curvature:              6 a3 eps + 20 a5 eps^3 = f2
    const double r1 = f1 - f / eps;
    const double det = 2 * e2 * 20 * eps * e2 - 4 * e4 * 6 * eps;
    const double a3 = (r1 * 20 * eps * e2 - 4 * e4 * f2) / det;
    const double a5 = (2 * e2 * f2 - 6 * eps * r1) / det;
    return f / eps - a3 * e2 - a5 * e4;
}

}  // namespace

std::vector<std::string> builtin_family_names() {
    return {"zero", "linear_potential", "cubic_absorbing", "power_law_fnon", "logistic"};
}

SpaceTimeFn linear_potential_coefficient(const FamilyParams& params) {
    const double q0 = param(params, "q0", 1.0);
    const double q1 = param(params, "q1", 0.5);
    return [q0, q1](double t, const Coord& x) { return q0 + q1 * (1.0 + t) * spatial_mode(x); };
}

SemilinearTerm builtin_family(const std::string& name, const FamilyParams& params) {
    if (name == "zero") {
        require_known(name, params, {});
        HypothesisMetadata m;
        m.satisfies_t1a = m.satisfies_t1b = true;
        m.mu = [](double) { return 0.0; };
        m.b1 = 0.0;
        m.b2 = 0.0;
        auto zero = [](double, const Coord&, double) { return 0.0; };
        return SemilinearTerm(name, zero, zero, zero, std::move(m));
    }
    if (name == "linear_potential") {
        require_known(name, params, {"q0", "q1"});
        auto q = linear_potential_coefficient(params);
        const double bound = std::abs(param(params, "q0", 1.0)) + 2.0 * std::abs(param(params, "q1", 0.5));
        HypothesisMetadata m;
        m.satisfies_t1a = m.satisfies_t1b = true;
        // |q| + |dq/dt| + |grad q| on the unit cell.
        m.kappa0 = bound + std::abs(param(params, "q1", 0.5)) * (1.0 + 2.0 * std::numbers::pi * 2.0);
        m.mu = [bound](double s) { return bound * s; };
        m.b1 = bound;
        m.b2 = 0.0;
        return SemilinearTerm(
            name, [q](double t, const Coord& x, double u) { return q(t, x) * u; },
            [q](double t, const Coord& x, double) { return q(t, x); },
            [](double, const Coord&, double) { return 0.0; }, std::move(m));
    }
    if (name == "cubic_absorbing") {
        require_known(name, params, {"c0", "c1"});
        const double c0 = param(params, "c0", 1.0);
        const double c1 = param(params, "c1", 0.0);
        if (c0 - std::abs(c1) < 0.0) throw InvalidArgument("cubic_absorbing: c(x) = c0 + c1 sin.. must be >= 0");
        auto c = [c0, c1](const Coord& x) { return c0 + c1 * spatial_mode(x); };
        HypothesisMetadata m;
        m.satisfies_t1a = m.satisfies_t1b = true;
        m.kappa0 = 0.0;
        const double cmax = c0 + std::abs(c1);
        m.mu = [cmax](double s) { return cmax * s * s * s; };
        return SemilinearTerm(
            name, [c](double, const Coord& x, double u) { return -c(x) * u * u * u; },
            [c](double, const Coord& x, double u) { return -3.0 * c(x) * u * u; },
            [c](double, const Coord& x, double u) { return -6.0 * c(x) * u; }, std::move(m));
    }
    if (name == "power_law_fnon") {
        require_known(name, params, {"q_plus", "q_minus", "gamma_plus", "gamma_minus", "eps1"});
        const double qp = param(params, "q_plus", -0.1);
        const double qm = param(params, "q_minus", 0.1);
        const double gp = param(params, "gamma_plus", 4.0);
        const double gm = param(params, "gamma_minus", 4.0);
        const double eps = param(params, "eps1", 0.5);
        if (gp < 1.0 || gm < 1.0) throw InvalidArgument("power_law_fnon: exponents must satisfy gamma >= 1");
        if (qp > 0.0 || qm < 0.0) throw InvalidArgument("power_law_fnon: need q_plus <= 0 and q_minus >= 0");
        if (!(eps > 0.0)) throw InvalidArgument("power_law_fnon: eps1 must be positive");

        PowerSide plus{qp, gp, eps, 0.0};
        PowerSide minus{qm, gm, eps, 0.0};
        // Shared slope at u = 0: mean of the two odd-quintic slopes, so the
        // symmetric case q_minus = -q_plus reproduces an odd join exactly.
        const auto tp = plus.target();
        const auto tm = minus.target();
        const double s_plus = odd_quintic_slope(eps, tp[0], tp[1], tp[2]);
        const double s_minus = odd_quintic_slope(eps, -tm[0], -tm[1], -tm[2]);
        const double s0 = 0.5 * (s_plus + s_minus);
        plus.slope0 = s0;
        minus.slope0 = -s0;  // g(u) = F(-u) has slope -F'(0)

        auto eval = [plus, minus](double u) -> std::array<double, 3> {
            if (u >= 0.0) return plus.eval(u);
            const auto g = minus.eval(-u);
            return {g[0], -g[1], g[2]};
        };

        HypothesisMetadata m;
        m.satisfies_t1a = true;
        bool concave = true;
        for (int k = 0; k <= 400; ++k) {
            const double u = eps * 1.5 * k / 400.0;
            if (eval(u)[2] > 1e-12 || eval(-u)[2] < -1e-12) concave = false;
        }
        m.satisfies_t1b = concave;
        m.kappa0 = std::abs(s0);
        return SemilinearTerm(
            name, [eval](double, const Coord&, double u) { return eval(u)[0]; },
            [eval](double, const Coord&, double u) { return eval(u)[1]; },
            [eval](double, const Coord&, double u) { return eval(u)[2]; }, std::move(m));
    }
    if (name == "logistic") {
        require_known(name, params, {"rho", "K"});
        const double rho = param(params, "rho", 1.0);
        const double cap = param(params, "K", 1.0);
        if (!(cap > 0.0)) throw InvalidArgument("logistic: K must be positive");
        HypothesisMetadata m;
        m.satisfies_t1a = true;
        m.satisfies_t1b = rho <= 0.0;
        m.kappa0 = std::abs(rho) + 2.0 * std::abs(rho) / cap;
        return SemilinearTerm(
            name, [rho, cap](double, const Coord&, double u) { return -rho * u * (1.0 - u / cap); },
            [rho, cap](double, const Coord&, double u) { return -rho + 2.0 * rho * u / cap; },
            [rho, cap](double, const Coord&, double) { return 2.0 * rho / cap; }, std::move(m));
    }
    throw InvalidArgument(fmt::format("unknown nonlinearity family '{}'", name));
}

SemilinearTerm u_bump(double center, double width, double amplitude) {
    if (!(width > 0.0)) throw InvalidArgument("u_bump: width must be positive");
    auto parts = [=](double u) -> std::array<double, 3> {
        const double z = (u - center) / width;
        if (std::abs(z) >= 1.0) return {0.0, 0.0, 0.0};
        const double a = 1.0 - z * z;
        const double a3 = a * a * a, a4 = a3 * a;
        // d/dz (1-z^2)^5 = -10 z (1-z^2)^4 ; d2/dz2 = -10 (1-z^2)^4 + 80 z^2 (1-z^2)^3
        return {amplitude * a4 * a, amplitude * (-10.0 * z * a4) / width,
                amplitude * (-10.0 * a4 + 80.0 * z * z * a3) / (width * width)};
    };
    HypothesisMetadata m;
    m.satisfies_t1a = std::abs(center) >= width;
    return SemilinearTerm(
        fmt::format("u_bump({},{},{})", center, width, amplitude),
        [parts](double, const Coord&, double u) { return parts(u)[0]; },
        [parts](double, const Coord&, double u) { return parts(u)[1]; },
        [parts](double, const Coord&, double u) { return parts(u)[2]; }, std::move(m));
}

namespace {

// Cell index and weight for x on a sorted axis, clamped to the end cells.
std::pair<std::size_t, double> locate(const std::vector<double>& axis, double x) {
    if (axis.size() == 1) return {0, 0.0};
    auto it = std::upper_bound(axis.begin(), axis.end(), x);
    std::size_t i = it == axis.begin() ? 0 : static_cast<std::size_t>(it - axis.begin()) - 1;
    i = std::min(i, axis.size() - 2);
    const double w = (x - axis[i]) / (axis[i + 1] - axis[i]);
    return {i, std::clamp(w, 0.0, 1.0)};
}

}  // namespace

SemilinearTerm tabulated_term(TermTable table) {
    const std::size_t nd = table.x_axes.size();
    if (nd < 1 || nd > 2) throw InvalidArgument("tabulated term needs 1 or 2 spatial axes");
    std::size_t expected = table.t_axis.size() * table.u_axis.size();
    auto check_axis = [](const std::vector<double>& a, const char* what) {
        if (a.empty()) throw InvalidArgument(fmt::format("tabulated term: empty {} axis", what));
        if (!std::is_sorted(a.begin(), a.end()) || std::adjacent_find(a.begin(), a.end()) != a.end()) {
            throw InvalidArgument(fmt::format("tabulated term: {} axis must be strictly increasing", what));
        }
    };
    check_axis(table.t_axis, "t");
    check_axis(table.u_axis, "u");
    if (table.u_axis.size() < 2) throw InvalidArgument("tabulated term: need at least two u samples");
    for (const auto& ax : table.x_axes) {
        check_axis(ax, "x");
        expected *= ax.size();
    }
    if (table.values.size() != expected) {
        throw InvalidArgument(fmt::format("tabulated term: expected {} values, got {}", expected, table.values.size()));
    }

    auto shared = std::make_shared<const TermTable>(std::move(table));
    // Returns (value, du) of the multilinear interpolant.
    auto interp = [shared](double t, const Coord& x, double u) -> std::array<double, 2> {
        const auto& tb = *shared;
        const std::size_t nd = tb.x_axes.size();
        const std::size_t nu = tb.u_axis.size();
        const auto [it, wt] = locate(tb.t_axis, t);
        const auto [ix, wx] = locate(tb.x_axes[0], x[0]);
        std::size_t iy = 0;
        double wy = 0.0;
        if (nd == 2) std::tie(iy, wy) = locate(tb.x_axes[1], x[1]);
        const auto [iu, wu] = locate(tb.u_axis, u);
        const double du_cell = tb.u_axis[iu + 1] - tb.u_axis[iu];
        const std::size_t nx = tb.x_axes[0].size();
        const std::size_t ny = nd == 2 ? tb.x_axes[1].size() : 1;
        double val = 0.0, der = 0.0;
        const int tcount = tb.t_axis.size() > 1 ? 2 : 1;
        const int xcount = nx > 1 ? 2 : 1;
        const int ycount = ny > 1 ? 2 : 1;
        for (int a = 0; a < tcount; ++a) {
            for (int b = 0; b < xcount; ++b) {
                for (int c = 0; c < ycount; ++c) {
                    const double w = (a ? wt : 1 - wt) * (b ? wx : 1 - wx) * (c ? wy : 1 - wy);
                    const std::size_t base = (((it + a) * ny + (iy + c)) * nx + (ix + b)) * nu + iu;
                    const double f0 = tb.values[base];
                    const double f1 = tb.values[base + 1];
                    val += w * ((1 - wu) * f0 + wu * f1);
                    der += w * (f1 - f0) / du_cell;
                }
            }
        }
        return {val, der};
    };
    return SemilinearTerm(
        "tabulated", [interp](double t, const Coord& x, double u) { return interp(t, x, u)[0]; },
        [interp](double t, const Coord& x, double u) { return interp(t, x, u)[1]; },
        [](double, const Coord&, double) { return 0.0; });
}

// --- hypothesis checks -----------------------------------------------------

bool HypothesisReport::passed() const {
    return std::none_of(entries.begin(), entries.end(),
                        [](const HypothesisEntry& e) { return e.status == HypothesisStatus::fail; });
}

const HypothesisEntry& HypothesisReport::at(const std::string& name) const {
    for (const auto& e : entries) {
        if (e.name == name) return e;
    }
    throw InvalidArgument(fmt::format("no hypothesis entry '{}'", name));
}

const char* to_string(HypothesisStatus s) {
    switch (s) {
        case HypothesisStatus::pass: return "pass";
        case HypothesisStatus::fail: return "fail";
        case HypothesisStatus::not_checked: return "not-checked";
    }
    return "?";
}

namespace {

std::vector<int> strided(int count, int target) {
    std::vector<int> out;
    const int stride = std::max(1, (count - 1) / (target - 1));
    for (int i = 0; i < count; i += stride) out.push_back(i);
    if (out.back() != count - 1) out.push_back(count - 1);
    return out;
}

// Tracks the largest violation of `quantity <= 0` across probes.
struct Worst {
    HypothesisEntry entry;
    bool any = false;

    explicit Worst(std::string name) { entry.name = std::move(name); }

    void observe(const ProbePoint& p, double reported, double violation, double tol) {
        if (!any || violation > worst_violation) {
            worst_violation = violation;
            entry.worst_point = p;
            entry.worst_value = reported;
            any = true;
        }
        if (violation > tol && !entry.witness) entry.witness = p;
    }

    HypothesisEntry finish() {
        entry.status = entry.witness ? HypothesisStatus::fail : HypothesisStatus::pass;
        return entry;
    }

    double worst_violation = 0.0;
};

std::vector<double> u_probes(double u_max, int n) {
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(u_max * k / (n - 1));
    return out;
}

}  // namespace

std::vector<std::pair<double, Coord>> probe_sites(const SpaceTimeGrid& grid) {
    std::vector<std::pair<double, Coord>> out;
    const auto levels = strided(grid.nt() + 1, 41);
    const auto xs = strided(grid.points(0), 41);
    const auto ys = grid.dim() == 2 ? strided(grid.points(1), 41) : std::vector<int>{0};
    for (int n : levels) {
        for (int j : ys) {
            for (int i : xs) out.emplace_back(grid.time(n), grid.coord(grid.node_id(i, j)));
        }
    }
    return out;
}

HypothesisReport check_t1a(const SemilinearTerm& f, const SpaceTimeGrid& grid) {
    Worst w("t1a");
    for (const auto& [t, x] : probe_sites(grid)) {
        const double v = f.value(t, x, 0.0);
        w.observe({t, x, 0.0}, v, std::abs(v), 1e-12);
    }
    return {{w.finish()}};
}

HypothesisReport check_t1b(const SemilinearTerm& f, const SpaceTimeGrid& grid, double u_max) {
    if (!(u_max > 0.0)) throw InvalidArgument("check_t1b: u_max must be positive");
    Worst w("t1b");
    const auto us = u_probes(u_max, 41);
    for (const auto& [t, x] : probe_sites(grid)) {
        for (double u : us) {
            const double pos = f.d2u(t, x, u);
            w.observe({t, x, u}, pos, pos, 1e-10);
            const double neg = f.d2u(t, x, -u);
            w.observe({t, x, -u}, neg, -neg, 1e-10);
        }
    }
    return {{w.finish()}};
}

HypothesisReport check_t1d(const SemilinearTerm& f, const SpaceTimeFn& q, const SpaceTimeGrid& grid) {
    Worst w("t1d");
    for (const auto& [t, x] : probe_sites(grid)) {
        const double d = f.du(t, x, 0.0);
        w.observe({t, x, 0.0}, d, d - q(t, x), 1e-12);
    }
    return {{w.finish()}};
}

HypothesisReport check_derivatives(const SemilinearTerm& f, const SpaceTimeGrid& grid, double u_max) {
    Worst d1("du_consistency");
    Worst d2("d2u_consistency");
    const auto us = u_probes(2.0 * u_max, 9);
    for (const auto& [t, x] : probe_sites(grid)) {
        for (double u0 : us) {
            const double u = u0 - u_max;
            // Small step: the power-law join is only C^2, so the second
            // difference picks up an O(eta) error right at |u| = eps1.
            const double eta = 1e-6 * std::max(1.0, std::abs(u));
            const double fd1 = (f.value(t, x, u + eta) - f.value(t, x, u - eta)) / (2 * eta);
            const double fd2 = (f.du(t, x, u + eta) - f.du(t, x, u - eta)) / (2 * eta);
            const double e1 = std::abs(f.du(t, x, u) - fd1) / std::max(1.0, std::abs(fd1));
            const double e2 = std::abs(f.d2u(t, x, u) - fd2) / std::max(1.0, std::abs(fd2));
            d1.observe({t, x, u}, e1, e1, 1e-6);
            d2.observe({t, x, u}, e2, e2, 1e-5);
        }
    }
    return {{d1.finish(), d2.finish()}};
}

HypothesisReport check_growth(const SemilinearTerm& f, const SpaceTimeGrid& grid, double u_max) {
    const auto& m = f.metadata();
    HypothesisReport report;
    const auto us = u_probes(u_max, 21);
    const auto sites = probe_sites(grid);

    if (m.mu) {
        Worst w("P1");
        for (const auto& [t, x] : sites) {
            for (double u : us) {
                for (double s : {u, -u}) {
                    const double v = std::abs(f.value(t, x, s)) - m.mu(std::abs(s));
                    w.observe({t, x, s}, v, v, 1e-12);
                }
            }
        }
        report.entries.push_back(w.finish());
    } else {
        report.entries.push_back({"P1", HypothesisStatus::not_checked, {}, 0.0, std::nullopt});
    }

    Worst p2("P2");
    for (const auto& b : grid.boundary_nodes()) {
        const auto& x = grid.coord(b.node);
        const double v = f.value(0.0, x, 0.0);
        p2.observe({0.0, x, 0.0}, v, std::abs(v), 1e-12);
    }
    report.entries.push_back(p2.finish());

    if (m.b1 && m.b2) {
        Worst w("P3");
        for (const auto& [t, x] : sites) {
            for (double u : us) {
                for (double s : {u, -u}) {
                    const double lhs = f.value(t, x, s) * s;
                    const double v = -(*m.b1) * s * s - *m.b2 - lhs;
                    w.observe({t, x, s}, lhs, v, 1e-12);
                }
            }
        }
        report.entries.push_back(w.finish());
    } else {
        report.entries.push_back({"P3", HypothesisStatus::not_checked, {}, 0.0, std::nullopt});
    }
    return report;
}

}  // namespace pinv
