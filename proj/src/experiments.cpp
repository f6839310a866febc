#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "pinv/cli.hpp"
#include "pinv/dnmap.hpp"
#include "pinv/io.hpp"
#include "pinv/linearize.hpp"
#include "pinv/reachable.hpp"
#include "pinv/reconstruct.hpp"
#include "pinv/stability.hpp"

namespace pinv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCodeVersion = "pinv 0.1.0";

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Experiment-specific block with strict key checking.
class Section {
public:
    Section(const json& j, std::string name, std::initializer_list<const char*> keys) : j_(j), name_(std::move(name)) {
        std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& [k, v] : j_.items()) {
            if (!allowed.count(k)) throw ConfigError(fmt::format("unknown key '{}.{}'", name_, k));
        }
    }

    template <typename T>
    T get(const char* key, T fallback) const {
        if (!j_.contains(key)) return fallback;
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(fmt::format("'{}.{}' has the wrong type", name_, key));
        }
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& at(const char* key) const { return j_.at(key); }

private:
    const json& j_;
    std::string name_;
};

struct RunContext {
    ScenarioConfig cfg;
    fs::path out;
    std::set<std::string> files;
    json stages = json::array();
    json summary = json::object();
    GridPtr grid;
    std::shared_ptr<const SemilinearTerm> F;

    fs::path file(const std::string& rel) {
        const fs::path p = out / rel;
        fs::create_directories(p.parent_path());
        files.insert(rel);
        return p;
    }

    void write_json(const std::string& rel, const json& j) {
        std::ofstream os(file(rel), std::ios::binary);
        os << j.dump(2) << '\n';
        if (!os) throw Error(fmt::format("cannot write {}", rel));
    }

    template <typename Fn>
    auto stage(const std::string& name, Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        json rec{{"name", name}, {"status", "running"}};
        auto finish = [&](const char* status, const std::string& msg) {
            rec["status"] = status;
            rec["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (!msg.empty()) rec["message"] = msg;
            stages.push_back(rec);
        };
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                finish("ok", "");
            } else {
                auto r = fn();
                finish("ok", "");
                return r;
            }
        } catch (const std::exception& e) {
            finish("failed", e.what());
            throw;
        }
    }

    LinearizeOptions lin() const {
        LinearizeOptions o;
        o.horizon = cfg.horizon;
        o.scheme = cfg.scheme;
        o.solver = cfg.solver;
        o.threads = cfg.threads;
        return o;
    }

    BoundaryProfile chi() const { return build_chi(grid, cfg.delta1, cfg.delta2, cfg.horizon, cfg.epsilon); }
    int levels() const { return horizon_levels(*grid, cfg.horizon); }
};

json grid_json(const SpaceTimeGrid& g) {
    json j{{"dim", g.dim()}, {"nt", g.nt()}, {"T", g.final_time()}, {"dt", g.dt()}};
    for (int a = 0; a < g.dim(); ++a) {
        j["extents"].push_back(g.extent(a));
        j["nx"].push_back(g.interior_points(a));
        j["h"].push_back(g.spacing(a));
    }
    return j;
}

json location_json(const SpaceTimeGrid& g, int level, std::size_t node) {
    const auto& x = g.coord(node);
    json j{{"level", level}, {"t", g.time(level)}, {"node", node}, {"x", x[0]}};
    if (g.dim() == 2) j["y"] = x[1];
    return j;
}

void write_trace_csv(const fs::path& path, const DNTrace& tr, int stride) {
    const auto& g = tr.values.grid();
    std::vector<std::string> header{"level", "t", "boundary", "x"};
    if (g.dim() == 2) header.push_back("y");
    header.push_back("dn");
    CsvWriter csv(path, header);
    const int levels = tr.values.levels();
    for (int n = 0; n < levels; ++n) {
        if (n % stride != 0 && n != levels - 1) continue;
        for (std::size_t b = 0; b < tr.values.width(); ++b) {
            const auto& x = g.coord(g.boundary_nodes()[b].node);
            csv << n << g.time(n) << b << x[0];
            if (g.dim() == 2) csv << x[1];
            csv << tr.values(n, b);
            csv.end_row();
        }
    }
    csv.close();
}

PerturbationShape parse_shape(const std::string& s) {
    if (s == "time_bump") return PerturbationShape::time_bump;
    if (s == "boundary_bump") return PerturbationShape::boundary_bump;
    if (s == "random_smooth") return PerturbationShape::random_smooth;
    throw ConfigError(fmt::format("unknown perturbation shape '{}'", s));
}

// --- experiments -------------------------------------------------------------

void run_forward(RunContext& ctx) {
    Section sec(ctx.cfg.section, "forward", {"lambda", "perturbation", "export_level_stride"});
    const double lambda = sec.get<double>("lambda", 0.0);
    const int stride = sec.get<int>("export_level_stride", 1);
    if (stride < 1) throw ConfigError("forward.export_level_stride must be >= 1");
    const auto chi = ctx.stage("chi", [&] { return ctx.chi(); });

    Perturbation h = zero_perturbation(ctx.grid);
    if (sec.has("perturbation")) {
        Section ps(sec.at("perturbation"), "forward.perturbation",
                   {"shape", "amplitude", "center", "width", "boundary_index", "spatial_width", "modes"});
        PerturbationSpec spec;
        spec.shape = parse_shape(ps.get<std::string>("shape", "time_bump"));
        spec.center = ps.get<double>("center", spec.center);
        spec.width = ps.get<double>("width", spec.width);
        spec.boundary_index = ps.get<std::size_t>("boundary_index", 0);
        spec.spatial_width = ps.get<double>("spatial_width", spec.spatial_width);
        spec.modes = ps.get<int>("modes", spec.modes);
        spec.seed = probe_seed(ctx.cfg.seed, 0);
        const double amp = ps.get<double>("amplitude", 0.5 * ctx.cfg.epsilon);
        h = ctx.stage("perturbation",
                      [&] { return make_perturbation(ctx.grid, spec, amp, ctx.cfg.epsilon, ctx.cfg.horizon); });
    }

    const auto sol = ctx.stage("solve", [&] {
        BoundarySeries g = chi.values.truncated(ctx.levels());
        for (double& v : g.values()) v *= lambda;
        g = axpy(g, 1.0, h.values.truncated(ctx.levels()));
        return solve_semilinear({ctx.grid, ctx.F, std::move(g), ctx.cfg.horizon}, ctx.cfg.scheme, ctx.cfg.solver);
    });
    ctx.stage("export", [&] {
        write_field_csv(ctx.file("solution.csv"), sol.u, stride);
        write_field_binary(ctx.file("solution.pinv"), sol.u);
        write_trace_csv(ctx.file("trace.csv"), trace_of(sol.u), stride);
    });
    int max_it = 0;
    for (int it : sol.report.newton_iterations) max_it = std::max(max_it, it);
    ctx.summary["forward"] = {{"lambda", lambda},
                              {"perturbation_norm", h.norm_surrogate},
                              {"sup_norm", sol.report.sup_norm},
                              {"max_newton_iterations", max_it},
                              {"max_residual", sol.report.max_residual},
                              {"delta2", chi.delta2}};
}

void run_linearize(RunContext& ctx) {
    Section sec(ctx.cfg.section, "linearize",
                {"checks", "frechet_s_lambda", "frechet_lambda_lambda", "steps", "export_level_stride", "export_fields"});
    const bool checks = sec.get<bool>("checks", true);
    const double ls = sec.get<double>("frechet_s_lambda", 0.5 * ctx.cfg.r);
    const double ll = sec.get<double>("frechet_lambda_lambda", 0.25 * ctx.cfg.r);
    const auto steps = sec.get<std::vector<double>>("steps", {0.1, 0.05, 0.025, 0.0125});
    const int stride = sec.get<int>("export_level_stride", 10);
    const bool export_fields = sec.get<bool>("export_fields", true);
    if (stride < 1) throw ConfigError("linearize.export_level_stride must be >= 1");

    const auto chi = ctx.stage("chi", [&] { return ctx.chi(); });
    const auto bundle = ctx.stage("bundle", [&] { return build_bundle(ctx.F, chi, ctx.cfg.r, ctx.cfg.n_lambda, ctx.lin()); });

    json sj;
    ctx.stage("invariants", [&] {
        double min_v1 = INFINITY, min_v2_pos = INFINITY;
        for (std::size_t k = 0; k < bundle.size(); ++k) {
            min_v1 = std::min(min_v1, bundle.v1(k).min());
            if (bundle.lambda_grid()[k] >= 0.0) min_v2_pos = std::min(min_v2_pos, bundle.v2(k).min());
        }
        sj["min_v1"] = min_v1;
        sj["min_v2_nonnegative_lambda"] = min_v2_pos;
        sj["sup_v_at_zero"] = bundle.v(bundle.zero_index()).sup_norm();
        sj["integral_identity_error"] = integral_identity_check(bundle);
        if (min_v1 < -1e-10) {
            throw InvariantViolation("first-order solution is negative", fmt::format("min v1 = {}", min_v1));
        }
    });
    ctx.stage("export", [&] {
        CsvWriter csv(ctx.file("lambda_grid.csv"), {"k", "lambda", "sup_v", "min_v1", "sup_v1", "sup_v2"});
        for (std::size_t k = 0; k < bundle.size(); ++k) {
            csv << k << bundle.lambda_grid()[k] << bundle.v(k).sup_norm() << bundle.v1(k).min()
                << bundle.v1(k).sup_norm() << bundle.v2(k).sup_norm();
            csv.end_row();
        }
        csv.close();
        if (!export_fields) return;
        const auto& g = *ctx.grid;
        for (std::size_t k = 0; k < bundle.size(); ++k) {
            std::vector<std::string> header{"level", "t", "node", "x"};
            if (g.dim() == 2) header.push_back("y");
            for (const char* h : {"v", "V", "v1", "v2"}) header.push_back(h);
            CsvWriter f(ctx.file(fmt::format("bundle/lambda_{:03d}.csv", k)), header);
            const int levels = bundle.levels();
            for (int n = 0; n < levels; ++n) {
                if (n % stride != 0 && n != levels - 1) continue;
                for (std::size_t id = 0; id < g.node_count(); ++id) {
                    const auto& x = g.coord(id);
                    f << n << g.time(n) << id << x[0];
                    if (g.dim() == 2) f << x[1];
                    f << bundle.v(k)(n, id) << bundle.V(k)(n, id) << bundle.v1(k)(n, id) << bundle.v2(k)(n, id);
                    f.end_row();
                }
            }
            f.close();
        }
    });
    if (checks) {
        ctx.stage("frechet", [&] {
            PerturbationSpec spec;
            const auto h = make_perturbation(ctx.grid, spec, ctx.cfg.epsilon, ctx.cfg.epsilon, ctx.cfg.horizon);
            const auto rs = check_frechet_s(*ctx.F, chi, ls, h.values, steps, ctx.lin());
            const auto rl = check_frechet_lambda(bundle, ll, steps);
            CsvWriter csv(ctx.file("frechet.csv"), {"check", "lambda", "step", "error"});
            for (const auto* r : {&rs, &rl}) {
                for (std::size_t i = 0; i < r->steps.size(); ++i) {
                    csv << std::string_view(r->name) << r->lambda << r->steps[i] << r->errors[i];
                    csv.end_row();
                }
            }
            csv.close();
            sj["frechet_s_slope"] = rs.slope;
            sj["frechet_lambda_slope"] = rl.slope;
        });
    }
    sj["bundle"] = {{"grid", grid_json(*ctx.grid)},
                    {"r", ctx.cfg.r},
                    {"n_lambda", ctx.cfg.n_lambda},
                    {"scheme", to_string(ctx.cfg.scheme)},
                    {"newton_tol", ctx.cfg.solver.newton_tol},
                    {"delta2", chi.delta2}};
    ctx.summary["linearize"] = sj;
}

SpaceTimeFn potential_fn(const TermSpec& q) {
    if (q.name == "zero") return [](double, const Coord&) { return 0.0; };
    if (q.name == "linear_potential") return linear_potential_coefficient(q.params);
    throw ConfigError(fmt::format("constants.q: '{}' is not a potential family (zero | linear_potential)", q.name));
}

TermSpec parse_q(const Section& sec) {
    TermSpec q{"zero", {}};
    if (!sec.has("q")) return q;
    Section qs(sec.at("q"), "constants.q", {"name", "params"});
    q.name = qs.get<std::string>("name", "zero");
    if (qs.has("params")) q.params = qs.get<FamilyParams>("params", {});
    return q;
}

void run_constants(RunContext& ctx) {
    Section sec(ctx.cfg.section, "constants", {"q", "kappa0"});
    const TermSpec q = parse_q(sec);
    const auto kappas = sec.get<std::vector<double>>("kappa0", {0.0, 1.0, 10.0});
    if (kappas.empty()) throw ConfigError("constants.kappa0 must list at least one value");
    const auto qfn = potential_fn(q);
    const auto chi = ctx.stage("chi", [&] { return ctx.chi(); });
    std::vector<ReachableConstants> results;
    ctx.stage("solve", [&] {
        for (double k : kappas) results.push_back(compute_constants(qfn, k, chi, ctx.cfg.horizon));
    });
    ctx.stage("export", [&] {
        const auto& g = *ctx.grid;
        CsvWriter csv(ctx.file("constants.csv"), {"quantity", "kappa0", "value", "t", "x", "y"});
        auto row = [&](const char* name, double k, const WindowMin& m) {
            const auto& x = g.coord(m.node);
            csv << std::string_view(name) << k << m.value << g.time(m.level) << x[0] << x[1];
            csv.end_row();
        };
        row("a1", NAN, results.front().a1_at);
        for (std::size_t i = 0; i < kappas.size(); ++i) row("a2", kappas[i], results[i].a2_at);
        csv.close();
    });
    json sj{{"q", q.name}, {"delta2", chi.delta2}, {"a1", results.front().a1},
            {"a1_at", location_json(*ctx.grid, results.front().a1_at.level, results.front().a1_at.node)},
            {"window", {{"first_level", results.front().window.first_level},
                        {"last_level", results.front().window.last_level}}}};
    for (std::size_t i = 0; i < kappas.size(); ++i) {
        sj["a2"].push_back({{"kappa0", kappas[i]},
                            {"value", results[i].a2},
                            {"at", location_json(*ctx.grid, results[i].a2_at.level, results[i].a2_at.node)}});
    }
    sj["note"] = "both constants are minima over grid nodes with delta1 < t <= horizon";
    ctx.summary["constants"] = sj;
}

double guaranteed_a2(RunContext& ctx, const BoundaryProfile& chi) {
    const double kappa0 = ctx.F->metadata().kappa0;
    return compute_constants([](double, const Coord&) { return 0.0; }, kappa0, chi, ctx.cfg.horizon).a2;
}

void run_reconstruct(RunContext& ctx) {
    Section sec(ctx.cfg.section, "reconstruct", {"level_stride", "s_points", "export_level_stride", "midpoints"});
    ReconstructOptions ro;
    ro.horizon = ctx.cfg.horizon;
    ro.margin = ctx.cfg.margin;
    ro.level_stride = sec.get<int>("level_stride", 1);
    ro.scheme = ctx.cfg.scheme;
    ro.threads = ctx.cfg.threads;
    const int s_points = sec.get<int>("s_points", 41);
    const int stride = sec.get<int>("export_level_stride", 10);
    const bool midpoints = sec.get<bool>("midpoints", true);
    if (ro.level_stride < 1 || stride < 1 || s_points < 2) throw ConfigError("reconstruct: strides must be >= 1, s_points >= 2");

    const auto chi = ctx.stage("chi", [&] { return ctx.chi(); });
    const double a2 = ctx.stage("constants", [&] { return guaranteed_a2(ctx, chi); });
    ro.a2r = a2 * ctx.cfg.r;
    const auto rec = ctx.stage("reconstruct", [&] {
        auto data = potentials_on_demand(ctx.F, chi, symmetric_lambda_grid(ctx.cfg.r, ctx.cfg.n_lambda), ctx.lin());
        return reconstruct(data, chi, ro);
    });
    const auto err = ctx.stage("compare", [&] { return compare_to_truth(rec, *ctx.F, s_points, midpoints); });
    ctx.stage("export", [&] {
        const auto& g = *ctx.grid;
        std::vector<std::string> header{"level", "t", "node", "x"};
        if (g.dim() == 2) header.push_back("y");
        for (const char* h : {"k", "lambda", "s", "F", "dF"}) header.push_back(h);
        CsvWriter csv(ctx.file("tables.csv"), header);
        const auto& levels = rec.levels();
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (i % static_cast<std::size_t>(stride) != 0 && i + 1 != levels.size()) continue;
            for (std::size_t id = 0; id < g.node_count(); ++id) {
                const auto s = rec.s_table(i, id), F = rec.F_table(i, id), dF = rec.dF_table(i, id);
                const auto& x = g.coord(id);
                for (std::size_t k = 0; k < rec.table_size(); ++k) {
                    csv << levels[i] << g.time(levels[i]) << id << x[0];
                    if (g.dim() == 2) csv << x[1];
                    csv << k << rec.lambda_grid()[k] << s[k] << F[k] << dF[k];
                    csv.end_row();
                }
            }
        }
        csv.close();
        CsvWriter w(ctx.file("worst.csv"), {"t", "x", "y", "s", "error"});
        for (const auto& e : err.worst) {
            w << e.t << e.x[0] << e.x[1] << e.s << e.error;
            w.end_row();
        }
        w.close();
    });
    const auto& box = rec.valid_box();
    ctx.summary["reconstruct"] = {{"a2", a2},
                                  {"valid_box", {{"t_lo", box.t_lo}, {"t_hi", box.t_hi}, {"s_max", box.s_max}}},
                                  {"sup_error", err.sup_error},
                                  {"l2_error", err.l2_error},
                                  {"samples", err.samples},
                                  {"n_lambda", ctx.cfg.n_lambda},
                                  {"delta2", chi.delta2}};
}

void run_uniqueness(RunContext& ctx) {
    Section sec(ctx.cfg.section, "uniqueness", {"probe_count", "bump_amplitude"});
    const int probes_n = sec.get<int>("probe_count", 8);
    const double amp = sec.get<double>("bump_amplitude", 1.0);
    if (probes_n < 1) throw ConfigError("uniqueness.probe_count must be >= 1");
    const auto chi = ctx.stage("chi", [&] { return ctx.chi(); });
    const auto lambdas = symmetric_lambda_grid(ctx.cfg.r, ctx.cfg.n_lambda);
    const auto probes = ctx.stage("probes", [&] { return random_probes(chi, probes_n, ctx.cfg.seed, ctx.cfg.horizon); });
    const double R = ctx.stage("range", [&] { return attained_sup(*ctx.F, chi, lambdas, probes, ctx.lin()); });
    const auto outside = ctx.F->plus(u_bump(3.0 * R, 0.9 * R, amp), 1.0);
    const auto inside = ctx.F->plus(u_bump(0.5 * R, 0.4 * R, amp), 1.0);
    const auto rep_out = ctx.stage("outside", [&] { return uniqueness_probe(*ctx.F, outside, chi, lambdas, probes, ctx.lin()); });
    const auto rep_in = ctx.stage("inside", [&] { return uniqueness_probe(*ctx.F, inside, chi, lambdas, probes, ctx.lin()); });
    ctx.stage("export", [&] {
        CsvWriter csv(ctx.file("uniqueness.csv"), {"case", "lambda", "max_trace_diff"});
        for (const auto& [name, rep] : {std::pair{"outside", &rep_out}, std::pair{"inside", &rep_in}}) {
            for (std::size_t k = 0; k < lambdas.size(); ++k) {
                csv << std::string_view(name) << lambdas[k] << rep->per_lambda[k];
                csv.end_row();
            }
        }
        csv.close();
    });
    const double tol = ctx.cfg.solver.newton_tol;
    ctx.summary["uniqueness"] = {{"attained_sup", R},
                                 {"outside_bump", {{"center", 3.0 * R}, {"width", 0.9 * R}}},
                                 {"inside_bump", {{"center", 0.5 * R}, {"width", 0.4 * R}}},
                                 {"outside_max_diff", rep_out.max_trace_diff},
                                 {"inside_max_diff", rep_in.max_trace_diff},
                                 {"outside_within_10_tol", rep_out.max_trace_diff <= 10.0 * tol},
                                 {"inside_above_100_tol", rep_in.max_trace_diff >= 100.0 * tol},
                                 {"probes", probes_n}};
}

void run_stability_experiment(RunContext& ctx) {
    Section sec(ctx.cfg.section, "stability", {"epsilons", "probe_count", "lambdas", "weight_center", "weight_width"});
    const auto eps = sec.get<std::vector<double>>("epsilons", {0.0, 0.0125, 0.025, 0.05, 0.1});
    const double r = ctx.cfg.r;
    StabilityOptions so;
    so.lambdas = sec.get<std::vector<double>>("lambdas", {-r, -0.5 * r, 0.5 * r, r});
    so.probe_count = sec.get<int>("probe_count", 8);
    so.seed = ctx.cfg.seed;
    so.linearize = ctx.lin();
    const double wc = sec.get<double>("weight_center", 0.5);
    const double ww = sec.get<double>("weight_width", 0.3);
    if (!(ww > 0.0)) throw ConfigError("stability.weight_width must be positive");
    for (double l : so.lambdas) {
        if (std::abs(l) > r) throw ConfigError("stability.lambdas must lie in [-r, r]");
    }

    const auto chi = ctx.stage("chi", [&] { return ctx.chi(); });
    const double a2 = ctx.stage("constants", [&] { return guaranteed_a2(ctx, chi); });
    so.s_max = a2 * r * (1.0 - ctx.cfg.margin);
    const int dim = ctx.grid->dim();
    const auto ext = std::array<double, 2>{ctx.grid->extent(0), dim == 2 ? ctx.grid->extent(1) : 1.0};
    auto weight = [wc, ww, dim, ext](double, const Coord& x) {
        double w = 1.0;
        for (int a = 0; a < dim; ++a) {
            const double z = (x[a] / ext[a] - wc) / ww;
            w *= std::abs(z) >= 1.0 ? 0.0 : std::pow(1.0 - z * z, 3);
        }
        return w;
    };
    const auto P = spatially_weighted(*ctx.F, weight, ctx.F->name() + "*bump(x)");
    const auto run = ctx.stage("stability", [&] { return run_stability(*ctx.F, P, eps, chi, so); });
    ctx.stage("export", [&] {
        CsvWriter csv(ctx.file("stability.csv"),
                      {"epsilon", "sup_F_diff", "dn_discrepancy", "spearman_rho", "fitted_exponent"});
        for (const auto& rec : run.records) {
            csv << rec.epsilon << rec.sup_F_diff << rec.dn_discrepancy << run.spearman_rho << run.fitted_exponent;
            csv.end_row();
        }
        csv.close();
        CsvWriter lf(ctx.file("stability_long.csv"), {"epsilon", "lambda", "probe_count", "metric", "value"});
        for (const auto& rec : run.records) {
            lf << rec.epsilon << NAN << so.probe_count << std::string_view("sup_F_diff") << rec.sup_F_diff;
            lf.end_row();
            for (std::size_t i = 0; i < so.lambdas.size(); ++i) {
                lf << rec.epsilon << so.lambdas[i] << so.probe_count << std::string_view("dn_discrepancy")
                   << rec.per_lambda[i];
                lf.end_row();
            }
        }
        lf.close();
    });
    json recs = json::array();
    for (const auto& rec : run.records) {
        recs.push_back({{"epsilon", rec.epsilon}, {"sup_F_diff", rec.sup_F_diff}, {"dn_discrepancy", rec.dn_discrepancy}});
    }
    ctx.summary["stability"] = {{"records", recs},
                                {"spearman_rho", run.spearman_rho},
                                {"fitted_exponent", run.fitted_exponent},
                                {"trend_holds", run.trend_holds},
                                {"s_max", so.s_max},
                                {"norm_kind", "L2(lateral boundary x (0,T1)) ratio over seeded probes"}};
}

json error_json(const char* kind, const std::string& message, const json& extra = json::object()) {
    json j{{"status", "error"}, {"kind", kind}, {"message", message}};
    for (const auto& [k, v] : extra.items()) j[k] = v;
    return j;
}

void write_manifest(const fs::path& out, const RunContext* ctx, const std::string& config_path,
                    const std::string& hash, const std::string& started, int exit_code, const json& error) {
    json m{{"manifest_version", 1},
           {"code_version", kCodeVersion},
           {"config_path", config_path},
           {"config_hash", hash},
           {"started_utc", started},
           {"finished_utc", utc_now()},
           {"status", exit_code == 0 ? "ok" : "error"},
           {"exit_code", exit_code}};
    json files = json::array();
    if (ctx) {
        m["scenario"] = ctx->cfg.name;
        m["experiment"] = to_string(ctx->cfg.experiment);
        m["seed"] = ctx->cfg.seed;
        m["threads"] = ctx->cfg.threads;
        m["alpha"] = ctx->cfg.alpha;
        m["stages"] = ctx->stages;
        for (const auto& rel : ctx->files) {
            const fs::path p = out / rel;
            if (!fs::exists(p)) continue;
            files.push_back({{"path", rel}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
        }
    }
    m["files"] = files;
    if (!error.is_null()) m["error"] = error;
    fs::create_directories(out);
    std::ofstream os(out / "manifest.json", std::ios::binary);
    os << m.dump(2) << '\n';
}

}  // namespace

int run_scenario(const fs::path& config_path, const RunOverrides& overrides, std::ostream& log, std::ostream& err) {
    const std::string started = utc_now();
    ScenarioConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const Error& e) {
        const json ej = error_json("config", e.what());
        err << ej.dump() << '\n';
        if (overrides.output) write_manifest(*overrides.output, nullptr, config_path.string(), "", started, 2, ej);
        return 2;
    }
    if (overrides.seed) {
        cfg.seed = *overrides.seed;
        cfg.effective["seed"] = cfg.seed;
    }
    if (overrides.threads) {
        if (*overrides.threads < 1) {
            err << error_json("config", "--threads must be >= 1").dump() << '\n';
            return 2;
        }
        cfg.threads = *overrides.threads;
    }

    RunContext ctx;
    ctx.cfg = cfg;
    ctx.out = resolve_output(cfg, overrides);
    const std::string hash = config_hash(cfg);
    int code = 0;
    json ej;
    try {
        fs::create_directories(ctx.out);
        ctx.grid = SpaceTimeGrid::build(cfg.grid);
        ctx.F = std::make_shared<const SemilinearTerm>(builtin_family(cfg.nonlinearity.name, cfg.nonlinearity.params));
        log << fmt::format("running {} ({}) -> {}\n", cfg.name, to_string(cfg.experiment), ctx.out.string());
        switch (cfg.experiment) {
            case Experiment::forward: run_forward(ctx); break;
            case Experiment::linearize: run_linearize(ctx); break;
            case Experiment::constants: run_constants(ctx); break;
            case Experiment::reconstruct: run_reconstruct(ctx); break;
            case Experiment::uniqueness: run_uniqueness(ctx); break;
            case Experiment::stability: run_stability_experiment(ctx); break;
        }
        ctx.summary["scenario"] = cfg.name;
        ctx.summary["experiment"] = to_string(cfg.experiment);
        ctx.summary["config_hash"] = hash;
        ctx.summary["grid"] = grid_json(*ctx.grid);
        ctx.summary["nonlinearity"] = cfg.effective["nonlinearity"];
        ctx.write_json("summary.json", ctx.summary);
    } catch (const ConfigError& e) {
        code = 2, ej = error_json("config", e.what());
    } catch (const InvalidArgument& e) {
        code = 2, ej = error_json("config", e.what());
    } catch (const SolverError& e) {
        const auto& r = e.report();
        code = 3;
        ej = error_json(e.kind() == SolverError::Kind::blow_up ? "blow_up" : "solver", e.what(),
                        {{"first_bad_level", r.first_bad_level},
                         {"sup_norm", r.sup_norm},
                         {"steps_completed", r.newton_iterations.size()}});
    } catch (const InvariantViolation& e) {
        code = 4, ej = error_json("invariant", e.what(), {{"witness", e.witness()}});
    } catch (const OutOfRange& e) {
        code = 4, ej = error_json("invariant", e.what());
    } catch (const std::exception& e) {
        code = 1, ej = error_json("error", e.what());
    }
    if (code != 0) {
        err << ej.dump() << '\n';
        try {
            ctx.write_json("error.json", ej);
        } catch (const std::exception&) {
        }
    }
    write_manifest(ctx.out, &ctx, config_path.string(), hash, started, code, code == 0 ? json() : ej);
    log << fmt::format("{} exit {}\n", cfg.name, code);
    return code;
}

}  // namespace pinv
