#include "flatgs/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "flatgs/csv.hpp"
#include "flatgs/error.hpp"
#include "flatgs/fibering.hpp"
#include "flatgs/groundstate.hpp"
#include "flatgs/spectral.hpp"
#include "json.hpp"

namespace flatgs {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::Classify, "classify"},
    {ExperimentKind::Shoot, "shoot"},
    {ExperimentKind::Nehari, "nehari"},
    {ExperimentKind::JMin, "jmin"},
    {ExperimentKind::Evolve, "evolve"},
    {ExperimentKind::Stability, "stability"},
    {ExperimentKind::GlobalInstability, "global-instability"},
    {ExperimentKind::Extinction, "extinction"},
    {ExperimentKind::Spectrum, "spectrum"},
    {ExperimentKind::Sweep, "sweep"},
};

const char* method_name(GroundStateMethod m) {
    switch (m) {
        case GroundStateMethod::Flat: return "flat";
        case GroundStateMethod::Nehari: return "nehari";
        case GroundStateMethod::JMin: return "jmin";
    }
    return "?";
}

const char* datum_name(InitialDatum::Kind k) {
    switch (k) {
        case InitialDatum::Kind::Sine: return "sine";
        case InitialDatum::Kind::Constant: return "constant";
        case InitialDatum::Kind::Bump: return "bump";
        case InitialDatum::Kind::GroundState: return "groundstate";
    }
    return "?";
}

// Collects field errors instead of stopping at the first one.
class Reader {
public:
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

    // Returns the sub-object or nullptr; reports unknown keys.
    const json* section(const json& parent, const std::string& key, const std::string& path,
                        std::initializer_list<const char*> allowed) {
        auto it = parent.find(key);
        if (it == parent.end()) return nullptr;
        if (!it->is_object()) {
            fail(path, "expected an object");
            return nullptr;
        }
        check_keys(*it, path, allowed);
        return &*it;
    }

    void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || it.key() == a;
            if (!ok) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
        }
    }

    void number(const json* obj, const char* key, const std::string& path, double& out) {
        if (!obj || !obj->contains(key)) return;
        const json& v = (*obj)[key];
        if (!v.is_number()) return fail(path + "." + key, "expected a number");
        out = v.get<double>();
    }

    template <class Int>
    void integer(const json* obj, const char* key, const std::string& path, Int& out, long long lo) {
        if (!obj || !obj->contains(key)) return;
        const json& v = (*obj)[key];
        if (!v.is_number_integer()) return fail(path + "." + key, "expected an integer");
        const auto x = v.get<long long>();
        if (x < lo) return fail(path + "." + key, "must be >= " + std::to_string(lo));
        out = static_cast<Int>(x);
    }

    void boolean(const json* obj, const char* key, const std::string& path, bool& out) {
        if (!obj || !obj->contains(key)) return;
        const json& v = (*obj)[key];
        if (!v.is_boolean()) return fail(path + "." + key, "expected true or false");
        out = v.get<bool>();
    }

    bool string(const json* obj, const char* key, const std::string& path, std::string& out) {
        if (!obj || !obj->contains(key)) return false;
        const json& v = (*obj)[key];
        if (!v.is_string()) {
            fail(path + "." + key, "expected a string");
            return false;
        }
        out = v.get<std::string>();
        return true;
    }
};

void parse_problem(Reader& rd, const json& root, ExperimentConfig& c) {
    const json* p = rd.section(root, "problem", "problem", {"alpha", "beta", "lambda", "dimension", "domain"});
    if (!p) {
        if (c.kind != ExperimentKind::Sweep) rd.fail("problem", "missing");
        return;
    }
    double alpha = c.params.alpha(), beta = c.params.beta();
    rd.number(p, "alpha", "problem", alpha);
    rd.number(p, "beta", "problem", beta);
    rd.number(p, "lambda", "problem", c.params.lambda);
    rd.integer(p, "dimension", "problem", c.params.dimension, 1);
    if (!(alpha > 0.0 && alpha < 1.0)) rd.fail("problem.alpha", "must lie in (0,1)");
    if (!(beta > alpha && beta <= 1.0)) rd.fail("problem.beta", "must satisfy alpha < beta <= 1");
    if (!(c.params.lambda >= 0.0) || !std::isfinite(c.params.lambda))
        rd.fail("problem.lambda", "must be finite and >= 0");
    c.params.exponents.alpha = alpha;
    c.params.exponents.beta = beta;

    const int N = c.params.dimension;
    if (N == 1)
        c.params.domain = Interval{0.0, M_PI};
    else
        c.params.domain = Ball{N, M_PI};
    const json* d = rd.section(*p, "domain", "problem.domain", {"kind", "a", "b", "radius"});
    if (!d) return;
    std::string kind = N == 1 ? "interval" : "ball";
    rd.string(d, "kind", "problem.domain", kind);
    if (kind == "interval") {
        if (N != 1) rd.fail("problem.domain.kind", "an interval requires dimension 1");
        Interval iv{0.0, M_PI};
        rd.number(d, "a", "problem.domain", iv.a);
        rd.number(d, "b", "problem.domain", iv.b);
        if (!(iv.a < iv.b)) rd.fail("problem.domain", "requires a < b");
        if (d->contains("radius")) rd.fail("problem.domain.radius", "not used by an interval");
        c.params.domain = iv;
    } else if (kind == "ball") {
        Ball b{N, M_PI};
        rd.number(d, "radius", "problem.domain", b.radius);
        if (!(b.radius > 0.0)) rd.fail("problem.domain.radius", "must be positive");
        if (d->contains("a") || d->contains("b")) rd.fail("problem.domain", "a/b are not used by a ball");
        c.params.domain = b;
    } else {
        rd.fail("problem.domain.kind", "expected interval or ball");
    }
}

void parse_evolution(Reader& rd, const json& root, EvolutionConfig& e) {
    const json* s = rd.section(root, "evolution", "evolution",
                               {"dt", "t_end", "snapshot_stride", "extinction_tol", "extinction_snapshots",
                                "reaction_substeps", "check_dissipation", "dissipation_slack", "growth_cap",
                                "stop_on_extinction"});
    if (!s) return;
    const std::string p = "evolution";
    rd.number(s, "dt", p, e.dt);
    rd.number(s, "t_end", p, e.t_end);
    rd.integer(s, "snapshot_stride", p, e.snapshot_stride, 1);
    rd.number(s, "extinction_tol", p, e.extinction_tol);
    rd.integer(s, "extinction_snapshots", p, e.extinction_snapshots, 1);
    rd.integer(s, "reaction_substeps", p, e.reaction_substeps, 1);
    rd.boolean(s, "check_dissipation", p, e.check_dissipation);
    rd.number(s, "dissipation_slack", p, e.dissipation_slack);
    // null means no cap, which is also how the echo writes it.
    if (!(s->contains("growth_cap") && s->at("growth_cap").is_null())) rd.number(s, "growth_cap", p, e.growth_cap);
    rd.boolean(s, "stop_on_extinction", p, e.stop_on_extinction);
    if (!(e.dt > 0.0)) rd.fail("evolution.dt", "must be positive");
    if (!(e.t_end >= e.dt)) rd.fail("evolution.t_end", "must be >= dt");
    if (!(e.extinction_tol > 0.0)) rd.fail("evolution.extinction_tol", "must be positive");
    if (!(e.dissipation_slack > 0.0)) rd.fail("evolution.dissipation_slack", "must be positive");
    if (!(e.growth_cap > 0.0)) rd.fail("evolution.growth_cap", "must be positive");
}

std::vector<double> parse_axis(Reader& rd, const json& v, const std::string& path) {
    std::vector<double> out;
    if (v.is_array()) {
        for (const auto& x : v) {
            if (!x.is_number()) {
                rd.fail(path, "axis values must be numbers");
                return {};
            }
            out.push_back(x.get<double>());
        }
    } else if (v.is_object()) {
        rd.check_keys(v, path, {"min", "max", "count"});
        double lo = 0.0, hi = 0.0;
        int count = 0;
        rd.number(&v, "min", path, lo);
        rd.number(&v, "max", path, hi);
        rd.integer(&v, "count", path, count, 1);
        if (!v.contains("min") || !v.contains("max") || !v.contains("count")) {
            rd.fail(path, "range axes need min, max and count");
            return {};
        }
        for (int i = 0; i < count; ++i)
            out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    } else {
        rd.fail(path, "expected a list of values or {min,max,count}");
    }
    if (out.empty()) rd.fail(path, "axis is empty");
    for (double x : out)
        if (!std::isfinite(x)) rd.fail(path, "axis values must be finite");
    return out;
}

json evolution_json(const EvolutionConfig& e) {
    return {{"dt", e.dt},
            {"t_end", e.t_end},
            {"snapshot_stride", e.snapshot_stride},
            {"extinction_tol", e.extinction_tol},
            {"extinction_snapshots", e.extinction_snapshots},
            {"reaction_substeps", e.reaction_substeps},
            {"check_dissipation", e.check_dissipation},
            {"dissipation_slack", e.dissipation_slack},
            {"growth_cap", std::isfinite(e.growth_cap) ? json(e.growth_cap) : json(nullptr)},
            {"stop_on_extinction", e.stop_on_extinction}};
}

json problem_json(const ProblemParams& p) {
    json d;
    if (const auto* iv = std::get_if<Interval>(&p.domain))
        d = {{"kind", "interval"}, {"a", iv->a}, {"b", iv->b}};
    else
        d = {{"kind", "ball"}, {"radius", std::get<Ball>(p.domain).radius}};
    return {{"alpha", p.alpha()}, {"beta", p.beta()}, {"lambda", p.lambda}, {"dimension", p.dimension},
            {"domain", d}};
}

json config_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["experiment"] = to_string(c.kind);
    j["problem"] = problem_json(c.params);
    j["grid"] = {{"n", c.grid_n}};
    j["evolution"] = evolution_json(c.evolution);
    j["groundstate"] = {{"method", method_name(c.gs_method)}, {"fit_domain", c.fit_domain}};
    j["initial"] = {{"kind", datum_name(c.initial.kind)}, {"amplitude", c.initial.amplitude}};
    j["perturbation"] = {{"shape", to_string(c.perturbation.shape)}, {"delta", c.perturbation.delta},
                         {"seed", c.perturbation.seed.value_or(c.seed)}};
    j["stability"] = {{"epsilon", c.epsilon}};
    j["global_instability"] = {{"scale", c.scale}};
    j["spectrum"] = {{"floor_rel", c.floor_rel}};
    j["output"] = c.output_dir;
    j["seed"] = c.seed;
    if (c.kind == ExperimentKind::Sweep) {
        json axes = json::object();
        for (const auto& a : c.axes) axes[a.name] = a.values;
        j["sweep"] = {{"base", to_string(c.sweep_base)}, {"parallel", c.parallel}, {"axes", axes}};
    }
    return j;
}

// ---------------------------------------------------------------------------
// Running.

class Outputs {
public:
    explicit Outputs(const std::string& dir) : dir_(dir) {
        if (!dir_.empty()) fs::create_directories(dir_);
    }
    void write(const std::string& name, const std::string& content) {
        if (dir_.empty()) return;
        write_text_file((fs::path(dir_) / name).string(), content);
        manifest.push_back(name);
    }
    bool enabled() const { return !dir_.empty(); }
    const std::string& dir() const { return dir_; }
    std::vector<std::string> manifest;

private:
    std::string dir_;
};

std::string point_dir_name(std::size_t index) {
    std::string s = std::to_string(index);
    return "point_" + std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

json opt(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

GroundState compute_groundstate(const ExperimentConfig& c) {
    switch (c.gs_method) {
        case GroundStateMethod::Flat: {
            FlatOptions o;
            o.n = c.grid_n;
            o.fit_domain = c.fit_domain;
            return find_flat_profile(c.params, o);
        }
        case GroundStateMethod::Nehari:
            return nehari_minimize(c.params, build_grid(c.params.domain, c.grid_n));
        case GroundStateMethod::JMin:
            return j_minimize(c.params, build_grid(c.params.domain, c.grid_n));
    }
    throw ConfigError("groundstate.method: unknown");
}

void groundstate_headline(const GroundState& gs, json& h) {
    const RegimeLabel label = classify_exponents(gs.params.alpha(), gs.params.beta(), gs.params.dimension);
    h["regime"] = to_string(label.regime);
    h["discriminant"] = label.discriminant;
    h["amplitude"] = gs.amplitude;
    h["support_radius"] = gs.support_radius;
    h["energy"] = gs.energy;
    h["nehari_residual"] = nehari_residual(gs.breakdown, gs.params);
    h["pohozaev_relative"] = gs.scale() > 0.0 ? gs.pohozaev_residual / gs.scale() : 0.0;
    h["phi2_at_1"] = phi_second(gs.breakdown, gs.params, 1.0);
}

Field initial_field(const ExperimentConfig& c, const GridPtr& grid) {
    const double A = c.initial.amplitude;
    const Grid& g = *grid;
    const double lo = g.x.front(), hi = g.x.back();
    switch (c.initial.kind) {
        case InitialDatum::Kind::Sine:
            if (g.radial()) return sample(grid, [&](double r) { return A * std::cos(0.5 * M_PI * r / hi); });
            return sample(grid, [&](double x) { return A * std::sin(M_PI * (x - lo) / (hi - lo)); });
        case InitialDatum::Kind::Constant:
            return sample(grid, [&](double) { return A; });
        case InitialDatum::Kind::Bump: {
            Field f = make_perturbation(PerturbationShape::Bump, zero_field(grid), 1.0, 0);
            const double m = linf_norm(f);
            for (double& v : f.values) v *= A / m;
            return f;
        }
        case InitialDatum::Kind::GroundState:
            break;
    }
    throw PreconditionError("ground-state initial data are built by the caller");
}

json run_kind(const ExperimentConfig& c, Outputs& out, json& h) {
    json details = json::object();
    switch (c.kind) {
        case ExperimentKind::Classify: {
            const RegimeLabel label = classify_exponents(c.params.alpha(), c.params.beta(), c.params.dimension);
            h["regime"] = to_string(label.regime);
            h["discriminant"] = label.discriminant;
            h["critical_beta"] = opt(critical_beta(c.params.alpha(), c.params.dimension));
            h["ode_equilibrium"] = c.params.lambda > 0.0 ? json(ode_equilibrium(c.params)) : json(nullptr);
            if (!c.params.exponents.is_linear()) {
                const FiberingConstants fc = fibering_constants(c.params.alpha(), c.params.beta());
                h["c0"] = fc.c0;
                h["c1"] = fc.c1;
            }
            break;
        }
        case ExperimentKind::Shoot:
        case ExperimentKind::Nehari:
        case ExperimentKind::JMin: {
            ExperimentConfig cc = c;
            cc.gs_method = c.kind == ExperimentKind::Shoot    ? GroundStateMethod::Flat
                           : c.kind == ExperimentKind::Nehari ? GroundStateMethod::Nehari
                                                              : GroundStateMethod::JMin;
            const GroundState gs = compute_groundstate(cc);
            groundstate_headline(gs, h);
            details["groundstate"] = json::parse(to_json(gs));
            if (c.kind == ExperimentKind::Shoot) {
                try {
                    const SecondVariationReport l = verify_second_variation(gs);
                    h["phi2_closed_form"] = l.closed_form;
                    h["phi2_relative_error"] = l.relative_error;
                    h["phi2_sign_matches"] = l.sign_matches;
                } catch (const PreconditionError& e) {
                    details["second_variation_check"] = e.what();
                }
            }
            out.write("groundstate.csv", field_to_csv(gs.field));
            break;
        }
        case ExperimentKind::Evolve:
        case ExperimentKind::Extinction: {
            Field v0;
            std::optional<GroundState> gs;
            if (c.initial.kind == InitialDatum::Kind::GroundState) {
                gs = compute_groundstate(c);
                v0 = gs->field;
                for (double& x : v0.values) x *= c.initial.amplitude;
            } else {
                v0 = initial_field(c, build_grid(c.params.domain, c.grid_n));
            }
            const Trajectory tr = evolve(v0, c.params, c.evolution);
            const auto& last = tr.records.back();
            h["steps"] = tr.steps;
            h["final_time"] = last.t;
            h["final_linf"] = last.linf;
            h["final_energy"] = last.energy;
            h["max_energy_increase"] = tr.max_energy_increase;
            h["extinct"] = tr.extinct;
            h["exceeded_cap"] = tr.exceeded_cap;
            if (c.kind == ExperimentKind::Extinction)
                h["extinction_time"] = opt(extinction_time(tr, c.evolution.extinction_tol));
            out.write("trajectory.csv", tr.to_csv());
            out.write("final.csv", field_to_csv(tr.final_field));
            break;
        }
        case ExperimentKind::Stability: {
            const GroundState gs = compute_groundstate(c);
            const Field p = make_perturbation(c.perturbation.shape, gs.field, c.perturbation.delta,
                                              c.perturbation.seed.value_or(c.seed));
            const StabilityResult res = stability_experiment(gs, p, c.evolution, c.epsilon);
            groundstate_headline(gs, h);
            h["verdict"] = to_string(res.verdict.kind);
            h["verdict_time"] = opt(res.verdict.time);
            h["max_distance"] = res.verdict.max_distance;
            details["verdict"] = json::parse(res.verdict.to_json());
            out.write("groundstate.csv", field_to_csv(gs.field));
            out.write("trajectory.csv", res.trajectory.to_csv());
            break;
        }
        case ExperimentKind::GlobalInstability: {
            const GroundState gs = compute_groundstate(c);
            const GlobalInstabilityResult res = global_instability_experiment(gs, c.scale, c.evolution);
            groundstate_headline(gs, h);
            h["y_ratio"] = res.y_ratio;
            h["y_strictly_increasing"] = res.y_strictly_increasing;
            h["max_slope_rel_error"] = res.max_slope_rel_error;
            h["in_well_initially"] = res.in_well_initially;
            h["well_invariant"] = res.well_invariant;
            h["verdict"] = to_string(res.verdict);
            CsvTable t({"t", "y", "slope", "target"});
            for (std::size_t k = 0; k < res.y.size(); ++k)
                t.add_numeric_row({res.trajectory.records[k].t, res.y[k], res.slope[k], res.target[k]});
            out.write("trajectory.csv", res.trajectory.to_csv());
            out.write("l2_growth.csv", t.str());
            break;
        }
        case ExperimentKind::Spectrum: {
            const GroundState gs = compute_groundstate(c);
            groundstate_headline(gs, h);
            const EigenResult mu = linearized_mu1(gs, c.floor_rel);
            const EigenResult l1 = principal_dirichlet_eigen(gs.field.grid, gs.params.dimension);
            h["mu1"] = mu.eigenvalue;
            h["mu1_residual"] = mu.residual;
            h["mu1_floor_sensitivity"] = opt(mu.floor_sensitivity);
            h["lambda1"] = l1.eigenvalue;
            details["mu1"] = json::parse(to_json(mu));
            details["lambda1"] = json::parse(to_json(l1));
            out.write("eigenfield.csv", field_to_csv(mu.eigenfield));
            break;
        }
        case ExperimentKind::Sweep: {
            const SweepResult sr = sweep(c);
            h["points"] = sr.points.size();
            h["failures"] = sr.failures;
            std::size_t stable = 0;
            for (const auto& p : sr.points) {
                const auto it = p.report.headline.find("regime");
                if (it != p.report.headline.end() && it->second == "StableSet") ++stable;
            }
            h["stable_points"] = stable;
            out.write("summary.csv", sr.summary_csv);
            for (std::size_t i = 0; i < sr.points.size(); ++i)
                for (const auto& f : sr.points[i].report.manifest)
                    out.manifest.push_back((fs::path(point_dir_name(i)) / f).string());
            break;
        }
    }
    return details;
}

std::string format_headline_value(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "";
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    if (v.is_number()) return format_double(v.get<double>());
    return v.dump();
}

}  // namespace

std::string to_string(ExperimentKind k) {
    for (const auto& [kind, name] : kKindNames)
        if (kind == k) return name;
    return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (const auto& [kind, name] : kKindNames)
        if (s == name) return kind;
    throw ConfigError("unknown experiment '" + s + "'");
}

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: expected a JSON object");

    Reader rd;
    ExperimentConfig c;
    rd.check_keys(root, "",
                  {"schema_version", "experiment", "problem", "grid", "groundstate", "evolution", "initial",
                   "perturbation", "stability", "global_instability", "spectrum", "output", "seed", "sweep"});
    if (root.contains("schema_version")) {
        const json& v = root["schema_version"];
        if (!v.is_number_integer() || v.get<int>() != kReportSchemaVersion)
            rd.fail("schema_version", "unsupported (expected " + std::to_string(kReportSchemaVersion) + ")");
    }
    std::string kind;
    if (!rd.string(&root, "experiment", "", kind)) {
        rd.fail("experiment", "missing");
    } else {
        try {
            c.kind = experiment_kind_from_string(kind);
        } catch (const ConfigError&) {
            rd.fail("experiment", "unknown kind '" + kind + "'");
        }
    }
    parse_problem(rd, root, c);

    if (const json* g = rd.section(root, "grid", "grid", {"n"})) rd.integer(g, "n", "grid", c.grid_n, 16);
    parse_evolution(rd, root, c.evolution);

    if (const json* g = rd.section(root, "groundstate", "groundstate", {"method", "fit_domain"})) {
        std::string m;
        if (rd.string(g, "method", "groundstate", m)) {
            if (m == "flat") c.gs_method = GroundStateMethod::Flat;
            else if (m == "nehari") c.gs_method = GroundStateMethod::Nehari;
            else if (m == "jmin") c.gs_method = GroundStateMethod::JMin;
            else rd.fail("groundstate.method", "expected flat, nehari or jmin");
        }
        rd.boolean(g, "fit_domain", "groundstate", c.fit_domain);
    }
    if (const json* s = rd.section(root, "initial", "initial", {"kind", "amplitude"})) {
        std::string k;
        if (rd.string(s, "kind", "initial", k)) {
            if (k == "sine") c.initial.kind = InitialDatum::Kind::Sine;
            else if (k == "constant") c.initial.kind = InitialDatum::Kind::Constant;
            else if (k == "bump") c.initial.kind = InitialDatum::Kind::Bump;
            else if (k == "groundstate") c.initial.kind = InitialDatum::Kind::GroundState;
            else rd.fail("initial.kind", "expected sine, constant, bump or groundstate");
        }
        rd.number(s, "amplitude", "initial", c.initial.amplitude);
        if (!(c.initial.amplitude >= 0.0)) rd.fail("initial.amplitude", "must be >= 0");
    }
    if (const json* s = rd.section(root, "perturbation", "perturbation", {"shape", "delta", "seed"})) {
        std::string shape;
        if (rd.string(s, "shape", "perturbation", shape)) {
            try {
                c.perturbation.shape = perturbation_shape_from_string(shape);
            } catch (const ConfigError&) {
                rd.fail("perturbation.shape", "expected eigenfunction, bump or random");
            }
        }
        rd.number(s, "delta", "perturbation", c.perturbation.delta);
        if (!(c.perturbation.delta >= 0.0)) rd.fail("perturbation.delta", "must be >= 0");
        std::uint64_t seed = 0;
        if (s->contains("seed")) {
            rd.integer(s, "seed", "perturbation", seed, 0);
            c.perturbation.seed = seed;
        }
    }
    if (const json* s = rd.section(root, "stability", "stability", {"epsilon"})) {
        rd.number(s, "epsilon", "stability", c.epsilon);
        if (!(c.epsilon > 0.0)) rd.fail("stability.epsilon", "must be positive");
    }
    if (const json* s = rd.section(root, "global_instability", "global_instability", {"scale"})) {
        rd.number(s, "scale", "global_instability", c.scale);
        if (!(c.scale > 1.0)) rd.fail("global_instability.scale", "must be > 1");
    }
    if (const json* s = rd.section(root, "spectrum", "spectrum", {"floor_rel"})) {
        rd.number(s, "floor_rel", "spectrum", c.floor_rel);
        if (!(c.floor_rel > 0.0)) rd.fail("spectrum.floor_rel", "must be positive");
    }
    rd.string(&root, "output", "", c.output_dir);
    rd.integer(&root, "seed", "", c.seed, 0);

    const json* sw = rd.section(root, "sweep", "sweep", {"base", "parallel", "axes"});
    if (c.kind == ExperimentKind::Sweep) {
        if (!sw) {
            rd.fail("sweep", "missing");
        } else {
            std::string base;
            if (rd.string(sw, "base", "sweep", base)) {
                try {
                    c.sweep_base = experiment_kind_from_string(base);
                } catch (const ConfigError&) {
                    rd.fail("sweep.base", "unknown kind '" + base + "'");
                }
                if (c.sweep_base == ExperimentKind::Sweep) rd.fail("sweep.base", "sweeps do not nest");
            }
            rd.integer(sw, "parallel", "sweep", c.parallel, 1);
            const json* axes = rd.section(*sw, "axes", "sweep.axes", {"alpha", "beta", "lambda", "dimension"});
            if (!axes || axes->empty()) {
                rd.fail("sweep.axes", "at least one axis is required");
            } else {
                for (const char* name : {"alpha", "beta", "lambda", "dimension"}) {
                    if (!axes->contains(name)) continue;
                    SweepAxis ax{name, parse_axis(rd, (*axes)[name], std::string("sweep.axes.") + name)};
                    if (ax.name == "dimension")
                        for (double v : ax.values)
                            if (v < 1.0 || v != std::floor(v))
                                rd.fail("sweep.axes.dimension", "values must be positive integers");
                    c.axes.push_back(std::move(ax));
                }
            }
        }
    } else if (sw) {
        rd.fail("sweep", "only valid for the sweep experiment");
    }

    if (!rd.errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : rd.errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    if (c.kind != ExperimentKind::Sweep) c.evolution.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(2); }

RunReport run(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    if (config.kind != ExperimentKind::Sweep) config.params.validate();
    Outputs out(config.output_dir);
    json h = json::object();
    const json details = run_kind(config, out, h);

    RunReport rep;
    rep.experiment = to_string(config.kind);
    for (auto it = h.begin(); it != h.end(); ++it) rep.headline[it.key()] = format_headline_value(it.value());
    rep.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["experiment"] = rep.experiment;
    doc["status"] = rep.status;
    doc["config"] = config_json(config);
    doc["headline"] = h;
    doc["details"] = details;
    rep.manifest = out.manifest;
    if (out.enabled()) rep.manifest.push_back("report.json");
    doc["manifest"] = rep.manifest;
    doc["wall_clock_s"] = rep.wall_clock_s;
    rep.json = doc.dump(2);
    out.write("report.json", rep.json);
    return rep;
}

namespace {

void set_dimension(ProblemParams& p, int N) {
    p.dimension = N;
    if (auto* b = std::get_if<Ball>(&p.domain)) {
        b->dimension = N;
    } else if (N != 1) {
        const auto& iv = std::get<Interval>(p.domain);
        p.domain = Ball{N, 0.5 * (iv.b - iv.a)};
    }
}

}  // namespace

SweepResult sweep(const ExperimentConfig& config) {
    if (config.axes.empty()) throw ConfigError("sweep.axes: at least one axis is required");
    std::size_t total = 1;
    for (const auto& a : config.axes) total *= a.values.size();

    SweepResult res;
    res.points.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        ProblemParams p = config.params;
        std::size_t rem = i;
        // Last axis varies fastest.
        for (std::size_t k = config.axes.size(); k-- > 0;) {
            const auto& ax = config.axes[k];
            const double v = ax.values[rem % ax.values.size()];
            rem /= ax.values.size();
            if (ax.name == "alpha") p.exponents.alpha = v;
            else if (ax.name == "beta") p.exponents.beta = v;
            else if (ax.name == "lambda") p.lambda = v;
            else if (ax.name == "dimension") set_dimension(p, static_cast<int>(v));
        }
        res.points[i].params = p;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            ExperimentConfig c = config;
            c.kind = config.sweep_base;
            c.params = res.points[i].params;
            c.axes.clear();
            if (!config.output_dir.empty())
                c.output_dir = (fs::path(config.output_dir) / point_dir_name(i)).string();
            RunReport& rep = res.points[i].report;
            try {
                rep = run(c);
            } catch (const std::exception& e) {
                rep = RunReport{};
                rep.experiment = to_string(c.kind);
                rep.status = "error";
                rep.error = e.what();
            }
        }
    };
    const int k = std::max(1, std::min<int>(config.parallel, static_cast<int>(total)));
    std::vector<std::thread> pool;
    for (int t = 1; t < k; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::set<std::string> keys;
    for (const auto& p : res.points)
        for (const auto& [key, v] : p.report.headline) keys.insert(key);
    std::vector<std::string> header = {"index", "alpha", "beta", "lambda", "dimension", "status", "error"};
    header.insert(header.end(), keys.begin(), keys.end());
    CsvTable table(header);
    for (std::size_t i = 0; i < total; ++i) {
        const auto& pt = res.points[i];
        if (pt.report.status != "ok") ++res.failures;
        std::vector<std::string> row = {std::to_string(i),        format_double(pt.params.alpha()),
                                        format_double(pt.params.beta()), format_double(pt.params.lambda),
                                        std::to_string(pt.params.dimension), pt.report.status,
                                        pt.report.error};
        for (const auto& key : keys) {
            const auto it = pt.report.headline.find(key);
            row.push_back(it == pt.report.headline.end() ? "" : it->second);
        }
        table.add_row(std::move(row));
    }
    res.summary_csv = table.str();
    return res;
}

RegimeMap regime_map(int N, int n) {
    if (N < 1) throw DomainError("dimension must be >= 1");
    if (n < 1) throw ConfigError("regime map resolution must be >= 1");
    RegimeMap m;
    m.dimension = N;
    m.n = n;
    const double cell = 1.0 / (static_cast<double>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double a = (i + 0.5) / n, b = (j + 0.5) / n;
            if (!(a < b)) continue;
            ++m.points;
            switch (classify_exponents(a, b, N).regime) {
                case Regime::StableSet: ++m.stable; break;
                case Regime::UnstableSet: ++m.unstable; break;
                case Regime::OnCurve: ++m.on_curve; break;
            }
        }
    }
    m.stable_area = m.stable * cell;
    m.on_curve_area = m.on_curve * cell;
    return m;
}

}  // namespace flatgs
