#include "flatgs/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "flatgs/csv.hpp"
#include "flatgs/error.hpp"
#include "flatgs/fibering.hpp"
#include "flatgs/groundstate.hpp"
#include "flatgs/spectral.hpp"
#include "json.hpp"

namespace flatgs {

void EvolutionConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("evolution.dt must be positive");
    if (!(t_end >= dt)) throw ConfigError("evolution.t_end must be >= dt");
    if (snapshot_stride < 1) throw ConfigError("evolution.snapshot_stride must be >= 1");
    if (!(extinction_tol > 0.0)) throw ConfigError("evolution.extinction_tol must be positive");
    if (extinction_snapshots < 1) throw ConfigError("evolution.extinction_snapshots must be >= 1");
    if (reaction_substeps < 1) throw ConfigError("evolution.reaction_substeps must be >= 1");
    if (!(dissipation_slack > 0.0)) throw ConfigError("evolution.dissipation_slack must be positive");
}

std::string Trajectory::to_csv() const {
    CsvTable t({"t", "l2", "linf", "h01", "energy", "nehari_residual", "nondeg_const", "dist_to_ref"});
    for (const auto& r : records)
        t.add_numeric_row({r.t, r.l2, r.linf, r.h01, r.energy, r.nehari_residual, r.nondeg_const,
                           r.dist_to_ref});
    return t.str();
}

namespace {

TridiagonalSolver diffusion_solver(const Grid& g, double dt) {
    const Stiffness K = stiffness(g);
    const std::size_t f = g.first_free(), l = g.last_free();
    const std::size_t m = l - f + 1;
    std::vector<double> lower(m, 0.0), diag(m), upper(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t i = f + j;
        diag[j] = g.volume[i] + dt * K.diag[i];
        if (j) lower[j] = dt * K.off[i - 1];
        if (j + 1 < m) upper[j] = dt * K.off[i];
    }
    return TridiagonalSolver(lower, diag, upper);
}

void check_field(const Field& v, const ProblemParams& params) {
    if (v.grid->dimension != params.dimension) throw DomainError("field grid dimension mismatch");
    for (double x : v.values)
        if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("initial datum must be finite and >= 0");
}

}  // namespace

Stepper::Stepper(const ProblemParams& params, const GridPtr& grid, double dt, int reaction_substeps)
    : params_(params), grid_(grid), dt_(dt), substeps_(reaction_substeps),
      solver_(diffusion_solver(*grid, dt)), mass_(grid->volume), K_(stiffness(*grid)) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (reaction_substeps < 1) throw ConfigError("reaction substeps must be >= 1");
}

int Stepper::advance(std::vector<double>& u, double* energy_before) const {
    const Grid& g = *grid_;
    const double a = params_.alpha(), b = params_.beta(), lam = params_.lambda;
    const double tau = dt_ / substeps_;
    const std::size_t f = g.first_free(), l = g.last_free(), n = g.size();
    const std::vector<double>& m = mass_;

    // Predictor and the explicit source c = M (u/dt + λ u^β).
    std::vector<double> w(n, 0.0), c(n, 0.0);
    double T = 0.0, A = 0.0, B = 0.0;
    if (energy_before)
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double d = u[i + 1] - u[i];
            T += g.face[i] * d * d;
        }
    for (std::size_t i = f; i <= l; ++i) {
        double v = u[i];
        if (v > 0.0) {
            const double lv = std::log(v);
            const double va = std::exp(a * lv), vb = std::exp(b * lv);
            A += m[i] * v * va;
            B += m[i] * v * vb;
            c[i] = m[i] * (v / dt_ + lam * vb);
            const double fv = lam * vb - va;
            const double fp = (lam * b * vb - a * va) / v;
            if (std::abs(dt_ * fp) <= 0.05) {
                v += dt_ * fv + 0.5 * dt_ * dt_ * fp * fv;
            } else {
                for (int s = 0; s < substeps_ && v > 0.0; ++s) v = reaction_step(v, tau, a, b, lam).value;
            }
        }
        w[i] = v * m[i];
    }
    if (energy_before) *energy_before = 0.5 * T / g.h + A / (1.0 + a) - lam * B / (1.0 + b);
    solver_.solve_in_place(w.data() + f);
    for (std::size_t i = f; i <= l; ++i) w[i] = std::max(w[i], 0.0);

    // Newton on G(w) = (M/dt + K) w + M w^α - c. Nodes at zero have infinite
    // curvature and stay put; the Newton decrement -G·δ measures the remaining
    // decrease of the convex functional.
    std::vector<double> G(n), lo(n), dg(n), up(n), delta(n), cp(n);
    double scale = 0.0;
    for (std::size_t i = f; i <= l; ++i) scale += c[i] * u[i];
    const double tol = 1e-15 * (scale + 1e-300);
    int it = 0;
    for (;; ++it) {
        for (std::size_t i = f; i <= l; ++i) {
            const double wi = w[i];
            const double wa = wi > 0.0 ? std::exp(a * std::log(wi)) : 0.0;
            double kw = K_.diag[i] * wi;
            if (i > 0) kw += K_.off[i - 1] * w[i - 1];
            if (i + 1 < n) kw += K_.off[i] * w[i + 1];
            G[i] = m[i] * (wi / dt_ + wa) + kw - c[i];
            dg[i] = m[i] / dt_ + K_.diag[i] + (wi > 0.0 ? m[i] * a * wa / wi : 1e300);
            lo[i] = i > f ? K_.off[i - 1] : 0.0;
            up[i] = i < l ? K_.off[i] : 0.0;
        }
        // Thomas, rhs -G.
        cp[f] = up[f] / dg[f];
        delta[f] = -G[f] / dg[f];
        for (std::size_t i = f + 1; i <= l; ++i) {
            const double piv = dg[i] - lo[i] * cp[i - 1];
            cp[i] = up[i] / piv;
            delta[i] = (-G[i] - lo[i] * delta[i - 1]) / piv;
        }
        for (std::size_t i = l; i-- > f;) delta[i] -= cp[i] * delta[i + 1];
        double dec = 0.0;
        for (std::size_t i = f; i <= l; ++i) dec -= G[i] * delta[i];
        for (std::size_t i = f; i <= l; ++i) w[i] = std::max(w[i] + delta[i], 0.1 * w[i]);
        if (dec <= tol) break;
        if (it >= 60) throw SolverError("implicit step: Newton did not converge", {static_cast<double>(it), dec, tol});
    }
    for (std::size_t i = f; i <= l; ++i) u[i] = w[i];
    if (g.is_dirichlet(0)) u[0] = 0.0;
    u[n - 1] = 0.0;
    return it + 1;
}

Field step(const Field& u, const ProblemParams& params, double dt, int reaction_substeps) {
    check_field(u, params);
    const Stepper s(params, u.grid, dt, reaction_substeps);
    Field out = u;
    s.advance(out.values);
    return out;
}

namespace {

double energy_of(const Grid& g, const std::vector<double>& u, double a, double b, double lam) {
    double T = 0.0, A = 0.0, B = 0.0;
    const std::size_t n = g.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = u[i + 1] - u[i];
        T += g.face[i] * d * d;
    }
    T /= g.h;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = u[i];
        if (v <= 0.0) continue;
        const double lv = std::log(v);
        A += g.volume[i] * v * std::exp(a * lv);
        B += g.volume[i] * v * std::exp(b * lv);
    }
    return 0.5 * T + A / (1.0 + a) - lam * B / (1.0 + b);
}

TrajectoryRecord make_record(double t, const Field& v, const ProblemParams& params, const Field* ref) {
    TrajectoryRecord r;
    const FunctionalBreakdown fb = functionals(v, params);
    r.t = t;
    r.l2 = std::sqrt(fb.L2sq);
    r.linf = linf_norm(v);
    r.h01 = std::sqrt(fb.T);
    r.energy = fb.E;
    r.nehari_residual = nehari_residual(fb, params);
    r.nondeg_const = nondegeneracy_constant(v, params.alpha());
    if (ref) r.dist_to_ref = h01_distance(v, *ref);
    return r;
}

}  // namespace

Trajectory evolve(const Field& v0, const ProblemParams& params, const EvolutionConfig& config,
                  const Field* reference) {
    params.validate();
    config.validate();
    check_field(v0, params);
    if (reference && reference->size() != v0.size()) throw DomainError("reference lives on another grid");

    const Grid& g = *v0.grid;
    const double a = params.alpha(), b = params.beta(), lam = params.lambda;
    const Stepper stepper(params, v0.grid, config.dt, config.reaction_substeps);
    const auto total = static_cast<long>(std::llround(config.t_end / config.dt));

    Trajectory tr;
    Field v = v0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (g.is_dirichlet(i)) v.values[i] = 0.0;
    double E_prev = energy_of(g, v.values, a, b, lam);
    tr.energy_slack = config.dissipation_slack * (1.0 + std::abs(E_prev));
    tr.min_value = *std::min_element(v.values.begin(), v.values.end());

    int below = 0;
    auto record = [&](long k) {
        tr.records.push_back(make_record(config.dt * static_cast<double>(k), v, params, reference));
        if (config.store_snapshots) tr.snapshots.push_back(v);
        const TrajectoryRecord& r = tr.records.back();
        below = r.linf < config.extinction_tol ? below + 1 : 0;
        if (below >= config.extinction_snapshots) tr.extinct = true;
        if (r.linf > config.growth_cap) tr.exceeded_cap = true;
        if (r.dist_to_ref > config.stop_distance) tr.exceeded_distance = true;
    };
    auto should_stop = [&] {
        return (tr.extinct && config.stop_on_extinction) || tr.exceeded_cap || tr.exceeded_distance;
    };

    // E(u^{k-1}) is produced by step k, so increments are checked one step late
    // and the last one after the loop.
    auto check = [&](long k, double E) {
        const double inc = E - E_prev;
        if (inc > tr.max_energy_increase) {
            tr.max_energy_increase = inc;
            tr.worst_step = k;
        }
        if (config.check_dissipation && inc > tr.energy_slack)
            throw SolverError("energy dissipation violated at step " + std::to_string(k),
                              {static_cast<double>(k), config.dt * static_cast<double>(k), E_prev, E});
        E_prev = E;
    };
    record(0);
    for (long k = 1; k <= total && !should_stop(); ++k) {
        double E_before = 0.0;
        stepper.advance(v.values, &E_before);
        if (k > 1) check(k - 1, E_before);
        tr.steps = k;
        for (double x : v.values) tr.min_value = std::min(tr.min_value, x);
        if (k % config.snapshot_stride == 0 || k == total) record(k);
    }
    if (tr.steps > 0) check(tr.steps, energy_of(g, v.values, a, b, lam));
    tr.final_field = v;
    return tr;
}

std::optional<double> extinction_time(const Trajectory& traj, double tol) {
    std::optional<double> t;
    for (const auto& r : traj.records) {
        if (r.linf < tol) {
            if (!t) t = r.t;
        } else {
            t.reset();
        }
    }
    return t;
}

std::string to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::Stable: return "Stable";
        case VerdictKind::Departed: return "Departed";
        case VerdictKind::Extinct: return "Extinct";
        case VerdictKind::GrewUnbounded: return "GrewUnbounded";
    }
    return "?";
}

std::string StabilityVerdict::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["time"] = time ? nlohmann::json(*time) : nlohmann::json(nullptr);
    j["epsilon"] = epsilon;
    j["max_distance"] = max_distance;
    return j.dump();
}

std::string to_string(PerturbationShape s) {
    switch (s) {
        case PerturbationShape::Eigenfunction: return "eigenfunction";
        case PerturbationShape::Bump: return "bump";
        case PerturbationShape::Random: return "random";
    }
    return "?";
}

PerturbationShape perturbation_shape_from_string(const std::string& s) {
    if (s == "eigenfunction") return PerturbationShape::Eigenfunction;
    if (s == "bump") return PerturbationShape::Bump;
    if (s == "random") return PerturbationShape::Random;
    throw ConfigError("unknown perturbation shape '" + s + "' (eigenfunction|bump|random)");
}

Field make_perturbation(PerturbationShape shape, const Field& base, double delta, std::uint64_t seed) {
    if (!(delta >= 0.0)) throw ConfigError("perturbation size must be nonnegative");
    const GridPtr& grid = base.grid;
    const Grid& g = *grid;
    Field p = zero_field(grid);
    if (delta == 0.0) return p;
    switch (shape) {
        case PerturbationShape::Eigenfunction:
            p = principal_dirichlet_eigen(grid, g.dimension).eigenfield;
            break;
        case PerturbationShape::Bump: {
            const double lo = g.x.front(), hi = g.x.back();
            const double c = g.radial() ? 0.5 * hi : 0.5 * (lo + hi);
            const double w = 0.25 * (hi - lo);
            p = sample(grid, [&](double x) {
                const double s = (x - c) / w;
                if (std::abs(s) >= 1.0) return 0.0;
                const double q = std::cos(0.5 * M_PI * s);
                return q * q;
            });
            break;
        }
        case PerturbationShape::Random: {
            std::mt19937_64 gen(seed);
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double u01 = static_cast<double>(gen() >> 11) * 0x1.0p-53;
                p.values[i] = g.is_dirichlet(i) ? 0.0 : 2.0 * u01 - 1.0;
            }
            break;
        }
    }
    // Scale to the requested norm, clip so that base + p ≥ 0, repeat.
    for (int it = 0; it < 50; ++it) {
        const double nrm = h01_norm(p);
        if (!(nrm > 0.0)) throw DomainError("perturbation vanished after clipping");
        for (double& x : p.values) x *= delta / nrm;
        bool clipped = false;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (base.values[i] + p.values[i] < 0.0) {
                p.values[i] = -base.values[i];
                clipped = true;
            }
        if (!clipped) break;
    }
    return p;
}

StabilityResult stability_experiment(const GroundState& gs, const Field& perturbation,
                                     const EvolutionConfig& config, double epsilon) {
    if (perturbation.size() != gs.field.size()) throw DomainError("perturbation lives on another grid");
    Field v0 = gs.field;
    for (std::size_t i = 0; i < v0.size(); ++i) {
        v0.values[i] += perturbation.values[i];
        if (v0.values[i] < 0.0) throw PreconditionError("perturbed datum is negative somewhere");
    }
    EvolutionConfig cfg = config;
    cfg.stop_distance = std::min(cfg.stop_distance, epsilon);
    StabilityResult res;
    res.trajectory = evolve(v0, gs.params, cfg, &gs.field);
    StabilityVerdict& v = res.verdict;
    v.epsilon = epsilon;
    for (const auto& r : res.trajectory.records) {
        v.max_distance = std::max(v.max_distance, r.dist_to_ref);
        if (r.dist_to_ref > epsilon && v.kind == VerdictKind::Stable) {
            v.kind = VerdictKind::Departed;
            v.time = r.t;
        }
    }
    if (res.trajectory.extinct) {
        v.kind = VerdictKind::Extinct;
        v.time = extinction_time(res.trajectory, cfg.extinction_tol);
    } else if (res.trajectory.exceeded_cap && v.kind == VerdictKind::Stable) {
        v.kind = VerdictKind::GrewUnbounded;
        v.time = res.trajectory.records.back().t;
    }
    return res;
}

GlobalInstabilityResult global_instability_experiment(const GroundState& gs, double r,
                                                      const EvolutionConfig& config) {
    if (!gs.params.exponents.is_linear()) throw PreconditionError("global instability requires beta = 1");
    if (!(r > 1.0)) throw PreconditionError("global instability requires r > 1");
    Field v0 = gs.field;
    for (double& x : v0.values) x *= r;

    GlobalInstabilityResult out;
    EvolutionConfig cfg = config;
    cfg.store_snapshots = false;
    out.trajectory = evolve(v0, gs.params, cfg);
    const auto& rec = out.trajectory.records;
    const std::size_t m = rec.size();
    for (const auto& x : rec) {
        out.y.push_back(x.l2 * x.l2);
        out.target.push_back(-2.0 * x.nehari_residual);
    }
    out.slope.assign(m, std::numeric_limits<double>::quiet_NaN());
    out.max_slope_rel_error = 0.0;
    for (std::size_t k = 1; k + 1 < m; ++k) {
        out.slope[k] = (out.y[k + 1] - out.y[k - 1]) / (rec[k + 1].t - rec[k - 1].t);
        out.max_slope_rel_error =
            std::max(out.max_slope_rel_error, std::abs(out.slope[k] - out.target[k]) / std::abs(out.target[k]));
    }
    out.y_strictly_increasing = m >= 2;
    for (std::size_t k = 1; k < m; ++k)
        if (!(out.y[k] > out.y[k - 1])) out.y_strictly_increasing = false;
    out.y_ratio = m ? out.y.back() / out.y.front() : 0.0;

    const double E_hat = gs.energy;
    auto in_well = [&](const TrajectoryRecord& x) { return x.energy < E_hat && x.nehari_residual < 0.0; };
    out.in_well_initially = m && in_well(rec.front());
    out.well_invariant = std::all_of(rec.begin(), rec.end(), in_well);
    out.verdict = out.trajectory.exceeded_cap ? VerdictKind::GrewUnbounded : VerdictKind::Stable;
    return out;
}

ComparisonReport comparison_check(const Trajectory& lower, const Trajectory& upper) {
    if (lower.snapshots.empty() || upper.snapshots.empty())
        throw PreconditionError("comparison needs stored snapshots on both trajectories");
    const Field& w0 = lower.snapshots.front();
    const Field& v0 = upper.snapshots.front();
    if (w0.size() != v0.size()) throw DomainError("trajectories live on different grids");
    for (std::size_t i = 0; i < w0.size(); ++i)
        if (w0.values[i] > v0.values[i]) throw PreconditionError("initial data are not ordered");
    ComparisonReport rep;
    const std::size_t m = std::min(lower.snapshots.size(), upper.snapshots.size());
    for (std::size_t k = 0; k < m; ++k) {
        const Field& w = lower.snapshots[k];
        const Field& v = upper.snapshots[k];
        for (std::size_t i = 0; i < w.size(); ++i)
            rep.max_violation = std::max(rep.max_violation, w.values[i] - v.values[i]);
    }
    rep.snapshots = m;
    rep.upper_nondegeneracy = upper.records.empty() ? 0.0 : upper.records.back().nondeg_const;
    return rep;
}

DecayVerdict small_data_decay(const ProblemParams& params, const Field& v0, const EvolutionConfig& config) {
    DecayVerdict out;
    const Trajectory tr = evolve(v0, params, config);
    out.extinction_time = extinction_time(tr, config.extinction_tol);
    out.decayed = out.extinction_time.has_value();
    // Monotone after the transient: from the record where linf peaks onwards.
    const auto& rec = tr.records;
    std::size_t peak = 0;
    for (std::size_t k = 1; k < rec.size(); ++k)
        if (rec[k].linf > rec[peak].linf) peak = k;
    out.monotone_after_transient = true;
    for (std::size_t k = peak + 1; k < rec.size(); ++k)
        if (rec[k].linf > rec[k - 1].linf) out.monotone_after_transient = false;
    out.decayed = out.decayed && out.monotone_after_transient;
    return out;
}

GrowthVerdict large_data_growth(const ProblemParams& params, const Field& v0, const EvolutionConfig& config) {
    if (!std::isfinite(config.growth_cap)) throw ConfigError("large_data_growth needs a finite growth_cap");
    GrowthVerdict out;
    const Trajectory tr = evolve(v0, params, config);
    out.grew = tr.exceeded_cap;
    out.final_linf = tr.records.back().linf;
    if (out.grew) out.cap_time = tr.records.back().t;
    return out;
}

}  // namespace flatgs
