#include "flatgs/groundstate.hpp"

#include <algorithm>
#include <cmath>

#include "flatgs/error.hpp"
#include "flatgs/spectral.hpp"
#include "json.hpp"

namespace flatgs {

namespace {

// Near the free boundary the shot is ill conditioned: round-off in the
// amplitude moves the zero crossing by far more than the tolerances. Stop at
// u = theta*a and integrate the remaining tail from u = 0 upwards along the
// zero-energy branch, p = u'^2/2 with p' = f(u) + (N-1) sqrt(2p)/r, p(0) = 0.
struct TailFit {
    double r_theta;
    double radius;
};

TailFit tail_corrected_radius(const ProblemParams& params, const RadialProfile& prof, double theta) {
    const double a = prof.amplitude(), target = theta * a;
    double lo = 0.0, hi = prof.end_radius();
    if (!(prof(hi) <= target)) return {hi, hi};
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (prof(mid) > target ? lo : hi) = mid;
    }
    const double r_theta = lo, ut = prof(lo);
    const double al = params.alpha(), be = params.beta(), lam = params.lambda;
    const double k = 4.0 / (1.0 - al);
    const int N = params.dimension;
    auto F = [&](double u) { return std::pow(u, 1.0 + al) / (1.0 + al) - lam * std::pow(u, 1.0 + be) / (1.0 + be); };

    double s = 0.0;
    for (int pass = 0; pass < 3; ++pass) {
        const double r = r_theta + 0.5 * s;
        // State (q, s) with p = F + q, independent variable t, u = ut t^k.
        auto rhs = [&](double t, double q, double& dq, double& ds) {
            if (t <= 0.0) {
                dq = ds = 0.0;
                return;
            }
            const double du = k * ut * std::pow(t, k - 1.0);
            const double sq = std::sqrt(2.0 * std::max(F(ut * std::pow(t, k)) + q, 0.0));
            dq = N > 1 ? (N - 1) / r * sq * du : 0.0;
            ds = sq > 0.0 ? du / sq : 0.0;
        };
        const int M = 4000;
        const double dt = 1.0 / M;
        double q = 0.0, acc = 0.0;
        for (int i = 0; i < M; ++i) {
            const double t = i * dt;
            double k1q, k1s, k2q, k2s, k3q, k3s, k4q, k4s;
            rhs(t, q, k1q, k1s);
            rhs(t + 0.5 * dt, q + 0.5 * dt * k1q, k2q, k2s);
            rhs(t + 0.5 * dt, q + 0.5 * dt * k2q, k3q, k3s);
            rhs(t + dt, q + dt * k3q, k4q, k4s);
            q += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            acc += dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
        }
        s = acc;
        if (N == 1) break;
    }
    return {r_theta, r_theta + s};
}

double grid_flatness(const Field& u) {
    const Grid& g = *u.grid;
    const std::size_t n = g.size();
    std::size_t first = n, last = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (u.values[i] > 0.0) {
            if (first == n) first = i;
            last = i;
        }
    }
    if (first == n) return 0.0;
    double d = 0.0;
    const std::size_t e = last + 1;
    if (e < n && e >= 2)
        d = std::abs(3.0 * u.values[e] - 4.0 * u.values[e - 1] + u.values[e - 2]) / (2.0 * g.h);
    if (!g.radial() && first >= 1 && first + 1 < n) {
        const std::size_t f = first - 1;
        d = std::max(d, std::abs(-3.0 * u.values[f] + 4.0 * u.values[f + 1] - u.values[f + 2]) /
                            (2.0 * g.h));
    }
    return d;
}

double grid_support_radius(const Field& u) {
    const Grid& g = *u.grid;
    const std::size_t n = g.size();
    std::size_t first = n, last = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (u.values[i] > 0.0) {
            if (first == n) first = i;
            last = i;
        }
    }
    if (first == n) return 0.0;
    const double hi = g.x[std::min(last + 1, n - 1)];
    if (g.radial()) return hi;
    const double lo = g.x[first == 0 ? 0 : first - 1];
    return 0.5 * (hi - lo);
}

ProblemParams with_domain(ProblemParams p, const DomainSpec& d) {
    p.domain = d;
    return p;
}

}  // namespace

GroundState make_groundstate(Field field, const ProblemParams& params, std::string method) {
    GroundState gs;
    gs.params = params;
    gs.method = std::move(method);
    gs.breakdown = functionals(field, params);
    if (gs.breakdown.T > 0.0) gs.fibering = fibering_roots(gs.breakdown, params);
    gs.pohozaev_residual = gs.breakdown.P;
    gs.energy = gs.breakdown.E;
    gs.amplitude = linf_norm(field);
    gs.support_radius = grid_support_radius(field);
    gs.flatness_defect = grid_flatness(field);
    gs.field = std::move(field);
    return gs;
}

std::string to_json(const GroundState& gs) {
    nlohmann::json j;
    j["method"] = gs.method;
    j["grid_size"] = gs.field.size();
    j["amplitude"] = gs.amplitude;
    j["energy"] = gs.energy;
    j["support_radius"] = gs.support_radius;
    j["flatness_defect"] = gs.flatness_defect;
    j["shot_slope"] = gs.shot_slope;
    j["pohozaev_residual"] = gs.pohozaev_residual;
    j["pohozaev_relative"] = gs.scale() > 0.0 ? gs.pohozaev_residual / gs.scale() : 0.0;
    j["nehari_residual"] = nehari_residual(gs.breakdown, gs.params);
    j["phi2_at_1"] = phi_second(gs.breakdown, gs.params, 1.0);
    j["iterations"] = gs.iterations;
    j["breakdown"] = {{"T", gs.breakdown.T}, {"A", gs.breakdown.A},     {"B", gs.breakdown.B},
                      {"L2sq", gs.breakdown.L2sq}, {"H", gs.breakdown.H}, {"E", gs.breakdown.E},
                      {"P", gs.breakdown.P}};
    j["fibering"] = nlohmann::json::parse(to_json(gs.fibering));
    return j.dump();
}

FlatShot flat_shot(const ProblemParams& params, double bracket_tol, const ShootOptions& shoot) {
    if (!(params.lambda > 0.0)) throw DomainError("flat profiles require lambda > 0");
    const double uinf = ode_equilibrium(params);

    double lo = 0.0;
    for (int k = 0; k < 40; ++k) {
        const double a = uinf * (1.0 + 1e-6 * std::pow(0.5, k));
        if (shoot_radial(params, a, shoot).event != ShotEvent::HitZero) {
            lo = a;
            break;
        }
    }
    if (lo == 0.0) throw SolverError("flat profile: no low bracket above the equilibrium", {uinf});

    double hi = 2.0 * uinf;
    bool found = false;
    for (int k = 0; k < 200; ++k) {
        if (shoot_radial(params, hi, shoot).event == ShotEvent::HitZero) {
            found = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if (!found)
        throw SolverError("flat profile: no sign change of shooting events over the amplitude bracket",
                          {lo, hi});

    while (hi - lo > bracket_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (shoot_radial(params, mid, shoot).event == ShotEvent::HitZero)
            hi = mid;
        else
            lo = mid;
    }
    ShootOptions dense = shoot;
    dense.keep_dense = true;
    const ShotProfile s = shoot_radial(params, hi, dense);
    if (s.event != ShotEvent::HitZero) throw SolverError("flat profile: final shot lost the zero", {hi});
    const TailFit tail = tail_corrected_radius(params, *s.profile, 1e-4);
    auto prof = std::make_shared<const RadialProfile>(
        s.profile->with_tail(tail.r_theta, tail.radius, 2.0 / (1.0 - params.alpha())));
    return FlatShot{hi, tail.radius, std::abs(s.terminal_slope), prof};
}

Field embed_profile(const RadialProfile& profile, const GridPtr& grid) {
    double centre = 0.0;
    if (const auto* iv = std::get_if<Interval>(&grid->domain)) centre = 0.5 * (iv->a + iv->b);
    return sample(grid, [&](double x) { return profile(x - centre); });
}

namespace {

DomainSpec fitted_domain(const DomainSpec& d, double R) {
    if (const auto* iv = std::get_if<Interval>(&d)) {
        const double c = 0.5 * (iv->a + iv->b);
        return Interval{c - R, c + R};
    }
    return Ball{std::get<Ball>(d).dimension, R};
}

void check_fits(const DomainSpec& d, double R) {
    const double half = std::holds_alternative<Interval>(d)
                            ? 0.5 * (std::get<Interval>(d).b - std::get<Interval>(d).a)
                            : std::get<Ball>(d).radius;
    if (R > half * (1.0 + 1e-12))
        throw DomainError("support radius " + std::to_string(R) + " exceeds the domain (" +
                          std::to_string(half) + ")");
}

}  // namespace

GroundState find_flat_profile(const ProblemParams& params, const FlatOptions& options) {
    params.validate();
    const FlatShot fs = flat_shot(params, options.bracket_tol, options.shoot);
    const DomainSpec domain =
        options.fit_domain ? fitted_domain(params.domain, fs.support_radius) : params.domain;
    check_fits(domain, fs.support_radius);
    const ProblemParams p = with_domain(params, domain);
    const GridPtr grid = build_grid(domain, options.n);
    GroundState gs = make_groundstate(embed_profile(*fs.profile, grid), p, "shooting");
    gs.amplitude = fs.amplitude;
    gs.support_radius = fs.support_radius;
    gs.shot_slope = fs.slope;
    gs.flatness_defect = fs.slope;
    gs.profile = fs.profile;
    return gs;
}

namespace {

std::vector<double> apply_stiffness(const Stiffness& K, const std::vector<double>& u) {
    const std::size_t n = u.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = K.diag[i] * u[i];
        if (i) s += K.off[i - 1] * u[i - 1];
        if (i + 1 < n) s += K.off[i] * u[i + 1];
        out[i] = s;
    }
    return out;
}

Field initial_or_eigen(const ProblemParams& params, const GridPtr& grid,
                       const std::optional<Field>& initial) {
    if (initial) {
        if (initial->size() != grid->size()) throw DomainError("initial field lives on another grid");
        return *initial;
    }
    return principal_dirichlet_eigen(grid, params.dimension).eigenfield;
}

}  // namespace

GroundState nehari_minimize(const ProblemParams& params, const GridPtr& grid,
                            const std::optional<Field>& initial, const DescentOptions& options) {
    params.validate();
    if (params.exponents.is_linear()) throw PreconditionError("nehari_minimize requires beta < 1");
    if (grid->dimension != params.dimension) throw DomainError("grid dimension mismatch");
    const Grid& g = *grid;
    const Stiffness K = stiffness(g);
    const double a = params.alpha(), b = params.beta(), lam = params.lambda;
    const Field x0 = initial_or_eigen(params, grid, initial);

    auto r_min_of = [&](const std::vector<double>& x, FunctionalBreakdown& fb) -> double {
        fb = functionals(Field{grid, x}, params);
        if (!(fb.T > 0.0)) return -1.0;
        const FiberingReport rep = fibering_roots(fb, params);
        return rep.r_min ? *rep.r_min : -1.0;
    };

    FunctionalBreakdown fb0;
    std::vector<double> x0n = x0.values;
    const double r0 = r_min_of(x0n, fb0);
    if (r0 <= 0.0)
        throw PreconditionError("initial field has no fibering minimum (lambda below the Lambda_1 level)");
    const double scale0 = r0 * r0 * fb0.T + std::pow(r0, 1 + a) * fb0.A + lam * std::pow(r0, 1 + b) * fb0.B;

    // Objective on directions: Ĵ(x) = E(r_min(x) x); its gradient is r ∇E(r x)
    // because Φ'(r_min) = 0.
    Objective obj = [&](const std::vector<double>& x, double& value, std::vector<double>* grad) {
        FunctionalBreakdown fb;
        const double r = r_min_of(x, fb);
        if (r <= 0.0) return false;
        value = phi(fb, params, r) / scale0;
        if (grad) {
            std::vector<double> w(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) w[i] = r * x[i];
            const std::vector<double> kw = apply_stiffness(K, w);
            for (std::size_t i = 0; i < x.size(); ++i) {
                double gi = kw[i];
                if (w[i] > 0.0) gi += g.volume[i] * (std::pow(w[i], a) - lam * std::pow(w[i], b));
                (*grad)[i] = g.is_dirichlet(i) ? 0.0 : r * gi / scale0;
            }
        }
        return true;
    };

    const DescentResult dr = minimize_homogeneous(grid, x0n, obj, options);
    FunctionalBreakdown fb;
    const double r = r_min_of(dr.x, fb);
    std::vector<double> w(dr.x.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = r * dr.x[i];
    GroundState gs = make_groundstate(Field{grid, w}, with_domain(params, grid->domain), "nehari");
    gs.iterations = dr.iterations;
    return gs;
}

GroundState j_minimize(const ProblemParams& params, const GridPtr& grid,
                       const std::optional<Field>& initial, const DescentOptions& options) {
    params.validate();
    if (!params.exponents.is_linear()) throw PreconditionError("j_minimize requires beta = 1");
    if (grid->dimension != params.dimension) throw DomainError("grid dimension mismatch");
    const Grid& g = *grid;
    const Stiffness K = stiffness(g);
    const double a = params.alpha(), lam = params.lambda;
    const Field x0 = initial_or_eigen(params, grid, initial);
    {
        const FunctionalBreakdown fb = functionals(x0, params);
        if (!(fb.H < 0.0))
            throw DomainError("initial field is not admissible: H_lambda(u) >= 0");
    }
    const double pa = 2.0 / (1.0 - a);
    const double ph = (1.0 + a) / (1.0 - a);

    // log J = pa log A − ph log(−H) + const
    Objective obj = [&](const std::vector<double>& x, double& value, std::vector<double>* grad) {
        double A = 0.0, L = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] <= 0.0) continue;
            A += g.volume[i] * std::pow(x[i], 1.0 + a);
            L += g.volume[i] * x[i] * x[i];
        }
        const std::vector<double> kx = apply_stiffness(K, x);
        double T = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) T += x[i] * kx[i];
        const double H = T - lam * L;
        if (!(H < 0.0) || !(A > 0.0)) return false;
        value = pa * std::log(A) - ph * std::log(-H);
        if (grad) {
            for (std::size_t i = 0; i < x.size(); ++i) {
                double gi = -ph * 2.0 * (kx[i] - lam * g.volume[i] * x[i]) / H;
                if (x[i] > 0.0) gi += pa * (1.0 + a) * g.volume[i] * std::pow(x[i], a) / A;
                (*grad)[i] = g.is_dirichlet(i) ? 0.0 : gi;
            }
        }
        return true;
    };

    const DescentResult dr = minimize_homogeneous(grid, x0.values, obj, options);
    const FunctionalBreakdown fb = functionals(Field{grid, dr.x}, params);
    const double r = std::pow(fb.A / -fb.H, 1.0 / (1.0 - a));
    std::vector<double> w(dr.x.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = r * dr.x[i];
    GroundState gs = make_groundstate(Field{grid, w}, with_domain(params, grid->domain), "jmin");
    gs.iterations = dr.iterations;
    return gs;
}

SecondVariationReport verify_second_variation(const GroundState& gs, double flat_threshold) {
    if (!(gs.support_radius > 0.0) ||
        gs.flatness_defect > flat_threshold * gs.amplitude / gs.support_radius)
        throw PreconditionError("verify_second_variation requires a flat state");
    SecondVariationReport rep;
    rep.label = classify_exponents(gs.params.alpha(), gs.params.beta(), gs.params.dimension);
    rep.phi2 = phi_second(gs.breakdown, gs.params, 1.0);
    rep.closed_form = flat_second_variation(gs.params, gs.breakdown.B);
    if (rep.closed_form != 0.0)
        rep.relative_error = std::abs(rep.phi2 - rep.closed_form) / std::abs(rep.closed_form);
    else
        rep.relative_error = std::abs(rep.phi2) / gs.scale();
    switch (rep.label.regime) {
        case Regime::UnstableSet: rep.sign_matches = rep.phi2 < 0.0; break;
        case Regime::StableSet: rep.sign_matches = rep.phi2 > 0.0; break;
        case Regime::OnCurve: rep.sign_matches = std::abs(rep.phi2) <= 1e-6 * gs.scale(); break;
    }
    return rep;
}

GroundState transfer_groundstate(const GroundState& gs, double target_lambda,
                                 const std::optional<DomainSpec>& domain) {
    if (!gs.params.exponents.is_linear()) throw PreconditionError("transfer requires beta = 1");
    if (!gs.profile) throw PreconditionError("transfer requires a shooting-based profile");
    if (!(target_lambda > 0.0)) throw DomainError("target lambda must be positive");
    ProblemParams target = gs.params;
    target.lambda = target_lambda;
    if (domain) target.domain = *domain;
    target.validate();

    const double kappa = std::sqrt(gs.params.lambda / target_lambda);
    const ScalingTransfer st = scaling_transfer(gs.params, kappa);
    const RadialProfile prof = gs.profile->rescaled(st.amplitude_factor, st.support_factor);
    const double R = gs.support_radius * st.support_factor;
    check_fits(target.domain, R);

    const GridPtr grid = build_grid(target.domain, gs.field.size());
    GroundState out = make_groundstate(embed_profile(prof, grid), target, "transfer");
    out.amplitude = prof.amplitude();
    out.support_radius = R;
    out.shot_slope = gs.shot_slope * st.amplitude_factor / st.support_factor;
    out.profile = std::make_shared<RadialProfile>(prof);
    return out;
}

}  // namespace flatgs
