#include "flatgs/fibering.hpp"

#include <cmath>
#include "json.hpp"

#include "flatgs/error.hpp"
#include "flatgs/spectral.hpp"

namespace flatgs {

double phi(const FunctionalBreakdown& fb, const ProblemParams& p, double r) {
    const double a = p.alpha(), b = p.beta();
    return 0.5 * r * r * fb.T + std::pow(r, 1.0 + a) * fb.A / (1.0 + a) -
           p.lambda * std::pow(r, 1.0 + b) * fb.B / (1.0 + b);
}

double phi_prime(const FunctionalBreakdown& fb, const ProblemParams& p, double r) {
    return r * fb.T + std::pow(r, p.alpha()) * fb.A - p.lambda * std::pow(r, p.beta()) * fb.B;
}

double phi_second(const FunctionalBreakdown& fb, const ProblemParams& p, double r) {
    const double a = p.alpha(), b = p.beta();
    return fb.T + a * std::pow(r, a - 1.0) * fb.A - p.lambda * b * std::pow(r, b - 1.0) * fb.B;
}

namespace {

// g(r) = Φ'(r)/r
double g_of(const FunctionalBreakdown& fb, const ProblemParams& p, double r) {
    return fb.T + std::pow(r, p.alpha() - 1.0) * fb.A - p.lambda * std::pow(r, p.beta() - 1.0) * fb.B;
}

double bisect_log(const FunctionalBreakdown& fb, const ProblemParams& p, double lo, double hi) {
    double glo = g_of(fb, p, lo);
    for (int it = 0; it < 300 && hi / lo - 1.0 > 1e-15; ++it) {
        const double mid = std::sqrt(lo * hi);
        const double gm = g_of(fb, p, mid);
        if (gm == 0.0) return mid;
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return std::sqrt(lo * hi);
}

void check_breakdown(const FunctionalBreakdown& fb) {
    if (!(fb.T > 0.0)) throw DomainError("fibering analysis requires T(u) > 0");
}

void fill_roots(FiberingReport& rep, const FunctionalBreakdown& fb, const ProblemParams& p,
                std::vector<double> roots) {
    rep.root_count = static_cast<int>(roots.size());
    for (double r : roots) {
        const double s = phi_second(fb, p, r);
        if (s <= 0.0 && !rep.r_max) {
            rep.r_max = r;
            rep.phi2_at_rmax = s;
        } else {
            rep.r_min = r;
            rep.phi2_at_rmin = s;
        }
    }
}

}  // namespace

FiberingReport fibering_roots(const FunctionalBreakdown& fb, const ProblemParams& p) {
    check_breakdown(fb);
    FiberingReport rep;
    const double a = p.alpha(), b = p.beta();
    if (p.exponents.is_linear()) {
        if (fb.H < 0.0 && fb.A > 0.0) {
            const double r = std::pow(fb.A / -fb.H, 1.0 / (1.0 - a));
            rep.root_count = 1;
            rep.r_max = r;
            rep.phi2_at_rmax = phi_second(fb, p, r);
        }
        return rep;
    }
    if (!(fb.A > 0.0) || !(fb.B > 0.0) || !(p.lambda > 0.0)) return rep;

    const double rs = std::pow((1.0 - a) * fb.A / (p.lambda * (1.0 - b) * fb.B), 1.0 / (b - a));
    const double gs = g_of(fb, p, rs);
    const double scale = fb.T + std::pow(rs, a - 1.0) * fb.A + p.lambda * std::pow(rs, b - 1.0) * fb.B;
    if (std::abs(gs) <= 1e-12 * scale) {
        rep.root_count = 1;
        rep.degenerate = true;
        rep.r_max = rep.r_min = rs;
        rep.phi2_at_rmax = rep.phi2_at_rmin = phi_second(fb, p, rs);
        return rep;
    }
    if (gs > 0.0) return rep;

    double lo = rs;
    while (g_of(fb, p, lo) <= 0.0) lo *= 0.5;
    double hi = rs;
    while (g_of(fb, p, hi) <= 0.0) hi *= 2.0;
    const double r1 = bisect_log(fb, p, lo, rs);
    const double r2 = bisect_log(fb, p, rs, hi);
    rep.root_count = 2;
    rep.r_max = r1;
    rep.r_min = r2;
    rep.phi2_at_rmax = phi_second(fb, p, r1);
    rep.phi2_at_rmin = phi_second(fb, p, r2);
    return rep;
}

FiberingReport fibering_roots_bisection(const FunctionalBreakdown& fb, const ProblemParams& p) {
    check_breakdown(fb);
    FiberingReport rep;
    std::vector<double> roots;
    // Geometric scan over 60 decades, then bisection inside each sign change.
    double r_prev = 1e-30;
    double g_prev = g_of(fb, p, r_prev);
    for (int k = 1; k <= 1200; ++k) {
        const double r = std::pow(10.0, -30.0 + 0.05 * k);
        const double gr = g_of(fb, p, r);
        if ((gr > 0.0) != (g_prev > 0.0)) roots.push_back(bisect_log(fb, p, r_prev, r));
        r_prev = r;
        g_prev = gr;
    }
    fill_roots(rep, fb, p, roots);
    return rep;
}

std::string to_json(const FiberingReport& rep) {
    nlohmann::json j;
    j["root_count"] = rep.root_count;
    j["r_max"] = rep.r_max ? nlohmann::json(*rep.r_max) : nlohmann::json(nullptr);
    j["r_min"] = rep.r_min ? nlohmann::json(*rep.r_min) : nlohmann::json(nullptr);
    j["phi2_at_rmax"] = rep.phi2_at_rmax;
    j["phi2_at_rmin"] = rep.phi2_at_rmin;
    j["degenerate"] = rep.degenerate;
    return j.dump();
}

double lambda_of_u(const FunctionalBreakdown& fb, double alpha, double beta) {
    if (!(fb.T > 0.0) || !(fb.A > 0.0) || !(fb.B > 0.0))
        throw DomainError("lambda(u) requires T, A, B > 0");
    return std::pow(fb.A, (1.0 - beta) / (1.0 - alpha)) *
           std::pow(fb.T, (beta - alpha) / (1.0 - alpha)) / fb.B;
}

double lambda0_of_u(const FunctionalBreakdown& fb, double alpha, double beta) {
    return fibering_constants(alpha, beta).c0 * lambda_of_u(fb, alpha, beta);
}

double lambda1_of_u(const FunctionalBreakdown& fb, double alpha, double beta) {
    return fibering_constants(alpha, beta).c1 * lambda_of_u(fb, alpha, beta);
}

double j_functional(const FunctionalBreakdown& fb, const ProblemParams& p) {
    if (!p.exponents.is_linear()) throw PreconditionError("J_lambda is defined for beta = 1");
    if (!(fb.H < 0.0)) throw DomainError("J_lambda requires H_lambda(u) < 0");
    if (!(fb.A > 0.0)) throw DomainError("J_lambda requires A(u) > 0");
    const double a = p.alpha();
    return (1.0 - a) / (2.0 * (1.0 + a)) * std::pow(fb.A, 2.0 / (1.0 - a)) /
           std::pow(-fb.H, (1.0 + a) / (1.0 - a));
}

bool potential_well_membership(const FunctionalBreakdown& fb, const ProblemParams& p, double E_hat) {
    return fb.E < E_hat && nehari_residual(fb, p) < 0.0;
}

LambdaEstimate estimate_Lambda(const ProblemParams& params, const GridPtr& grid,
                               const DescentOptions& options) {
    params.validate();
    if (params.exponents.is_linear()) throw DomainError("Lambda estimates require beta < 1");
    if (grid->dimension != params.dimension) throw DomainError("grid dimension mismatch");
    const double a = params.alpha(), b = params.beta();
    const double p = (1.0 - b) / (1.0 - a);
    const double q = (b - a) / (1.0 - a);
    const Grid& g = *grid;
    const Stiffness K = stiffness(g);
    const std::size_t n = g.size();

    // log λ(u) = p log A + q log T − log B
    Objective obj = [&](const std::vector<double>& u, double& value, std::vector<double>* grad) {
        double T = 0.0, A = 0.0, B = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double d = u[i + 1] - u[i];
            T += g.face[i] * d * d;
        }
        T /= g.h;
        for (std::size_t i = 0; i < n; ++i) {
            if (u[i] <= 0.0) continue;
            A += g.volume[i] * std::pow(u[i], 1.0 + a);
            B += g.volume[i] * std::pow(u[i], 1.0 + b);
        }
        if (!(T > 0.0) || !(A > 0.0) || !(B > 0.0)) return false;
        value = p * std::log(A) + q * std::log(T) - std::log(B);
        if (grad) {
            for (std::size_t i = 0; i < n; ++i) {
                double ku = K.diag[i] * u[i];
                if (i) ku += K.off[i - 1] * u[i - 1];
                if (i + 1 < n) ku += K.off[i] * u[i + 1];
                double gi = q * 2.0 * ku / T;
                if (u[i] > 0.0)
                    gi += g.volume[i] * (p * (1.0 + a) * std::pow(u[i], a) / A -
                                         (1.0 + b) * std::pow(u[i], b) / B);
                (*grad)[i] = g.is_dirichlet(i) ? 0.0 : gi;
            }
        }
        return true;
    };

    const EigenResult phi1 = principal_dirichlet_eigen(grid, params.dimension);
    DescentOptions opt = options;
    const bool throw_on_failure = opt.throw_on_failure;
    opt.throw_on_failure = false;
    DescentResult dr = minimize_homogeneous(grid, phi1.eigenfield.values, obj, opt);

    LambdaEstimate out;
    out.lambda_min = std::exp(dr.value);
    const FiberingConstants c = fibering_constants(a, b);
    out.Lambda0 = c.c0 * out.lambda_min;
    out.Lambda1 = c.c1 * out.lambda_min;
    out.argmin = Field{grid, dr.x};
    out.iterations = dr.iterations;
    out.converged = dr.converged;
    for (double v : dr.history) out.history.push_back(std::exp(v));
    if (!out.converged && throw_on_failure) {
        std::vector<double> diag{out.lambda_min};
        diag.insert(diag.end(), dr.x.begin(), dr.x.end());
        throw SolverError("estimate_Lambda did not converge", diag);
    }
    return out;
}

}  // namespace flatgs
