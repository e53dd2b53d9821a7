#include "flatgs/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "flatgs/error.hpp"
#include "flatgs/groundstate.hpp"
#include "flatgs/tridiagonal.hpp"
#include "json.hpp"

namespace flatgs {

std::string to_json(const EigenResult& r) {
    nlohmann::json j;
    j["eigenvalue"] = r.eigenvalue;
    j["residual"] = r.residual;
    j["iterations"] = r.iterations;
    j["floor_sensitivity"] =
        r.floor_sensitivity ? nlohmann::json(*r.floor_sensitivity) : nlohmann::json(nullptr);
    return j.dump();
}

namespace {

struct Pencil {
    std::vector<double> diag, off, mass;
};

// Restriction of K (plus a diagonal potential term) to nodes [first, last].
Pencil restrict_pencil(const Grid& g, std::size_t first, std::size_t last,
                       const std::vector<double>& extra_diag) {
    const Stiffness K = stiffness(g);
    Pencil p;
    for (std::size_t i = first; i <= last; ++i) {
        p.diag.push_back(K.diag[i] + extra_diag[i - first]);
        p.mass.push_back(g.volume[i]);
        if (i < last) p.off.push_back(K.off[i]);
    }
    return p;
}

Field embed(const GridPtr& grid, std::size_t first, const std::vector<double>& v) {
    Field f = zero_field(grid);
    std::copy(v.begin(), v.end(), f.values.begin() + static_cast<std::ptrdiff_t>(first));
    return f;
}

}  // namespace

EigenResult principal_dirichlet_eigen(const GridPtr& grid, int N) {
    if (grid->dimension != N) throw DomainError("grid dimension mismatch");
    const std::size_t f = grid->first_free(), l = grid->last_free();
    const Pencil p = restrict_pencil(*grid, f, l, std::vector<double>(l - f + 1, 0.0));
    const PencilEigen e = smallest_pencil_eigen(p.diag, p.off, p.mass, false, 1e-13);
    EigenResult r;
    r.eigenvalue = e.value;
    r.eigenfield = embed(grid, f, e.vector);
    r.iterations = e.iterations;
    r.residual = e.residual;
    return r;
}

LinearizedOperator build_linearized_operator(const GroundState& gs, double floor_rel) {
    const Field& u = gs.field;
    const Grid& g = *u.grid;
    const std::size_t n = g.size();
    std::size_t first = n, last = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (u.values[i] > 0.0) {
            if (first == n) first = i;
            last = i;
        }
    if (first == n) throw PreconditionError("linearization needs a positive profile");
    LinearizedOperator op;
    op.grid = u.grid;
    op.first = first;
    op.last = last;
    op.floor = floor_rel * linf_norm(u);
    const double a = gs.params.alpha(), b = gs.params.beta(), lam = gs.params.lambda;
    for (std::size_t i = first; i <= last; ++i) {
        const double v = std::max(u.values[i], op.floor);
        op.potential.push_back(lam * b * std::pow(v, b - 1.0) - a * std::pow(v, a - 1.0));
    }
    return op;
}

namespace {

EigenResult solve_linearized(const LinearizedOperator& op) {
    const Grid& g = *op.grid;
    std::vector<double> extra(op.potential.size());
    for (std::size_t k = 0; k < extra.size(); ++k) extra[k] = -op.potential[k] * g.volume[op.first + k];
    const Pencil p = restrict_pencil(g, op.first, op.last, extra);
    const PencilEigen e = smallest_pencil_eigen(p.diag, p.off, p.mass, true, 1e-12);
    EigenResult r;
    r.eigenvalue = e.value;
    r.eigenfield = embed(op.grid, op.first, e.vector);
    r.iterations = e.iterations;
    r.residual = e.residual;
    return r;
}

}  // namespace

EigenResult linearized_mu1(const GroundState& gs, double floor_rel, double sensitivity_tol) {
    EigenResult r = solve_linearized(build_linearized_operator(gs, floor_rel));
    const EigenResult r10 = solve_linearized(build_linearized_operator(gs, 0.1 * floor_rel));
    const double sens = std::abs(r.eigenvalue - r10.eigenvalue) / std::max(std::abs(r.eigenvalue), 1e-300);
    r.floor_sensitivity = sens;
    if (sens > sensitivity_tol)
        throw SolverError("linearized eigenvalue is sensitive to the potential floor",
                          {r.eigenvalue, r10.eigenvalue, sens});
    return r;
}

double rayleigh_at(const GroundState& gs, const Field& psi, double floor_rel) {
    const Field& u = gs.field;
    if (psi.size() != u.size()) throw DomainError("psi lives on another grid");
    const Grid& g = *u.grid;
    const double den = l2sq(psi);
    if (!(den > 0.0)) throw DomainError("rayleigh quotient of a zero field");
    const double fl = floor_rel * linf_norm(u);
    const double a = gs.params.alpha(), b = gs.params.beta(), lam = gs.params.lambda;
    double pot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (psi.values[i] == 0.0) continue;
        const double v = std::max(u.values[i], fl);
        const double q = lam * b * std::pow(v, b - 1.0) - a * std::pow(v, a - 1.0);
        pot += g.volume[i] * q * psi.values[i] * psi.values[i];
    }
    return (dirichlet_energy(psi) - pot) / den;
}

double hardy_ratio(double mu, const ProblemParams& params, const GridPtr& grid, HardyBranch branch) {
    if (grid->dimension != params.dimension) throw DomainError("grid dimension mismatch");
    if (branch == HardyBranch::R && mu < 0.0)
        throw DomainError("r(mu) needs mu >= 0 (denominator would be indefinite)");
    if (branch == HardyBranch::R1 && mu > 0.0) throw DomainError("r1(mu) is defined for mu <= 0");
    const double a = params.alpha(), b = params.beta(), lam = params.lambda;
    if (!(lam > 0.0)) throw DomainError("hardy ratio needs lambda > 0");
    const double gamma = 2.0 * (1.0 - b) / (1.0 - a);
    const Grid& g = *grid;
    const Field d = boundary_distance_profile(grid);
    const std::size_t f = g.first_free(), l = g.last_free();
    std::vector<double> extra, mass;
    for (std::size_t i = f; i <= l; ++i) {
        const double di = d.values[i];
        const double V = g.volume[i];
        const double wgt = lam * b * std::pow(di, -gamma);
        if (branch == HardyBranch::R) {
            extra.push_back(a * V / (di * di));
            mass.push_back(V * (wgt + mu));
        } else {
            extra.push_back(V * (a / (di * di) + mu));
            mass.push_back(V * wgt);
        }
    }
    Pencil p = restrict_pencil(g, f, l, extra);
    p.mass = mass;
    return smallest_pencil_eigen(p.diag, p.off, p.mass, true, 1e-12).value;
}

std::optional<double> hardy_fixed_point(const ProblemParams& params, const GridPtr& grid) {
    const double r0 = hardy_ratio(0.0, params, grid, HardyBranch::R);
    if (r0 == 1.0) return 0.0;
    const HardyBranch br = r0 > 1.0 ? HardyBranch::R : HardyBranch::R1;
    const double sgn = r0 > 1.0 ? 1.0 : -1.0;
    double lo = 0.0, hi = 1.0;
    bool bracket = false;
    for (int k = 0; k < 60; ++k) {
        const double r = hardy_ratio(sgn * hi, params, grid, br);
        if ((r - 1.0) * (r0 - 1.0) <= 0.0) {
            bracket = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if (!bracket) return std::nullopt;
    for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double r = hardy_ratio(sgn * mid, params, grid, br);
        if ((r - 1.0) * (r0 - 1.0) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return sgn * 0.5 * (lo + hi);
}

}  // namespace flatgs
