#include "flatgs/descent.hpp"

#include <algorithm>
#include <cmath>

#include "flatgs/error.hpp"

namespace flatgs {

namespace {

TridiagonalSolver build_preconditioner(const Grid& g, double shift) {
    const Stiffness k = stiffness(g);
    const std::size_t f = g.first_free(), l = g.last_free();
    const std::size_t m = l - f + 1;
    std::vector<double> lower(m, 0.0), diag(m), upper(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t i = f + j;
        diag[j] = k.diag[i] + shift * g.volume[i];
        if (j) lower[j] = k.off[i - 1];
        if (j + 1 < m) upper[j] = k.off[i];
    }
    return TridiagonalSolver(lower, diag, upper);
}

void project(const Grid& g, std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = g.is_dirichlet(i) ? 0.0 : std::max(x[i], 0.0);
        s += g.volume[i] * x[i] * x[i];
    }
    if (s > 0.0) {
        s = 1.0 / std::sqrt(s);
        for (double& v : x) v *= s;
    }
}

}  // namespace

SobolevPreconditioner::SobolevPreconditioner(const GridPtr& grid, double shift)
    : grid_(grid), solver_(build_preconditioner(*grid, shift)) {}

std::vector<double> SobolevPreconditioner::apply(const std::vector<double>& g) const {
    const std::size_t f = grid_->first_free();
    std::vector<double> out(g.size(), 0.0);
    std::vector<double> r(g.begin() + static_cast<std::ptrdiff_t>(f),
                          g.begin() + static_cast<std::ptrdiff_t>(f + solver_.size()));
    solver_.solve_in_place(r.data());
    std::copy(r.begin(), r.end(), out.begin() + static_cast<std::ptrdiff_t>(f));
    return out;
}

DescentResult minimize_homogeneous(const GridPtr& grid, std::vector<double> x0,
                                   const Objective& objective, const DescentOptions& options) {
    const Grid& g = *grid;
    if (x0.size() != g.size()) throw DomainError("initial field has the wrong size");
    project(g, x0);

    DescentResult res;
    res.x = std::move(x0);
    std::vector<double> grad(g.size());
    if (!objective(res.x, res.value, &grad))
        throw DomainError("initial field is outside the admissible set");
    res.history.push_back(res.value);

    const SobolevPreconditioner P(grid, options.preconditioner_shift);
    double step = options.initial_step;
    std::vector<double> trial(g.size()), trial_grad(g.size());

    for (int it = 1; it <= options.max_iter; ++it) {
        res.iterations = it;
        std::vector<double> d = P.apply(grad);
        double gd = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            d[i] = -d[i];
            gd += grad[i] * d[i];
        }
        res.gradient_norm = std::sqrt(std::max(0.0, -gd));
        if (res.gradient_norm < options.tol) {
            res.converged = true;
            break;
        }

        bool accepted = false;
        double ft = 0.0;
        for (int tries = 0; tries < 60; ++tries) {
            for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = res.x[i] + step * d[i];
            project(g, trial);
            if (objective(trial, ft, nullptr) && ft <= res.value + 1e-4 * step * gd) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No descent possible at machine precision: stationary as far as
            // this iteration can tell.
            res.converged = res.gradient_norm < std::sqrt(options.tol);
            break;
        }
        res.x.swap(trial);
        objective(res.x, res.value, &grad);
        res.history.push_back(res.value);
        step = std::min(step * 2.0, 1e8);

        const auto w = static_cast<std::size_t>(options.stall_window);
        if (res.history.size() > w) {
            const double old = res.history[res.history.size() - 1 - w];
            if (old - res.value <= options.stall_tol * (1.0 + std::abs(res.value))) {
                res.converged = true;
                break;
            }
        }
    }
    if (!res.converged && options.throw_on_failure) {
        std::vector<double> diag{res.value, res.gradient_norm};
        diag.insert(diag.end(), res.x.begin(), res.x.end());
        throw SolverError("descent did not converge within the iteration budget", diag);
    }
    return res;
}

}  // namespace flatgs
