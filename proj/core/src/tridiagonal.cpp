#include "flatgs/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flatgs/error.hpp"

namespace flatgs {

TridiagonalSolver::TridiagonalSolver(const std::vector<double>& lower, const std::vector<double>& diag,
                                     const std::vector<double>& upper)
    : lower_(lower), c_(diag.size(), 0.0), inv_pivot_(diag.size(), 0.0) {
    const std::size_t n = diag.size();
    if (n == 0 || lower.size() != n || upper.size() != n)
        throw SolverError("tridiagonal: inconsistent band sizes");
    double prev_c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pivot = diag[i] - (i ? lower[i] * prev_c : 0.0);
        const double scale = std::abs(diag[i]) + std::abs(lower[i]) + std::abs(upper[i]);
        if (!(std::abs(pivot) > 1e-300) || std::abs(pivot) < 1e-14 * scale)
            throw SolverError("tridiagonal: zero pivot", {static_cast<double>(i), pivot});
        inv_pivot_[i] = 1.0 / pivot;
        c_[i] = upper[i] * inv_pivot_[i];
        prev_c = c_[i];
    }
}

void TridiagonalSolver::solve_in_place(double* x) const {
    const std::size_t n = inv_pivot_.size();
    x[0] *= inv_pivot_[0];
    for (std::size_t i = 1; i < n; ++i) x[i] = (x[i] - lower_[i] * x[i - 1]) * inv_pivot_[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c_[i] * x[i + 1];
}

std::vector<double> TridiagonalSolver::solve(std::vector<double> rhs) const {
    if (rhs.size() != size()) throw SolverError("tridiagonal: rhs size mismatch");
    solve_in_place(rhs.data());
    return rhs;
}

std::size_t sturm_count(const std::vector<double>& diag, const std::vector<double>& off,
                        const std::vector<double>& mass, double sigma) {
    std::size_t count = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        double a = diag[i] - sigma * mass[i];
        if (i) a -= off[i - 1] * off[i - 1] / d;
        if (a == 0.0) a = -std::numeric_limits<double>::min();
        if (a < 0.0) ++count;
        d = a;
    }
    return count;
}

namespace {

double m_norm(const std::vector<double>& x, const std::vector<double>& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += m[i] * x[i] * x[i];
    return std::sqrt(s);
}

void apply_k(const std::vector<double>& diag, const std::vector<double>& off,
             const std::vector<double>& x, std::vector<double>& y) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i) s += off[i - 1] * x[i - 1];
        if (i + 1 < n) s += off[i] * x[i + 1];
        y[i] = s;
    }
}

}  // namespace

PencilEigen smallest_pencil_eigen(const std::vector<double>& diag, const std::vector<double>& off,
                                  const std::vector<double>& mass, bool use_sturm, double tol,
                                  int max_iter) {
    const std::size_t n = diag.size();
    if (n == 0 || off.size() + 1 != n || mass.size() != n)
        throw SolverError("eigen: inconsistent pencil sizes");
    for (double m : mass)
        if (!(m > 0.0)) throw SolverError("eigen: mass matrix must be positive");

    double sigma = 0.0;
    if (use_sturm) {
        // Gershgorin bounds of M^{-1/2} K M^{-1/2}.
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0;
            if (i) r += std::abs(off[i - 1]) / std::sqrt(mass[i] * mass[i - 1]);
            if (i + 1 < n) r += std::abs(off[i]) / std::sqrt(mass[i] * mass[i + 1]);
            lo = std::min(lo, diag[i] / mass[i] - r);
            hi = std::max(hi, diag[i] / mass[i] + r);
        }
        lo -= 1e-12 * (1.0 + std::abs(lo));
        hi += 1e-12 * (1.0 + std::abs(hi));
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (sturm_count(diag, off, mass, mid) >= 1)
                hi = mid;
            else
                lo = mid;
            if (hi - lo <= 1e-14 * std::max({1.0, std::abs(lo), std::abs(hi)})) break;
        }
        // Slightly below mu_1 keeps K - sigma M positive definite.
        sigma = lo - 1e-9 * std::max(1.0, std::abs(lo));
    }

    std::vector<double> lower(n, 0.0), dd(n), upper(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        dd[i] = diag[i] - sigma * mass[i];
        if (i) lower[i] = off[i - 1];
        if (i + 1 < n) upper[i] = off[i];
    }
    const TridiagonalSolver solver(lower, dd, upper);

    PencilEigen out;
    std::vector<double> x(n, 1.0), kx(n);
    double nx = m_norm(x, mass);
    for (double& v : x) v /= nx;
    double mu_prev = std::numeric_limits<double>::infinity();
    int quiet = 0;
    for (int it = 1; it <= max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) x[i] *= mass[i];
        solver.solve_in_place(x.data());
        nx = m_norm(x, mass);
        for (double& v : x) v /= nx;
        apply_k(diag, off, x, kx);
        double mu = 0.0;
        for (std::size_t i = 0; i < n; ++i) mu += x[i] * kx[i];
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = kx[i] - mu * mass[i] * x[i];
            res += r * r / mass[i];
        }
        res = std::sqrt(res);
        out.value = mu;
        out.iterations = it;
        out.residual = res;
        if (res <= tol * (1.0 + std::abs(mu))) break;
        quiet = std::abs(mu - mu_prev) <= 1e-15 * (1.0 + std::abs(mu)) ? quiet + 1 : 0;
        if (quiet >= 3) break;
        mu_prev = mu;
    }
    if (out.residual > 1e-6 * (1.0 + std::abs(out.value)))
        throw SolverError("eigen: inverse iteration stagnated",
                          {out.value, out.residual, static_cast<double>(out.iterations)});
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += mass[i] * x[i];
    if (s < 0.0)
        for (double& v : x) v = -v;
    out.vector = std::move(x);
    return out;
}

}  // namespace flatgs
