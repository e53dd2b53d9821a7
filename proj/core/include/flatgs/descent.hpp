#pragma once

#include <functional>
#include <vector>

#include "flatgs/grid.hpp"
#include "flatgs/tridiagonal.hpp"

namespace flatgs {

struct DescentOptions {
    int max_iter = 4000;
    // Stop when the preconditioned gradient norm, relative to the objective
    // scale, drops below this.
    double tol = 1e-9;
    // Also stop when the objective has not improved by more than
    // stall_tol (relative) over stall_window accepted steps.
    double stall_tol = 1e-14;
    int stall_window = 50;
    double initial_step = 1.0;
    // Preconditioner K + shift*M (an H¹ Riesz map).
    double preconditioner_shift = 1.0;
    // Throw SolverError instead of returning an unconverged result.
    bool throw_on_failure = false;
};

struct DescentResult {
    std::vector<double> x;
    double value = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;
};

// Objective callback: returns false if u is outside the admissible set.
// When grad is non-null it receives the Euclidean gradient with respect to
// the nodal values.
using Objective = std::function<bool(const std::vector<double>& u, double& value,
                                     std::vector<double>* grad)>;

// Preconditioned gradient descent with backtracking for objectives that are
// invariant under u -> s u (s > 0). Iterates are kept nonnegative (positive
// part), Dirichlet-conforming and unit in the discrete L² norm.
DescentResult minimize_homogeneous(const GridPtr& grid, std::vector<double> x0,
                                   const Objective& objective, const DescentOptions& options);

// Applies (K + shift*M)^{-1} on the free nodes (Dirichlet entries left 0).
class SobolevPreconditioner {
public:
    SobolevPreconditioner(const GridPtr& grid, double shift);
    std::vector<double> apply(const std::vector<double>& g) const;

private:
    GridPtr grid_;
    TridiagonalSolver solver_;
};

}  // namespace flatgs
