#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flatgs/grid.hpp"

namespace flatgs {

struct GroundState;

struct EigenResult {
    double eigenvalue = 0.0;
    Field eigenfield;  // positive, unit in the discrete L² norm
    int iterations = 0;
    double residual = 0.0;
    // |μ(f) − μ(f/10)| / |μ(f)| for the linearized problem.
    std::optional<double> floor_sensitivity;
};

std::string to_json(const EigenResult& r);

// λ₁(Ω) and φ₁ by inverse power iteration on the discrete −Δ.
EigenResult principal_dirichlet_eigen(const GridPtr& grid, int N);

// −Δ − q restricted to the support of u with Dirichlet ends,
// q = λβ ũ^{β−1} − α ũ^{α−1}, ũ = max(u, floor·‖u‖∞).
struct LinearizedOperator {
    GridPtr grid;
    std::size_t first = 0;  // first retained node
    std::size_t last = 0;   // last retained node
    std::vector<double> potential;  // q on retained nodes
    double floor = 0.0;             // absolute floor applied to u
};

LinearizedOperator build_linearized_operator(const GroundState& gs, double floor_rel);

// Throws SolverError when μ(f) and μ(f/10) differ by more than sensitivity_tol.
EigenResult linearized_mu1(const GroundState& gs, double floor_rel = 1e-8,
                           double sensitivity_tol = 0.02);

// Courant quotient (∫|∇ψ|² − ∫qψ²)/∫ψ² on the full grid with the floored q.
double rayleigh_at(const GroundState& gs, const Field& psi, double floor_rel = 1e-8);

enum class HardyBranch { R, R1 };

// r(μ)  = inf (∫|∇w|² + α∫w²/d²) / (λβ∫w²/d^γ + μ∫w²),   μ ≥ 0
// r₁(μ) = inf (∫|∇w|² + α∫w²/d² + μ∫w²) / (λβ∫w²/d^γ),   μ ≤ 0
// γ = 2(1−β)/(1−α), d the boundary distance.
double hardy_ratio(double mu, const ProblemParams& params, const GridPtr& grid, HardyBranch branch);

// The μ with r(μ) = 1 (μ > 0) or r₁(μ) = 1 (μ < 0); none if no bracket is found.
std::optional<double> hardy_fixed_point(const ProblemParams& params, const GridPtr& grid);

}  // namespace flatgs
