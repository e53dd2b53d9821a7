#pragma once

#include <optional>
#include <string>

#include "flatgs/descent.hpp"
#include "flatgs/grid.hpp"
#include "flatgs/model.hpp"

namespace flatgs {

// Φ_u(r) = E_λ(r u) and its r-derivatives, evaluated from the breakdown of u.
double phi(const FunctionalBreakdown& fb, const ProblemParams& params, double r);
double phi_prime(const FunctionalBreakdown& fb, const ProblemParams& params, double r);
double phi_second(const FunctionalBreakdown& fb, const ProblemParams& params, double r);

// Φ'(1) = T + A − λB.
inline double nehari_residual(const FunctionalBreakdown& fb, const ProblemParams& params) {
    return phi_prime(fb, params, 1.0);
}
// T + A + λB, the natural scale for Nehari and Pohozaev residuals.
inline double nehari_scale(const FunctionalBreakdown& fb, const ProblemParams& params) {
    return fb.T + fb.A + params.lambda * fb.B;
}

struct FiberingReport {
    int root_count = 0;
    std::optional<double> r_max;
    std::optional<double> r_min;
    double phi2_at_rmax = 0.0;
    double phi2_at_rmin = 0.0;
    bool degenerate = false;
};

// β < 1: critical point of g(r) = Φ'(r)/r in closed form plus bisection on
// each side. β = 1: the closed-form root (A/(−H))^{1/(1−α)} when H < 0.
FiberingReport fibering_roots(const FunctionalBreakdown& fb, const ProblemParams& params);

// Same roots located by bracketing and bisection on g only, without any
// closed form. Used to cross-check the analytic branches.
FiberingReport fibering_roots_bisection(const FunctionalBreakdown& fb, const ProblemParams& params);

std::string to_json(const FiberingReport& report);

double lambda_of_u(const FunctionalBreakdown& fb, double alpha, double beta);
double lambda0_of_u(const FunctionalBreakdown& fb, double alpha, double beta);
double lambda1_of_u(const FunctionalBreakdown& fb, double alpha, double beta);

// J_λ(u) = E_λ(r(u)u) for β = 1.
double j_functional(const FunctionalBreakdown& fb, const ProblemParams& params);

bool potential_well_membership(const FunctionalBreakdown& fb, const ProblemParams& params,
                               double E_hat);

struct LambdaEstimate {
    double Lambda0 = 0.0;
    double Lambda1 = 0.0;
    double lambda_min = 0.0;  // min over fields of λ(u)
    Field argmin;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;  // accepted λ(u) values, nonincreasing
};

// Minimizes λ(u) over nonzero discrete fields starting from the principal
// Dirichlet eigenfunction. Both returned values are upper bounds of the
// continuum infima.
LambdaEstimate estimate_Lambda(const ProblemParams& params, const GridPtr& grid,
                               const DescentOptions& options = {});

}  // namespace flatgs
