#pragma once

#include <vector>

#include "flatgs/model.hpp"

namespace flatgs {

// V(t,x) = φ(t) η(|x − x1|) on the ball B_{δε}(x1) touching the boundary,
//   η1(r) = K1 ε^ν − K2 r^ν        0 ≤ r ≤ ε
//   η2(r) = K3 (δε − r)^ν          ε ≤ r ≤ δε
// with ν = 2/(1−α), μ = ε1^{−(1−α)}, K3 chosen so that −Δη2 + μη2^α ≤ 0,
// and K1, K2 fixed by continuity and C¹ matching at r = ε.
struct SubsolutionProfile {
    double alpha = 0.0, beta = 0.0, lambda = 0.0;
    int dimension = 1;
    double K0 = 0.0, K1 = 0.0, K2 = 0.0, K3 = 0.0, K4 = 0.0;
    double epsilon = 0.0, delta = 0.0, epsilon1 = 0.0;
    double mu = 0.0, nu = 0.0;
    double x1 = 0.0;  // distance of the centre from the nearest boundary point is δε
    // Time schedule. Case a: piecewise linear nodes (times, phi) ending when
    // φ reaches ε1. Case b: φ(t) = φ0 (ε2 + e^{−kt}) / (1 + ε2).
    bool case_b = false;
    double phi0 = 0.0;
    double eps2 = 0.0, k = 0.0;
    std::vector<double> times;
    std::vector<double> phis;
    double horizon = 0.0;  // T0

    double eta(double r) const;
    double eta_prime(double r) const;
    double laplacian_eta(double r) const;  // η'' + (N−1)/r η'
    double phi(double t) const;
    double phi_prime(double t) const;  // right derivative
    double value(double t, double r) const { return phi(t) * eta(r); }
};

// Builds the profile; throws DomainError naming the violated constraint
// (delta range, degenerate matching at δ = 1, ε1 outside (0,1)).
// `horizon` bounds the schedule length in case b.
SubsolutionProfile build_local_subsolution(const ProblemParams& params, double K0, double epsilon,
                                           double delta, double epsilon1, double horizon = 1.0);

struct SubsolutionReport {
    double max_violation = 0.0;  // max of V_t − ΔV + V^α − λV^β over the samples
    double continuity_residual = 0.0;
    double c1_residual = 0.0;
    double initial_order_violation = 0.0;  // max of V(0) − K0 d^ν (≤ 0 when ordered)
    std::size_t samples = 0;
};

SubsolutionReport verify_subsolution(const SubsolutionProfile& s, std::size_t radial_samples = 2001,
                                     std::size_t time_samples_per_segment = 3);

}  // namespace flatgs
