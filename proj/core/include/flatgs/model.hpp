#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace flatgs {

// Exponents of -Δu + u^α = λ u^β. Construct through make() so that the
// ordering 0 < α < β <= 1 is checked once.
struct ExponentPair {
    double alpha = 0.5;
    double beta = 0.75;

    static ExponentPair make(double alpha, double beta);
    bool is_linear() const { return beta == 1.0; }
};

struct Interval {
    double a = 0.0;
    double b = 1.0;
};

struct Ball {
    int dimension = 1;
    double radius = 1.0;
};

using DomainSpec = std::variant<Interval, Ball>;

struct ProblemParams {
    ExponentPair exponents;
    double lambda = 1.0;
    int dimension = 1;
    DomainSpec domain = Interval{};

    double alpha() const { return exponents.alpha; }
    double beta() const { return exponents.beta; }
    // Throws DomainError on λ < 0, N < 1 or a domain whose dimension differs.
    void validate() const;
};

enum class Regime { OnCurve, StableSet, UnstableSet };

struct RegimeLabel {
    Regime regime = Regime::UnstableSet;
    double discriminant = 0.0;
};

std::string to_string(Regime r);

// Δ = 2(1+α)(1+β) − N(1−α)(1−β) and its sign label.
RegimeLabel classify_exponents(double alpha, double beta, int N);

// β on the critical curve for the given α, if it lies in (α, 1).
std::optional<double> critical_beta(double alpha, int N);

// u_∞ = λ^{-1/(β-α)}, the unstable constant equilibrium.
double ode_equilibrium(const ProblemParams& params);

struct FiberingConstants {
    double c0;
    double c1;
};
FiberingConstants fibering_constants(double alpha, double beta);

double pohozaev_determinant(double alpha, double beta, int N);

// Closed form of Φ''(1) for a flat solution with λB(u) = S.
double flat_second_variation(const ProblemParams& params, double B_value);

double lambda_c(double alpha, int N, double lambda1);

struct ScalingTransfer {
    ProblemParams params;     // coefficient λκ^{ν(α−β)}, λ/κ² when β = 1
    double amplitude_factor;  // κ^ν, ν = 2/(1−α)
    double support_factor;    // κ
};
// If u solves the problem at λ then κ^ν u(x/κ) solves it at the returned
// coefficient. The domain is left untouched.
ScalingTransfer scaling_transfer(const ProblemParams& params, double kappa);

struct ScalarTrajectory {
    std::vector<double> t;
    std::vector<double> v;
    std::optional<double> extinction_time;
};

// Scalar reaction v' = λ v^β − v^α advanced over one step of length tau.
// Shared by the ODE integrator and the parabolic reaction substeps.
// Returns the new value and, if the state is absorbed at 0 inside the step,
// the elapsed time at which that happened.
struct ReactionStep {
    double value;
    double absorbed_after = -1.0;
};
ReactionStep reaction_step(double v, double tau, double alpha, double beta, double lambda);

ScalarTrajectory ode_integrate(const ProblemParams& params, double v0, double t_end, double dt);

}  // namespace flatgs
