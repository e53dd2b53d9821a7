#include "flatgs/model.hpp"

#include <cmath>
#include <sstream>

#include "flatgs/error.hpp"

namespace flatgs {

namespace {

void check_pair(double alpha, double beta) {
    if (!(alpha > 0.0 && alpha < 1.0) || !(beta > alpha && beta <= 1.0)) {
        std::ostringstream os;
        os << "exponents must satisfy 0 < alpha < beta <= 1 (got alpha=" << alpha
           << ", beta=" << beta << ")";
        throw DomainError(os.str());
    }
}

int domain_dimension(const DomainSpec& d) {
    if (const auto* b = std::get_if<Ball>(&d)) return b->dimension;
    return 1;
}

}  // namespace

ExponentPair ExponentPair::make(double alpha, double beta) {
    check_pair(alpha, beta);
    return ExponentPair{alpha, beta};
}

void ProblemParams::validate() const {
    check_pair(exponents.alpha, exponents.beta);
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw DomainError("lambda must be a finite nonnegative number");
    if (dimension < 1) throw DomainError("dimension must be >= 1");
    if (domain_dimension(domain) != dimension)
        throw DomainError("domain dimension does not match params.dimension");
    if (const auto* iv = std::get_if<Interval>(&domain)) {
        if (!(iv->a < iv->b)) throw DomainError("interval requires a < b");
    } else {
        const auto& b = std::get<Ball>(domain);
        if (!(b.radius > 0.0)) throw DomainError("ball radius must be positive");
    }
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::OnCurve: return "OnCurve";
        case Regime::StableSet: return "StableSet";
        case Regime::UnstableSet: return "UnstableSet";
    }
    return "?";
}

RegimeLabel classify_exponents(double alpha, double beta, int N) {
    check_pair(alpha, beta);
    if (N < 1) throw DomainError("dimension must be >= 1");
    const double left = 2.0 * (1.0 + alpha) * (1.0 + beta);
    const double right = N * (1.0 - alpha) * (1.0 - beta);
    const double delta = left - right;
    RegimeLabel out;
    out.discriminant = delta;
    if (std::abs(delta) < 1e-12 * (1.0 + std::abs(left) + std::abs(right)))
        out.regime = Regime::OnCurve;
    else
        out.regime = delta < 0.0 ? Regime::StableSet : Regime::UnstableSet;
    return out;
}

std::optional<double> critical_beta(double alpha, int N) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
    if (N < 3) return std::nullopt;
    const double p = 2.0 * (1.0 + alpha);
    const double q = N * (1.0 - alpha);
    const double beta = (q - p) / (p + q);
    if (beta > alpha && beta < 1.0) return beta;
    return std::nullopt;
}

double ode_equilibrium(const ProblemParams& params) {
    check_pair(params.alpha(), params.beta());
    if (!(params.lambda > 0.0)) throw DomainError("equilibrium requires lambda > 0");
    return std::pow(params.lambda, -1.0 / (params.beta() - params.alpha()));
}

FiberingConstants fibering_constants(double alpha, double beta) {
    check_pair(alpha, beta);
    if (beta == 1.0)
        throw DomainError("fibering constants are defined for beta < 1 only");
    const double e = (beta - alpha) / (1.0 - alpha);
    const double c0 = (1.0 - alpha) * (1.0 + beta) / ((1.0 - beta) * (1.0 + alpha)) *
                      std::pow((1.0 + alpha) * (1.0 - beta) / (2.0 * (beta - alpha)), e);
    const double c1 = (1.0 - alpha) / (1.0 - beta) * std::pow((1.0 - beta) / (beta - alpha), e);
    return {c0, c1};
}

double pohozaev_determinant(double alpha, double beta, int N) {
    const RegimeLabel label = classify_exponents(alpha, beta, N);
    if (label.regime == Regime::OnCurve) return 0.0;
    return (beta - alpha) * label.discriminant / (2.0 * N * (1.0 + alpha) * (1.0 + beta));
}

double flat_second_variation(const ProblemParams& params, double B_value) {
    const double a = params.alpha();
    const double b = params.beta();
    const int N = params.dimension;
    const RegimeLabel label = classify_exponents(a, b, N);
    if (label.regime == Regime::OnCurve) return 0.0;
    const double S = params.lambda * B_value;
    return S * (b - a) * (-label.discriminant) /
           ((1.0 + b) * (N * (1.0 - a) + 2.0 * (1.0 + a)));
}

double lambda_c(double alpha, int N, double lambda1) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
    if (N < 1) throw DomainError("dimension must be >= 1");
    return (1.0 + 2.0 * (1.0 + alpha) / (N * (1.0 - alpha))) * lambda1;
}

ScalingTransfer scaling_transfer(const ProblemParams& params, double kappa) {
    if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
    const double nu = 2.0 / (1.0 - params.alpha());
    ScalingTransfer out{params, std::pow(kappa, nu), kappa};
    // κ^ν u(x/κ) solves the problem with λκ^{ν(α−β)}, i.e. λ/κ² when β = 1.
    out.params.lambda = params.lambda * std::pow(kappa, nu * (params.alpha() - params.beta()));
    return out;
}

ReactionStep reaction_step(double v, double tau, double alpha, double beta, double lambda) {
    if (!(v > 0.0)) return {0.0};
    const double va = std::pow(v, alpha);
    const double vb = std::pow(v, beta);
    const double f = lambda * vb - va;
    if (f >= 0.0) {
        const double vh = v + 0.5 * tau * f;
        const double fh = lambda * std::pow(vh, beta) - std::pow(vh, alpha);
        return {v + tau * fh};
    }
    // Decay: advance w = v^{1-α}, for which w' = (1-α)(λ w^p - 1), p = (β-α)/(1-α).
    // The absorption part is then a constant drift and the extinction time is
    // resolved exactly when λ = 0.
    const double om = 1.0 - alpha;
    const double w = v / va;
    const double g = om * (lambda * vb / va - 1.0);
    const double wh = w + 0.5 * tau * g;
    if (wh <= 0.0) return {0.0, w / -g};
    const double gh = om * (lambda * std::pow(wh, (beta - alpha) / om) - 1.0);
    const double wn = w + tau * gh;
    if (wn <= 0.0) return {0.0, w / -gh};
    return {std::pow(wn, 1.0 / om)};
}

ScalarTrajectory ode_integrate(const ProblemParams& params, double v0, double t_end, double dt) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
    if (!(v0 >= 0.0)) throw DomainError("v0 must be nonnegative");
    check_pair(params.alpha(), params.beta());

    ScalarTrajectory tr;
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    tr.t.reserve(steps + 1);
    tr.v.reserve(steps + 1);
    double t = 0.0;
    double v = v0;
    tr.t.push_back(t);
    tr.v.push_back(v);
    if (v0 == 0.0) tr.extinction_time = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double tau = std::min(dt, t_end - t);
        if (v > 0.0) {
            const ReactionStep s = reaction_step(v, tau, params.alpha(), params.beta(), params.lambda);
            if (s.value <= 0.0 && !tr.extinction_time) tr.extinction_time = t + s.absorbed_after;
            v = s.value;
        }
        t = (k + 1 == steps) ? t_end : t + tau;
        tr.t.push_back(t);
        tr.v.push_back(v);
    }
    return tr;
}

}  // namespace flatgs
