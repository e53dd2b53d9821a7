#include "flatgs/subsolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flatgs/error.hpp"

namespace flatgs {

double SubsolutionProfile::eta(double r) const {
    if (r <= epsilon) return K1 * std::pow(epsilon, nu) - K2 * std::pow(r, nu);
    if (r >= delta * epsilon) return 0.0;
    return K3 * std::pow(delta * epsilon - r, nu);
}

double SubsolutionProfile::eta_prime(double r) const {
    if (r <= epsilon) return -nu * K2 * std::pow(r, nu - 1.0);
    if (r >= delta * epsilon) return 0.0;
    return -nu * K3 * std::pow(delta * epsilon - r, nu - 1.0);
}

double SubsolutionProfile::laplacian_eta(double r) const {
    const int N = dimension;
    if (r <= epsilon) return -nu * (nu + N - 2.0) * K2 * std::pow(r, nu - 2.0);
    if (r >= delta * epsilon) return 0.0;
    const double rho = delta * epsilon - r;
    return nu * (nu - 1.0) * K3 * std::pow(rho, nu - 2.0) -
           (N - 1.0) * nu * K3 * std::pow(rho, nu - 1.0) / r;
}

double SubsolutionProfile::phi(double t) const {
    if (case_b) return phi0 * (eps2 + std::exp(-k * t)) / (1.0 + eps2);
    if (t <= times.front()) return phis.front();
    if (t >= times.back()) return phis.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin()) - 1;
    const double w = (t - times[j]) / (times[j + 1] - times[j]);
    return phis[j] + w * (phis[j + 1] - phis[j]);
}

double SubsolutionProfile::phi_prime(double t) const {
    if (case_b) return -phi0 * k * std::exp(-k * t) / (1.0 + eps2);
    if (t >= times.back()) return 0.0;
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin()) - 1;
    return (phis[j + 1] - phis[j]) / (times[j + 1] - times[j]);
}

namespace {

// Lower bound of R(φ) = −a φ − b φ^α + c φ^β for φ in [lo, hi].
double rate_lower_bound(double a, double b, double c, double alpha, double beta, double lo, double hi) {
    return -a * hi - b * std::pow(hi, alpha) + c * std::pow(std::max(lo, 0.0), beta);
}

}  // namespace

SubsolutionProfile build_local_subsolution(const ProblemParams& params, double K0, double epsilon,
                                           double delta, double epsilon1, double horizon) {
    params.validate();
    if (!(K0 > 0.0)) throw DomainError("initial-datum bound K0 must be positive");
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    if (!(epsilon1 > 0.0 && epsilon1 < 1.0)) throw DomainError("epsilon1 must lie in (0,1)");
    const double a = params.alpha(), b = params.beta();
    const int N = params.dimension;
    const double nu = 2.0 / (1.0 - a);
    if (!(delta >= 1.0) || (N > 1 && !(delta < 1.0 + (nu * a + 1.0) / (N - 1.0))))
        throw DomainError("delta constraint violated: need 1 <= delta < 1 + (nu*alpha+1)/(N-1)");
    if (delta == 1.0)
        throw DomainError("continuity/C1 matching is singular at delta = 1 (K1 = K2 = 0)");
    const double half = std::holds_alternative<Interval>(params.domain)
                            ? 0.5 * (std::get<Interval>(params.domain).b - std::get<Interval>(params.domain).a)
                            : std::get<Ball>(params.domain).radius;
    if (delta * epsilon > half) throw DomainError("support ball B_{delta*epsilon} does not fit the domain");

    SubsolutionProfile s;
    s.alpha = a;
    s.beta = b;
    s.lambda = params.lambda;
    s.dimension = N;
    s.K0 = K0;
    s.epsilon = epsilon;
    s.delta = delta;
    s.epsilon1 = epsilon1;
    s.nu = nu;
    s.mu = std::pow(epsilon1, -(1.0 - a));
    const double c = (nu * a + 1.0) - (N - 1.0) * (delta - 1.0);
    s.K3 = std::pow(s.mu / (nu * c), 1.0 / (1.0 - a));
    // C¹: K2 ε^{ν−1} = K3 (ε(δ−1))^{ν−1}; continuity: (K1 − K2) ε^ν = K3 (ε(δ−1))^ν.
    s.K2 = s.K3 * std::pow(delta - 1.0, nu - 1.0);
    s.K1 = s.K2 + s.K3 * std::pow(delta - 1.0, nu);
    // Bound for −Δη1 + μη1^α ≤ K4 ε^{να} on [0, ε].
    s.K4 = nu * (nu + N - 2.0) * s.K2 + s.mu * std::pow(s.K1, a);
    if (const auto* iv = std::get_if<Interval>(&params.domain))
        s.x1 = iv->a + delta * epsilon;
    else
        s.x1 = std::get<Ball>(params.domain).radius - delta * epsilon;

    // φ(0) ≤ 1 and φ(0) η(r) ≤ K0 (δε − r)^ν, which bounds K0 d^ν from below.
    double phi0 = 1.0;
    for (int j = 0; j < 4000; ++j) {
        const double r = delta * epsilon * j / 4000.0;
        const double e = s.eta(r);
        if (e > 0.0) phi0 = std::min(phi0, K0 * std::pow(delta * epsilon - r, nu) / e);
    }
    phi0 *= 1.0 - 1e-12;
    if (!(phi0 > epsilon1))
        throw DomainError("initial ordering forces phi(0) <= epsilon1; decrease epsilon1");
    s.phi0 = phi0;

    // Sub-ODE on the inner ball: φ' ≤ R(φ) = −φ Dmax/ηmin − φ^α ηmin^{α−1} + λ φ^β ηmax^{β−1}.
    const double eta_min = s.eta(epsilon);
    const double eta_max = s.eta(0.0);
    const double Dmax = nu * (nu + N - 2.0) * s.K2 * std::pow(epsilon, nu - 2.0);
    const double ca = Dmax / eta_min;
    const double cb = std::pow(eta_min, a - 1.0);
    const double cc = params.lambda * std::pow(eta_max, b - 1.0);

    if (rate_lower_bound(ca, cb, cc, a, b, epsilon1, phi0) >= 0.0) {
        // Source dominates on the whole range: any nonincreasing φ ≥ ε1 works.
        s.case_b = true;
        s.eps2 = epsilon1 / (phi0 - epsilon1);
        s.k = 1.0;
        s.horizon = horizon;
        return s;
    }

    s.times.push_back(0.0);
    s.phis.push_back(phi0);
    double t = 0.0, p = phi0;
    while (p > epsilon1 && s.times.size() < 100000) {
        const double guess = -ca * p - cb * std::pow(p, a);  // most negative possible rate
        const double dt = 0.005 * p / std::abs(guess);
        // A slope no larger than the lower bound of R on the segment's range.
        double slope = std::min(0.0, rate_lower_bound(ca, cb, cc, a, b, p + guess * dt, p));
        double pn = p + slope * dt;
        double dtn = dt;
        if (pn < epsilon1) {
            dtn = (epsilon1 - p) / slope;
            pn = epsilon1;
        }
        t += dtn;
        p = pn;
        s.times.push_back(t);
        s.phis.push_back(p);
        if (slope == 0.0) break;
    }
    s.horizon = t;
    return s;
}

SubsolutionReport verify_subsolution(const SubsolutionProfile& s, std::size_t radial_samples,
                                     std::size_t time_samples_per_segment) {
    SubsolutionReport rep;
    const double eps = s.epsilon, de = s.delta * s.epsilon;
    rep.continuity_residual =
        std::abs((s.K1 - s.K2) * std::pow(eps, s.nu) - s.K3 * std::pow(eps * (s.delta - 1.0), s.nu));
    rep.c1_residual = std::abs(s.nu * s.K2 * std::pow(eps, s.nu - 1.0) -
                               s.nu * s.K3 * std::pow(eps * (s.delta - 1.0), s.nu - 1.0));

    std::vector<double> rs;
    for (std::size_t j = 0; j < radial_samples; ++j)
        rs.push_back(de * static_cast<double>(j) / static_cast<double>(radial_samples));
    rs.push_back(eps);
    std::vector<double> ts;
    if (s.case_b) {
        const std::size_t m = std::max<std::size_t>(time_samples_per_segment, 2) * 50;
        for (std::size_t j = 0; j <= m; ++j) ts.push_back(s.horizon * static_cast<double>(j) / m);
    } else {
        const std::size_t m = std::max<std::size_t>(time_samples_per_segment, 1);
        for (std::size_t j = 0; j + 1 < s.times.size(); ++j)
            for (std::size_t q = 0; q < m; ++q)
                ts.push_back(s.times[j] + (s.times[j + 1] - s.times[j]) * static_cast<double>(q) / m);
        // Right end of the last segment, approached from the left.
        ts.push_back(std::nextafter(s.times.back(), 0.0));
    }

    double worst = -std::numeric_limits<double>::infinity();
    for (double t : ts) {
        const double p = s.phi(t), dp = s.phi_prime(t);
        for (double r : rs) {
            const double e = s.eta(r);
            if (e <= 0.0) continue;
            const double res = dp * e - p * s.laplacian_eta(r) + std::pow(p * e, s.alpha) -
                               s.lambda * std::pow(p * e, s.beta);
            worst = std::max(worst, res);
            ++rep.samples;
        }
    }
    rep.max_violation = worst;

    double ord = -std::numeric_limits<double>::infinity();
    for (double r : rs) ord = std::max(ord, s.value(0.0, r) - s.K0 * std::pow(de - r, s.nu));
    rep.initial_order_violation = ord;
    return rep;
}

}  // namespace flatgs
