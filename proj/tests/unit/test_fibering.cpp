#include <gtest/gtest.h>

#include <cmath>

#include "flatgs/error.hpp"
#include "flatgs/fibering.hpp"
#include "oracles.hpp"

using namespace flatgs;

namespace {

ProblemParams params(double a, double b, double lam) {
    ProblemParams p;
    p.exponents = ExponentPair::make(a, b);
    p.lambda = lam;
    p.dimension = 1;
    p.domain = Interval{0.0, M_PI};
    return p;
}

FunctionalBreakdown bd(double T, double A, double B, double L2, const ProblemParams& p) {
    return assemble_breakdown(T, A, B, L2, p);
}

Field sine_field(std::size_t n = 513) {
    return sample(build_grid(Interval{0.0, M_PI}, n), [](double x) { return std::sin(x); });
}

}  // namespace

TEST(Phi, DerivativesAndNehari) {
    const ProblemParams p = params(0.5, 0.75, 2.0);
    const auto fb = bd(1.0, 1.0, 1.0, 1.0, p);
    EXPECT_NEAR(phi_prime(fb, p, 1.0), 0.0, 1e-15);
    EXPECT_NEAR(nehari_residual(fb, p), fb.T + fb.A - 2.0 * fb.B, 1e-15);
    EXPECT_NEAR(phi(fb, p, 1.0), fb.E, 1e-15);
    // Finite-difference checks of Φ' and Φ''.
    for (double r : {0.3, 1.0, 2.5}) {
        const double h = 1e-5 * r;
        EXPECT_NEAR(phi_prime(fb, p, r), (phi(fb, p, r + h) - phi(fb, p, r - h)) / (2 * h), 1e-8);
        EXPECT_NEAR(phi_second(fb, p, r),
                    (phi_prime(fb, p, r + h) - phi_prime(fb, p, r - h)) / (2 * h), 1e-7);
    }
}

TEST(Phi, Homogeneity) {
    const ProblemParams p = params(0.3, 0.8, 1.7);
    Field u = sine_field();
    const auto fb = functionals(u, p);
    const double s = 2.3;
    for (double& v : u.values) v *= s;
    const auto fs = functionals(u, p);
    for (double r : {0.5, 1.0, 1.7})
        EXPECT_NEAR(phi(fb, p, r * s), phi(fs, p, r), 1e-12 * std::max(1.0, std::abs(phi(fs, p, r))));
}

TEST(FiberingRoots, LinearCase) {
    const ProblemParams p = params(0.5, 1.0, 2.0);
    // H = T − λ·L2 = 1 − 2 = −1, A = 1: root at 1.
    auto r = fibering_roots(bd(1.0, 1.0, 1.0, 1.0, p), p);
    ASSERT_EQ(r.root_count, 1);
    EXPECT_NEAR(*r.r_max, 1.0, 1e-14);
    // H = −2, A = 1: root (1/2)^2.
    r = fibering_roots(bd(1.0, 1.0, 1.5, 1.5, p), p);
    ASSERT_EQ(r.root_count, 1);
    EXPECT_NEAR(*r.r_max, 0.25, 1e-14);
    // H ≥ 0: no root.
    EXPECT_EQ(fibering_roots(bd(1.0, 1.0, 0.2, 0.2, p), p).root_count, 0);
    EXPECT_THROW(fibering_roots(bd(0.0, 1.0, 1.0, 1.0, p), p), DomainError);
}

TEST(FiberingRoots, SublinearTwoRoots) {
    const ProblemParams p = params(0.5, 0.75, 4.0);
    const auto fb = bd(1.0, 1.0, 1.0, 1.0, p);
    const auto r = fibering_roots(fb, p);
    ASSERT_EQ(r.root_count, 2);
    EXPECT_LE(*r.r_max, *r.r_min);
    EXPECT_LE(r.phi2_at_rmax, 0.0);
    EXPECT_GE(r.phi2_at_rmin, 0.0);
    const double scale = nehari_scale(fb, p);
    for (double root : {*r.r_max, *r.r_min}) {
        EXPECT_LT(std::abs(phi_prime(fb, p, root)), 1e-10 * scale);
        EXPECT_LT(phi_prime(fb, p, root * 0.999) * phi_prime(fb, p, root * 1.001), 0.0);
    }
    const auto rb = fibering_roots_bisection(fb, p);
    ASSERT_EQ(rb.root_count, 2);
    EXPECT_NEAR(*rb.r_max, *r.r_max, 1e-10 * *r.r_max);
    EXPECT_NEAR(*rb.r_min, *r.r_min, 1e-10 * *r.r_min);
}

TEST(FiberingRoots, BelowThresholdNoRoots) {
    const ProblemParams p = params(0.5, 0.75, 0.5);
    const auto r = fibering_roots(bd(1.0, 1.0, 1.0, 1.0, p), p);
    EXPECT_EQ(r.root_count, 0);
    EXPECT_EQ(fibering_roots_bisection(bd(1.0, 1.0, 1.0, 1.0, p), p).root_count, 0);
}

TEST(FiberingRoots, Degenerate) {
    // λ = λ₁(u) puts the minimum of g exactly at 0.
    const double a = 0.5, b = 0.75;
    const ProblemParams p0 = params(a, b, 1.0);
    const auto fb0 = bd(1.0, 1.0, 1.0, 1.0, p0);
    const double lam = lambda1_of_u(fb0, a, b);
    const ProblemParams p = params(a, b, lam);
    const auto r = fibering_roots(bd(1.0, 1.0, 1.0, 1.0, p), p);
    EXPECT_TRUE(r.degenerate);
    ASSERT_TRUE(r.r_max && r.r_min);
    EXPECT_DOUBLE_EQ(*r.r_max, *r.r_min);
}

TEST(FiberingRoots, Json) {
    const ProblemParams p = params(0.5, 0.75, 4.0);
    const std::string js = to_json(fibering_roots(bd(1.0, 1.0, 1.0, 1.0, p), p));
    for (const char* key : {"root_count", "r_max", "r_min", "phi2_at_rmax", "phi2_at_rmin", "degenerate"})
        EXPECT_NE(js.find(key), std::string::npos) << key;
}

TEST(LambdaOfU, Examples) {
    const ProblemParams p = params(0.5, 0.75, 1.0);
    EXPECT_DOUBLE_EQ(lambda_of_u(bd(1, 1, 1, 1, p), 0.5, 0.75), 1.0);
    EXPECT_NEAR(lambda_of_u(bd(4, 1, 1, 1, p), 0.5, 0.75), 2.0, 1e-15);
    const auto c = fibering_constants(0.5, 0.75);
    const auto fb = bd(3, 2, 1.5, 1, p);
    EXPECT_NEAR(lambda0_of_u(fb, 0.5, 0.75), c.c0 * lambda_of_u(fb, 0.5, 0.75), 1e-14);
    EXPECT_NEAR(lambda1_of_u(fb, 0.5, 0.75), c.c1 * lambda_of_u(fb, 0.5, 0.75), 1e-14);
    EXPECT_THROW(lambda_of_u(bd(1, 0, 1, 1, p), 0.5, 0.75), DomainError);
}

TEST(LambdaOfU, ScaleInvariance) {
    const ProblemParams p = params(0.5, 0.75, 1.0);
    const Field u = sine_field();
    const auto fb = functionals(u, p);
    for (double s : {0.5, 2.0, 10.0}) {
        Field v = u;
        for (double& x : v.values) x *= s;
        const auto fs = functionals(v, p);
        EXPECT_NEAR(lambda_of_u(fs, 0.5, 0.75) / lambda_of_u(fb, 0.5, 0.75), 1.0, 1e-10);
        EXPECT_NEAR(lambda0_of_u(fs, 0.5, 0.75) / lambda0_of_u(fb, 0.5, 0.75), 1.0, 1e-10);
        EXPECT_NEAR(lambda1_of_u(fs, 0.5, 0.75) / lambda1_of_u(fb, 0.5, 0.75), 1.0, 1e-10);
    }
    // J for β = 1.
    const ProblemParams q = params(0.5, 1.0, 3.0);
    const auto jb = functionals(u, q);
    for (double s : {0.5, 2.0, 10.0}) {
        Field v = u;
        for (double& x : v.values) x *= s;
        EXPECT_NEAR(j_functional(functionals(v, q), q) / j_functional(jb, q), 1.0, 1e-10);
    }
}

TEST(JFunctional, Examples) {
    const ProblemParams p = params(0.5, 1.0, 2.0);
    EXPECT_NEAR(j_functional(bd(1.0, 1.0, 1.5, 1.5, p), p), 1.0 / 48.0, 1e-15);
    EXPECT_NEAR(j_functional(bd(1.0, 1.0, 1.0, 1.0, p), p), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(j_functional(bd(1.0, 0.7, 1.5, 1.5, p), p), oracle::j_value(0.5, 0.7, 2.0), 1e-15);
    EXPECT_THROW(j_functional(bd(1.0, 1.0, 0.2, 0.2, p), p), DomainError);
}

TEST(JFunctional, MatchesPhiAtRoot) {
    const ProblemParams p = params(0.4, 1.0, 3.0);
    const Field u = sine_field();
    const auto fb = functionals(u, p);
    const auto roots = fibering_roots(fb, p);
    ASSERT_EQ(roots.root_count, 1);
    const double r = *roots.r_max;
    EXPECT_NEAR(j_functional(fb, p), phi(fb, p, r), 1e-12 * j_functional(fb, p));
    // Same value from the functionals of the rescaled field.
    Field v = u;
    for (double& x : v.values) x *= r;
    EXPECT_NEAR(functionals(v, p).E, phi(fb, p, r), 1e-10 * j_functional(fb, p));
}

TEST(PotentialWell, Membership) {
    const ProblemParams p = params(0.5, 1.0, 3.0);
    const Field u = sine_field();
    const auto fb = functionals(u, p);
    const double r = *fibering_roots(fb, p).r_max;
    Field g = u;
    for (double& x : g.values) x *= r;
    const double E_hat = functionals(g, p).E;
    EXPECT_FALSE(potential_well_membership(functionals(g, p), p, E_hat));
    Field big = g;
    for (double& x : big.values) x *= 1.2;
    EXPECT_TRUE(potential_well_membership(functionals(big, p), p, E_hat));
    const ProblemParams low = params(0.5, 1.0, 0.5);
    Field small = u;
    for (double& x : small.values) x *= 1e-3;
    EXPECT_FALSE(potential_well_membership(functionals(small, low), low, E_hat));
}

TEST(EstimateLambda, BoundsAndMonotonicity) {
    const ProblemParams p = params(0.5, 0.75, 1.0);
    const auto est = estimate_Lambda(p, build_grid(Interval{0.0, M_PI}, 257));
    EXPECT_LT(est.Lambda1, est.Lambda0);
    EXPECT_NEAR(est.Lambda1 / est.Lambda0, fibering_constants(0.5, 0.75).c1 / fibering_constants(0.5, 0.75).c0, 1e-12);
    for (std::size_t k = 1; k < est.history.size(); ++k) EXPECT_LE(est.history[k], est.history[k - 1]);
    // The eigenfunction start is an upper bound.
    const auto fb = functionals(sine_field(257), p);
    EXPECT_LE(est.lambda_min, lambda_of_u(fb, 0.5, 0.75) * (1 + 1e-12));

    const auto fine = estimate_Lambda(p, build_grid(Interval{0.0, M_PI}, 513));
    EXPECT_NEAR(fine.Lambda1 / est.Lambda1, 1.0, 0.02);
}
