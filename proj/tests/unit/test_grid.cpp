#include <gtest/gtest.h>

#include <cmath>

#include "flatgs/error.hpp"
#include "flatgs/grid.hpp"
#include "flatgs/spectral.hpp"
#include "oracles.hpp"

using namespace flatgs;

namespace {

ProblemParams interval_params(double a, double b, double lam) {
    ProblemParams p;
    p.exponents = ExponentPair::make(a, b);
    p.lambda = lam;
    p.dimension = 1;
    p.domain = Interval{0.0, M_PI};
    return p;
}

Field sine(std::size_t n) {
    return sample(build_grid(Interval{0.0, M_PI}, n), [](double x) { return std::sin(x); });
}

}  // namespace

TEST(Grid, Construction) {
    const auto g = build_grid(Interval{0.0, M_PI}, 4097);
    EXPECT_EQ(g->size(), 4097u);
    EXPECT_NEAR(g->h, M_PI / 4096, 1e-16);
    EXPECT_EQ(g->x.front(), 0.0);
    EXPECT_NEAR(g->x.back(), M_PI, 1e-15);
    EXPECT_FALSE(g->radial());

    const auto b = build_grid(Ball{3, 1.0}, 1025);
    EXPECT_TRUE(b->radial());
    EXPECT_EQ(b->x.front(), 0.0);
    EXPECT_NEAR(b->x.back(), 1.0, 1e-15);
    EXPECT_EQ(b->first_free(), 0u);
    EXPECT_TRUE(b->is_dirichlet(1024));
    EXPECT_FALSE(b->is_dirichlet(0));
    for (std::size_t i = 1; i < b->size(); ++i) EXPECT_GT(b->x[i], b->x[i - 1]);
    for (double w : b->volume) EXPECT_GE(w, 0.0);

    EXPECT_THROW(build_grid(Interval{0.0, 1.0}, 8), ConfigError);
    EXPECT_THROW(build_grid(Interval{1.0, 0.0}, 64), DomainError);
}

TEST(Grid, WeightsSumToMeasure) {
    const auto g = build_grid(Interval{-1.0, 2.5}, 101);
    double s = 0.0;
    for (double w : g->volume) s += w;
    EXPECT_NEAR(s, 3.5, 1e-12);
    for (int N : {1, 2, 3, 4, 10}) {
        const auto b = build_grid(Ball{N, 1.7}, 257);
        double v = 0.0;
        for (double w : b->volume) v += w;
        const double exact = unit_sphere_area(N) / N * std::pow(1.7, N);
        EXPECT_NEAR(v, exact, 1e-10 * exact) << N;
        EXPECT_NEAR(b->measure(), exact, 1e-10 * exact);
    }
    EXPECT_DOUBLE_EQ(unit_sphere_area(1), 2.0);
    EXPECT_NEAR(unit_sphere_area(3), 4 * M_PI, 1e-14);
}

TEST(Grid, LinearFunctionsIntegrateExactly) {
    const auto g = build_grid(Interval{0.0, 2.0}, 65);
    double s = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) s += g->volume[i] * (3.0 * g->x[i] + 1.0);
    EXPECT_NEAR(s, 8.0, 1e-12 * 8.0);
}

TEST(Functionals, SineClosedForms) {
    const Field u = sine(4097);
    ProblemParams p = interval_params(0.5, 1.0, 2.0);
    const auto fb = functionals(u, p);
    EXPECT_NEAR(fb.T / (M_PI / 2), 1.0, 1e-6);
    EXPECT_NEAR(fb.L2sq / (M_PI / 2), 1.0, 1e-6);
    EXPECT_NEAR(fb.H / (-M_PI / 2), 1.0, 1e-6);
    EXPECT_NEAR(fb.A / oracle::sin_power_integral(1.5), 1.0, 1e-6);
    EXPECT_NEAR(h01_norm(u), std::sqrt(M_PI / 2), 1e-6);
    EXPECT_NEAR(l2_norm(u), std::sqrt(M_PI / 2), 1e-6);
    EXPECT_NEAR(linf_norm(u), 1.0, 1e-12);
    EXPECT_NEAR(h1_norm(u), std::sqrt(M_PI), 1e-6);
}

TEST(Functionals, ZeroField) {
    const auto fb = functionals(zero_field(build_grid(Interval{0.0, M_PI}, 65)),
                                interval_params(0.5, 0.75, 1.0));
    EXPECT_EQ(fb.T, 0.0);
    EXPECT_EQ(fb.A, 0.0);
    EXPECT_EQ(fb.B, 0.0);
    EXPECT_EQ(fb.E, 0.0);
    EXPECT_EQ(fb.P, 0.0);
}

TEST(Functionals, BreakdownIsInternallyConsistent) {
    const Field u = sine(513);
    for (double beta : {0.75, 1.0}) {
        const ProblemParams p = interval_params(0.5, beta, 1.3);
        const auto fb = functionals(u, p);
        const auto re = assemble_breakdown(fb.T, fb.A, fb.B, fb.L2sq, p);
        EXPECT_EQ(fb.E, re.E);
        EXPECT_EQ(fb.P, re.P);
        EXPECT_EQ(fb.H, re.H);
        EXPECT_NEAR(fb.E, fb.T / 2 + fb.A / 1.5 - 1.3 * fb.B / (1 + beta), 1e-14);
        EXPECT_NEAR(fb.P, -0.5 * fb.T + fb.A / 1.5 - 1.3 * fb.B / (1 + beta), 1e-14);
    }
}

TEST(Functionals, DimensionMismatchIsRejected) {
    ProblemParams p = interval_params(0.5, 0.75, 1.0);
    p.dimension = 3;
    p.domain = Ball{3, 1.0};
    EXPECT_THROW(functionals(sine(65), p), DomainError);
}

TEST(Functionals, SecondOrderConvergence) {
    const ProblemParams p = interval_params(0.5, 0.75, 1.0);
    // cos² bump: smooth, and its powers stay smooth enough for a clean rate.
    auto f = [](double x) { return std::pow(std::sin(x), 4); };
    double prev_err = 0.0;
    const double T_exact = 5.0 * M_PI / 8.0;  // ∫ (4 sin³ cos)² = 16 ∫ sin⁶cos² = 16·5π/128
    for (std::size_t n : {257, 513, 1025}) {
        const auto fb = functionals(sample(build_grid(Interval{0.0, M_PI}, n), f), p);
        const double err = std::abs(fb.T - T_exact);
        if (prev_err > 0.0) {
            const double rate = std::log2(prev_err / err);
            EXPECT_GT(rate, 1.8);
            EXPECT_LT(rate, 2.2);
        }
        prev_err = err;
    }
}

TEST(Functionals, RadialSecondOrderConvergence) {
    // u = 1 − r² on the unit 3-ball: T = 4π·∫4r⁴ = 16π/5.
    ProblemParams p;
    p.exponents = ExponentPair::make(0.5, 0.75);
    p.lambda = 1.0;
    p.dimension = 3;
    p.domain = Ball{3, 1.0};
    double prev = 0.0;
    for (std::size_t n : {129, 257, 513}) {
        const auto fb = functionals(sample(build_grid(Ball{3, 1.0}, n), [](double r) { return 1 - r * r; }), p);
        const double err = std::abs(fb.L2sq - 4 * M_PI * 8.0 / 105.0);
        if (prev > 0.0) EXPECT_GT(std::log2(prev / err), 1.8);
        prev = err;
        EXPECT_NEAR(fb.T, 16 * M_PI / 5, 2e-3);
    }
}

TEST(Norms, Homogeneity) {
    Field u = sine(257);
    const double n0 = h01_norm(u);
    for (double& v : u.values) v *= -3.0;
    EXPECT_NEAR(h01_norm(u), 3.0 * n0, 1e-14 * n0);
    EXPECT_EQ(h01_norm(zero_field(u.grid)), 0.0);
    EXPECT_EQ(l2_norm(zero_field(u.grid)), 0.0);
}

TEST(Norms, PoincareInequality) {
    // λ₁ of the discrete operator; the continuum value 1 overshoots it by O(h²).
    const auto g = build_grid(Interval{0.0, M_PI}, 257);
    const double lambda1 = principal_dirichlet_eigen(g, 1).eigenvalue;
    for (auto f : std::vector<std::function<double(double)>>{
             [](double x) { return std::sin(x); },
             [](double x) { return x * (M_PI - x); },
             [](double x) { return std::sin(3 * x) + 0.2 * std::sin(x); }}) {
        const Field u = sample(g, f);
        EXPECT_LE(lambda1 * l2sq(u), dirichlet_energy(u) * (1 + 1e-6));
    }
}

TEST(BoundaryDistance, Examples) {
    const auto g = build_grid(Interval{0.0, M_PI}, 129);
    const Field d = boundary_distance_profile(g);
    EXPECT_NEAR(d[64], M_PI / 2, 1e-15);
    EXPECT_EQ(d[0], 0.0);
    EXPECT_EQ(d[128], 0.0);
    const auto b = build_grid(Ball{3, 1.0}, 1025);
    const Field db = boundary_distance_profile(b);
    EXPECT_NEAR(db[256], 0.75, 1e-15);
    EXPECT_EQ(db[1024], 0.0);
}

TEST(Nondegeneracy, Examples) {
    const auto g = build_grid(Interval{0.0, M_PI}, 129);
    const Field d = boundary_distance_profile(g);
    Field u = zero_field(g);
    for (std::size_t i = 0; i < g->size(); ++i) u[i] = std::pow(d[i], 4.0);
    EXPECT_NEAR(nondegeneracy_constant(u, 0.5), 1.0, 1e-12);
    EXPECT_EQ(nondegeneracy_constant(zero_field(g), 0.5), 0.0);
    u[5] = -1.0;
    EXPECT_THROW(nondegeneracy_constant(u, 0.5), DomainError);
}

TEST(Laplacian, SineAndLinear) {
    const ProblemParams p = interval_params(0.5, 0.75, 1.0);
    double prev = 0.0;
    for (std::size_t n : {129, 257}) {
        const Field u = sine(n);
        const Field lu = laplacian_apply(u, p);
        double err = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) err = std::max(err, std::abs(lu[i] - u[i]));
        if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.2);
        prev = err;
    }
    const auto g = build_grid(Interval{0.0, M_PI}, 65);
    Field lin = zero_field(g);
    for (std::size_t i = 1; i + 1 < g->size(); ++i) lin[i] = 2.0 * g->x[i] + 1.0;
    const Field ll = laplacian_apply(lin, p);
    for (std::size_t i = 2; i + 2 < g->size(); ++i) EXPECT_NEAR(ll[i], 0.0, 1e-11);  // cancellation in u/h²
}

TEST(Laplacian, RadialCentre) {
    // u = 1 − r²: −Δu = 2N everywhere, including the symmetry node.
    ProblemParams p;
    p.exponents = ExponentPair::make(0.5, 0.75);
    p.lambda = 1.0;
    p.dimension = 3;
    p.domain = Ball{3, 1.0};
    const Field u = sample(build_grid(Ball{3, 1.0}, 257), [](double r) { return 1 - r * r; });
    const Field lu = laplacian_apply(u, p);
    for (std::size_t i = 0; i + 1 < u.size(); ++i) EXPECT_NEAR(lu[i], 6.0, 1e-9) << i;
}

TEST(Stiffness, QuadraticFormIsDirichletEnergy) {
    const Field u = sample(build_grid(Ball{4, 2.0}, 129), [](double r) { return std::cos(r * M_PI / 4); });
    const Stiffness K = stiffness(*u.grid);
    double q = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        q += K.diag[i] * u[i] * u[i];
        if (i + 1 < u.size()) q += 2 * K.off[i] * u[i] * u[i + 1];
    }
    EXPECT_NEAR(q, dirichlet_energy(u), 1e-12 * q);
}

TEST(FieldCsv, HeaderAndRows) {
    const std::string csv = field_to_csv(sine(17));
    EXPECT_EQ(csv.rfind("coordinate [", 0), 0u);
    EXPECT_NE(csv.find("],value"), std::string::npos);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    EXPECT_GE(lines, 18u);
}
