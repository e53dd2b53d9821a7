#include "flatgs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "flatgs/csv.hpp"
#include "flatgs/error.hpp"

namespace flatgs {

bool Grid::radial() const { return std::holds_alternative<Ball>(domain); }

double Grid::measure() const {
    if (const auto* iv = std::get_if<Interval>(&domain)) return iv->b - iv->a;
    const auto& b = std::get<Ball>(domain);
    return unit_sphere_area(b.dimension) / b.dimension * std::pow(b.radius, b.dimension);
}

std::string Grid::describe() const {
    std::ostringstream os;
    if (const auto* iv = std::get_if<Interval>(&domain))
        os << "Interval(" << format_double(iv->a) << ";" << format_double(iv->b) << ")";
    else {
        const auto& b = std::get<Ball>(domain);
        os << "Ball(N=" << b.dimension << ";R=" << format_double(b.radius) << ")";
    }
    os << " n=" << x.size();
    return os.str();
}

double unit_sphere_area(int N) {
    if (N < 1) throw DomainError("dimension must be >= 1");
    return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

GridPtr build_grid(const DomainSpec& domain, std::size_t n) {
    if (n < 16) throw ConfigError("grid needs at least 16 nodes");
    auto g = std::make_shared<Grid>();
    g->domain = domain;
    g->x.resize(n);
    g->volume.resize(n);
    g->face.resize(n - 1);

    if (const auto* iv = std::get_if<Interval>(&domain)) {
        if (!(iv->a < iv->b)) throw DomainError("interval requires a < b");
        g->dimension = 1;
        g->h = (iv->b - iv->a) / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            g->x[i] = iv->a + g->h * static_cast<double>(i);
            g->volume[i] = g->h;
        }
        g->x[n - 1] = iv->b;
        g->volume[0] = g->volume[n - 1] = 0.5 * g->h;
        std::fill(g->face.begin(), g->face.end(), 1.0);
        return g;
    }

    const auto& b = std::get<Ball>(domain);
    if (b.dimension < 1) throw DomainError("ball dimension must be >= 1");
    if (!(b.radius > 0.0)) throw DomainError("ball radius must be positive");
    const int N = b.dimension;
    g->dimension = N;
    g->h = b.radius / static_cast<double>(n - 1);
    const double S = unit_sphere_area(N);
    auto cell = [&](double lo, double hi) {
        return S / N * (std::pow(hi, N) - std::pow(lo, N));
    };
    for (std::size_t i = 0; i < n; ++i) g->x[i] = g->h * static_cast<double>(i);
    g->x[n - 1] = b.radius;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double rf = g->h * (static_cast<double>(i) + 0.5);
        g->face[i] = S * std::pow(rf, N - 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = i == 0 ? 0.0 : g->x[i] - 0.5 * g->h;
        const double hi = i + 1 == n ? b.radius : g->x[i] + 0.5 * g->h;
        g->volume[i] = cell(lo, hi);
    }
    return g;
}

Field zero_field(const GridPtr& grid) { return Field{grid, std::vector<double>(grid->size(), 0.0)}; }

Field sample(const GridPtr& grid, const std::function<double(double)>& f) {
    Field u = zero_field(grid);
    for (std::size_t i = 0; i < grid->size(); ++i)
        u.values[i] = grid->is_dirichlet(i) ? 0.0 : f(grid->x[i]);
    return u;
}

double dirichlet_energy(const Field& u) {
    const Grid& g = *u.grid;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double d = u.values[i + 1] - u.values[i];
        s += g.face[i] * d * d;
    }
    return s / g.h;
}

double power_integral(const Field& u, double p) {
    const Grid& g = *u.grid;
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double a = std::abs(u.values[i]);
        if (a > 0.0) s += g.volume[i] * std::pow(a, p);
    }
    return s;
}

double l2sq(const Field& u) {
    const Grid& g = *u.grid;
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.volume[i] * u.values[i] * u.values[i];
    return s;
}

FunctionalBreakdown assemble_breakdown(double T, double A, double B, double L2sq,
                                       const ProblemParams& params) {
    const double a = params.alpha();
    const double b = params.beta();
    const double N = params.dimension;
    FunctionalBreakdown fb;
    fb.T = T;
    fb.A = A;
    fb.B = B;
    fb.L2sq = L2sq;
    fb.H = T - params.lambda * L2sq;
    fb.E = 0.5 * T + A / (1.0 + a) - params.lambda * B / (1.0 + b);
    fb.P = (N - 2.0) / (2.0 * N) * T + A / (1.0 + a) - params.lambda * B / (1.0 + b);
    return fb;
}

FunctionalBreakdown functionals(const Field& u, const ProblemParams& params) {
    if (u.grid->dimension != params.dimension)
        throw DomainError("field grid dimension does not match params.dimension");
    const Grid& g = *u.grid;
    const double pa = 1.0 + params.alpha();
    const double pb = 1.0 + params.beta();
    double A = 0.0, B = 0.0, L = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double v = std::abs(u.values[i]);
        if (v == 0.0) continue;
        const double w = g.volume[i];
        A += w * std::pow(v, pa);
        B += w * std::pow(v, pb);
        L += w * v * v;
    }
    return assemble_breakdown(dirichlet_energy(u), A, B, L, params);
}

double h01_norm(const Field& u) { return std::sqrt(dirichlet_energy(u)); }
double h1_norm(const Field& u) { return std::sqrt(dirichlet_energy(u) + l2sq(u)); }
double l2_norm(const Field& u) { return std::sqrt(l2sq(u)); }

double linf_norm(const Field& u) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    return m;
}

double h01_distance(const Field& u, const Field& v) {
    if (u.size() != v.size()) throw DomainError("fields live on different grids");
    const Grid& g = *u.grid;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double d = (u.values[i + 1] - v.values[i + 1]) - (u.values[i] - v.values[i]);
        s += g.face[i] * d * d;
    }
    return std::sqrt(s / g.h);
}

Field boundary_distance_profile(const GridPtr& grid) {
    Field d = zero_field(grid);
    const std::size_t n = grid->size();
    if (const auto* iv = std::get_if<Interval>(&grid->domain)) {
        for (std::size_t i = 1; i + 1 < n; ++i)
            d.values[i] = std::min(grid->x[i] - iv->a, iv->b - grid->x[i]);
    } else {
        const double R = std::get<Ball>(grid->domain).radius;
        for (std::size_t i = 0; i + 1 < n; ++i) d.values[i] = R - grid->x[i];
    }
    return d;
}

double nondegeneracy_constant(const Field& u, double alpha) {
    const Field d = boundary_distance_profile(u.grid);
    const double nu = 2.0 / (1.0 - alpha);
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u.values[i] < 0.0) throw DomainError("nondegeneracy requires a nonnegative field");
        if (u.grid->is_dirichlet(i)) continue;
        c = std::min(c, u.values[i] / std::pow(d.values[i], nu));
    }
    return std::isfinite(c) ? c : 0.0;
}

Stiffness stiffness(const Grid& grid) {
    const std::size_t n = grid.size();
    Stiffness k;
    k.diag.assign(n, 0.0);
    k.off.assign(n - 1, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double c = grid.face[i] / grid.h;
        k.diag[i] += c;
        k.diag[i + 1] += c;
        k.off[i] = -c;
    }
    return k;
}

Field laplacian_apply(const Field& u, const ProblemParams& params) {
    if (u.grid->dimension != params.dimension)
        throw DomainError("field grid dimension does not match params.dimension");
    const Grid& g = *u.grid;
    const Stiffness k = stiffness(g);
    Field out = zero_field(u.grid);
    const std::size_t n = g.size();
    for (std::size_t i = g.first_free(); i <= g.last_free(); ++i) {
        double s = k.diag[i] * u.values[i];
        if (i > 0) s += k.off[i - 1] * u.values[i - 1];
        if (i + 1 < n) s += k.off[i] * u.values[i + 1];
        out.values[i] = s / g.volume[i];
    }
    return out;
}

std::string field_to_csv(const Field& u) {
    CsvTable t({"coordinate [" + u.grid->describe() + "]", "value"});
    for (std::size_t i = 0; i < u.size(); ++i) t.add_numeric_row({u.grid->x[i], u.values[i]});
    return t.str();
}

}  // namespace flatgs
