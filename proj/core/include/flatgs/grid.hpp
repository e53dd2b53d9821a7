#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flatgs/model.hpp"

namespace flatgs {

// Uniform vertex-centred grid. Intervals are discretized directly; balls are
// represented by the radial coordinate r in [0, R] with a symmetry node at 0.
//
// Quadrature and the discrete Laplacian share one finite-volume structure:
// node i owns the dual cell [x_i - h/2, x_i + h/2] (clipped to the domain),
// `volume[i]` is its measure with the radial Jacobian, and `face[i]` is the
// measure of the surface between nodes i and i+1. With that,
//   T(u)  = sum_i face[i] (u[i+1]-u[i])^2 / h
//   -Δu_i = (K u)_i / volume[i]
// so T(u) = u·Ku exactly and the discrete operator is symmetric in the
// weighted inner product.
struct Grid {
    DomainSpec domain;
    int dimension = 1;
    double h = 0.0;
    std::vector<double> x;
    std::vector<double> volume;
    std::vector<double> face;

    std::size_t size() const { return x.size(); }
    bool radial() const;
    // Range of nodes not fixed by the Dirichlet condition: [first_free, last_free].
    std::size_t first_free() const { return radial() ? 0 : 1; }
    std::size_t last_free() const { return x.size() - 2; }
    bool is_dirichlet(std::size_t i) const { return i + 1 == x.size() || (!radial() && i == 0); }
    double measure() const;
    std::string describe() const;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr build_grid(const DomainSpec& domain, std::size_t n);

// Surface measure of the unit sphere S^{N-1}; equals 2 for N = 1.
double unit_sphere_area(int N);

struct Field {
    GridPtr grid;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

Field zero_field(const GridPtr& grid);
// Samples f at the nodes; Dirichlet nodes are forced to zero.
Field sample(const GridPtr& grid, const std::function<double(double)>& f);

struct FunctionalBreakdown {
    double T = 0.0;
    double A = 0.0;
    double B = 0.0;
    double L2sq = 0.0;
    double H = 0.0;
    double E = 0.0;
    double P = 0.0;
};

// Raw integrals.
double dirichlet_energy(const Field& u);
double power_integral(const Field& u, double p);  // ∫|u|^p
double l2sq(const Field& u);

// Recomputes H, E, P from T, A, B, L2sq.
FunctionalBreakdown assemble_breakdown(double T, double A, double B, double L2sq,
                                       const ProblemParams& params);
FunctionalBreakdown functionals(const Field& u, const ProblemParams& params);

double h01_norm(const Field& u);
double h1_norm(const Field& u);  // sqrt(T + L2sq), the full norm
double l2_norm(const Field& u);
double linf_norm(const Field& u);
double h01_distance(const Field& u, const Field& v);

Field boundary_distance_profile(const GridPtr& grid);
double nondegeneracy_constant(const Field& u, double alpha);

// Tridiagonal stiffness matrix over all nodes: T(u) = u·Ku.
struct Stiffness {
    std::vector<double> diag;
    std::vector<double> off;  // off[i] couples i and i+1
};
Stiffness stiffness(const Grid& grid);

// -Δu at every node; zero at Dirichlet nodes.
Field laplacian_apply(const Field& u, const ProblemParams& params);

// "coordinate,value" CSV with a header naming the domain and grid size.
std::string field_to_csv(const Field& u);

}  // namespace flatgs
