#pragma once

#include <cstddef>
#include <vector>

namespace flatgs {

// Thomas algorithm with the forward sweep factored once, for repeated solves
// with the same matrix (implicit diffusion steps, inverse iteration).
class TridiagonalSolver {
public:
    TridiagonalSolver() = default;
    // lower[i] = A(i, i-1) (lower[0] unused), upper[i] = A(i, i+1).
    TridiagonalSolver(const std::vector<double>& lower, const std::vector<double>& diag,
                      const std::vector<double>& upper);

    std::size_t size() const { return inv_pivot_.size(); }
    void solve_in_place(double* rhs) const;
    std::vector<double> solve(std::vector<double> rhs) const;

private:
    std::vector<double> lower_;
    std::vector<double> c_;
    std::vector<double> inv_pivot_;
};

// Number of eigenvalues below sigma of the symmetric pencil K x = mu M x with
// K tridiagonal (diag, off) and M positive diagonal.
std::size_t sturm_count(const std::vector<double>& diag, const std::vector<double>& off,
                        const std::vector<double>& mass, double sigma);

struct PencilEigen {
    double value = 0.0;
    std::vector<double> vector;  // M-normalized, positive sum
    int iterations = 0;
    double residual = 0.0;       // ||K x - mu M x||_{M^-1} / ||x||_M
};

// Smallest eigenpair of K x = mu M x.
//   use_sturm = false: plain inverse power iteration with shift 0 (K must be
//   positive definite).
//   use_sturm = true: bisection on the Sturm count to bracket mu_1, then
//   shifted inverse iteration.
PencilEigen smallest_pencil_eigen(const std::vector<double>& diag, const std::vector<double>& off,
                                  const std::vector<double>& mass, bool use_sturm,
                                  double tol = 1e-12, int max_iter = 500);

}  // namespace flatgs
