#pragma once

#include <span>
#include <vector>

#include "lowdeg/numeric.h"

namespace lowdeg::linalg {

// Eigenvalues of a small symmetric matrix by cyclic Jacobi sweeps, ascending.
// Stops once the off-diagonal Frobenius mass drops below `tol`.
std::vector<double> symmetric_eigenvalues(Matrix a, double tol = 1e-12, int max_sweeps = 100);

struct LinearSolution {
  std::vector<double> x;
  int rank = 0;
};

// Minimum-norm solution of the consistent system A x = b via Gauss-Jordan
// elimination with full pivoting; pivots below tol * max|A| count as zero.
LinearSolution min_norm_solve(const Matrix& a, std::span<const double> b, double tol = 1e-10);

}  // namespace lowdeg::linalg
