#include "lowdeg/linalg.h"

#include <algorithm>
#include <cmath>

#include "lowdeg/error.h"

namespace lowdeg::linalg {

std::vector<double> symmetric_eigenvalues(Matrix a, double tol, int max_sweeps) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DomainError("eigenvalues need a square matrix");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-10 * (1.0 + std::abs(a(i, j)))) {
        throw DomainError("matrix is not symmetric");
      }
    }
  }
  auto off_mass = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  for (int sweep = 0; sweep < max_sweeps && off_mass() > tol; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

namespace {

// Solves a nonsingular square system with partial pivoting.
std::vector<double> solve_square(Matrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) throw DomainError("singular system");
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a(piv, k), a(col, k));
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double m = a(r, col) / a(col, col);
      if (m == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a(r, k) -= m * a(col, k);
      b[r] -= m * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a(i, k) * x[k];
    x[i] = s / a(i, i);
  }
  return x;
}

}  // namespace

LinearSolution min_norm_solve(const Matrix& a_in, std::span<const double> b_in, double tol) {
  const std::size_t n = a_in.rows(), m = a_in.cols();
  if (b_in.size() != n) throw DomainError("right-hand side has wrong length");
  Matrix a = a_in;
  std::vector<double> b(b_in.begin(), b_in.end());
  double scale = 0.0;
  for (double v : a.data()) scale = std::max(scale, std::abs(v));
  const double thresh = tol * std::max(scale, 1e-300);

  std::vector<std::size_t> colperm(m);
  for (std::size_t j = 0; j < m; ++j) colperm[j] = j;
  std::size_t rank = 0;
  for (; rank < std::min(n, m); ++rank) {
    std::size_t pr = rank, pc = rank;
    double best = 0.0;
    for (std::size_t r = rank; r < n; ++r)
      for (std::size_t c = rank; c < m; ++c)
        if (std::abs(a(r, c)) > best) {
          best = std::abs(a(r, c));
          pr = r;
          pc = c;
        }
    if (best <= thresh) break;
    for (std::size_t k = 0; k < m; ++k) std::swap(a(rank, k), a(pr, k));
    std::swap(b[rank], b[pr]);
    for (std::size_t r = 0; r < n; ++r) std::swap(a(r, rank), a(r, pc));
    std::swap(colperm[rank], colperm[pc]);
    const double d = a(rank, rank);
    for (std::size_t k = 0; k < m; ++k) a(rank, k) /= d;
    b[rank] /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == rank) continue;
      const double f = a(r, rank);
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < m; ++k) a(r, k) -= f * a(rank, k);
      b[r] -= f * b[rank];
    }
  }
  // Pivot block is now the identity: x_piv = b - A_free x_free.
  const std::size_t free = m - rank;
  std::vector<double> xp(m, 0.0);
  for (std::size_t i = 0; i < rank; ++i) xp[colperm[i]] = b[i];
  if (free == 0) return {xp, int(rank)};

  // Null-space basis, one vector per free column, in original coordinates.
  std::vector<std::vector<double>> null(free, std::vector<double>(m, 0.0));
  for (std::size_t f = 0; f < free; ++f) {
    null[f][colperm[rank + f]] = 1.0;
    for (std::size_t i = 0; i < rank; ++i) null[f][colperm[i]] = -a(i, rank + f);
  }
  Matrix gram(free, free);
  std::vector<double> rhs(free, 0.0);
  for (std::size_t p = 0; p < free; ++p) {
    for (std::size_t q = 0; q < free; ++q) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += null[p][k] * null[q][k];
      gram(p, q) = s;
    }
    for (std::size_t k = 0; k < m; ++k) rhs[p] += null[p][k] * xp[k];
  }
  const auto coef = solve_square(gram, rhs);
  for (std::size_t p = 0; p < free; ++p)
    for (std::size_t k = 0; k < m; ++k) xp[k] -= coef[p] * null[p][k];
  return {xp, int(rank)};
}

}  // namespace lowdeg::linalg
