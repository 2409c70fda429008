#include "lowdeg/kernels.h"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lowdeg {

namespace {
std::atomic<Exec> g_default_exec{Exec::parallel};
}

Exec default_exec() { return g_default_exec.load(); }
void set_default_exec(Exec exec) { g_default_exec.store(exec); }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace kernels {

void residual_signal(const WeightFunction& w, int coord, const Matrix& f, const Matrix& y,
                     std::span<double> z) {
  const std::size_t n = f.rows();
  const std::size_t dim = f.cols();
  if (coord >= 0) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto fi = f.row(i);
      const double wv = w.eval_coord(fi, std::size_t(coord));
      z[i] = wv == 0.0 ? 0.0 : wv * (y(i, coord) - fi[coord]);
    }
    return;
  }
  std::vector<double> wv(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto fi = f.row(i);
    w.eval(fi, wv);
    CompensatedSum s;
    for (std::size_t j = 0; j < dim; ++j) s.add(wv[j] * (y(i, j) - fi[j]));
    z[i] = s.value();
  }
}

namespace {

double weighted_group_sum(std::span<const double> weights, std::span<const double> c,
                          std::span<const double> z) {
  CompensatedSum s;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (c[i] != 0.0) s.add(weights[i] * c[i] * z[i]);
  }
  return s.value();
}

}  // namespace

void group_sums_serial(std::span<const double> weights, const Matrix& groups,
                       std::span<const double> z, std::span<double> out) {
  for (std::size_t g = 0; g < groups.rows(); ++g) {
    out[g] = weighted_group_sum(weights, groups.row(g), z);
  }
}

void group_sums_parallel(std::span<const double> weights, const Matrix& groups,
                         std::span<const double> z, std::span<double> out) {
  const long rows = long(groups.rows());
#pragma omp parallel for schedule(static)
  for (long g = 0; g < rows; ++g) {
    out[g] = weighted_group_sum(weights, groups.row(std::size_t(g)), z);
  }
}

void group_sums(Exec exec, std::span<const double> weights, const Matrix& groups,
                std::span<const double> z, std::span<double> out) {
  if (exec == Exec::parallel) {
    group_sums_parallel(weights, groups, z, out);
  } else {
    group_sums_serial(weights, groups, z, out);
  }
}

Matrix violation_matrix_serial(const WeightFamily& family, std::span<const EffectiveWeight> effective,
                               std::span<const double> weights, double total_weight,
                               const Matrix& groups, const Matrix& f, const Matrix& y) {
  Matrix out(effective.size(), groups.rows());
  std::vector<double> z(f.rows());
  for (std::size_t e = 0; e < effective.size(); ++e) {
    residual_signal(family[effective[e].member], effective[e].coord, f, y, z);
    auto row = out.row(e);
    group_sums_serial(weights, groups, z, row);
    for (double& v : row) v /= total_weight;
  }
  return out;
}

Matrix violation_matrix_parallel(const WeightFamily& family,
                                 std::span<const EffectiveWeight> effective,
                                 std::span<const double> weights, double total_weight,
                                 const Matrix& groups, const Matrix& f, const Matrix& y) {
  Matrix out(effective.size(), groups.rows());
  const long count = long(effective.size());
#pragma omp parallel
  {
    std::vector<double> z(f.rows());
#pragma omp for schedule(dynamic)
    for (long e = 0; e < count; ++e) {
      const auto& ew = effective[std::size_t(e)];
      residual_signal(family[ew.member], ew.coord, f, y, z);
      auto row = out.row(std::size_t(e));
      group_sums_serial(weights, groups, z, row);
      for (double& v : row) v /= total_weight;
    }
  }
  return out;
}

Matrix violation_matrix(Exec exec, const WeightFamily& family,
                        std::span<const EffectiveWeight> effective, std::span<const double> weights,
                        double total_weight, const Matrix& groups, const Matrix& f, const Matrix& y) {
  if (exec == Exec::parallel) {
    return violation_matrix_parallel(family, effective, weights, total_weight, groups, f, y);
  }
  return violation_matrix_serial(family, effective, weights, total_weight, groups, f, y);
}

}  // namespace kernels
}  // namespace lowdeg
