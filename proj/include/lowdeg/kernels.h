#pragma once

#include <span>
#include <vector>

#include "lowdeg/numeric.h"
#include "lowdeg/weights.h"

namespace lowdeg {

// Execution policy for the data-parallel kernels. Both policies produce
// bit-identical results: every reduction is a single compensated sum in
// dataset order; only independent reductions run concurrently.
enum class Exec { serial, parallel };

Exec default_exec();
void set_default_exec(Exec exec);
int max_threads();

namespace kernels {

// z_i = <w(f_i), y_i - f_i>, or w_coord(f_i) (y_i,coord - f_i,coord) when
// coord >= 0.
void residual_signal(const WeightFunction& w, int coord, const Matrix& f, const Matrix& y,
                     std::span<double> z);

// out[g] = sum_i weights_i * groups(g, i) * z_i, each sum compensated and in
// index order.
void group_sums_serial(std::span<const double> weights, const Matrix& groups,
                       std::span<const double> z, std::span<double> out);
void group_sums_parallel(std::span<const double> weights, const Matrix& groups,
                         std::span<const double> z, std::span<double> out);
void group_sums(Exec exec, std::span<const double> weights, const Matrix& groups,
                std::span<const double> z, std::span<double> out);

// violations(e, g) = sum_i weights_i groups(g,i) z^{(e)}_i / total_weight for
// every effective weight e of `family`.
Matrix violation_matrix_serial(const WeightFamily& family, std::span<const EffectiveWeight> effective,
                               std::span<const double> weights, double total_weight,
                               const Matrix& groups, const Matrix& f, const Matrix& y);
Matrix violation_matrix_parallel(const WeightFamily& family,
                                 std::span<const EffectiveWeight> effective,
                                 std::span<const double> weights, double total_weight,
                                 const Matrix& groups, const Matrix& f, const Matrix& y);
Matrix violation_matrix(Exec exec, const WeightFamily& family,
                        std::span<const EffectiveWeight> effective, std::span<const double> weights,
                        double total_weight, const Matrix& groups, const Matrix& f, const Matrix& y);

}  // namespace kernels
}  // namespace lowdeg
