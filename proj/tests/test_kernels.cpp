#include <gtest/gtest.h>

#include <omp.h>

#include <random>

#include "lowdeg/kernels.h"
#include "lowdeg/learner.h"

using namespace lowdeg;

namespace {

struct Fixture {
  Dataset ds{3, 6};
  Matrix f, y, groups;
};

Fixture make_fixture(std::size_t n, std::uint64_t seed) {
  Fixture fx;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(6);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : x) v = u(rng) < 0.5 ? 0.0 : 1.0;
    fx.ds.add(x, int(rng() % 3), 0.5 + u(rng));
  }
  fx.f = Matrix(n, 3);
  for (double& v : fx.f.data()) v = u(rng);
  fx.y = label_matrix(fx.ds, Space::one_hot(3));
  std::vector<int> cols{0, 1, 2, 3, 4, 5};
  fx.groups = indicator_class_from_columns(fx.ds, cols, true).evaluate(fx.ds);
  return fx;
}

class Threads : public ::testing::Test {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(4);
  }
  void TearDown() override { omp_set_num_threads(saved_); }
  int saved_ = 1;
};

}  // namespace

TEST_F(Threads, GroupSumsSerialAndParallelAgreeBitwise) {
  const auto fx = make_fixture(3000, 11);
  std::vector<double> z(fx.ds.size());
  kernels::residual_signal(monomial_family(3, 3)[7], -1, fx.f, fx.y, z);
  std::vector<double> a(fx.groups.rows()), b(fx.groups.rows());
  kernels::group_sums_serial(fx.ds.weights(), fx.groups, z, a);
  kernels::group_sums_parallel(fx.ds.weights(), fx.groups, z, b);
  EXPECT_EQ(a, b);
}

TEST_F(Threads, ViolationMatrixSerialAndParallelAgreeBitwise) {
  const auto fx = make_fixture(2000, 3);
  for (const auto& fam : {monomial_family(3, 3), interval_family(3, 0.25)}) {
    const auto eff = fam.effective();
    const double total = fx.ds.total_weight();
    const Matrix s = kernels::violation_matrix_serial(fam, eff, fx.ds.weights(), total, fx.groups, fx.f, fx.y);
    const Matrix p = kernels::violation_matrix_parallel(fam, eff, fx.ds.weights(), total, fx.groups, fx.f, fx.y);
    EXPECT_TRUE(s == p) << fam.name();
  }
}

TEST(Kernels, ResidualSignalPerCoordinate) {
  Dataset ds(2, 1);
  const double x[1] = {0};
  ds.add(x, 1);
  Matrix f(1, 2);
  f(0, 0) = 0.25;
  f(0, 1) = 0.5;
  const Matrix y = label_matrix(ds, Space::one_hot(2));
  std::vector<double> z(1);
  const WeightFunction w(MonomialWeight{1, {0, 1}}, 2);
  kernels::residual_signal(w, -1, f, y, z);
  EXPECT_DOUBLE_EQ(z[0], 0.5 * (1.0 - 0.5));
  kernels::residual_signal(WeightFunction(CubeWeight{1.0, 1, {0, 0}}, 2), 0, f, y, z);
  EXPECT_DOUBLE_EQ(z[0], -0.25);
}

TEST(Kernels, DefaultExecIsSettable) {
  const Exec saved = default_exec();
  set_default_exec(Exec::serial);
  EXPECT_EQ(default_exec(), Exec::serial);
  set_default_exec(saved);
}
