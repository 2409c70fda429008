#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lowdeg/error.h"
#include "lowdeg/weights.h"

using namespace lowdeg;

TEST(Cells, CountAndBoundaryConvention) {
  EXPECT_EQ(cells_per_axis(0.1), 10);
  EXPECT_EQ(cells_per_axis(0.3), 4);
  EXPECT_EQ(cells_per_axis(1.0), 1);
  EXPECT_EQ(interval_index(0.0, 0.1, 10), 0);
  EXPECT_EQ(interval_index(0.5, 0.1, 10), 5);
  // 3 * 0.1 rounds above 0.3, so 0.3 still lies in cell 2.
  EXPECT_EQ(interval_index(0.3, 0.1, 10), 2);
  EXPECT_EQ(interval_index(1.0, 0.1, 10), 9);  // last cell is closed
  EXPECT_EQ(interval_index(0.95, 0.3, 4), 3);
}

TEST(ConstantFamily, OneMemberPerCoordinate) {
  EXPECT_EQ(constant_family(Space::binary()).size(), 1u);
  const auto f = constant_family(3);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[1].eval(std::vector<double>{0.2, 0.3, 0.5}), (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(f.lipschitz_bound(), 0.0);
}

TEST(MonomialFamily, ScalarMembersArePowers) {
  const auto f = monomial_family(Space::binary(), 3);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0].id(), "1");
  EXPECT_EQ(f[1].id(), "t");
  EXPECT_EQ(f[2].id(), "t^2");
  EXPECT_DOUBLE_EQ(f[2].eval(std::vector<double>{0.5})[0], 0.25);
  EXPECT_EQ(f.lipschitz_bound(), 2.0);
}

TEST(MonomialFamily, CountMatchesBinomialFormula) {
  for (int l = 2; l <= 4; ++l) {
    for (int k = 1; k <= 4; ++k) {
      std::size_t expected = 0;
      for (int d = 0; d <= k - 1; ++d) {
        // Number of monomials of degree d in l variables, times l coordinates.
        double c = 1.0;
        for (int i = 1; i <= d; ++i) c = c * (l + d - i) / i;
        expected += std::size_t(std::llround(c)) * std::size_t(l);
      }
      EXPECT_EQ(monomial_family(l, k).size(), expected) << "l=" << l << " k=" << k;
    }
  }
}

TEST(MonomialFamily, LowerDegreeIsPrefix) {
  for (int l : {2, 3}) {
    for (int k = 2; k <= 4; ++k) {
      const auto lo = monomial_family(l, k - 1), hi = monomial_family(l, k);
      ASSERT_LT(lo.size(), hi.size());
      for (std::size_t i = 0; i < lo.size(); ++i) EXPECT_EQ(lo[i].id(), hi[i].id());
    }
  }
}

TEST(MonomialFamily, OneSparseProductOnItsCoordinate) {
  const WeightFunction w(MonomialWeight{1, {1, 1, 0}}, 3);
  const auto v = w.eval(std::vector<double>{0.5, 0.4, 0.1});
  EXPECT_EQ(v[0], 0.0);
  EXPECT_DOUBLE_EQ(v[1], 0.2);
  EXPECT_EQ(v[2], 0.0);
  EXPECT_EQ(w.id(), "z0*z1@1");
}

TEST(MonomialFamily, RejectsNonPositiveDegree) { EXPECT_THROW(monomial_family(2, 0), DomainError); }

TEST(LipschitzCheck, DegreeFamiliesHoldWithKMinusOne) {
  for (int l = 2; l <= 3; ++l) {
    for (int k = 1; k <= 4; ++k) {
      const auto rep = lipschitz_check(monomial_family(l, k), std::max(0, k - 1), 1000, 7);
      EXPECT_TRUE(rep.pass) << "l=" << l << " k=" << k << " ratio " << rep.max_ratio;
      EXPECT_GT(rep.pairs, 900u);
    }
  }
}

TEST(LipschitzCheck, FalsifiesTooSmallBound) {
  // z0^3 has slope 3 near the corner, so r = 1 must fail.
  const auto rep = lipschitz_check(monomial_family(2, 4), 1.0, 1000, 3);
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.max_ratio, 1.0);
}

TEST(IntervalFamily, CellsAndPerLabelExpansion) {
  const auto f = interval_family(3, 0.25);
  EXPECT_EQ(f.size(), 64u);
  EXPECT_TRUE(f.per_label());
  EXPECT_EQ(f.effective().size(), 192u);
  EXPECT_TRUE(std::isinf(f.lipschitz_bound()));
  const auto b = interval_family(Space::binary(), 0.1);
  EXPECT_EQ(b.size(), 10u);
  EXPECT_EQ(b.effective().size(), 10u);
}

TEST(IntervalFamily, ExactlyOneCellContainsEachPoint) {
  const auto f = interval_family(2, 0.1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::vector<double> p{u(rng), t % 10 == 0 ? 1.0 : u(rng)};
    int hits = 0;
    for (const auto& m : f.members()) hits += m.eval_coord(p, 0) == 1.0;
    EXPECT_EQ(hits, 1);
  }
}

TEST(IntervalFamily, RefusesHugeGrids) {
  EXPECT_THROW(interval_family(10, 0.1), BasisTooLarge);
}

TEST(LipschitzBasis, LowDimensionUsesIntervalConstruction) {
  const auto f = lipschitz_basis(Space::binary(), 0.05);
  EXPECT_EQ(f.size(), 10u);
  ASSERT_TRUE(f.basis());
  EXPECT_NEAR(f.basis()->eta, 0.05, 1e-15);
  const auto g = lipschitz_basis(2, 0.1);
  EXPECT_EQ(g.size(), 100u);
  EXPECT_NEAR(g.basis()->eta, 0.1, 1e-15);
}

TEST(LipschitzBasis, GridBasisIsRefusedAboveCap) {
  try {
    lipschitz_basis(3, 0.5);
    FAIL() << "expected BasisTooLarge";
  } catch (const BasisTooLarge& e) {
    EXPECT_GT(e.log10_estimate(), 6.0);
  }
}

TEST(LipschitzGrid, ApproximatesWithinEtaOnSimplex) {
  const auto grid = LipschitzGrid::create(3, 0.9);
  EXPECT_EQ(grid->cubes_per_axis(), 10);
  auto u = [](std::span<const double> p) {
    return std::vector<double>{0.5 * p[0] + 0.25 * p[1], std::abs(p[1] - p[2]), 0.3};
  };
  std::mt19937_64 rng(5);
  std::exponential_distribution<double> e(1.0);
  for (int coord = 0; coord < 3; ++coord) {
    const auto w = grid->approximate(u, coord);
    for (int t = 0; t < 500; ++t) {
      std::vector<double> p{e(rng), e(rng), e(rng)};
      const double s = p[0] + p[1] + p[2];
      for (double& v : p) v /= s;
      EXPECT_LE(std::abs(w.eval_coord(p, std::size_t(coord)) - u(p)[coord]), 0.9 + 1e-12);
    }
  }
}

TEST(CellApproximation, ErrorWithinHalfDiagonal) {
  const auto fam = interval_family(2, 0.1);
  auto u = [](std::span<const double> p) {
    return std::vector<double>{clamp01(0.2 + 0.7 * p[0] - 0.3 * p[1]), clamp01(std::max(p[0], p[1]))};
  };
  const auto a = approximate_on_cells(fam, u);
  EXPECT_LE(a.max_coordinate_mass, 100.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> r(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const std::vector<double> p{r(rng), r(rng)};
    const auto v = eval_approximation(fam, a, p);
    const auto w = u(p);
    for (int j = 0; j < 2; ++j) EXPECT_LE(std::abs(v[j] - w[j]), 2 * 0.1 / 2 + 1e-12);
  }
}

TEST(WeightFamily, EffectiveIdsCarryCoordinate) {
  const auto f = interval_family(2, 0.5);
  const auto eff = f.effective();
  EXPECT_EQ(f.effective_id(eff[1]), "cell[0,0]#1");
}
