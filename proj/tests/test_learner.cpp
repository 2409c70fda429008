#include <gtest/gtest.h>

#include "lowdeg/error.h"
#include "lowdeg/learner.h"

using namespace lowdeg;

TEST(SelectCorrelation, PicksLargestSignedCorrelation) {
  const std::vector<double> corr{0.01, -0.2, 0.15};
  const auto out = select_correlation(corr, 0.1);
  ASSERT_TRUE(out.found);
  EXPECT_EQ(out.index, 1u);
  EXPECT_EQ(out.sign, -1);
  EXPECT_DOUBLE_EQ(out.correlation, 0.2);
  EXPECT_DOUBLE_EQ(out.max_abs_correlation, 0.2);
}

TEST(SelectCorrelation, TiesGoToLowestIndexThenPositiveSign) {
  const std::vector<double> corr{-0.3, 0.3, 0.3};
  const auto out = select_correlation(corr, 0.1);
  EXPECT_EQ(out.index, 0u);
  EXPECT_EQ(out.sign, -1);
  const std::vector<double> zero{0.0, 0.0};
  const auto none = select_correlation(zero, 0.0);
  EXPECT_FALSE(none.found);
  EXPECT_EQ(none.sign, 1);
}

TEST(SelectCorrelation, ThresholdIsStrict) {
  const std::vector<double> corr{0.1};
  EXPECT_FALSE(select_correlation(corr, 0.1).found);
  EXPECT_TRUE(select_correlation(corr, 0.0999).found);
}

TEST(WeakLearner, CertifiesWhenAllCorrelationsSmall) {
  Dataset ds(2, 1);
  const double a[1] = {0}, b[1] = {1};
  ds.add(a, 0);
  ds.add(b, 0);
  const HypothesisClass cls("c", {GroupFunction::all(), GroupFunction::column(0)});
  const std::vector<double> z{0.05, -0.05};
  const auto out = weak_agnostic_learn(cls.evaluate(ds), ds, z, 0.1);
  EXPECT_FALSE(out.found);
  EXPECT_NEAR(out.max_abs_correlation, 0.025, 1e-15);
}

TEST(WeakLearner, FindsPlantedGroupFromSamples) {
  std::vector<WalSample> samples;
  for (int i = 0; i < 100; ++i) {
    const double x0 = i % 2, x1 = (i / 2) % 2;
    samples.push_back({{x0, x1}, x1 == 1 ? 0.8 : -0.1});
  }
  const HypothesisClass cls("c", {GroupFunction::all(), GroupFunction::column(0), GroupFunction::column(1)});
  const auto out = weak_agnostic_learn(cls, samples, 0.2);
  ASSERT_TRUE(out.found);
  EXPECT_EQ(out.index, 2u);
  EXPECT_EQ(out.sign, 1);
  EXPECT_NEAR(out.correlation, 0.4, 1e-12);
}

TEST(WeakLearner, RejectsOutOfRangeResiduals) {
  const HypothesisClass cls("c", {GroupFunction::all()});
  const std::vector<WalSample> samples{{{0.0}, 1.5}};
  EXPECT_THROW(weak_agnostic_learn(cls, samples, 0.1), DomainError);
  EXPECT_THROW(weak_agnostic_learn(cls, std::vector<WalSample>{}, 0.1), DomainError);
}

TEST(IndicatorClass, AllOnesFirstThenColumns) {
  Dataset ds(2, 3);
  const double x[3] = {1, 0, 1};
  ds.add(x, 0);
  const std::vector<int> cols{0, 2};
  const auto cls = indicator_class_from_columns(ds, cols, true);
  ASSERT_EQ(cls.size(), 5u);
  EXPECT_EQ(cls[0].name(), "all");
  EXPECT_EQ(cls[1].name(), "x0=1");
  EXPECT_EQ(cls[2].name(), "x0=0");
  const Matrix g = cls.evaluate(ds);
  EXPECT_EQ(g(1, 0), 1.0);
  EXPECT_EQ(g(2, 0), 0.0);
}

TEST(IndicatorClass, RejectsNonBinaryColumn) {
  Dataset ds(2, 1);
  const double x[1] = {0.5};
  ds.add(x, 0);
  const std::vector<int> cols{0};
  EXPECT_THROW(indicator_class_from_columns(ds, cols), DomainError);
  const std::vector<int> missing{3};
  EXPECT_THROW(indicator_class_from_columns(ds, missing), DomainError);
}

TEST(StumpClass, ThresholdIndicators) {
  Dataset ds(2, 1);
  for (double v : {0.1, 0.5, 0.9}) {
    const double x[1] = {v};
    ds.add(x, 0);
  }
  const std::vector<double> ts{0.5};
  const auto cls = threshold_stump_class(ds, 0, ts);
  const Matrix g = cls.evaluate(ds);
  EXPECT_EQ(g(0, 0), 0.0);
  EXPECT_EQ(g(0, 1), 1.0);
  EXPECT_EQ(g(0, 2), 1.0);
}

TEST(HypothesisClass, ValuesOutsideUnitIntervalAreRejected) {
  Dataset ds(2, 1);
  const double x[1] = {2.0};
  ds.add(x, 0);
  const HypothesisClass cls("c", {GroupFunction::custom("raw", [](std::span<const double> v) { return v[0]; })});
  EXPECT_THROW(cls.evaluate(ds), DomainError);
}
