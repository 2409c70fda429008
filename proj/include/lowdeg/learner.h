#pragma once

#include <span>
#include <string>
#include <vector>

#include "lowdeg/dataset.h"
#include "lowdeg/group.h"
#include "lowdeg/kernels.h"

namespace lowdeg {

class HypothesisClass {
 public:
  HypothesisClass(std::string name, std::vector<GroupFunction> members);

  const std::string& name() const { return name_; }
  std::size_t size() const { return members_.size(); }
  const GroupFunction& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<GroupFunction>& members() const { return members_; }

  // |C| x n matrix of c(x_i); checks every value lies in [0,1].
  Matrix evaluate(const Dataset& ds) const;

 private:
  std::string name_;
  std::vector<GroupFunction> members_;
};

struct LearnerOutcome {
  bool found = false;
  std::size_t index = 0;  // member of the class when found
  int sign = +1;
  double correlation = 0.0;          // sign * E[c(x) z] when found
  double max_abs_correlation = 0.0;  // max_c |E[c(x) z]|
};

// Picks the best signed correlation from precomputed E[c(x) z] values; ties go
// to the lowest index and then to the positive sign.
LearnerOutcome select_correlation(std::span<const double> correlations, double alpha);

// Exhaustive learner over a weighted sample. `group_matrix` is
// cls.evaluate(ds) and may be reused across calls.
LearnerOutcome weak_agnostic_learn(const Matrix& group_matrix, const Dataset& ds,
                                   std::span<const double> z, double alpha,
                                   Exec exec = default_exec());

struct WalSample {
  std::vector<double> x;
  double z = 0.0;
};

// Uniformly weighted samples (x, z) with |z| <= 1.
LearnerOutcome weak_agnostic_learn(const HypothesisClass& cls, std::span<const WalSample> samples,
                                   double alpha, Exec exec = default_exec());

// {all-ones} followed by one indicator per column, optionally each followed by
// its complement.
HypothesisClass indicator_class_from_columns(const Dataset& ds, std::span<const int> columns,
                                             bool complements = false);

// 1{x_column >= t} for each threshold.
HypothesisClass threshold_stump_class(const Dataset& ds, int column,
                                      std::span<const double> thresholds);

}  // namespace lowdeg
