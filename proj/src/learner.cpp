#include "lowdeg/learner.h"

#include <cmath>
#include <limits>

#include "lowdeg/error.h"

namespace lowdeg {

HypothesisClass::HypothesisClass(std::string name, std::vector<GroupFunction> members)
    : name_(std::move(name)), members_(std::move(members)) {
  if (members_.empty()) throw DomainError("hypothesis class is empty");
}

Matrix HypothesisClass::evaluate(const Dataset& ds) const {
  Matrix g(members_.size(), ds.size());
  for (std::size_t m = 0; m < members_.size(); ++m) {
    if (members_[m].max_column() >= int(ds.num_features())) {
      throw DomainError("group '" + members_[m].name() + "' reads a missing column");
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double v = members_[m](ds.x(i));
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError("group '" + members_[m].name() + "' leaves [0,1]");
      }
      g(m, i) = v;
    }
  }
  return g;
}

LearnerOutcome select_correlation(std::span<const double> correlations, double alpha) {
  LearnerOutcome out;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < correlations.size(); ++m) {
    const double v = correlations[m];
    out.max_abs_correlation = std::max(out.max_abs_correlation, std::abs(v));
    if (v > best) {
      best = v;
      out.index = m;
      out.sign = +1;
    }
    if (-v > best) {
      best = -v;
      out.index = m;
      out.sign = -1;
    }
  }
  out.found = best > alpha;
  out.correlation = out.found ? best : 0.0;
  if (!out.found) {
    out.index = 0;
    out.sign = +1;
  }
  return out;
}

LearnerOutcome weak_agnostic_learn(const Matrix& group_matrix, const Dataset& ds,
                                   std::span<const double> z, double alpha, Exec exec) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (ds.empty()) throw DomainError("weak learner needs samples");
  if (z.size() != ds.size() || group_matrix.cols() != ds.size()) {
    throw DomainError("residual length mismatch");
  }
  const double total = ds.total_weight();
  std::vector<double> corr(group_matrix.rows());
  kernels::group_sums(exec, ds.weights(), group_matrix, z, corr);
  for (double& v : corr) v /= total;
  return select_correlation(corr, alpha);
}

LearnerOutcome weak_agnostic_learn(const HypothesisClass& cls, std::span<const WalSample> samples,
                                   double alpha, Exec exec) {
  if (samples.empty()) throw DomainError("weak learner needs samples");
  Dataset ds(2, samples.front().x.size());
  std::vector<double> z;
  for (const auto& s : samples) {
    if (std::abs(s.z) > 1.0 + 1e-9) throw DomainError("residual outside [-1, 1]");
    ds.add(s.x, 0);
    z.push_back(s.z);
  }
  return weak_agnostic_learn(cls.evaluate(ds), ds, z, alpha, exec);
}

namespace {

void require_binary_column(const Dataset& ds, int column) {
  if (column < 0 || std::size_t(column) >= ds.num_features()) {
    throw DomainError("column " + std::to_string(column) + " out of range");
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double v = ds.x(i)[column];
    if (v != 0.0 && v != 1.0) {
      throw DomainError("column " + std::to_string(column) + " is not binary");
    }
  }
}

}  // namespace

HypothesisClass indicator_class_from_columns(const Dataset& ds, std::span<const int> columns,
                                             bool complements) {
  std::vector<GroupFunction> members{GroupFunction::all()};
  for (int col : columns) {
    require_binary_column(ds, col);
    members.push_back(GroupFunction::column(col));
    if (complements) members.push_back(GroupFunction::complement(col));
  }
  return HypothesisClass("columns", std::move(members));
}

HypothesisClass threshold_stump_class(const Dataset& ds, int column,
                                      std::span<const double> thresholds) {
  if (column < 0 || std::size_t(column) >= ds.num_features()) {
    throw DomainError("column " + std::to_string(column) + " out of range");
  }
  std::vector<GroupFunction> members;
  for (double t : thresholds) {
    if (!std::isfinite(t)) throw DomainError("thresholds must be finite");
    members.push_back(GroupFunction::stump(column, t));
  }
  return HypothesisClass("stumps", std::move(members));
}

}  // namespace lowdeg
