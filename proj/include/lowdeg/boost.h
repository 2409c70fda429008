#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lowdeg/error.h"
#include "lowdeg/kernels.h"
#include "lowdeg/learner.h"
#include "lowdeg/predictor.h"
#include "lowdeg/weights.h"

namespace lowdeg {

struct DataMode {
  enum class Kind { reuse, chunked };
  Kind kind = Kind::reuse;
  int chunks = 0;

  static DataMode reuse() { return {}; }
  static DataMode chunked(int t) { return {Kind::chunked, t}; }
};

struct BoostConfig {
  double alpha = 0.05;
  std::optional<double> eta;             // default alpha / 2
  std::optional<int> max_iterations;     // default ceil(4 l / alpha^2)
  DataMode data_mode;
  std::uint64_t seed = 0;
  bool simplex_project = false;
  std::optional<std::vector<double>> base;  // default (1/2, ..., 1/2)
  Exec exec = default_exec();

  double step() const { return eta.value_or(alpha / 2.0); }
  int iteration_cap(int l) const;
  void validate() const;
};

struct Update {
  WeightFunction weight;
  int coord = -1;  // restrict the weight to one coordinate when >= 0
  GroupFunction group;
  int sign = +1;
  double step = 0.0;
  std::string weight_id;
};

// f_{t+1}(x) = clip(f_t(x) + sign * step * w(f_t(x)) * c(x)); `scratch` has
// the prediction's dimension.
void apply_update(const Update& u, double group_value, std::span<double> f,
                  std::span<double> scratch);

class ComposedPredictor final : public Predictor {
 public:
  ComposedPredictor(Space space, std::size_t num_features, std::vector<double> base,
                    std::vector<Update> updates = {}, bool simplex_project = false);

  Space space() const override { return space_; }
  void predict(std::span<const double> x, std::span<double> out) const override;
  using Predictor::predict;
  // Box-valued prediction, before any reporting renormalization.
  void predict_raw(std::span<const double> x, std::span<double> out) const;

  std::size_t num_features() const { return num_features_; }
  const std::vector<double>& base() const { return base_; }
  const std::vector<Update>& updates() const { return updates_; }
  bool simplex_project() const { return simplex_project_; }

  void push(Update u) { updates_.push_back(std::move(u)); }

 private:
  Space space_;
  std::size_t num_features_;
  std::vector<double> base_;
  std::vector<Update> updates_;
  bool simplex_project_;
};

struct TraceRecord {
  int iteration = 0;
  std::string weight;
  std::string group;
  int sign = +1;
  double correlation = 0.0;
  double potential_proxy = 0.0;  // E||y - f_t||^2 after the update
  std::optional<double> true_potential;  // E||f* - f_t||^2 after the update
};

struct TrainTrace {
  double initial_potential_proxy = 0.0;
  std::optional<double> initial_true_potential;
  std::vector<TraceRecord> records;
};

class NonTermination : public ConvergenceError {
 public:
  NonTermination(const std::string& what, TrainTrace trace)
      : ConvergenceError(what), trace_(std::move(trace)) {}
  const TrainTrace& trace() const { return trace_; }

 private:
  TrainTrace trace_;
};

struct TrainResult {
  ComposedPredictor predictor;
  TrainTrace trace;
};

// Weighted multicalibration boosting. Scans the family in order; the first
// (weight, group) pair whose signed correlation with the weighted residual
// exceeds alpha triggers an update and a restart of the scan. Returns once a
// full scan finds nothing.
TrainResult multicalibrate(const Dataset& ds, const HypothesisClass& cls, const WeightFamily& family,
                           const BoostConfig& config);

}  // namespace lowdeg
