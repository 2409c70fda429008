#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lowdeg/dataset.h"
#include "lowdeg/learner.h"
#include "lowdeg/predictor.h"

namespace lowdeg {

enum class LabelMode { sampled, exact };

// Ground-truth rule over binary feature columns.
struct FstarRule {
  enum class Kind { table, softmax };
  Kind kind = Kind::table;

  // table: one probability vector per pattern of `columns`; every pattern
  // must appear exactly once.
  std::vector<int> columns;
  std::vector<std::pair<std::vector<int>, std::vector<double>>> table;

  // softmax: logits bias[l] + sum_j coef[j][l] x_j + sum of interaction terms
  // coef[l] * prod_{j in columns} x_j.
  std::vector<double> bias;
  std::vector<std::vector<double>> coef;
  std::vector<std::pair<std::vector<int>, std::vector<double>>> interactions;

  std::vector<double> operator()(std::span<const double> x, int l) const;
};

struct SynthSpec {
  int l = 2;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  LabelMode label_mode = LabelMode::sampled;
  std::vector<double> features;  // Bernoulli marginal of each binary column
  std::vector<int> groups;       // columns turned into indicator groups
  bool complements = false;      // also add 1 - x_j for each group column
  FstarRule fstar_rule;

  // Throws DomainError on an inconsistent spec.
  void validate() const;
};

// Sampled: n records with labels drawn from f*. Exact: n distinct draws of x,
// each expanded into one record per label with weight f*_l(x).
Dataset generate(const SynthSpec& spec);
// all-ones plus the spec's group columns (and complements).
HypothesisClass spec_class(const SynthSpec& spec, const Dataset& ds);

// Uniform double in [0,1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double uniform01(std::mt19937_64& rng);

struct Counterexample {
  Dataset data;
  HypothesisClass cls;  // c_{1,0}, c_{1,1}, c_{2,0}, c_{2,1}
};

// Four points over {0,1}^2 with weights 1/3,1/3,1/6,1/6 on (0,0),(0,1),(1,0),
// (1,1) and y = x1 xor x2.
Counterexample counterexample_dataset();
// Masses 1/2 - eps on x1 = 0 and eps on x1 = 1; eps = 1/6 is the base example.
Counterexample negative_covariance_family(double eps);

// f(x) = clamp(sum_i coef_i c_i(x)), binary scalar.
class LinearGroupPredictor final : public Predictor {
 public:
  LinearGroupPredictor(HypothesisClass cls, std::vector<double> coefficients);
  Space space() const override { return Space::binary(); }
  void predict(std::span<const double> x, std::span<double> out) const override;
  const std::vector<double>& coefficients() const { return coef_; }

 private:
  HypothesisClass cls_;
  std::vector<double> coef_;
};

// h(x) = 1 / (1 + exp(-sum_i theta_i c_i(x))).
class LogisticGroupPredictor final : public Predictor {
 public:
  LogisticGroupPredictor(HypothesisClass cls, std::vector<double> theta);
  Space space() const override { return Space::binary(); }
  void predict(std::span<const double> x, std::span<double> out) const override;
  const std::vector<double>& theta() const { return theta_; }

 private:
  HypothesisClass cls_;
  std::vector<double> theta_;
};

struct PinnedCoefficient {
  std::size_t index = 0;
  double value = 0.0;
};

// Weighted least squares of the binary label on the class members. The
// normal equations are solved for the minimum-norm coefficients; a pinned
// coefficient is fixed first and the rest solved for.
LinearGroupPredictor l2_regression(const HypothesisClass& cls, const Dataset& ds,
                                   std::optional<PinnedCoefficient> pin = std::nullopt);

struct LogisticOptions {
  int iterations = 200000;
  double learning_rate = 4.0;
  double gradient_tolerance = 1e-8;
  double coefficient_cap = 30.0;
};

// Full-batch gradient ascent on the weighted mean log-likelihood from theta = 0.
LogisticGroupPredictor logistic_regression(const HypothesisClass& cls, const Dataset& ds,
                                           const LogisticOptions& opts = {});

struct SplitWitness {
  Dataset data;
  HypothesisClass cls;
  Matrix f;  // constant 1/2
  Matrix g;  // 1/2 - eps on the y = 0 half, 1/2 + eps on the y = 1 half
};

// Two equal halves with y = 0 and y = 1. The constant 1/2 is calibrated; the
// eps-shifted g separates the halves into different cells.
SplitWitness half_split_witness(double eps);

}  // namespace lowdeg
