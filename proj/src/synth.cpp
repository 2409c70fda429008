#include "lowdeg/synth.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "lowdeg/error.h"
#include "lowdeg/linalg.h"

namespace lowdeg {

double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

namespace {

std::vector<int> pattern_of(std::span<const double> x, const std::vector<int>& columns) {
  std::vector<int> p(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) p[j] = x[std::size_t(columns[j])] >= 0.5 ? 1 : 0;
  return p;
}

void check_probability(const std::vector<double>& p, int l, const std::string& where) {
  if (int(p.size()) != l) throw DomainError(where + ": probability vector needs " + std::to_string(l) + " entries");
  CompensatedSum s;
  for (double v : p) {
    if (!(v >= 0.0) || v > 1.0) throw DomainError(where + ": probabilities must lie in [0,1]");
    s.add(v);
  }
  if (std::abs(s.value() - 1.0) > 1e-9) throw DomainError(where + ": probabilities must sum to 1");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double linear_score(const HypothesisClass& cls, const std::vector<double>& coef,
                    std::span<const double> x) {
  CompensatedSum s;
  for (std::size_t i = 0; i < cls.size(); ++i) s.add(coef[i] * cls[i](x));
  return s.value();
}

}  // namespace

std::vector<double> FstarRule::operator()(std::span<const double> x, int l) const {
  if (kind == Kind::table) {
    const auto p = pattern_of(x, columns);
    for (const auto& [pat, probs] : table) {
      if (pat == p) return probs;
    }
    throw DomainError("fstar table has no entry for a feature pattern");
  }
  std::vector<double> z(std::size_t(l), 0.0);
  for (int c = 0; c < l; ++c) {
    CompensatedSum s;
    if (!bias.empty()) s.add(bias[std::size_t(c)]);
    for (std::size_t j = 0; j < coef.size(); ++j) s.add(coef[j][std::size_t(c)] * x[j]);
    for (const auto& [cols, w] : interactions) {
      double prod = 1.0;
      for (int j : cols) prod *= x[std::size_t(j)];
      s.add(w[std::size_t(c)] * prod);
    }
    z[std::size_t(c)] = s.value();
  }
  const double mx = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) total += (v = std::exp(v - mx));
  for (double& v : z) v /= total;
  return z;
}

void SynthSpec::validate() const {
  if (l < 2) throw DomainError("l must be >= 2");
  if (n < 1) throw DomainError("n must be >= 1");
  if (features.empty()) throw DomainError("spec needs at least one feature column");
  const int d = int(features.size());
  for (double p : features) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("feature marginals must lie in [0,1]");
  }
  auto check_column = [&](int c, const std::string& where) {
    if (c < 0 || c >= d) throw DomainError(where + ": column " + std::to_string(c) + " out of range");
  };
  for (int c : groups) check_column(c, "groups");
  const auto& r = fstar_rule;
  if (r.kind == FstarRule::Kind::table) {
    if (r.columns.size() > 20) throw DomainError("fstar table over too many columns");
    for (int c : r.columns) check_column(c, "fstar table");
    const std::size_t patterns = std::size_t(1) << r.columns.size();
    std::map<std::vector<int>, int> seen;
    for (const auto& [pat, probs] : r.table) {
      if (pat.size() != r.columns.size()) throw DomainError("fstar table pattern has wrong length");
      for (int v : pat) {
        if (v != 0 && v != 1) throw DomainError("fstar table patterns must be 0/1");
      }
      if (++seen[pat] > 1) throw DomainError("fstar table repeats a pattern");
      check_probability(probs, l, "fstar table");
    }
    if (seen.size() != patterns) throw DomainError("fstar table does not cover every pattern");
  } else {
    if (!r.bias.empty() && int(r.bias.size()) != l) throw DomainError("softmax bias needs l entries");
    if (!r.coef.empty() && int(r.coef.size()) != d) {
      throw DomainError("softmax coef needs one row per feature");
    }
    for (const auto& row : r.coef) {
      if (int(row.size()) != l) throw DomainError("softmax coef rows need l entries");
    }
    for (const auto& [cols, w] : r.interactions) {
      for (int c : cols) check_column(c, "softmax interaction");
      if (int(w.size()) != l) throw DomainError("softmax interaction needs l coefficients");
    }
  }
}

Dataset generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t d = spec.features.size();
  Dataset ds(spec.l, d);
  std::mt19937_64 rng(spec.seed);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x[j] = uniform01(rng) < spec.features[j] ? 1.0 : 0.0;
    const auto fs = spec.fstar_rule(x, spec.l);
    if (spec.label_mode == LabelMode::sampled) {
      const double u = uniform01(rng);
      int y = spec.l - 1;
      double acc = 0.0;
      for (int c = 0; c < spec.l; ++c) {
        acc += fs[std::size_t(c)];
        if (u < acc) {
          y = c;
          break;
        }
      }
      ds.add(x, y, 1.0, fs);
    } else {
      for (int c = 0; c < spec.l; ++c) {
        if (fs[std::size_t(c)] > 0.0) ds.add(x, c, fs[std::size_t(c)], fs);
      }
    }
  }
  return ds;
}

HypothesisClass spec_class(const SynthSpec& spec, const Dataset& ds) {
  return indicator_class_from_columns(ds, spec.groups, spec.complements);
}

Counterexample negative_covariance_family(double eps) {
  if (!(eps > 0.0 && eps < 0.25)) throw DomainError("eps must lie in (0, 1/4)");
  Dataset ds(2, 2);
  const double pts[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const double weights[4] = {0.5 - eps, 0.5 - eps, eps, eps};
  for (int i = 0; i < 4; ++i) {
    const int y = int(pts[i][0]) ^ int(pts[i][1]);
    const auto fs = one_hot(y, 2);
    ds.add(pts[i], y, weights[i], fs);
  }
  HypothesisClass cls("edges", {GroupFunction::complement(0), GroupFunction::column(0),
                                GroupFunction::complement(1), GroupFunction::column(1)});
  return {std::move(ds), std::move(cls)};
}

Counterexample counterexample_dataset() { return negative_covariance_family(1.0 / 6.0); }

LinearGroupPredictor::LinearGroupPredictor(HypothesisClass cls, std::vector<double> coefficients)
    : cls_(std::move(cls)), coef_(std::move(coefficients)) {
  if (coef_.size() != cls_.size()) throw DomainError("one coefficient per class member expected");
}

void LinearGroupPredictor::predict(std::span<const double> x, std::span<double> out) const {
  out[0] = clamp01(linear_score(cls_, coef_, x));
}

LogisticGroupPredictor::LogisticGroupPredictor(HypothesisClass cls, std::vector<double> theta)
    : cls_(std::move(cls)), theta_(std::move(theta)) {
  if (theta_.size() != cls_.size()) throw DomainError("one coefficient per class member expected");
}

void LogisticGroupPredictor::predict(std::span<const double> x, std::span<double> out) const {
  out[0] = sigmoid(linear_score(cls_, theta_, x));
}

LinearGroupPredictor l2_regression(const HypothesisClass& cls, const Dataset& ds,
                                   std::optional<PinnedCoefficient> pin) {
  if (ds.num_classes() != 2) throw DomainError("l2 regression needs a binary dataset");
  if (cls.size() == 0) throw DomainError("hypothesis class is empty");
  const double total = ds.total_weight();
  const Matrix c = cls.evaluate(ds);
  const std::size_t m = cls.size();
  Matrix gram(m, m);
  std::vector<double> rhs(m);
  for (std::size_t a = 0; a < m; ++a) {
    CompensatedSum sb;
    for (std::size_t i = 0; i < ds.size(); ++i) sb.add(ds.weight(i) * c(a, i) * (ds.label(i) == 1 ? 1.0 : 0.0));
    rhs[a] = sb.value() / total;
    for (std::size_t b = 0; b < m; ++b) {
      CompensatedSum s;
      for (std::size_t i = 0; i < ds.size(); ++i) s.add(ds.weight(i) * c(a, i) * c(b, i));
      gram(a, b) = s.value() / total;
    }
  }
  if (!pin) return LinearGroupPredictor(cls, linalg::min_norm_solve(gram, rhs).x);

  if (pin->index >= m) throw DomainError("pinned coefficient index out of range");
  std::vector<std::size_t> free;
  for (std::size_t a = 0; a < m; ++a) {
    if (a != pin->index) free.push_back(a);
  }
  std::vector<double> coef(m, 0.0);
  coef[pin->index] = pin->value;
  if (!free.empty()) {
    Matrix reduced(free.size(), free.size());
    std::vector<double> b(free.size());
    for (std::size_t r = 0; r < free.size(); ++r) {
      b[r] = rhs[free[r]] - gram(free[r], pin->index) * pin->value;
      for (std::size_t s = 0; s < free.size(); ++s) reduced(r, s) = gram(free[r], free[s]);
    }
    const auto sol = linalg::min_norm_solve(reduced, b);
    for (std::size_t r = 0; r < free.size(); ++r) coef[free[r]] = sol.x[r];
  }
  return LinearGroupPredictor(cls, std::move(coef));
}

LogisticGroupPredictor logistic_regression(const HypothesisClass& cls, const Dataset& ds,
                                           const LogisticOptions& opts) {
  if (ds.num_classes() != 2) throw DomainError("logistic regression needs a binary dataset");
  if (cls.size() == 0) throw DomainError("hypothesis class is empty");
  if (!(opts.learning_rate > 0.0) || opts.iterations < 1) throw DomainError("invalid logistic options");
  const double total = ds.total_weight();
  const Matrix c = cls.evaluate(ds);
  const std::size_t m = cls.size();
  std::vector<double> theta(m, 0.0), grad(m);
  double norm = 0.0;
  for (int it = 0; it < opts.iterations; ++it) {
    std::vector<CompensatedSum> g(m);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      CompensatedSum z;
      for (std::size_t a = 0; a < m; ++a) z.add(theta[a] * c(a, i));
      const double r = (ds.label(i) == 1 ? 1.0 : 0.0) - sigmoid(z.value());
      for (std::size_t a = 0; a < m; ++a) g[a].add(ds.weight(i) * c(a, i) * r);
    }
    norm = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      grad[a] = g[a].value() / total;
      norm += grad[a] * grad[a];
    }
    norm = std::sqrt(norm);
    if (norm <= opts.gradient_tolerance) return LogisticGroupPredictor(cls, std::move(theta));
    for (std::size_t a = 0; a < m; ++a) {
      theta[a] += opts.learning_rate * grad[a];
      if (std::abs(theta[a]) > opts.coefficient_cap) {
        throw DomainError("logistic coefficient exceeded cap " + std::to_string(opts.coefficient_cap) +
                          " (separable data?)");
      }
    }
  }
  throw ConvergenceError("logistic regression did not converge; gradient norm " + std::to_string(norm));
}

SplitWitness half_split_witness(double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw DomainError("eps must lie in (0, 1/2)");
  SplitWitness w{Dataset(2, 1), HypothesisClass("all", {GroupFunction::all()}), Matrix(2, 1, 0.5),
                 Matrix(2, 1)};
  const double x0[1] = {0.0}, x1[1] = {1.0};
  w.data.add(x0, 0, 0.5, one_hot(0, 2));
  w.data.add(x1, 1, 0.5, one_hot(1, 2));
  w.g(0, 0) = 0.5 - eps;
  w.g(1, 0) = 0.5 + eps;
  return w;
}

}  // namespace lowdeg
