#include "lowdeg/boost.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lowdeg/error.h"

namespace lowdeg {

int BoostConfig::iteration_cap(int l) const {
  if (max_iterations) return *max_iterations;
  return int(std::ceil(4.0 * l / (alpha * alpha)));
}

void BoostConfig::validate() const {
  if (!(alpha > 0.0) || alpha > 1.0) throw DomainError("alpha must lie in (0, 1]");
  const double s = step();
  if (!(s > 0.0) || s > 1.0) throw DomainError("eta must lie in (0, 1]");
  if (max_iterations && *max_iterations < 1) throw DomainError("max_iterations must be >= 1");
  if (data_mode.kind == DataMode::Kind::chunked && data_mode.chunks < 1) {
    throw DomainError("chunked mode needs at least one chunk");
  }
}

void apply_update(const Update& u, double group_value, std::span<double> f,
                  std::span<double> scratch) {
  if (group_value == 0.0) return;
  const double scale = double(u.sign) * u.step;
  if (u.coord >= 0) {
    const double w = u.weight.eval_coord(f, std::size_t(u.coord));
    f[u.coord] = clamp01(f[u.coord] + scale * w * group_value);
    return;
  }
  u.weight.eval(f, scratch);
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = clamp01(f[j] + scale * scratch[j] * group_value);
}

ComposedPredictor::ComposedPredictor(Space space, std::size_t num_features, std::vector<double> base,
                                     std::vector<Update> updates, bool simplex_project)
    : space_(space),
      num_features_(num_features),
      base_(std::move(base)),
      updates_(std::move(updates)),
      simplex_project_(simplex_project) {
  if (base_.size() != space_.dim()) throw DomainError("base prediction has wrong length");
  for (double v : base_) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("base prediction outside [0,1]");
  }
}

void ComposedPredictor::predict_raw(std::span<const double> x, std::span<double> out) const {
  if (x.size() != num_features_) {
    throw DomainError("feature vector has " + std::to_string(x.size()) + " entries, expected " +
                      std::to_string(num_features_));
  }
  std::copy(base_.begin(), base_.end(), out.begin());
  std::vector<double> scratch(out.size());
  for (const auto& u : updates_) apply_update(u, u.group(x), out, scratch);
}

void ComposedPredictor::predict(std::span<const double> x, std::span<double> out) const {
  predict_raw(x, out);
  if (simplex_project_) renormalize_to_simplex(out);
}

namespace {

double mean_squared_gap(const Dataset& ds, const Matrix& a, const Matrix& b) {
  std::vector<double> v(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CompensatedSum s;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double d = a(i, j) - b(i, j);
      s.add(d * d);
    }
    v[i] = s.value();
  }
  return expectation(ds, v);
}

// Data the learner sees at one iteration.
struct Slice {
  Dataset data;
  std::vector<std::size_t> rows;  // indices into the full dataset
  Matrix groups;
  Matrix labels;
};

}  // namespace

TrainResult multicalibrate(const Dataset& ds, const HypothesisClass& cls, const WeightFamily& family,
                           const BoostConfig& config) {
  config.validate();
  if (ds.empty()) throw DomainError("training data is empty");
  const Space space = family.space();
  if (space.num_classes != ds.num_classes()) throw DomainError("family/dataset class mismatch");
  const std::size_t dim = space.dim();
  const double eta = config.step();
  const int cap = config.iteration_cap(space.num_classes);

  std::vector<double> base = config.base.value_or(std::vector<double>(dim, 0.5));
  ComposedPredictor predictor(space, ds.num_features(), base, {}, config.simplex_project);

  const Matrix labels = label_matrix(ds, space);
  std::optional<Matrix> truth;
  if (ds.has_fstar()) truth = truth_matrix(ds, space);

  Matrix f(ds.size(), dim);
  for (std::size_t i = 0; i < ds.size(); ++i) std::copy(base.begin(), base.end(), f.row(i).begin());

  // Learner data: the whole sample, or disjoint seeded chunks consumed one per update.
  std::vector<Slice> slices;
  const bool chunked = config.data_mode.kind == DataMode::Kind::chunked;
  if (chunked) {
    const std::size_t t = std::size_t(config.data_mode.chunks);
    if (ds.size() < t) {
      throw DomainError("chunked mode needs at least one record per chunk (" +
                        std::to_string(ds.size()) + " records, " + std::to_string(t) + " chunks)");
    }
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.seed);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < t; ++k) {
      const std::size_t lo = k * ds.size() / t, hi = (k + 1) * ds.size() / t;
      std::vector<std::size_t> rows(order.begin() + lo, order.begin() + hi);
      std::sort(rows.begin(), rows.end());
      Dataset part = ds.select(rows);
      Matrix groups = cls.evaluate(part);
      Matrix lab = label_matrix(part, space);
      slices.push_back({std::move(part), std::move(rows), std::move(groups), std::move(lab)});
    }
  }
  const Matrix full_groups = chunked ? Matrix() : cls.evaluate(ds);

  TrainTrace trace;
  trace.initial_potential_proxy = mean_squared_gap(ds, labels, f);
  if (truth) trace.initial_true_potential = mean_squared_gap(ds, *truth, f);

  const auto effective = family.effective();
  std::vector<double> z, scratch(dim);
  std::size_t applied = 0;
  while (true) {
    const Slice* slice = nullptr;
    if (chunked) {
      if (applied >= slices.size()) {
        throw NonTermination("ran out of fresh chunks after " + std::to_string(applied) + " updates",
                             std::move(trace));
      }
      slice = &slices[applied];
    }
    const Dataset& learn_ds = slice ? slice->data : ds;
    const Matrix& learn_groups = slice ? slice->groups : full_groups;
    const Matrix& learn_labels = slice ? slice->labels : labels;
    Matrix slice_f;
    if (slice) {
      slice_f = Matrix(slice->rows.size(), dim);
      for (std::size_t r = 0; r < slice->rows.size(); ++r) {
        auto src = f.row(slice->rows[r]);
        std::copy(src.begin(), src.end(), slice_f.row(r).begin());
      }
    }
    const Matrix& learn_f = slice ? slice_f : f;
    z.assign(learn_ds.size(), 0.0);

    bool updated = false;
    for (const auto& ew : effective) {
      const auto& w = family[ew.member];
      kernels::residual_signal(w, ew.coord, learn_f, learn_labels, z);
      const auto out = weak_agnostic_learn(learn_groups, learn_ds, z, config.alpha, config.exec);
      if (!out.found) continue;
      if (int(applied) >= cap) {
        throw NonTermination("no convergence within " + std::to_string(cap) + " updates",
                             std::move(trace));
      }
      Update u{w, ew.coord, cls[out.index], out.sign, eta, family.effective_id(ew)};
      for (std::size_t i = 0; i < ds.size(); ++i) {
        apply_update(u, u.group(ds.x(i)), f.row(i), scratch);
      }
      ++applied;
      TraceRecord rec{int(applied), u.weight_id, u.group.name(), u.sign, out.correlation,
                      mean_squared_gap(ds, labels, f), std::nullopt};
      if (truth) rec.true_potential = mean_squared_gap(ds, *truth, f);
      trace.records.push_back(std::move(rec));
      predictor.push(std::move(u));
      updated = true;
      break;
    }
    if (!updated) break;
  }
  return {std::move(predictor), std::move(trace)};
}

}  // namespace lowdeg
