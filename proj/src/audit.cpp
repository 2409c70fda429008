#include "lowdeg/audit.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lowdeg/error.h"
#include "lowdeg/linalg.h"

namespace lowdeg {

namespace {

void check_shape(const Matrix& f, const Dataset& ds, const Space& space) {
  if (ds.empty()) throw DomainError("dataset is empty");
  if (f.rows() != ds.size() || f.cols() != space.dim()) {
    throw DomainError("prediction matrix is " + std::to_string(f.rows()) + "x" +
                      std::to_string(f.cols()) + ", expected " + std::to_string(ds.size()) + "x" +
                      std::to_string(space.dim()));
  }
}

double ipow(double x, int d) {
  double r = 1.0;
  for (int i = 0; i < d; ++i) r *= x;
  return r;
}

// Probability assigned to class `ell`, per record.
std::vector<double> class_column(const Matrix& m, const Space& space, int ell) {
  if (ell < 0 || ell >= space.num_classes) throw DomainError("label out of range");
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (space.scalar()) {
      out[i] = ell == 1 ? m(i, 0) : 1.0 - m(i, 0);
    } else {
      out[i] = m(i, std::size_t(ell));
    }
  }
  return out;
}

std::vector<double> label_indicator(const Dataset& ds, int ell) {
  std::vector<double> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = ds.label(i) == ell ? 1.0 : 0.0;
  return out;
}

std::vector<double> conditional_weights(const Dataset& ds, const GroupFunction& c) {
  std::vector<double> cw(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) cw[i] = ds.weight(i) * c(ds.x(i));
  return cw;
}

double mass_of(std::span<const double> cw, double total) {
  CompensatedSum s;
  for (double v : cw) s.add(v);
  return s.value() / total;
}

double effective_size(const Dataset& ds) {
  CompensatedSum s, s2;
  for (double w : ds.weights()) {
    s.add(w);
    s2.add(w * w);
  }
  return s.value() * s.value() / s2.value();
}

// Standard deviation over D of the per-record values.
double population_sd(const Dataset& ds, std::span<const double> v) {
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
  const double m = expectation(ds, v);
  return std::sqrt(std::max(0.0, expectation(ds, sq) - m * m));
}

std::vector<int> labels_of(const Space& space) {
  if (space.scalar()) return {1};
  std::vector<int> out(std::size_t(space.num_classes));
  for (int i = 0; i < space.num_classes; ++i) out[std::size_t(i)] = i;
  return out;
}

int entry_label(const WeightFamily& family, const EffectiveWeight& ew) {
  const Space& space = family.space();
  if (ew.coord >= 0) return space.label_of(std::size_t(ew.coord));
  const auto& kind = family[ew.member].kind();
  if (const auto* c = std::get_if<ConstantWeight>(&kind)) return space.label_of(std::size_t(c->coord));
  if (const auto* m = std::get_if<MonomialWeight>(&kind)) return space.label_of(std::size_t(m->coord));
  if (const auto* g = std::get_if<GridWeight>(&kind)) return space.label_of(std::size_t(g->coord));
  return -1;
}

}  // namespace

double violation(const Matrix& f, const GroupFunction& c, const WeightFunction& w,
                 const Dataset& ds, const Space& space, int coord) {
  check_shape(f, ds, space);
  const Matrix y = label_matrix(ds, space);
  std::vector<double> z(ds.size());
  kernels::residual_signal(w, coord, f, y, z);
  Matrix groups(1, ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) groups(0, i) = c(ds.x(i));
  double out = 0.0;
  kernels::group_sums_serial(ds.weights(), groups, z, {&out, 1});
  return out / ds.total_weight();
}

double violation(const Matrix& f, const GroupFunction& c, const WeightCallable& w,
                 const Dataset& ds, const Space& space) {
  check_shape(f, ds, space);
  const Matrix y = label_matrix(ds, space);
  std::vector<double> wv(space.dim());
  CompensatedSum s;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double cv = c(ds.x(i));
    if (cv == 0.0) continue;
    const auto fi = f.row(i);
    w(fi, wv);
    CompensatedSum inner;
    for (std::size_t j = 0; j < wv.size(); ++j) inner.add(wv[j] * (y(i, j) - fi[j]));
    s.add(ds.weight(i) * cv * inner.value());
  }
  return s.value() / ds.total_weight();
}

std::vector<AuditEntry> AuditReport::sorted_by_magnitude() const {
  std::vector<AuditEntry> out = entries;
  std::stable_sort(out.begin(), out.end(), [](const AuditEntry& a, const AuditEntry& b) {
    return std::abs(a.violation) > std::abs(b.violation);
  });
  return out;
}

AuditReport audit(const Matrix& f, const HypothesisClass& cls, const WeightFamily& family,
                  const Dataset& ds, const AuditOptions& opts) {
  const Space& space = family.space();
  check_shape(f, ds, space);
  if (cls.size() == 0) throw DomainError("hypothesis class is empty");
  if (family.size() == 0) throw DomainError("weight family is empty");
  const Matrix y = opts.fstar_as_labels ? truth_matrix(ds, space) : label_matrix(ds, space);
  const Matrix groups = cls.evaluate(ds);
  const double total = ds.total_weight();
  const auto effective = family.effective();
  const Matrix v =
      kernels::violation_matrix(opts.exec, family, effective, ds.weights(), total, groups, f, y);

  std::vector<double> ones(ds.size(), 1.0), masses(cls.size());
  kernels::group_sums_serial(ds.weights(), groups, ones, masses);
  for (double& m : masses) m /= total;

  AuditReport report;
  report.entries.reserve(effective.size() * cls.size());
  for (std::size_t e = 0; e < effective.size(); ++e) {
    const std::string id = family.effective_id(effective[e]);
    const int label = entry_label(family, effective[e]);
    for (std::size_t g = 0; g < cls.size(); ++g) {
      const double val = v(e, g);
      if (std::abs(val) > report.max_abs) {
        report.max_abs = std::abs(val);
        report.witness = report.entries.size();
      }
      report.entries.push_back({cls[g].name(), id, label, val, masses[g], g, e});
    }
  }
  return report;
}

AuditReport audit(const Predictor& f, const HypothesisClass& cls, const WeightFamily& family,
                  const Dataset& ds, const AuditOptions& opts) {
  return audit(evaluate(f, ds), cls, family, ds, opts);
}

bool SandwichReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const SandwichEntry& e) { return e.all_pass(); });
}

SandwichReport sandwich_report(const Matrix& f, const Dataset& ds, const Space& space,
                               const HypothesisClass& cls, int k, double alpha,
                               const DiagnosticOptions& opts) {
  check_shape(f, ds, space);
  if (!ds.has_fstar()) throw DomainError("sandwich report needs fstar columns");
  if (k < 1) throw DomainError("k must be >= 1");
  if (!(alpha >= 0.0)) throw DomainError("alpha must be non-negative");
  const Matrix truth = truth_matrix(ds, space);
  const double total = ds.total_weight();
  const bool sampled = opts.mode == EvalMode::sampled;
  const double root_n = std::sqrt(effective_size(ds));
  const double tol = opts.tolerance;

  SandwichReport report;
  report.alpha = alpha;
  report.k = k;
  for (const auto& c : cls.members()) {
    std::vector<double> cw = conditional_weights(ds, c);
    const double mass = mass_of(cw, total);
    if (!(mass >= opts.min_mass) || !(mass > 0.0)) {
      report.skipped.push_back("group '" + c.name() + "' skipped: mass " + std::to_string(mass) +
                               " below floor " + std::to_string(opts.min_mass));
      continue;
    }
    const std::vector<double> cvals = [&] {
      std::vector<double> out(ds.size());
      for (std::size_t i = 0; i < ds.size(); ++i) out[i] = c(ds.x(i));
      return out;
    }();
    const ConditionalView view(std::move(cw), total, 0.0, c.name());
    const double alpha_c = alpha / mass;
    for (int ell : labels_of(space)) {
      const auto fc = class_column(f, space, ell);
      const auto sc = class_column(truth, space, ell);
      const auto yc = label_indicator(ds, ell);
      const double es = view.mean(sc);
      double noise = 0.0;  // max_j sd(c f^j (y - f*)) / mu_c, j < d
      for (int d = 1; d <= k; ++d) {
        SandwichEntry e;
        e.group = c.name();
        e.label = ell;
        e.degree = d;
        e.mass = mass;
        e.alpha_c = alpha_c;
        e.moment_f = view.mean_of([&](std::size_t i) { return ipow(fc[i], d); });
        e.moment_star = view.mean_of([&](std::size_t i) { return ipow(sc[i], d); });
        e.cross = view.mean_of([&](std::size_t i) { return ipow(fc[i], d - 1) * sc[i]; });
        e.product = es * view.mean_of([&](std::size_t i) { return ipow(fc[i], d - 1); });
        if (sampled) {
          std::vector<double> t(ds.size());
          for (std::size_t i = 0; i < ds.size(); ++i) {
            t[i] = cvals[i] * ipow(fc[i], d - 1) * (yc[i] - sc[i]);
          }
          noise = std::max(noise, population_sd(ds, t) / mass);
          e.allowance = 3.0 * noise / root_n;
        }
        const double a = alpha_c + e.allowance;
        e.sw1_upper = e.moment_f <= d * a + e.moment_star + tol;
        e.sw1_lower = e.moment_f >= e.product - a - tol;
        e.sw2_upper = e.cross <= (d + 1) * a + e.moment_star + tol;
        e.sw2_lower = e.cross >= e.product - 2.0 * a - tol;
        e.level_j = std::abs(e.cross - e.moment_f) <= a + tol;
        report.entries.push_back(std::move(e));
      }
    }
  }
  return report;
}

namespace {

// Shared body of the TPR variants. `fv` is the prediction mass on the event,
// `sv` its ground truth (empty when absent), `event` the label indicator.
TprReport tpr_impl(const Dataset& ds, const GroupFunction& c, std::span<const double> fv,
                   std::span<const double> sv, std::span<const double> event, int d,
                   std::optional<double> alpha, double lower_coef, double upper_coef,
                   double tolerance) {
  const double total = ds.total_weight();
  std::vector<double> cw = conditional_weights(ds, c);
  std::vector<double> ew(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) ew[i] = cw[i] * event[i];
  const ConditionalView positives(std::move(ew), total, kDefaultMassFloor,
                                  c.name() + " with positive label");
  const ConditionalView view(std::move(cw), total, kDefaultMassFloor, c.name());

  TprReport out;
  out.mass = view.mass();
  out.rate = positives.mean_of([&](std::size_t i) { return ipow(fv[i], d); });
  if (sv.empty()) return out;
  const double es = view.mean(sv);
  if (!(es > 0.0)) throw InsufficientMass("ground truth has no mass on the event in '" + c.name() + "'", es);
  out.identity = view.mean_of([&](std::size_t i) { return ipow(fv[i], d) * sv[i]; }) / es;
  if (!alpha) return out;
  const double scale = *alpha / (es * out.mass);
  const double upper_ref = view.mean_of([&](std::size_t i) { return ipow(sv[i], d + 1); }) / es;
  out.lower = view.mean_of([&](std::size_t i) { return ipow(fv[i], d); }) - lower_coef * scale;
  out.upper = upper_ref + upper_coef * scale;
  out.pass = *out.identity >= *out.lower - tolerance && *out.identity <= *out.upper + tolerance;
  return out;
}

}  // namespace

TprReport tpr(const Matrix& f, const Dataset& ds, const Space& space, int ell,
              const GroupFunction& c, std::optional<double> alpha, double tolerance) {
  check_shape(f, ds, space);
  const auto fv = class_column(f, space, ell);
  std::vector<double> sv;
  if (ds.has_fstar()) sv = class_column(truth_matrix(ds, space), space, ell);
  return tpr_impl(ds, c, fv, sv, label_indicator(ds, ell), 1, alpha, 2.0, 3.0, tolerance);
}

TprReport higher_moment_tpr(const Matrix& f, const Dataset& ds, const Space& space, int ell,
                            const GroupFunction& c, int d, std::optional<double> alpha,
                            double tolerance) {
  check_shape(f, ds, space);
  if (d < 1) throw DomainError("moment degree must be >= 1");
  const auto fv = class_column(f, space, ell);
  std::vector<double> sv;
  if (ds.has_fstar()) sv = class_column(truth_matrix(ds, space), space, ell);
  return tpr_impl(ds, c, fv, sv, label_indicator(ds, ell), d, alpha, 2.0, double(d + 1), tolerance);
}

TprReport set_tpr(const Matrix& f, const Dataset& ds, const Space& space, const std::set<int>& labels,
                  const GroupFunction& c, std::optional<double> alpha, double tolerance) {
  check_shape(f, ds, space);
  if (labels.empty()) throw DomainError("label set is empty");
  for (int ell : labels) {
    if (ell < 0 || ell >= space.num_classes) throw DomainError("label out of range");
  }
  std::vector<double> fv(ds.size(), 0.0), sv, event(ds.size(), 0.0);
  std::optional<Matrix> truth;
  if (ds.has_fstar()) {
    truth = truth_matrix(ds, space);
    sv.assign(ds.size(), 0.0);
  }
  for (int ell : labels) {
    const auto col = class_column(f, space, ell);
    for (std::size_t i = 0; i < ds.size(); ++i) fv[i] += col[i];
    if (truth) {
      const auto s = class_column(*truth, space, ell);
      for (std::size_t i = 0; i < ds.size(); ++i) sv[i] += s[i];
    }
  }
  for (std::size_t i = 0; i < ds.size(); ++i) event[i] = labels.count(ds.label(i)) ? 1.0 : 0.0;
  const double m = double(labels.size());
  const double l = double(space.num_classes);
  return tpr_impl(ds, c, fv, sv, event, 1, alpha, m * m + m, 2.0 * l * m * m, tolerance);
}

ConfusionReport confusion(const Matrix& f, const GroupFunction& c, const Dataset& ds,
                          const Space& space, double alpha, const DiagnosticOptions& opts) {
  check_shape(f, ds, space);
  if (!ds.has_fstar()) throw DomainError("confusion report needs fstar columns");
  const Matrix truth = truth_matrix(ds, space);
  const ConditionalView view(ds, c, std::max(opts.min_mass, kDefaultMassFloor));
  const std::size_t l = std::size_t(space.num_classes);
  std::vector<std::vector<double>> fc(l), sc(l);
  for (std::size_t j = 0; j < l; ++j) {
    fc[j] = class_column(f, space, int(j));
    sc[j] = class_column(truth, space, int(j));
  }
  ConfusionReport out;
  out.group = c.name();
  out.mass = view.mass();
  out.b_star_f = Matrix(l, l);
  out.b_ff = Matrix(l, l);
  out.b_star_star = Matrix(l, l);
  for (std::size_t a = 0; a < l; ++a) {
    for (std::size_t b = 0; b < l; ++b) {
      out.b_star_f(a, b) = view.mean_of([&](std::size_t i) { return sc[a][i] * fc[b][i]; });
      out.b_ff(a, b) = view.mean_of([&](std::size_t i) { return fc[a][i] * fc[b][i]; });
      out.b_star_star(a, b) = view.mean_of([&](std::size_t i) { return sc[a][i] * sc[b][i]; });
    }
  }
  Matrix gap(l, l);
  for (std::size_t a = 0; a < l; ++a) {
    for (std::size_t b = 0; b < l; ++b) {
      out.max_norm_gap = std::max(out.max_norm_gap, std::abs(out.b_star_f(a, b) - out.b_ff(a, b)));
      gap(a, b) = out.b_star_star(a, b) - out.b_ff(a, b) + (a == b ? 2.0 * double(l) * alpha : 0.0);
    }
  }
  // The moment matrices are symmetric up to summation rounding.
  for (std::size_t a = 0; a < l; ++a) {
    for (std::size_t b = a + 1; b < l; ++b) gap(a, b) = gap(b, a) = 0.5 * (gap(a, b) + gap(b, a));
  }
  out.min_eig_gap = linalg::symmetric_eigenvalues(gap).front();

  double allowance = 0.0;
  if (opts.mode == EvalMode::sampled) {
    // Label noise in the max-norm entries: sd(c f_b (y_a - f*_a)) / mu_c.
    const double root_n = std::sqrt(effective_size(ds));
    std::vector<double> t(ds.size());
    for (std::size_t a = 0; a < l; ++a) {
      const auto ya = label_indicator(ds, int(a));
      for (std::size_t b = 0; b < l; ++b) {
        for (std::size_t i = 0; i < ds.size(); ++i) {
          t[i] = c(ds.x(i)) * fc[b][i] * (ya[i] - sc[a][i]);
        }
        allowance = std::max(allowance, 3.0 * population_sd(ds, t) / out.mass / root_n);
      }
    }
  }
  out.max_norm_pass = out.max_norm_gap <= alpha / out.mass + opts.tolerance + allowance;
  out.psd_pass = out.min_eig_gap >= -opts.tolerance - allowance;
  return out;
}

CovarianceReport covariance_report(const Matrix& f, int ell, const GroupFunction& c,
                                   const Dataset& ds, const Space& space, double alpha,
                                   const DiagnosticOptions& opts) {
  check_shape(f, ds, space);
  if (!ds.has_fstar()) throw DomainError("covariance report needs fstar columns");
  const auto fv = class_column(f, space, ell);
  const auto sv = class_column(truth_matrix(ds, space), space, ell);
  const auto yv = label_indicator(ds, ell);
  const ConditionalView view(ds, c, std::max(opts.min_mass, kDefaultMassFloor));
  auto cov = [&](std::span<const double> a, std::span<const double> b) {
    const double ma = view.mean(a), mb = view.mean(b);
    return view.mean_of([&](std::size_t i) { return (a[i] - ma) * (b[i] - mb); });
  };

  CovarianceReport out;
  out.group = c.name();
  out.label = ell;
  out.mass = view.mass();
  out.alpha_c = alpha / out.mass;
  out.var_f = cov(fv, fv);
  out.var_star = cov(sv, sv);
  out.cov_f_y = cov(fv, yv);
  out.cov_star_y = cov(sv, yv);
  out.cov_f_star = cov(fv, sv);

  double cf = out.cov_f_star, cs = out.var_star;
  if (opts.mode == EvalMode::sampled) {
    cf = out.cov_f_y;
    cs = out.cov_star_y;
    const double root_n = std::sqrt(effective_size(ds));
    const double mf = view.mean(fv), ms = view.mean(sv);
    std::vector<double> t1(ds.size()), t2(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double cv = c(ds.x(i));
      t1[i] = cv * (fv[i] - mf) * (yv[i] - sv[i]);
      t2[i] = cv * (sv[i] - ms) * (yv[i] - sv[i]);
    }
    out.allowance = 3.0 * std::max(population_sd(ds, t1), population_sd(ds, t2)) / out.mass / root_n;
  }
  const double a = out.alpha_c + out.allowance;
  const double tol = opts.tolerance;
  out.lower = out.var_f - 2.0 * a <= cf + tol;
  out.upper = cf <= cs + 6.0 * a + tol;
  out.variance = out.var_f <= out.var_star + 4.0 * a + tol;
  out.cov_close = std::abs(cf - out.var_f) <= 2.0 * a + tol;
  return out;
}

ExperimentMetrics experiment_metrics(const Matrix& f, const HypothesisClass& cls,
                                     const Dataset& ds) {
  const Space space = Space::binary();
  check_shape(f, ds, space);
  if (ds.num_classes() != 2) throw DomainError("experiment metrics need a binary dataset");
  if (!ds.has_fstar()) throw DomainError("experiment metrics need fstar columns");
  const Matrix truth = truth_matrix(ds, space);
  const double total = ds.total_weight();
  ExperimentMetrics out;
  out.multiaccuracy_error = -std::numeric_limits<double>::infinity();
  out.excess_variance = -std::numeric_limits<double>::infinity();
  std::vector<double> diff(ds.size()), fv(ds.size()), sv(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    fv[i] = f(i, 0);
    sv[i] = truth(i, 0);
    diff[i] = fv[i] - sv[i];
  }
  for (const auto& c : cls.members()) {
    std::vector<double> cw = conditional_weights(ds, c);
    CompensatedSum in, outside;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double cv = c(ds.x(i));
      in.add(ds.weight(i) * cv * diff[i]);
      outside.add(ds.weight(i) * (1.0 - cv) * diff[i]);
    }
    out.multiaccuracy_error =
        std::max(out.multiaccuracy_error, std::abs(in.value() - outside.value()) / total);
    const double mass = mass_of(cw, total);
    if (!(mass > 0.0)) continue;
    const ConditionalView view(std::move(cw), total, 0.0, c.name());
    auto var = [&](std::span<const double> v) {
      const double m = view.mean(v);
      return view.mean_of([&](std::size_t i) { return (v[i] - m) * (v[i] - m); });
    };
    out.excess_variance = std::max(out.excess_variance, (var(fv) - var(sv)) * mass);
  }
  if (std::isinf(out.multiaccuracy_error)) throw DomainError("hypothesis class is empty");
  return out;
}

RobustnessReport robustness_gap(const Matrix& f, const Matrix& g, const WeightFamily& family,
                                const HypothesisClass& cls, const Dataset& ds, Exec exec) {
  check_shape(f, ds, family.space());
  check_shape(g, ds, family.space());
  std::vector<double> dist(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CompensatedSum s;
    for (std::size_t j = 0; j < f.cols(); ++j) s.add(std::abs(f(i, j) - g(i, j)));
    dist[i] = s.value();
  }
  RobustnessReport out;
  out.delta = expectation(ds, dist);
  AuditOptions opts;
  opts.exec = exec;
  out.audit_f = audit(f, cls, family, ds, opts).max_abs;
  out.audit_g = audit(g, cls, family, ds, opts).max_abs;
  out.lipschitz = family.lipschitz_bound();
  out.bounded = std::isfinite(out.lipschitz);
  out.bound = out.bounded ? out.audit_f + (2.0 * out.lipschitz + 1.0) * out.delta
                          : std::numeric_limits<double>::infinity();
  out.pass = out.audit_g <= out.bound + 1e-9;
  return out;
}

BasisInference basis_inference(const Matrix& f, const GroupFunction& c, const WeightFamily& interval,
                               const std::function<std::vector<double>(std::span<const double>)>& u,
                               const Dataset& ds) {
  const Space& space = interval.space();
  check_shape(f, ds, space);
  if (interval.desc().kind != FamilyKind::interval && interval.desc().kind != FamilyKind::lipschitz) {
    throw DomainError("basis inference needs an interval basis");
  }
  const CellApproximation approx = approximate_on_cells(interval, u);
  const HypothesisClass single("single", {c});
  const AuditReport rep = audit(f, single, interval, ds);

  BasisInference out;
  out.beta = rep.max_abs;
  out.mass = approx.total_mass;
  out.eta = double(space.dim()) * interval.desc().delta / 2.0;
  const Matrix y = label_matrix(ds, space);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.cols(); ++j) s += std::abs(y(i, j) - f(i, j));
    out.residual_scale = std::max(out.residual_scale, s);
  }
  out.violation_u = violation(
      f, c, [&](std::span<const double> p, std::span<double> o) {
        const auto v = u(p);
        std::copy(v.begin(), v.end(), o.begin());
      },
      ds, space);
  out.violation_v = violation(
      f, c, [&](std::span<const double> p, std::span<double> o) {
        const auto v = eval_approximation(interval, approx, p);
        std::copy(v.begin(), v.end(), o.begin());
      },
      ds, space);
  out.bound = out.beta * out.mass + out.residual_scale * out.eta;
  out.pass = std::abs(out.violation_u) <= out.bound + 1e-9;
  return out;
}

}  // namespace lowdeg
