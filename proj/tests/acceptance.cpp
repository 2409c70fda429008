// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lowdeg/audit.h"
#include "lowdeg/boost.h"
#include "lowdeg/cli.h"
#include "lowdeg/experiment.h"
#include "lowdeg/json_io.h"
#include "lowdeg/synth.h"

using namespace lowdeg;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SynthSpec spec_file(const std::string& name) {
  return io::load_spec(std::string(LOWDEG_SOURCE_DIR) + "/specs/" + name);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = uniform01(rng);
  return m;
}

// Predictors that are functions of x, so that repeated records share values.
using XFn = std::function<std::vector<double>(std::span<const double>, std::span<const double>)>;

Matrix tabulate(const Dataset& ds, const Space& space, const XFn& fn) {
  Matrix m(ds.size(), space.dim());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto p = fn(ds.x(i), ds.fstar(i));
    if (space.encoding == Encoding::binary) {
      m(i, 0) = p[1];
    } else {
      for (std::size_t j = 0; j < p.size(); ++j) m(i, j) = p[j];
    }
  }
  return m;
}

std::vector<double> sharpen(std::span<const double> fs, double power) {
  std::vector<double> p(fs.begin(), fs.end());
  double s = 0;
  for (auto& v : p) s += (v = std::pow(v, power));
  for (auto& v : p) v /= s;
  return p;
}

std::vector<double> hashed_logits(std::span<const double> x, int l, std::uint64_t salt) {
  std::uint64_t h = salt;
  for (double v : x) h = h * 1000003u + std::uint64_t(v > 0.5);
  std::mt19937_64 rng(h);
  std::vector<double> p(l);
  double s = 0;
  for (auto& v : p) s += (v = std::exp(3.0 * (uniform01(rng) - 0.5)));
  for (auto& v : p) v /= s;
  return p;
}

// ---------------------------------------------------------------------------

void counterexample_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  const char* argv[] = {"lowdeg", "counterexample", "--format", "json"};
  std::ostringstream out, err;
  const int code = cli::run(4, argv, out, err);
  const double secs = seconds_since(t0);
  if (code != 0) {
    report(1, "counterexample exactness", false, "command failed: " + err.str());
    return;
  }
  const auto j = io::parse(out.str(), "counterexample");
  double fit_err = 0, logit_err = 0;
  for (const auto& p : j["points"]) {
    const double want = p["x"][1].get<double>() == 1.0 ? 2.0 / 3 : 1.0 / 3;
    fit_err = std::max(fit_err, std::abs(p["l2"].get<double>() - want));
    logit_err = std::max(logit_err, std::abs(p["logistic"].get<double>() - p["l2"].get<double>()));
  }
  const auto& c = j["coefficients"];
  const double coef_err = std::max({std::abs(c["x0=0"].get<double>() - 0.5),
                                    std::abs(c["x0=1"].get<double>() - 0.5),
                                    std::abs(c["x1=1"].get<double>() - 1.0 / 6),
                                    std::abs(c["x1=0"].get<double>() + 1.0 / 6)});
  const double cov_err = std::abs(j["covariance"].get<double>() + 1.0 / 12);
  const bool pass = fit_err <= 1e-9 && coef_err <= 1e-9 && cov_err <= 1e-9 && logit_err <= 1e-3 &&
                    secs < 1.0;
  report(1, "counterexample exactness", pass,
         fmt("fit err %.2e, coef err %.2e, cov err %.2e, logistic err %.2e, %.3fs", fit_err,
             coef_err, cov_err, logit_err, secs));
}

void termination_and_gate() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = spec_file("planted_binary.json");
  const auto ds = generate(spec);
  const auto cls = spec_class(spec, ds);
  BoostConfig cfg;
  cfg.alpha = 0.05;
  cfg.eta = cfg.alpha / 2;
  const auto fam = monomial_family(Space::binary(), 2);
  const auto res = multicalibrate(ds, cls, fam, cfg);
  const double audit_max = audit(res.predictor, cls, fam, ds).max_abs;
  const double secs = seconds_since(t0);
  const auto iters = res.trace.records.size();
  const auto bound = std::size_t(std::ceil(2 / (cfg.alpha * cfg.alpha)));
  const bool pass = ds.size() == 5000 && cls.size() == 8 && iters <= bound &&
                    audit_max <= cfg.alpha && secs < 10.0;
  report(2, "termination and audit gate", pass,
         fmt("n=%zu |C|=%zu, %zu iterations (bound %zu), audit %.6f <= %.2f, %.2fs", ds.size(),
             cls.size(), iters, bound, audit_max, cfg.alpha, secs));
}

void moment_sandwich() {
  struct Setup {
    SynthSpec spec;
    Space space;
  };
  auto binary = spec_file("planted_binary.json");
  binary.label_mode = LabelMode::exact;
  binary.n = 2000;
  auto three = spec_file("planted_l3.json");
  three.n = 2000;
  const std::vector<Setup> setups = {{binary, Space::binary()},
                                     {binary, Space::one_hot(2)},
                                     {three, Space::one_hot(3)}};

  std::size_t exact_runs = 0, exact_fail = 0;
  for (const auto& s : setups) {
    const auto ds = generate(s.spec);
    const auto cls = spec_class(s.spec, ds);
    const int l = s.spec.l;
    std::vector<XFn> fns = {
        [l](auto, auto) { return std::vector<double>(l, 1.0 / l); },
        [](auto, auto fs) { return sharpen(fs, 2.0); },
        [](auto, auto fs) { return sharpen(fs, 0.5); },
        [l](auto x, auto) { return hashed_logits(x, l, 17); },
    };
    std::vector<Matrix> preds;
    for (const auto& fn : fns) preds.push_back(tabulate(ds, s.space, fn));
    BoostConfig cfg;
    cfg.alpha = 0.03;
    preds.push_back(evaluate(
        multicalibrate(ds, cls, monomial_family(s.space, 2), cfg).predictor, ds));
    for (int k : {2, 3}) {
      const auto fam = monomial_family(s.space, k);
      for (const auto& f : preds) {
        AuditOptions ao;
        ao.fstar_as_labels = true;
        const double alpha = audit(f, cls, fam, ds, ao).max_abs;
        DiagnosticOptions d;
        d.mode = EvalMode::exact;
        d.min_mass = 2 * alpha;
        ++exact_runs;
        if (!sandwich_report(f, ds, s.space, cls, k, alpha, d).all_pass()) ++exact_fail;
      }
    }
  }

  // Sampled mode: a fixed miscalibrated predictor, alpha measured from labels.
  std::size_t worst_pass = 20;
  std::string worst;
  for (int l : {2, 3}) {
    for (int k : {2, 3}) {
      std::size_t passed = 0;
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto spec = l == 2 ? spec_file("planted_binary.json") : spec_file("planted_l3.json");
        spec.label_mode = LabelMode::sampled;
        spec.n = 20000;
        spec.seed = 1000 + seed;
        const auto ds = generate(spec);
        const auto cls = spec_class(spec, ds);
        const Space space = l == 2 ? Space::binary() : Space::one_hot(3);
        const Matrix f = tabulate(ds, space, [](auto, auto fs) { return sharpen(fs, 1.5); });
        const double alpha = audit(f, cls, monomial_family(space, k), ds).max_abs;
        DiagnosticOptions d;
        d.mode = EvalMode::sampled;
        d.min_mass = 2 * alpha;
        if (sandwich_report(f, ds, space, cls, k, alpha, d).all_pass()) ++passed;
      }
      if (passed < worst_pass) {
        worst_pass = passed;
        worst = fmt("l=%d k=%d", l, k);
      }
    }
  }
  const bool pass = exact_fail == 0 && worst_pass >= 19;
  report(3, "moment sandwiching", pass,
         fmt("exact %zu/%zu runs pass; sampled worst %zu/20 seeds%s%s", exact_runs - exact_fail,
             exact_runs, worst_pass, worst.empty() ? "" : " at ", worst.c_str()));
}

void lipschitz_degree_weights() {
  std::size_t violations = 0, pairs = 0;
  double max_ratio = 0;
  std::uint64_t seed = 1;
  for (const Space& sp : {Space::binary(), Space::one_hot(2), Space::one_hot(3)}) {
    for (int k = 1; k <= 4; ++k) {
      const auto r = lipschitz_check(monomial_family(sp, k), k - 1, 1000, seed++);
      violations += r.violations;
      pairs += r.pairs;
      if (k > 1) max_ratio = std::max(max_ratio, r.max_ratio / (k - 1));
    }
  }
  report(4, "Lipschitz property of degree-k weights", violations == 0,
         fmt("%zu violations in %zu pairs (k<=4, l<=3), max |dw|/(r |dz|) = %.4f", violations,
             pairs, max_ratio));
}

void basis_property() {
  std::mt19937_64 rng(5);
  double worst_err = 0, worst_mass = 0;
  bool pass = true;
  for (const Space& sp : {Space::binary(), Space::one_hot(2), Space::one_hot(3)}) {
    const int dim = int(sp.dim());
    for (double delta : {0.1, 0.05}) {
      const auto fam = interval_family(sp, delta);
      const double err_bound = dim * delta / 2;
      const double mass_bound = std::pow(std::ceil(1 / delta), dim);
      for (int trial = 0; trial < 100; ++trial) {
        // max of affine pieces with ||g||_inf <= 1 is 1-Lipschitz from l1 to linf
        const int pieces = 4;
        std::vector<double> g(dim * dim * pieces), b(dim * dim * pieces), c(dim);
        for (auto& v : g) v = 2 * uniform01(rng) - 1;
        for (auto& v : b) v = uniform01(rng);
        for (auto& v : c) v = uniform01(rng);
        const auto u = [&](std::span<const double> z) {
          std::vector<double> out(dim);
          for (int j = 0; j < dim; ++j) {
            double best = -HUGE_VAL;
            for (int m = 0; m < pieces; ++m) {
              double s = 0;
              for (int i = 0; i < dim; ++i) {
                const std::size_t at = (std::size_t(j) * pieces + m) * dim + i;
                s += g[at] * (z[i] - b[at]);
              }
              best = std::max(best, s);
            }
            out[j] = clamp01(c[j] + 0.5 * best);
          }
          return out;
        };
        const auto approx = approximate_on_cells(fam, u);
        double err = 0;
        std::vector<double> z(dim);
        for (int s = 0; s < 10000; ++s) {
          for (auto& v : z) v = uniform01(rng);
          const auto uz = u(z);
          const auto vz = eval_approximation(fam, approx, z);
          for (int j = 0; j < dim; ++j) err = std::max(err, std::abs(uz[j] - vz[j]));
        }
        worst_err = std::max(worst_err, err / err_bound);
        worst_mass = std::max(worst_mass, approx.max_coordinate_mass / mass_bound);
        if (err > err_bound + 1e-12 || approx.max_coordinate_mass > mass_bound) pass = false;
      }
    }
  }
  report(5, "basis property", pass,
         fmt("600 functions; max error / (l delta/2) = %.4f, max mass / ceil(1/delta)^l = %.4f",
             worst_err, worst_mass));
}

void robustness() {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto spec = spec_file("planted_l3.json");
  spec.n = 400;
  const auto ds3 = generate(spec);
  const auto cls3 = spec_class(spec, ds3);
  auto bspec = spec_file("planted_binary.json");
  bspec.n = 400;
  const auto ds2 = generate(bspec);
  const auto cls2 = spec_class(bspec, ds2);

  std::size_t ok = 0;
  double worst_slack = HUGE_VAL;
  for (int t = 0; t < 50; ++t) {
    const bool one_hot = t % 2 == 1;
    const auto& ds = one_hot ? ds3 : ds2;
    const auto& cls = one_hot ? cls3 : cls2;
    const Space sp = one_hot ? Space::one_hot(3) : Space::binary();
    const int k = 2 + t % 3;
    const Matrix f = random_matrix(ds.size(), sp.dim(), rng);
    Matrix g = f;
    const double scale = 0.2 * uniform01(rng);
    for (auto& v : g.data()) v = clamp01(v + scale * noise(rng));
    const auto r = robustness_gap(f, g, monomial_family(sp, k), cls, ds);
    if (r.pass) ++ok;
    worst_slack = std::min(worst_slack, r.bound - r.audit_g);
  }

  const auto w = half_split_witness(0.01);
  const auto fam = interval_family(Space::binary(), 0.5);
  const double before = audit(w.f, w.cls, fam, w.data).max_abs;
  const double after = audit(w.g, w.cls, fam, w.data).max_abs;
  double cell_mass = 0, cell_resid = 0;
  for (std::size_t i = 0; i < w.data.size(); ++i) {
    if (w.g(i, 0) >= 0.5) {
      cell_mass += w.data.weight(i);
      cell_resid += w.data.weight(i) * (w.data.label(i) - w.g(i, 0));
    }
  }
  const double jump = after - before;
  const bool pass = ok == 50 && jump >= 0.4;
  report(6, "robustness", pass,
         fmt("%zu/50 random pairs within audit(f) + (2r+1)E|f-g| (min slack %.3e); witness "
             "interval-audit jump %.4f under delta=0.01 (required >= 0.4; conditional-on-cell "
             "residual %.4f)",
             ok, worst_slack, jump, cell_resid / cell_mass));
}

void confusion_guarantees() {
  const auto spec = spec_file("planted_l3.json");
  const auto ds = generate(spec);
  const auto cls = spec_class(spec, ds);
  const Space sp = Space::one_hot(3);
  BoostConfig cfg;
  cfg.alpha = 0.02;
  const auto res = multicalibrate(ds, cls, monomial_family(sp, 2), cfg);
  const Matrix f = evaluate(res.predictor, ds);
  DiagnosticOptions d;
  d.mode = EvalMode::exact;
  bool pass = true;
  std::size_t checked = 0;
  double worst_norm = -HUGE_VAL, worst_eig = HUGE_VAL;
  for (std::size_t g = 0; g < cls.size(); ++g) {
    if (group_mass(ds, cls[g]) < 2 * cfg.alpha) continue;
    const auto r = confusion(f, cls[g], ds, sp, cfg.alpha, d);
    ++checked;
    worst_norm = std::max(worst_norm, r.max_norm_gap - cfg.alpha / r.mass);
    worst_eig = std::min(worst_eig, r.min_eig_gap);
    pass = pass && r.max_norm_gap <= cfg.alpha / r.mass + kFlagTolerance && r.min_eig_gap >= -1e-6;
  }
  report(7, "confusion-matrix guarantees", pass,
         fmt("%zu groups; max (gap - alpha/mu) = %.3e, min eigenvalue = %.3e", checked,
             worst_norm, worst_eig));
}

void experiment_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  CompareConfig cfg;
  cfg.spec = spec_file("adversarial.json");
  cfg.sizes = {100, 300, 1000};
  cfg.seeds = {0, 1, 2, 3, 4};
  cfg.alpha = 0.005;
  cfg.delta = 0.1;
  const auto rows = run_compare(cfg);
  const double secs = seconds_since(t0);
  const std::size_t n0 = cfg.sizes.front();
  const double ev_mc2 = median_metric(rows, "MC2", n0, "test", "excess_variance");
  const double ev_ma = median_metric(rows, "MA", n0, "test", "excess_variance");
  const double ma_mc2 = median_metric(rows, "MC2", n0, "test", "multiaccuracy_error");
  const double ma_full = median_metric(rows, "MC-full", n0, "test", "multiaccuracy_error");
  const bool pass = ev_mc2 < ev_ma && ma_mc2 <= ma_full && secs < 120;
  report(8, "experiment trend", pass,
         fmt("n=%zu: excess variance MC2 %.4f vs MA %.4f; MA error MC2 %.4f vs MC-full %.4f; "
             "%.1fs",
             n0, ev_mc2, ev_ma, ma_mc2, ma_full, secs));
}

void hierarchy_nesting() {
  std::mt19937_64 rng(99);
  auto spec = spec_file("planted_l3.json");
  spec.n = 300;
  const auto ds3 = generate(spec);
  const auto cls3 = spec_class(spec, ds3);
  auto bspec = spec_file("planted_binary.json");
  bspec.n = 300;
  const auto ds2 = generate(bspec);
  const auto cls2 = spec_class(bspec, ds2);
  std::size_t violations = 0;
  for (int t = 0; t < 50; ++t) {
    const bool one_hot = t % 2 == 1;
    const auto& ds = one_hot ? ds3 : ds2;
    const auto& cls = one_hot ? cls3 : cls2;
    const Space sp = one_hot ? Space::one_hot(3) : Space::binary();
    const Matrix f = random_matrix(ds.size(), sp.dim(), rng);
    double prev = audit(f, cls, monomial_family(sp, 1), ds).max_abs;
    for (int k = 2; k <= 4; ++k) {
      const double cur = audit(f, cls, monomial_family(sp, k), ds).max_abs;
      if (prev > cur) ++violations;
      prev = cur;
    }
  }
  report(9, "hierarchy nesting", violations == 0,
         fmt("%zu violations over 50 predictors, k in {2,3,4}", violations));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> checks = {
      counterexample_exactness, termination_and_gate, moment_sandwich,
      lipschitz_degree_weights, basis_property,       robustness,
      confusion_guarantees,     experiment_trend,     hierarchy_nesting};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      checks[i]();
    } catch (const std::exception& e) {
      report(int(i + 1), "criterion", false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, checks.size());
  return failures;
}
