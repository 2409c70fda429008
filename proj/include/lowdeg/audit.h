#pragma once

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lowdeg/dataset.h"
#include "lowdeg/kernels.h"
#include "lowdeg/learner.h"
#include "lowdeg/predictor.h"
#include "lowdeg/weights.h"

namespace lowdeg {

// exact: the stored f* is the true conditional, f*-based expectations are
// deterministic. sampled: drawn labels stand in for f*, and inequality flags
// get a 3 sigma / sqrt(n_eff) allowance.
enum class EvalMode { exact, sampled };

inline constexpr double kFlagTolerance = 1e-9;

using WeightCallable = std::function<void(std::span<const double>, std::span<double>)>;

// E[c(x) <w(f(x)), y - f(x)>] over the weighted dataset. `coord` >= 0
// restricts w to one coordinate.
double violation(const Matrix& f, const GroupFunction& c, const WeightFunction& w,
                 const Dataset& ds, const Space& space, int coord = -1);
double violation(const Matrix& f, const GroupFunction& c, const WeightCallable& w,
                 const Dataset& ds, const Space& space);

struct AuditEntry {
  std::string group;
  std::string weight;
  int label = -1;  // class index the weight acts on, -1 for mixed
  double violation = 0.0;
  double mass = 0.0;
  std::size_t group_index = 0;
  std::size_t weight_index = 0;  // index into family.effective()
};

struct AuditReport {
  std::vector<AuditEntry> entries;  // group-major within each effective weight
  double max_abs = 0.0;
  std::size_t witness = 0;  // entry index attaining max_abs (first on ties)

  const AuditEntry& witness_entry() const { return entries.at(witness); }
  std::vector<AuditEntry> sorted_by_magnitude() const;
};

struct AuditOptions {
  bool fstar_as_labels = false;  // replace y by f*(x): the exact-mode audit
  Exec exec = default_exec();
};

AuditReport audit(const Matrix& f, const HypothesisClass& cls, const WeightFamily& family,
                  const Dataset& ds, const AuditOptions& opts = {});
AuditReport audit(const Predictor& f, const HypothesisClass& cls, const WeightFamily& family,
                  const Dataset& ds, const AuditOptions& opts = {});

struct DiagnosticOptions {
  EvalMode mode = EvalMode::exact;
  double min_mass = kDefaultMassFloor;  // groups below are skipped with a notice
  double tolerance = kFlagTolerance;
};

struct SandwichEntry {
  std::string group;
  int label = 0;
  int degree = 1;
  double mass = 0.0;
  double alpha_c = 0.0;
  double moment_f = 0.0;      // E_c[f^d]
  double moment_star = 0.0;   // E_c[f*^d]
  double cross = 0.0;         // E_c[f^{d-1} f*]
  double product = 0.0;       // E_c[f*] E_c[f^{d-1}]
  double allowance = 0.0;     // per unit of alpha_c slack
  bool sw1_upper = false, sw1_lower = false, sw2_upper = false, sw2_lower = false, level_j = false;
  bool all_pass() const { return sw1_upper && sw1_lower && sw2_upper && sw2_lower && level_j; }
};

struct SandwichReport {
  double alpha = 0.0;
  int k = 0;
  std::vector<SandwichEntry> entries;
  std::vector<std::string> skipped;  // notices for low-mass groups
  bool all_pass() const;
};

SandwichReport sandwich_report(const Matrix& f, const Dataset& ds, const Space& space,
                               const HypothesisClass& cls, int k, double alpha,
                               const DiagnosticOptions& opts = {});

struct TprReport {
  double rate = 0.0;     // E_c[f_l^d | y = l] from labels
  double mass = 0.0;     // mu_c
  std::optional<double> identity;  // E_c[f_l^d f*_l] / E_c[f*_l]
  std::optional<double> lower, upper;
  std::optional<bool> pass;
};

// True positive rate of label `ell` on group c; with f* and alpha also checks
// E_c[f] - 2a/(E f* mu) <= tau <= tau(f*) + 3a/(E f* mu).
TprReport tpr(const Matrix& f, const Dataset& ds, const Space& space, int ell,
              const GroupFunction& c, std::optional<double> alpha = std::nullopt,
              double tolerance = kFlagTolerance);

// E_c[f_l^d | y = l] with bracket E_c[f^d] - 2a/(E f* mu) <= . <=
// E_c[f*^d | y = l] + (d+1) a / (E f* mu).
TprReport higher_moment_tpr(const Matrix& f, const Dataset& ds, const Space& space, int ell,
                            const GroupFunction& c, int d,
                            std::optional<double> alpha = std::nullopt,
                            double tolerance = kFlagTolerance);

// E_c[f_L | y in L] with f_L = sum_{l in L} f_l (one-hot predictions).
TprReport set_tpr(const Matrix& f, const Dataset& ds, const Space& space, const std::set<int>& labels,
                  const GroupFunction& c, std::optional<double> alpha = std::nullopt,
                  double tolerance = kFlagTolerance);

struct ConfusionReport {
  std::string group;
  double mass = 0.0;
  Matrix b_star_f, b_ff, b_star_star;
  double max_norm_gap = 0.0;
  double min_eig_gap = 0.0;  // lambda_min(B** + 2 l alpha I - Bff)
  bool max_norm_pass = false;
  bool psd_pass = false;
};

// Builds the l x l moment matrices on D_c. Scalar predictions are expanded to
// (1 - p, p).
ConfusionReport confusion(const Matrix& f, const GroupFunction& c, const Dataset& ds,
                          const Space& space, double alpha, const DiagnosticOptions& opts = {});

struct CovarianceReport {
  std::string group;
  int label = 0;
  double mass = 0.0;
  double alpha_c = 0.0;
  double var_f = 0.0, var_star = 0.0;
  double cov_f_y = 0.0, cov_star_y = 0.0;  // label-based
  double cov_f_star = 0.0;                  // exact-mode surrogate for Cov[f, y]
  double allowance = 0.0;
  bool lower = false;      // Var[f] - 2a_c <= Cov[f,y]
  bool upper = false;      // Cov[f,y] <= Cov[f*,y] + 6a_c
  bool variance = false;   // Var[f] <= Var[f*] + 4a_c
  bool cov_close = false;  // |Cov[f,y] - Var[f]| <= 2a_c
  bool all_pass() const { return lower && upper && variance && cov_close; }
};

CovarianceReport covariance_report(const Matrix& f, int ell, const GroupFunction& c,
                                   const Dataset& ds, const Space& space, double alpha,
                                   const DiagnosticOptions& opts = {});

struct ExperimentMetrics {
  double multiaccuracy_error = 0.0;
  double excess_variance = 0.0;
};

// Binary-scalar metrics: max_c |E[c (f - f*)] - E[(1 - c)(f - f*)]| and
// max_c (Var[f | c] - Var[f* | c]) mu_c.
ExperimentMetrics experiment_metrics(const Matrix& f, const HypothesisClass& cls,
                                     const Dataset& ds);

struct RobustnessReport {
  double delta = 0.0;  // E ||f - g||_1
  double audit_f = 0.0, audit_g = 0.0;
  double lipschitz = 0.0;
  double bound = 0.0;  // audit_f + (2r + 1) delta
  bool bounded = false;
  bool pass = false;
};

RobustnessReport robustness_gap(const Matrix& f, const Matrix& g, const WeightFamily& family,
                                const HypothesisClass& cls, const Dataset& ds,
                                Exec exec = default_exec());

struct BasisInference {
  double beta = 0.0;        // max |violation| over the basis
  double mass = 0.0;        // coefficient l1 mass of the approximation
  double eta = 0.0;         // sup-norm approximation error bound
  double residual_scale = 0.0;  // max_i ||y_i - f_i||_1 (2 on the simplex)
  double violation_u = 0.0;
  double violation_v = 0.0;
  double bound = 0.0;       // beta * mass + residual_scale * eta
  bool pass = false;
};

// Infers a violation bound for a Lipschitz weight u from the interval-basis
// audit, and compares with the directly computed violation.
BasisInference basis_inference(const Matrix& f, const GroupFunction& c, const WeightFamily& interval,
                               const std::function<std::vector<double>(std::span<const double>)>& u,
                               const Dataset& ds);

}  // namespace lowdeg
