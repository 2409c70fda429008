#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lowdeg/group.h"
#include "lowdeg/numeric.h"

namespace lowdeg {

inline constexpr double kDefaultMassFloor = 10.0 * std::numeric_limits<double>::epsilon();

// How predictions and labels are encoded. `binary` is the scalar shorthand for
// two classes: a prediction p means (1 - p, p) and the label vector is y itself.
enum class Encoding { binary, one_hot };

struct Space {
  int num_classes = 2;
  Encoding encoding = Encoding::one_hot;

  static Space binary() { return {2, Encoding::binary}; }
  static Space one_hot(int l) { return {l, Encoding::one_hot}; }

  std::size_t dim() const { return encoding == Encoding::binary ? 1 : std::size_t(num_classes); }
  bool scalar() const { return encoding == Encoding::binary; }
  // Class index represented by prediction coordinate `coord`.
  int label_of(std::size_t coord) const { return scalar() ? 1 : int(coord); }

  friend bool operator==(const Space&, const Space&) = default;
};

struct Record {
  std::span<const double> x;
  int y = 0;
  double weight = 1.0;
  std::span<const double> fstar;  // empty when the dataset carries no ground truth
};

// Weighted empirical sample of (x, y, optional f*(x)). Immutable once built.
class Dataset {
 public:
  Dataset(int num_classes, std::size_t num_features);

  void add(std::span<const double> x, int y, double weight = 1.0,
           std::span<const double> fstar = {});

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  int num_classes() const { return num_classes_; }
  std::size_t num_features() const { return num_features_; }
  bool has_fstar() const { return has_fstar_.value_or(false); }

  std::span<const double> x(std::size_t i) const {
    return {features_.data() + i * num_features_, num_features_};
  }
  int label(std::size_t i) const { return labels_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> fstar(std::size_t i) const;
  Record record(std::size_t i) const { return {x(i), labels_[i], weights_[i], fstar(i)}; }

  const std::vector<double>& weights() const { return weights_; }
  // Compensated sum of weights; throws DomainError if empty or zero.
  double total_weight() const;

  // Subset in the given index order.
  Dataset select(std::span<const std::size_t> indices) const;

 private:
  int num_classes_;
  std::size_t num_features_;
  std::vector<double> features_;
  std::vector<int> labels_;
  std::vector<double> weights_;
  std::vector<double> fstar_;
  std::optional<bool> has_fstar_;
};

std::vector<double> one_hot(int label, int l);

// n x dim matrix of encoded labels.
Matrix label_matrix(const Dataset& ds, const Space& space);
// n x dim matrix of encoded f*; throws DomainError when absent.
Matrix truth_matrix(const Dataset& ds, const Space& space);

std::vector<double> group_values(const Dataset& ds, const GroupFunction& c);

// Weighted mean of per-record values: sum(w_i v_i) / sum(w_i).
double expectation(const Dataset& ds, std::span<const double> values);

double group_mass(const Dataset& ds, const GroupFunction& c);

// E_{D_c}[g] = E[c(x) g] / mu_c. Throws InsufficientMass if mu_c < mass_floor.
double conditional_expectation(const Dataset& ds, const GroupFunction& c,
                               const std::function<double(const Record&)>& g,
                               double mass_floor = kDefaultMassFloor);

struct ConditionalStats {
  std::string group;
  double mass = 0.0;
  std::optional<double> alpha_c;
};

ConditionalStats conditional_stats(const Dataset& ds, const GroupFunction& c,
                                   std::optional<double> alpha = std::nullopt,
                                   double mass_floor = kDefaultMassFloor);

// The distribution D_c as a reusable view: conditional means of per-record
// value arrays, using weights w_i * c(x_i).
class ConditionalView {
 public:
  ConditionalView(const Dataset& ds, const GroupFunction& c, double mass_floor = kDefaultMassFloor);
  ConditionalView(std::vector<double> cond_weights, double total_weight, double mass_floor,
                  const std::string& group_name);

  double mass() const { return mass_; }
  std::size_t size() const { return cw_.size(); }
  double mean(std::span<const double> values) const;
  template <class F>
  double mean_of(F&& f) const {
    CompensatedSum s;
    for (std::size_t i = 0; i < cw_.size(); ++i) s.add(cw_[i] * f(i));
    return s.value() / group_weight_;
  }
  std::span<const double> cond_weights() const { return cw_; }

 private:
  std::vector<double> cw_;
  double group_weight_ = 0.0;
  double mass_ = 0.0;
};

// CSV with header x0..x{d-1},y[,w][,fstar0..fstar{l-1}]. When `num_classes`
// is 0 it is inferred from the fstar columns or the largest label.
Dataset read_csv(std::istream& in, int num_classes = 0);
Dataset read_csv_file(const std::string& path, int num_classes = 0);
void write_csv(std::ostream& out, const Dataset& ds);
void write_csv_file(const std::string& path, const Dataset& ds);

}  // namespace lowdeg
