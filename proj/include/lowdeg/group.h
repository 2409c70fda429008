#pragma once

#include <functional>
#include <span>
#include <string>

namespace lowdeg {

// Serializable description of a group function c: X -> [0,1].
struct GroupDesc {
  enum class Kind { all, column, complement, stump, custom };
  Kind kind = Kind::all;
  int column = -1;
  double threshold = 0.0;

  friend bool operator==(const GroupDesc&, const GroupDesc&) = default;
};

class GroupFunction {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;

  static GroupFunction all();
  // x[column], expected to be 0 or 1.
  static GroupFunction column(int column);
  // 1 - x[column].
  static GroupFunction complement(int column);
  // 1{x[column] >= threshold}.
  static GroupFunction stump(int column, double threshold);
  // Arbitrary evaluator. Not serializable.
  static GroupFunction custom(std::string name, Evaluator fn);

  double operator()(std::span<const double> x) const;

  const std::string& name() const { return name_; }
  const GroupDesc& desc() const { return desc_; }
  // Largest feature index read, or -1.
  int max_column() const { return desc_.column; }

 private:
  GroupFunction(std::string name, GroupDesc desc, Evaluator fn = {})
      : name_(std::move(name)), desc_(desc), fn_(std::move(fn)) {}

  std::string name_;
  GroupDesc desc_;
  Evaluator fn_;
};

}  // namespace lowdeg
