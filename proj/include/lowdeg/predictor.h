#pragma once

#include <functional>
#include <span>
#include <vector>

#include "lowdeg/dataset.h"

namespace lowdeg {

// f: X -> [0,1]^dim.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Space space() const = 0;
  virtual void predict(std::span<const double> x, std::span<double> out) const = 0;

  std::vector<double> predict(std::span<const double> x) const {
    std::vector<double> out(space().dim());
    predict(x, out);
    return out;
  }
};

// n x dim matrix of predictions on every record.
Matrix evaluate(const Predictor& f, const Dataset& ds);

class ConstantPredictor final : public Predictor {
 public:
  ConstantPredictor(Space space, std::vector<double> value);
  Space space() const override { return space_; }
  void predict(std::span<const double> x, std::span<double> out) const override;

 private:
  Space space_;
  std::vector<double> value_;
};

class FunctionPredictor final : public Predictor {
 public:
  using Fn = std::function<void(std::span<const double>, std::span<double>)>;
  FunctionPredictor(Space space, Fn fn) : space_(space), fn_(std::move(fn)) {}
  Space space() const override { return space_; }
  void predict(std::span<const double> x, std::span<double> out) const override { fn_(x, out); }

 private:
  Space space_;
  Fn fn_;
};

// Renormalizes a box prediction onto the simplex (reporting only). Scalar
// predictions are returned unchanged.
void renormalize_to_simplex(std::span<double> p);

}  // namespace lowdeg
