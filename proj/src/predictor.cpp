#include "lowdeg/predictor.h"

#include <algorithm>

#include "lowdeg/error.h"

namespace lowdeg {

Matrix evaluate(const Predictor& f, const Dataset& ds) {
  Matrix out(ds.size(), f.space().dim());
  for (std::size_t i = 0; i < ds.size(); ++i) f.predict(ds.x(i), out.row(i));
  return out;
}

ConstantPredictor::ConstantPredictor(Space space, std::vector<double> value)
    : space_(space), value_(std::move(value)) {
  if (value_.size() != space_.dim()) throw DomainError("constant prediction has wrong length");
  for (double v : value_) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("prediction outside [0,1]");
  }
}

void ConstantPredictor::predict(std::span<const double>, std::span<double> out) const {
  std::copy(value_.begin(), value_.end(), out.begin());
}

void renormalize_to_simplex(std::span<double> p) {
  if (p.size() <= 1) return;
  CompensatedSum s;
  for (double v : p) s.add(v);
  const double total = s.value();
  if (total > 0.0) {
    for (double& v : p) v /= total;
  } else {
    std::fill(p.begin(), p.end(), 1.0 / double(p.size()));
  }
}

}  // namespace lowdeg
