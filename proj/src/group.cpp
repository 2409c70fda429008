#include "lowdeg/group.h"

#include <sstream>

#include "lowdeg/error.h"

namespace lowdeg {

GroupFunction GroupFunction::all() { return GroupFunction("all", {GroupDesc::Kind::all, -1, 0.0}); }

GroupFunction GroupFunction::column(int column) {
  if (column < 0) throw DomainError("negative column index");
  return GroupFunction("x" + std::to_string(column) + "=1", {GroupDesc::Kind::column, column, 0.0});
}

GroupFunction GroupFunction::complement(int column) {
  if (column < 0) throw DomainError("negative column index");
  return GroupFunction("x" + std::to_string(column) + "=0",
                       {GroupDesc::Kind::complement, column, 0.0});
}

GroupFunction GroupFunction::stump(int column, double threshold) {
  if (column < 0) throw DomainError("negative column index");
  std::ostringstream name;
  name.precision(17);
  name << "x" << column << ">=" << threshold;
  return GroupFunction(name.str(), {GroupDesc::Kind::stump, column, threshold});
}

GroupFunction GroupFunction::custom(std::string name, Evaluator fn) {
  return GroupFunction(std::move(name), {GroupDesc::Kind::custom, -1, 0.0}, std::move(fn));
}

double GroupFunction::operator()(std::span<const double> x) const {
  switch (desc_.kind) {
    case GroupDesc::Kind::all:
      return 1.0;
    case GroupDesc::Kind::column:
      return x[desc_.column];
    case GroupDesc::Kind::complement:
      return 1.0 - x[desc_.column];
    case GroupDesc::Kind::stump:
      return x[desc_.column] >= desc_.threshold ? 1.0 : 0.0;
    case GroupDesc::Kind::custom:
      return fn_(x);
  }
  return 0.0;
}

}  // namespace lowdeg
