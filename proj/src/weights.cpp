#include "lowdeg/weights.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "lowdeg/error.h"

namespace lowdeg {

namespace {

constexpr double kClampSlack = 1e-12;
constexpr double kCeilTolerance = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double clamp_excursion(double v) {
  // Only tiny floating-point excursions are expected on the box.
  if (v < 0.0 && v >= -kClampSlack) return 0.0;
  if (v > 1.0 && v <= 1.0 + kClampSlack) return 1.0;
  return clamp01(v);
}

std::string coord_name(std::size_t dim, int coord) {
  return dim == 1 ? "t" : "z" + std::to_string(coord);
}

}  // namespace

int cells_per_axis(double delta) {
  if (!(delta > 0.0) || delta > 1.0) throw DomainError("delta must lie in (0, 1]");
  return std::max(1, int(std::ceil(1.0 / delta - kCeilTolerance)));
}

int interval_index(double t, double delta, int cells) {
  int idx = int(std::floor(t / delta));
  idx = std::clamp(idx, 0, cells - 1);
  // Boundaries are the doubles j * delta; make membership agree with them.
  while (idx > 0 && idx * delta > t) --idx;
  while (idx + 1 < cells && (idx + 1) * delta <= t) ++idx;
  return idx;
}

int MonomialWeight::degree() const {
  int d = 0;
  for (int e : exponents) d += e;
  return d;
}

WeightFunction::WeightFunction(WeightKind kind, std::size_t dim) : kind_(std::move(kind)), dim_(dim) {
  if (dim_ == 0) throw DomainError("weight function dimension must be positive");
}

double WeightFunction::eval_coord(std::span<const double> p, std::size_t coord) const {
  return std::visit(
      Overloaded{
          [&](const ConstantWeight& w) { return std::size_t(w.coord) == coord ? 1.0 : 0.0; },
          [&](const MonomialWeight& w) {
            if (std::size_t(w.coord) != coord) return 0.0;
            double v = 1.0;
            for (std::size_t j = 0; j < w.exponents.size(); ++j) {
              for (int e = 0; e < w.exponents[j]; ++e) v *= p[j];
            }
            return clamp_excursion(v);
          },
          [&](const CubeWeight& w) {
            for (std::size_t j = 0; j < w.cell.size(); ++j) {
              if (interval_index(p[j], w.delta, w.cells) != w.cell[j]) return 0.0;
            }
            return 1.0;
          },
          [&](const GridWeight& w) {
            if (std::size_t(w.coord) != coord) return 0.0;
            return w.grid->level_value(w.levels[w.grid->cube_of(p)]);
          },
      },
      kind_);
}

void WeightFunction::eval(std::span<const double> p, std::span<double> out) const {
  for (std::size_t j = 0; j < dim_; ++j) out[j] = eval_coord(p, j);
}

std::vector<double> WeightFunction::eval(std::span<const double> p) const {
  std::vector<double> out(dim_);
  eval(p, out);
  return out;
}

std::string WeightFunction::id() const {
  return std::visit(
      Overloaded{
          [&](const ConstantWeight& w) {
            return dim_ == 1 ? std::string("1") : "e" + std::to_string(w.coord);
          },
          [&](const MonomialWeight& w) {
            std::ostringstream s;
            bool first = true;
            for (std::size_t j = 0; j < w.exponents.size(); ++j) {
              if (w.exponents[j] == 0) continue;
              if (!first) s << "*";
              first = false;
              s << coord_name(dim_, int(j));
              if (w.exponents[j] > 1) s << "^" << w.exponents[j];
            }
            if (first) s << "1";
            if (dim_ > 1) s << "@" << w.coord;
            return s.str();
          },
          [&](const CubeWeight& w) {
            std::ostringstream s;
            s << "cell[";
            for (std::size_t j = 0; j < w.cell.size(); ++j) s << (j ? "," : "") << w.cell[j];
            s << "]";
            return s.str();
          },
          [&](const GridWeight& w) { return "grid@" + std::to_string(w.coord); },
      },
      kind_);
}

std::optional<double> WeightFunction::coefficient_mass() const {
  if (std::holds_alternative<ConstantWeight>(kind_) || std::holds_alternative<MonomialWeight>(kind_)) {
    return 1.0;
  }
  return std::nullopt;
}

WeightFamily::WeightFamily(FamilyDesc desc, std::vector<WeightFunction> members,
                           double lipschitz_bound, bool per_label, std::optional<BasisMeta> basis)
    : desc_(desc),
      members_(std::move(members)),
      lipschitz_(lipschitz_bound),
      per_label_(per_label),
      basis_(basis) {
  if (members_.empty()) throw DomainError("weight family is empty");
  for (const auto& m : members_) {
    if (m.dim() != desc_.space.dim()) throw DomainError("weight member has wrong dimension");
  }
}

std::string WeightFamily::name() const {
  std::ostringstream s;
  switch (desc_.kind) {
    case FamilyKind::ma:
      s << "MA";
      break;
    case FamilyKind::degree:
      s << "Degree(" << desc_.k << ")";
      break;
    case FamilyKind::interval:
      s << "Interval(" << desc_.delta << ")";
      break;
    case FamilyKind::lipschitz:
      s << "LipschitzBasis(" << desc_.eta << ")";
      break;
  }
  return s.str();
}

std::vector<EffectiveWeight> WeightFamily::effective() const {
  std::vector<EffectiveWeight> out;
  for (std::size_t m = 0; m < members_.size(); ++m) {
    if (per_label_ && dim() > 1) {
      for (std::size_t c = 0; c < dim(); ++c) out.push_back({m, int(c)});
    } else {
      out.push_back({m, -1});
    }
  }
  return out;
}

std::string WeightFamily::effective_id(const EffectiveWeight& ew) const {
  auto id = members_[ew.member].id();
  if (ew.coord >= 0) id += "#" + std::to_string(ew.coord);
  return id;
}

WeightFamily constant_family(const Space& space) {
  if (space.num_classes < 2) throw DomainError("constant family needs l >= 2");
  std::vector<WeightFunction> members;
  for (std::size_t c = 0; c < space.dim(); ++c) {
    members.emplace_back(ConstantWeight{int(c)}, space.dim());
  }
  FamilyDesc desc{FamilyKind::ma, space};
  return WeightFamily(desc, std::move(members), 0.0, false);
}

namespace {

// All exponent vectors over `dim` variables with total degree exactly d, in
// lexicographically decreasing order (z0^d first).
void exponents_of_degree(std::size_t dim, int d, std::vector<int>& cur, std::size_t pos,
                         std::vector<std::vector<int>>& out) {
  if (pos + 1 == dim) {
    cur[pos] = d;
    out.push_back(cur);
    return;
  }
  for (int e = d; e >= 0; --e) {
    cur[pos] = e;
    exponents_of_degree(dim, d - e, cur, pos + 1, out);
  }
  cur[pos] = 0;
}

}  // namespace

WeightFamily monomial_family(const Space& space, int k) {
  if (k < 1) throw DomainError("degree k must be >= 1");
  if (space.num_classes < 2) throw DomainError("monomial family needs l >= 2");
  const std::size_t dim = space.dim();
  std::vector<WeightFunction> members;
  for (int d = 0; d <= k - 1; ++d) {
    std::vector<std::vector<int>> exps;
    std::vector<int> cur(dim, 0);
    exponents_of_degree(dim, d, cur, 0, exps);
    for (const auto& e : exps) {
      for (std::size_t c = 0; c < dim; ++c) {
        if (d == 0) {
          members.emplace_back(ConstantWeight{int(c)}, dim);
        } else {
          members.emplace_back(MonomialWeight{int(c), e}, dim);
        }
      }
    }
  }
  FamilyDesc desc{FamilyKind::degree, space, k};
  return WeightFamily(desc, std::move(members), double(std::max(0, k - 1)), false);
}

namespace {

std::vector<WeightFunction> cube_members(std::size_t dim, double delta) {
  const int n = cells_per_axis(delta);
  std::vector<WeightFunction> members;
  std::vector<int> cell(dim, 0);
  while (true) {
    members.emplace_back(CubeWeight{delta, n, cell}, dim);
    std::size_t j = dim;
    while (j > 0) {
      --j;
      if (++cell[j] < n) break;
      cell[j] = 0;
      if (j == 0) return members;
    }
  }
}

}  // namespace

WeightFamily interval_family(const Space& space, double delta) {
  if (!(delta > 0.0) || delta > 1.0) throw DomainError("delta must lie in (0, 1]");
  const int n = cells_per_axis(delta);
  const double count = std::pow(double(n), double(space.dim()));
  if (count > kDefaultBasisCap) throw BasisTooLarge(std::log10(count), kDefaultBasisCap);
  FamilyDesc desc{FamilyKind::interval, space, 1, delta};
  return WeightFamily(desc, cube_members(space.dim(), delta),
                      std::numeric_limits<double>::infinity(), true);
}

WeightFamily lipschitz_basis(const Space& space, double eta, double cap) {
  if (!(eta > 0.0) || !(eta < 1.0)) throw DomainError("eta must lie in (0, 1)");
  const std::size_t dim = space.dim();
  if (dim <= 2) {
    const double delta = std::min(1.0, 2.0 * eta / double(dim));
    const int n = cells_per_axis(delta);
    const double count = std::pow(double(n), double(dim));
    if (count > cap) throw BasisTooLarge(std::log10(count), cap);
    FamilyDesc desc{FamilyKind::lipschitz, space, 1, delta, eta};
    BasisMeta meta{dim * delta / 2.0, count};
    return WeightFamily(desc, cube_members(dim, delta), std::numeric_limits<double>::infinity(),
                        true, meta);
  }
  auto grid = LipschitzGrid::create(space.num_classes, eta);
  const double log_count = grid->log10_members();
  if (log_count > std::log10(cap)) throw BasisTooLarge(log_count, cap);
  std::vector<WeightFunction> members;
  const auto count = std::uint64_t(std::llround(std::pow(10.0, log_count)));
  for (std::uint64_t i = 0; i < count; ++i) members.push_back(grid->member(i));
  FamilyDesc desc{FamilyKind::lipschitz, space, 1, 0.0, eta};
  return WeightFamily(desc, std::move(members), std::numeric_limits<double>::infinity(), false,
                      BasisMeta{eta, 1.0});
}

WeightFamily make_family(const FamilyDesc& desc, double cap) {
  switch (desc.kind) {
    case FamilyKind::ma:
      return constant_family(desc.space);
    case FamilyKind::degree:
      return monomial_family(desc.space, desc.k);
    case FamilyKind::interval:
      return interval_family(desc.space, desc.delta);
    case FamilyKind::lipschitz:
      return lipschitz_basis(desc.space, desc.eta, cap);
  }
  throw DomainError("unknown family kind");
}

std::shared_ptr<const LipschitzGrid> LipschitzGrid::create(int l, double eta) {
  return std::shared_ptr<const LipschitzGrid>(new LipschitzGrid(l, eta));
}

LipschitzGrid::LipschitzGrid(int l, double eta) : l_(l), eta_(eta) {
  if (l < 2) throw DomainError("grid basis needs l >= 2");
  if (!(eta > 0.0) || !(eta < 1.0)) throw DomainError("eta must lie in (0, 1)");
  per_axis_ = int(std::ceil(3.0 * l / eta - kCeilTolerance));
  const double cubes = std::pow(double(per_axis_), double(l - 1));
  if (cubes > 1e8) throw BasisTooLarge(std::log10(cubes), 1e8);
  num_cubes_ = std::size_t(std::llround(cubes));
  levels_ = int(std::floor(3.0 / eta + kCeilTolerance)) + 1;
}

double LipschitzGrid::log10_members() const {
  return std::log10(double(l_)) + double(num_cubes_) * std::log10(double(levels_));
}

std::size_t LipschitzGrid::cube_of(std::span<const double> p) const {
  std::size_t idx = 0;
  for (int j = 0; j + 1 < l_; ++j) {
    const int a = std::clamp(int(std::floor(clamp01(p[j]) * per_axis_)), 0, per_axis_ - 1);
    idx = idx * per_axis_ + std::size_t(a);
  }
  return idx;
}

double LipschitzGrid::level_value(int level) const {
  return std::min(1.0, level * eta_ / 3.0);
}

std::vector<double> LipschitzGrid::cube_corner(std::size_t cube) const {
  std::vector<double> corner(l_ - 1);
  for (int j = l_ - 2; j >= 0; --j) {
    corner[j] = double(cube % per_axis_) / per_axis_;
    cube /= per_axis_;
  }
  return corner;
}

WeightFunction LipschitzGrid::approximate(
    const std::function<std::vector<double>(std::span<const double>)>& u, int coord) const {
  std::vector<std::uint16_t> levels(num_cubes_, 0);
  const double step = eta_ / 3.0;
  for (std::size_t cube = 0; cube < num_cubes_; ++cube) {
    auto z = cube_corner(cube);
    double sum = 0.0;
    for (double v : z) sum += v;
    if (sum > 1.0) continue;  // cube misses the simplex
    z.push_back(1.0 - sum);
    const double value = clamp01(u(z)[coord]);
    int level = int(std::floor(value / step));
    // Round down against the representable level values.
    while (level > 0 && level_value(level) > value) --level;
    levels[cube] = std::uint16_t(std::min(level, levels_ - 1));
  }
  return WeightFunction(GridWeight{shared_from_this(), coord, std::move(levels)}, std::size_t(l_));
}

WeightFunction LipschitzGrid::member(std::uint64_t index) const {
  const int coord = int(index % std::uint64_t(l_));
  index /= std::uint64_t(l_);
  std::vector<std::uint16_t> levels(num_cubes_, 0);
  for (std::size_t cube = 0; cube < num_cubes_ && index > 0; ++cube) {
    levels[cube] = std::uint16_t(index % std::uint64_t(levels_));
    index /= std::uint64_t(levels_);
  }
  return WeightFunction(GridWeight{shared_from_this(), coord, std::move(levels)}, std::size_t(l_));
}

LipschitzCheckReport lipschitz_check(const WeightFamily& family, double r, int trials,
                                     std::uint64_t seed) {
  if (trials < 1) throw DomainError("trials must be >= 1");
  const std::size_t dim = family.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  LipschitzCheckReport rep;
  std::vector<double> z(dim), z2(dim), a(dim), b(dim);
  for (int t = 0; t < trials; ++t) {
    for (std::size_t j = 0; j < dim; ++j) z[j] = unit(rng);
    // Alternate far pairs with local perturbations.
    for (std::size_t j = 0; j < dim; ++j) {
      z2[j] = (t % 2 == 0) ? unit(rng) : clamp01(z[j] + jitter(rng));
    }
    double dist = 0.0;
    for (std::size_t j = 0; j < dim; ++j) dist += std::abs(z[j] - z2[j]);
    if (dist == 0.0) continue;
    ++rep.pairs;
    for (const auto& w : family.members()) {
      w.eval(z, a);
      w.eval(z2, b);
      double diff = 0.0;
      for (std::size_t j = 0; j < dim; ++j) diff = std::max(diff, std::abs(a[j] - b[j]));
      const double ratio = diff / dist;
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      if (diff > r * dist) ++rep.violations;
    }
  }
  rep.pass = rep.violations == 0;
  return rep;
}

std::vector<double> cell_center(const CubeWeight& cube) {
  std::vector<double> c(cube.cell.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double lo = cube.cell[j] * cube.delta;
    const double hi = std::min(1.0, (cube.cell[j] + 1) * cube.delta);
    c[j] = 0.5 * (lo + hi);
  }
  return c;
}

CellApproximation approximate_on_cells(
    const WeightFamily& interval,
    const std::function<std::vector<double>(std::span<const double>)>& u) {
  CellApproximation a;
  std::vector<double> coord_mass(interval.dim(), 0.0);
  for (const auto& m : interval.members()) {
    const auto* cube = std::get_if<CubeWeight>(&m.kind());
    if (!cube) throw DomainError("cell approximation needs an interval family");
    auto value = u(cell_center(*cube));
    for (std::size_t j = 0; j < value.size(); ++j) {
      coord_mass[j] += std::abs(value[j]);
      a.total_mass += std::abs(value[j]);
    }
    a.coefficients.push_back(std::move(value));
  }
  a.max_coordinate_mass = *std::max_element(coord_mass.begin(), coord_mass.end());
  return a;
}

std::vector<double> eval_approximation(const WeightFamily& interval, const CellApproximation& a,
                                       std::span<const double> p) {
  const auto* cube = std::get_if<CubeWeight>(&interval[0].kind());
  if (!cube) throw DomainError("cell approximation needs an interval family");
  if (a.coefficients.size() != interval.size()) throw DomainError("approximation does not match family");
  // Members are enumerated row-major over cell indices.
  std::size_t index = 0;
  for (std::size_t j = 0; j < interval.dim(); ++j) {
    index = index * std::size_t(cube->cells) + std::size_t(interval_index(p[j], cube->delta, cube->cells));
  }
  return a.coefficients[index];
}

}  // namespace lowdeg
