#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lowdeg/dataset.h"

namespace lowdeg {

// Number of delta-cells covering [0,1] along one axis; the last one is closed at 1.
int cells_per_axis(double delta);
// Index of the cell of the delta-partition containing t in [0,1].
int interval_index(double t, double delta, int cells);

// Constant e_coord (the scalar constant 1 in binary mode).
struct ConstantWeight {
  int coord = 0;
};

// Coordinate `coord` carries prod_j z_j^{exponents[j]}; other coordinates are 0.
struct MonomialWeight {
  int coord = 0;
  std::vector<int> exponents;
  int degree() const;
};

// Indicator of one cell of the delta-grid on the prediction box, replicated on
// every output coordinate.
struct CubeWeight {
  double delta = 1.0;
  int cells = 1;
  std::vector<int> cell;
};

class LipschitzGrid;

// Piecewise-constant function on the grid of a LipschitzGrid, on one output
// coordinate; cell values are multiples of eta/3 (capped at 1).
struct GridWeight {
  std::shared_ptr<const LipschitzGrid> grid;
  int coord = 0;
  std::vector<std::uint16_t> levels;  // one quantization level per grid cube
};

using WeightKind = std::variant<ConstantWeight, MonomialWeight, CubeWeight, GridWeight>;

class WeightFunction {
 public:
  WeightFunction(WeightKind kind, std::size_t dim);

  // w(p) written into `out` (size dim), clamped to [0,1].
  void eval(std::span<const double> p, std::span<double> out) const;
  std::vector<double> eval(std::span<const double> p) const;

  // Value of a single output coordinate.
  double eval_coord(std::span<const double> p, std::size_t coord) const;

  std::size_t dim() const { return dim_; }
  const WeightKind& kind() const { return kind_; }
  // Stable identifier, e.g. "t^2", "z0*z1@1", "cell[0,1]".
  std::string id() const;
  // l1 mass of the polynomial coefficients (1 for constants and monomials).
  std::optional<double> coefficient_mass() const;

 private:
  WeightKind kind_;
  std::size_t dim_;
};

enum class FamilyKind { ma, degree, interval, lipschitz };

struct FamilyDesc {
  FamilyKind kind = FamilyKind::ma;
  Space space;
  int k = 1;            // degree
  double delta = 1.0;   // interval width
  double eta = 0.5;     // basis accuracy
};

// A weight actually audited: member `member`, restricted to coordinate
// `coord` when coord >= 0 (per-label families), or the full inner product.
struct EffectiveWeight {
  std::size_t member = 0;
  int coord = -1;
};

struct BasisMeta {
  double eta = 0.0;  // uniform approximation accuracy
  double mass = 0.0; // coefficient bound L
};

class WeightFamily {
 public:
  WeightFamily(FamilyDesc desc, std::vector<WeightFunction> members, double lipschitz_bound,
               bool per_label, std::optional<BasisMeta> basis = std::nullopt);

  const FamilyDesc& desc() const { return desc_; }
  const Space& space() const { return desc_.space; }
  std::size_t dim() const { return desc_.space.dim(); }
  const std::vector<WeightFunction>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  const WeightFunction& operator[](std::size_t i) const { return members_[i]; }
  // Claimed l1 -> linf Lipschitz bound r (infinity for indicator families).
  double lipschitz_bound() const { return lipschitz_; }
  bool per_label() const { return per_label_; }
  const std::optional<BasisMeta>& basis() const { return basis_; }
  std::string name() const;

  // Audited weights in scan order: members in construction order, each split
  // per label for per-label families.
  std::vector<EffectiveWeight> effective() const;
  std::string effective_id(const EffectiveWeight& ew) const;

 private:
  FamilyDesc desc_;
  std::vector<WeightFunction> members_;
  double lipschitz_;
  bool per_label_;
  std::optional<BasisMeta> basis_;
};

// Multiaccuracy: w_l = e_l (binary mode: the single constant 1).
WeightFamily constant_family(const Space& space);
inline WeightFamily constant_family(int l) { return constant_family(Space::one_hot(l)); }

// Degree-k family: 1-sparse monomials of degree <= k-1, ordered by degree so
// that the degree-(k-1) family is a prefix.
WeightFamily monomial_family(const Space& space, int k);
inline WeightFamily monomial_family(int l, int k) { return monomial_family(Space::one_hot(l), k); }

// Full-multicalibration family: indicators of the cells of the delta-grid.
WeightFamily interval_family(const Space& space, double delta);
inline WeightFamily interval_family(int l, double delta) {
  return interval_family(Space::one_hot(l), delta);
}

inline constexpr double kDefaultBasisCap = 1e6;

// (eta, L)-basis for 1-Lipschitz weights. Two-dimensional boxes use the
// interval construction with delta = 2 eta / dim; higher dimensions use the
// quantized grid, which is refused with BasisTooLarge above `cap` members.
WeightFamily lipschitz_basis(const Space& space, double eta, double cap = kDefaultBasisCap);
inline WeightFamily lipschitz_basis(int l, double eta, double cap = kDefaultBasisCap) {
  return lipschitz_basis(Space::one_hot(l), eta, cap);
}

WeightFamily make_family(const FamilyDesc& desc, double cap = kDefaultBasisCap);

// Recipe for the quantized-grid basis on the simplex: the first l-1
// coordinates are cut into cubes of side eta/(3l), values are multiples of
// eta/3. Members are materialized on demand.
class LipschitzGrid : public std::enable_shared_from_this<LipschitzGrid> {
 public:
  static std::shared_ptr<const LipschitzGrid> create(int l, double eta);

  int num_classes() const { return l_; }
  double eta() const { return eta_; }
  int cubes_per_axis() const { return per_axis_; }
  std::size_t num_cubes() const { return num_cubes_; }
  int num_levels() const { return levels_; }
  // log10 of the member count l * levels^cubes.
  double log10_members() const;

  std::size_t cube_of(std::span<const double> p) const;
  double level_value(int level) const;
  // Corner of the cube (first l-1 coordinates) at which values are read.
  std::vector<double> cube_corner(std::size_t cube) const;

  // The member approximating coordinate `coord` of u to within eta on the simplex.
  WeightFunction approximate(const std::function<std::vector<double>(std::span<const double>)>& u,
                             int coord) const;
  // Member by index in the lexicographic enumeration (coord major).
  WeightFunction member(std::uint64_t index) const;

 private:
  LipschitzGrid(int l, double eta);
  int l_;
  double eta_;
  int per_axis_;
  std::size_t num_cubes_;
  int levels_;
};

struct LipschitzCheckReport {
  double max_ratio = 0.0;
  std::size_t violations = 0;
  std::size_t pairs = 0;
  bool pass = true;
};

// Sampling falsifier for ||w(z) - w(z')||_inf <= r ||z - z'||_1 on the box.
LipschitzCheckReport lipschitz_check(const WeightFamily& family, double r, int trials,
                                     std::uint64_t seed);

// Interval-basis approximation v = sum_cells u(center) 1_cell of a weight
// function u on the box.
struct CellApproximation {
  std::vector<std::vector<double>> coefficients;  // per member, one value per coordinate
  double max_coordinate_mass = 0.0;               // max_l sum_cells |lambda_{cell,l}|
  double total_mass = 0.0;                        // sum over cells and coordinates
};

CellApproximation approximate_on_cells(
    const WeightFamily& interval,
    const std::function<std::vector<double>(std::span<const double>)>& u);
std::vector<double> eval_approximation(const WeightFamily& interval, const CellApproximation& a,
                                       std::span<const double> p);
// Center of a cube cell (clipped to the box).
std::vector<double> cell_center(const CubeWeight& cube);

}  // namespace lowdeg
