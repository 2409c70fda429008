#include "lowdeg/dataset.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lowdeg/error.h"

namespace lowdeg {

Dataset::Dataset(int num_classes, std::size_t num_features)
    : num_classes_(num_classes), num_features_(num_features) {
  if (num_classes < 2) throw DomainError("number of classes must be at least 2");
}

void Dataset::add(std::span<const double> x, int y, double weight, std::span<const double> fstar) {
  if (x.size() != num_features_) {
    throw DomainError("feature vector has " + std::to_string(x.size()) + " entries, expected " +
                      std::to_string(num_features_));
  }
  if (y < 0 || y >= num_classes_) {
    throw DomainError("label " + std::to_string(y) + " outside [0, " +
                      std::to_string(num_classes_) + ")");
  }
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw DomainError("weights must be finite and >= 0");
  const bool with_fstar = !fstar.empty();
  if (has_fstar_ && *has_fstar_ != with_fstar) {
    throw DomainError("fstar must be given for all records or none");
  }
  if (with_fstar) {
    if (fstar.size() != std::size_t(num_classes_)) throw DomainError("fstar has wrong length");
    CompensatedSum s;
    for (double v : fstar) {
      if (!(v >= 0.0)) throw DomainError("fstar entries must be nonnegative");
      s.add(v);
    }
    if (std::abs(s.value() - 1.0) > 1e-9) throw DomainError("fstar must sum to 1");
    fstar_.insert(fstar_.end(), fstar.begin(), fstar.end());
  }
  has_fstar_ = with_fstar;
  features_.insert(features_.end(), x.begin(), x.end());
  labels_.push_back(y);
  weights_.push_back(weight);
}

std::span<const double> Dataset::fstar(std::size_t i) const {
  if (!has_fstar()) return {};
  return {fstar_.data() + i * num_classes_, std::size_t(num_classes_)};
}

double Dataset::total_weight() const {
  if (empty()) throw DomainError("empty dataset");
  CompensatedSum s;
  for (double w : weights_) s.add(w);
  if (!(s.value() > 0.0)) throw DomainError("dataset has zero total weight");
  return s.value();
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  Dataset out(num_classes_, num_features_);
  for (std::size_t i : indices) out.add(x(i), labels_[i], weights_[i], fstar(i));
  return out;
}

std::vector<double> one_hot(int label, int l) {
  if (l < 1 || label < 0 || label >= l) {
    throw DomainError("label " + std::to_string(label) + " outside [0, " + std::to_string(l) + ")");
  }
  std::vector<double> e(l, 0.0);
  e[label] = 1.0;
  return e;
}

Matrix label_matrix(const Dataset& ds, const Space& space) {
  if (space.num_classes != ds.num_classes()) throw DomainError("space/dataset class mismatch");
  Matrix y(ds.size(), space.dim());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (space.scalar()) {
      y(i, 0) = ds.label(i) == 1 ? 1.0 : 0.0;
    } else {
      y(i, ds.label(i)) = 1.0;
    }
  }
  return y;
}

Matrix truth_matrix(const Dataset& ds, const Space& space) {
  if (!ds.has_fstar()) throw DomainError("dataset has no fstar columns");
  if (space.num_classes != ds.num_classes()) throw DomainError("space/dataset class mismatch");
  Matrix t(ds.size(), space.dim());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto fs = ds.fstar(i);
    if (space.scalar()) {
      t(i, 0) = fs[1];
    } else {
      std::copy(fs.begin(), fs.end(), t.row(i).begin());
    }
  }
  return t;
}

std::vector<double> group_values(const Dataset& ds, const GroupFunction& c) {
  std::vector<double> v(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) v[i] = c(ds.x(i));
  return v;
}

double expectation(const Dataset& ds, std::span<const double> values) {
  if (values.size() != ds.size()) throw DomainError("value array length mismatch");
  const double total = ds.total_weight();
  CompensatedSum s;
  for (std::size_t i = 0; i < ds.size(); ++i) s.add(ds.weight(i) * values[i]);
  return s.value() / total;
}

double group_mass(const Dataset& ds, const GroupFunction& c) {
  return expectation(ds, group_values(ds, c));
}

double conditional_expectation(const Dataset& ds, const GroupFunction& c,
                               const std::function<double(const Record&)>& g, double mass_floor) {
  ConditionalView view(ds, c, mass_floor);
  return view.mean_of([&](std::size_t i) { return g(ds.record(i)); });
}

ConditionalStats conditional_stats(const Dataset& ds, const GroupFunction& c,
                                   std::optional<double> alpha, double mass_floor) {
  ConditionalStats st{c.name(), group_mass(ds, c), std::nullopt};
  if (alpha && st.mass > 0.0 && st.mass >= mass_floor) st.alpha_c = *alpha / st.mass;
  return st;
}

ConditionalView::ConditionalView(const Dataset& ds, const GroupFunction& c, double mass_floor) {
  const double total = ds.total_weight();
  std::vector<double> cw(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) cw[i] = ds.weight(i) * c(ds.x(i));
  *this = ConditionalView(std::move(cw), total, mass_floor, c.name());
}

ConditionalView::ConditionalView(std::vector<double> cond_weights, double total_weight,
                                 double mass_floor, const std::string& group_name)
    : cw_(std::move(cond_weights)) {
  CompensatedSum s;
  for (double v : cw_) s.add(v);
  group_weight_ = s.value();
  mass_ = group_weight_ / total_weight;
  if (!(mass_ >= mass_floor) || !(group_weight_ > 0.0)) {
    throw InsufficientMass("insufficient mass in group '" + group_name + "'", mass_);
  }
}

double ConditionalView::mean(std::span<const double> values) const {
  if (values.size() != cw_.size()) throw DomainError("value array length mismatch");
  return mean_of([&](std::size_t i) { return values[i]; });
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw DomainError("line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  }
  return v;
}

// Index of column `prefix<k>`, or -1 when the name does not have that form.
int indexed_column(const std::string& name, const std::string& prefix) {
  if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) return -1;
  int k = 0;
  auto [ptr, ec] = std::from_chars(name.data() + prefix.size(), name.data() + name.size(), k);
  if (ec != std::errc() || ptr != name.data() + name.size() || k < 0) return -1;
  return k;
}

}  // namespace

Dataset read_csv(std::istream& in, int num_classes) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("empty CSV input");
  const auto header = split_csv_line(line);
  std::vector<int> x_col, fstar_col;
  int y_col = -1, w_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto& h = header[j];
    if (h == "y") {
      y_col = int(j);
    } else if (h == "w") {
      w_col = int(j);
    } else if (int k = indexed_column(h, "fstar"); k >= 0) {
      if (fstar_col.size() <= std::size_t(k)) fstar_col.resize(k + 1, -1);
      fstar_col[k] = int(j);
    } else if (int k = indexed_column(h, "x"); k >= 0) {
      if (x_col.size() <= std::size_t(k)) x_col.resize(k + 1, -1);
      x_col[k] = int(j);
    } else {
      throw DomainError("unknown CSV column '" + h + "'");
    }
  }
  if (y_col < 0) throw DomainError("CSV is missing the y column");
  if (std::count(x_col.begin(), x_col.end(), -1) > 0) throw DomainError("gap in x columns");
  if (std::count(fstar_col.begin(), fstar_col.end(), -1) > 0) throw DomainError("gap in fstar columns");

  struct Row {
    std::vector<double> x, fs;
    int y;
    double w;
  };
  std::vector<Row> rows;
  int max_label = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DomainError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    Row r;
    for (int c : x_col) r.x.push_back(parse_double(cells[c], line_no));
    for (int c : fstar_col) r.fs.push_back(parse_double(cells[c], line_no));
    const double yv = parse_double(cells[y_col], line_no);
    if (yv != std::floor(yv) || yv < 0) {
      throw DomainError("line " + std::to_string(line_no) + ": label must be a nonnegative integer");
    }
    r.y = int(yv);
    r.w = w_col >= 0 ? parse_double(cells[w_col], line_no) : 1.0;
    max_label = std::max(max_label, r.y);
    rows.push_back(std::move(r));
  }
  int l = num_classes;
  if (l == 0) l = fstar_col.empty() ? std::max(2, max_label + 1) : int(fstar_col.size());
  if (!fstar_col.empty() && int(fstar_col.size()) != l) {
    throw DomainError("fstar column count does not match number of classes");
  }
  Dataset ds(l, x_col.size());
  for (const auto& r : rows) ds.add(r.x, r.y, r.w, r.fs);
  return ds;
}

Dataset read_csv_file(const std::string& path, int num_classes) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  return read_csv(in, num_classes);
}

namespace {
void put_double(std::ostream& out, double v) { out << format_double(v); }
}  // namespace

void write_csv(std::ostream& out, const Dataset& ds) {
  for (std::size_t j = 0; j < ds.num_features(); ++j) out << "x" << j << ",";
  out << "y,w";
  if (ds.has_fstar()) {
    for (int k = 0; k < ds.num_classes(); ++k) out << ",fstar" << k;
  }
  out << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.x(i)) {
      put_double(out, v);
      out << ",";
    }
    out << ds.label(i) << ",";
    put_double(out, ds.weight(i));
    for (double v : ds.fstar(i)) {
      out << ",";
      put_double(out, v);
    }
    out << "\n";
  }
}

void write_csv_file(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write '" + path + "'");
  write_csv(out, ds);
}

}  // namespace lowdeg
