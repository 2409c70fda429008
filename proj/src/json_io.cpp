#include "lowdeg/json_io.h"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>

#include "lowdeg/error.h"

namespace lowdeg::io {

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw DomainError(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw DomainError(where + ": unknown key '" + key + "'");
    }
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw DomainError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DomainError(where + ": bad value for '" + key + "': " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

std::string family_kind_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::ma: return "ma";
    case FamilyKind::degree: return "degree";
    case FamilyKind::interval: return "interval";
    case FamilyKind::lipschitz: return "lipschitz";
  }
  return "ma";
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json parse(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(source + ": invalid JSON: " + e.what());
  }
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

json to_json(const Space& space) {
  return {{"classes", space.num_classes}, {"encoding", space.scalar() ? "binary" : "one_hot"}};
}

Space space_from_json(const json& j) {
  check_keys(j, {"classes", "encoding"}, "space");
  const int l = get<int>(j, "classes", "space");
  const auto enc = get_or<std::string>(j, "encoding", "one_hot", "space");
  if (enc == "binary") {
    if (l != 2) throw DomainError("space: binary encoding needs 2 classes");
    return Space::binary();
  }
  if (enc != "one_hot") throw DomainError("space: unknown encoding '" + enc + "'");
  if (l < 2) throw DomainError("space: need at least 2 classes");
  return Space::one_hot(l);
}

json to_json(const GroupFunction& c) {
  const auto& d = c.desc();
  switch (d.kind) {
    case GroupDesc::Kind::all: return {{"kind", "all"}};
    case GroupDesc::Kind::column: return {{"kind", "column"}, {"column", d.column}};
    case GroupDesc::Kind::complement: return {{"kind", "complement"}, {"column", d.column}};
    case GroupDesc::Kind::stump:
      return {{"kind", "stump"}, {"column", d.column}, {"threshold", d.threshold}};
    case GroupDesc::Kind::custom: break;
  }
  throw DomainError("group '" + c.name() + "' is not serializable");
}

GroupFunction group_from_json(const json& j) {
  check_keys(j, {"kind", "column", "threshold"}, "group");
  const auto kind = get<std::string>(j, "kind", "group");
  if (kind == "all") return GroupFunction::all();
  const int col = get<int>(j, "column", "group");
  if (col < 0) throw DomainError("group: negative column");
  if (kind == "column") return GroupFunction::column(col);
  if (kind == "complement") return GroupFunction::complement(col);
  if (kind == "stump") return GroupFunction::stump(col, get<double>(j, "threshold", "group"));
  throw DomainError("group: unknown kind '" + kind + "'");
}

json to_json(const HypothesisClass& cls) {
  json groups = json::array();
  for (const auto& c : cls.members()) groups.push_back(to_json(c));
  return {{"name", cls.name()}, {"groups", groups}};
}

HypothesisClass class_from_json(const json& j) {
  check_keys(j, {"name", "groups"}, "class");
  const auto& arr = j.at("groups");
  if (!arr.is_array() || arr.empty()) throw DomainError("class: 'groups' must be a non-empty array");
  std::vector<GroupFunction> members;
  for (const auto& g : arr) members.push_back(group_from_json(g));
  return HypothesisClass(get_or<std::string>(j, "name", "class", "class"), std::move(members));
}

json to_json(const FamilyDesc& desc) {
  json j{{"kind", family_kind_name(desc.kind)}, {"space", to_json(desc.space)}};
  switch (desc.kind) {
    case FamilyKind::degree: j["k"] = desc.k; break;
    case FamilyKind::interval: j["delta"] = desc.delta; break;
    case FamilyKind::lipschitz: j["eta"] = desc.eta; break;
    case FamilyKind::ma: break;
  }
  return j;
}

FamilyDesc family_desc_from_json(const json& j) {
  check_keys(j, {"kind", "space", "k", "delta", "eta"}, "family");
  FamilyDesc d;
  const auto kind = get<std::string>(j, "kind", "family");
  if (kind == "ma") {
    d.kind = FamilyKind::ma;
  } else if (kind == "degree") {
    d.kind = FamilyKind::degree;
  } else if (kind == "interval") {
    d.kind = FamilyKind::interval;
  } else if (kind == "lipschitz") {
    d.kind = FamilyKind::lipschitz;
  } else {
    throw DomainError("family: unknown kind '" + kind + "'");
  }
  d.space = space_from_json(j.at("space"));
  d.k = get_or<int>(j, "k", 1, "family");
  d.delta = get_or<double>(j, "delta", 1.0, "family");
  d.eta = get_or<double>(j, "eta", 0.5, "family");
  return d;
}

json to_json(const WeightFunction& w) {
  return std::visit(
      [](const auto& k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ConstantWeight>) {
          return {{"type", "constant"}, {"coord", k.coord}};
        } else if constexpr (std::is_same_v<T, MonomialWeight>) {
          return {{"type", "monomial"}, {"coord", k.coord}, {"exponents", k.exponents}};
        } else if constexpr (std::is_same_v<T, CubeWeight>) {
          return {{"type", "cube"}, {"delta", k.delta}, {"cells", k.cells}, {"cell", k.cell}};
        } else {
          return {{"type", "grid"}, {"eta", k.grid->eta()}, {"coord", k.coord}, {"levels", k.levels}};
        }
      },
      w.kind());
}

WeightFunction weight_from_json(const json& j, const Space& space) {
  check_keys(j, {"type", "coord", "exponents", "delta", "cells", "cell", "eta", "levels"}, "weight");
  const auto type = get<std::string>(j, "type", "weight");
  const int dim = int(space.dim());
  auto coord = [&] {
    const int c = get<int>(j, "coord", "weight");
    if (c < 0 || c >= dim) throw DomainError("weight: coord out of range");
    return c;
  };
  if (type == "constant") return WeightFunction(ConstantWeight{coord()}, space.dim());
  if (type == "monomial") {
    MonomialWeight m{coord(), get<std::vector<int>>(j, "exponents", "weight")};
    if (int(m.exponents.size()) != dim) throw DomainError("weight: exponents need one entry per coordinate");
    for (int e : m.exponents) {
      if (e < 0) throw DomainError("weight: negative exponent");
    }
    return WeightFunction(std::move(m), space.dim());
  }
  if (type == "cube") {
    CubeWeight c{get<double>(j, "delta", "weight"), get<int>(j, "cells", "weight"),
                 get<std::vector<int>>(j, "cell", "weight")};
    if (!(c.delta > 0.0) || c.cells < 1 || int(c.cell.size()) != dim) throw DomainError("weight: bad cube");
    for (int v : c.cell) {
      if (v < 0 || v >= c.cells) throw DomainError("weight: cube cell out of range");
    }
    return WeightFunction(std::move(c), space.dim());
  }
  if (type == "grid") {
    if (space.scalar()) throw DomainError("weight: grid weights need one-hot predictions");
    auto grid = LipschitzGrid::create(space.num_classes, get<double>(j, "eta", "weight"));
    GridWeight g{grid, coord(), get<std::vector<std::uint16_t>>(j, "levels", "weight")};
    if (g.levels.size() != grid->num_cubes()) throw DomainError("weight: grid levels have wrong length");
    for (auto v : g.levels) {
      if (int(v) >= grid->num_levels()) throw DomainError("weight: grid level out of range");
    }
    return WeightFunction(std::move(g), space.dim());
  }
  throw DomainError("weight: unknown type '" + type + "'");
}

json to_json(const ComposedPredictor& p) {
  json updates = json::array();
  for (const auto& u : p.updates()) {
    updates.push_back({{"weight", to_json(u.weight)},
                       {"coord", u.coord},
                       {"group", to_json(u.group)},
                       {"sign", u.sign},
                       {"step", u.step},
                       {"weight_id", u.weight_id}});
  }
  return {{"format", kPredictorFormat},
          {"version", kPredictorVersion},
          {"space", to_json(p.space())},
          {"num_features", p.num_features()},
          {"base", p.base()},
          {"simplex_project", p.simplex_project()},
          {"updates", updates}};
}

ComposedPredictor predictor_from_json(const json& j) {
  const std::string where = "predictor";
  check_keys(j, {"format", "version", "space", "num_features", "base", "simplex_project", "updates"}, where);
  if (get<std::string>(j, "format", where) != kPredictorFormat) throw DomainError("predictor: wrong format tag");
  if (get<int>(j, "version", where) != kPredictorVersion) throw DomainError("predictor: unsupported version");
  const Space space = space_from_json(j.at("space"));
  const auto nf = get<std::size_t>(j, "num_features", where);
  std::vector<Update> updates;
  for (const auto& u : j.at("updates")) {
    check_keys(u, {"weight", "coord", "group", "sign", "step", "weight_id"}, "update");
    Update up{weight_from_json(u.at("weight"), space), get<int>(u, "coord", "update"),
              group_from_json(u.at("group")), get<int>(u, "sign", "update"),
              get<double>(u, "step", "update"), get_or<std::string>(u, "weight_id", "", "update")};
    if (up.sign != 1 && up.sign != -1) throw DomainError("update: sign must be +1 or -1");
    if (up.coord < -1 || up.coord >= int(space.dim())) throw DomainError("update: coord out of range");
    if (up.group.max_column() >= int(nf)) throw DomainError("update: group column out of range");
    updates.push_back(std::move(up));
  }
  return ComposedPredictor(space, nf, get<std::vector<double>>(j, "base", where), std::move(updates),
                           get_or<bool>(j, "simplex_project", false, where));
}

void save_predictor(const std::string& path, const ComposedPredictor& p) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path);
  out << to_json(p).dump(1) << "\n";
}

ComposedPredictor load_predictor(const std::string& path) { return predictor_from_json(load_json(path)); }

json to_json(const SynthSpec& spec) {
  json rule;
  const auto& r = spec.fstar_rule;
  if (r.kind == FstarRule::Kind::table) {
    json table = json::array();
    for (const auto& [pat, p] : r.table) table.push_back({{"pattern", pat}, {"p", p}});
    rule = {{"type", "table"}, {"columns", r.columns}, {"table", table}};
  } else {
    json inter = json::array();
    for (const auto& [cols, c] : r.interactions) inter.push_back({{"columns", cols}, {"coef", c}});
    rule = {{"type", "softmax"}, {"bias", r.bias}, {"coef", r.coef}, {"interactions", inter}};
  }
  return {{"l", spec.l},
          {"n", spec.n},
          {"seed", spec.seed},
          {"label_mode", spec.label_mode == LabelMode::exact ? "exact" : "sampled"},
          {"features", spec.features},
          {"groups", spec.groups},
          {"complements", spec.complements},
          {"fstar_rule", rule}};
}

SynthSpec spec_from_json(const json& j) {
  const std::string where = "spec";
  check_keys(j, {"l", "n", "seed", "label_mode", "features", "groups", "complements", "fstar_rule"}, where);
  SynthSpec s;
  s.l = get<int>(j, "l", where);
  const auto n = get<long long>(j, "n", where);
  if (n < 1) throw DomainError("spec: n must be >= 1");
  s.n = std::size_t(n);
  s.seed = get_or<std::uint64_t>(j, "seed", 0, where);
  const auto mode = get_or<std::string>(j, "label_mode", "sampled", where);
  if (mode == "exact") {
    s.label_mode = LabelMode::exact;
  } else if (mode != "sampled") {
    throw DomainError("spec: unknown label_mode '" + mode + "'");
  }
  s.features = get<std::vector<double>>(j, "features", where);
  s.groups = get_or<std::vector<int>>(j, "groups", {}, where);
  s.complements = get_or<bool>(j, "complements", false, where);
  if (!j.contains("fstar_rule")) throw DomainError("spec: missing key 'fstar_rule'");
  const auto& r = j.at("fstar_rule");
  const std::string rw = "fstar_rule";
  check_keys(r, {"type", "columns", "table", "bias", "coef", "interactions"}, rw);
  const auto type = get<std::string>(r, "type", rw);
  if (type == "table") {
    s.fstar_rule.kind = FstarRule::Kind::table;
    s.fstar_rule.columns = get<std::vector<int>>(r, "columns", rw);
    for (const auto& e : r.at("table")) {
      check_keys(e, {"pattern", "p"}, "fstar table entry");
      s.fstar_rule.table.emplace_back(get<std::vector<int>>(e, "pattern", rw),
                                      get<std::vector<double>>(e, "p", rw));
    }
  } else if (type == "softmax") {
    s.fstar_rule.kind = FstarRule::Kind::softmax;
    s.fstar_rule.bias = get_or<std::vector<double>>(r, "bias", {}, rw);
    s.fstar_rule.coef = get_or<std::vector<std::vector<double>>>(r, "coef", {}, rw);
    if (r.contains("interactions")) {
      for (const auto& e : r.at("interactions")) {
        check_keys(e, {"columns", "coef"}, "interaction");
        s.fstar_rule.interactions.emplace_back(get<std::vector<int>>(e, "columns", rw),
                                               get<std::vector<double>>(e, "coef", rw));
      }
    }
  } else {
    throw DomainError("fstar_rule: unknown type '" + type + "'");
  }
  s.validate();
  return s;
}

SynthSpec load_spec(const std::string& path) { return spec_from_json(load_json(path)); }

json to_json(const TrainTrace& trace) {
  json recs = json::array();
  for (const auto& r : trace.records) {
    recs.push_back({{"iteration", r.iteration},
                    {"weight", r.weight},
                    {"group", r.group},
                    {"sign", r.sign},
                    {"correlation", r.correlation},
                    {"potential_proxy", r.potential_proxy},
                    {"true_potential", nullable(r.true_potential)}});
  }
  return {{"initial_potential_proxy", trace.initial_potential_proxy},
          {"initial_true_potential", nullable(trace.initial_true_potential)},
          {"records", recs}};
}

void write_trace_csv(std::ostream& out, const TrainTrace& trace) {
  out << "iteration,weight,group,sign,correlation,potential_proxy,true_potential\n";
  for (const auto& r : trace.records) {
    out << r.iteration << "," << r.weight << "," << r.group << "," << r.sign << ","
        << format_double(r.correlation) << "," << format_double(r.potential_proxy) << ","
        << (r.true_potential ? format_double(*r.true_potential) : "") << "\n";
  }
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

json to_json(const AuditReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"group", e.group},
                       {"weight", e.weight},
                       {"label", e.label},
                       {"violation", e.violation},
                       {"mass", e.mass}});
  }
  json j{{"max_abs", r.max_abs}, {"entries", entries}, {"witness", nullptr}};
  if (!r.entries.empty()) {
    const auto& w = r.witness_entry();
    j["witness"] = {{"group", w.group}, {"weight", w.weight}, {"violation", w.violation}};
  }
  return j;
}

json to_json(const SandwichReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"group", e.group},
                       {"label", e.label},
                       {"d", e.degree},
                       {"mass", e.mass},
                       {"alpha_c", e.alpha_c},
                       {"moment_f", e.moment_f},
                       {"moment_star", e.moment_star},
                       {"cross", e.cross},
                       {"product", e.product},
                       {"allowance", e.allowance},
                       {"sw1_upper", e.sw1_upper},
                       {"sw1_lower", e.sw1_lower},
                       {"sw2_upper", e.sw2_upper},
                       {"sw2_lower", e.sw2_lower},
                       {"level_j", e.level_j}});
  }
  return {{"alpha", r.alpha}, {"k", r.k}, {"pass", r.all_pass()}, {"entries", entries},
          {"skipped", r.skipped}};
}

json to_json(const TprReport& r) {
  json j{{"rate", r.rate}, {"mass", r.mass}, {"identity", nullable(r.identity)},
         {"lower", nullable(r.lower)}, {"upper", nullable(r.upper)}};
  j["pass"] = r.pass ? json(*r.pass) : json(nullptr);
  return j;
}

json to_json(const ConfusionReport& r) {
  return {{"group", r.group},
          {"mass", r.mass},
          {"b_star_f", to_json(r.b_star_f)},
          {"b_ff", to_json(r.b_ff)},
          {"b_star_star", to_json(r.b_star_star)},
          {"max_norm_gap", r.max_norm_gap},
          {"min_eig_gap", r.min_eig_gap},
          {"max_norm_pass", r.max_norm_pass},
          {"psd_pass", r.psd_pass}};
}

json to_json(const CovarianceReport& r) {
  return {{"group", r.group},         {"label", r.label},
          {"mass", r.mass},           {"alpha_c", r.alpha_c},
          {"var_f", r.var_f},         {"var_star", r.var_star},
          {"cov_f_y", r.cov_f_y},     {"cov_star_y", r.cov_star_y},
          {"cov_f_star", r.cov_f_star}, {"allowance", r.allowance},
          {"lower", r.lower},         {"upper", r.upper},
          {"variance", r.variance},   {"cov_close", r.cov_close},
          {"pass", r.all_pass()}};
}

void write_audit_csv(std::ostream& out, const AuditReport& r) {
  out << "group,weight,label,violation,mass\n";
  for (const auto& e : r.entries) {
    out << e.group << "," << e.weight << "," << e.label << "," << format_double(e.violation) << ","
        << format_double(e.mass) << "\n";
  }
}

void write_audit_text(std::ostream& out, const AuditReport& r, std::size_t top) {
  out << "max |violation| = " << format_double(r.max_abs) << " over " << r.entries.size()
      << " (group, weight) pairs\n";
  const auto sorted = r.sorted_by_magnitude();
  for (std::size_t i = 0; i < std::min(top, sorted.size()); ++i) {
    const auto& e = sorted[i];
    out << "  " << e.group << "  " << e.weight << "  " << format_double(e.violation) << "  (mass "
        << format_double(e.mass) << ")\n";
  }
}

}  // namespace lowdeg::io
