#include "lowdeg/cli.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lowdeg/audit.h"
#include "lowdeg/boost.h"
#include "lowdeg/error.h"
#include "lowdeg/experiment.h"
#include "lowdeg/json_io.h"
#include "lowdeg/synth.h"

namespace lowdeg::cli {

namespace {

using io::json;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

int to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError("bad " + what + " '" + s + "'");
  }
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError("bad " + what + " '" + s + "'");
  }
}

struct Common {
  std::uint64_t seed = 0;
  std::string format = "text";
};

struct FamilyOpts {
  std::string kind = "degree";
  int degree = 2;
  double delta = 0.1;
  double eta = 0.1;
  std::string encoding = "auto";
};

struct ClassOpts {
  std::string desc = "columns";
  bool complements = false;
};

void add_common(CLI::App* app, Common& c, const std::string& default_format = "text") {
  c.format = default_format;
  app->add_option("--seed", c.seed, "Seed for every random choice");
  app->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();
}

void add_family(CLI::App* app, FamilyOpts& f) {
  app->add_option("--family", f.kind, "Weight family")
      ->check(CLI::IsMember({"ma", "degree", "interval", "lipschitz"}))
      ->capture_default_str();
  app->add_option("--degree", f.degree, "Degree k of the degree-k family")->capture_default_str();
  app->add_option("--delta", f.delta, "Interval width of the full-MC family")->capture_default_str();
  app->add_option("--eta", f.eta, "Accuracy of the Lipschitz basis")->capture_default_str();
  app->add_option("--encoding", f.encoding, "Prediction encoding")
      ->check(CLI::IsMember({"auto", "binary", "one-hot"}))
      ->capture_default_str();
}

void add_class(CLI::App* app, ClassOpts& c) {
  app->add_option("--class", c.desc, "columns | columns:i,j | stumps:col:t1,t2 | file:path")
      ->capture_default_str();
  app->add_flag("--complements", c.complements, "Add 1 - x_j for each indicator column");
}

Space resolve_space(const std::string& encoding, int l) {
  if (encoding == "binary") {
    if (l != 2) throw DomainError("binary encoding needs two classes");
    return Space::binary();
  }
  if (encoding == "one-hot") return Space::one_hot(l);
  return l == 2 ? Space::binary() : Space::one_hot(l);
}

WeightFamily build_family(const FamilyOpts& f, const Space& space) {
  FamilyDesc d;
  d.space = space;
  if (f.kind == "ma") {
    d.kind = FamilyKind::ma;
  } else if (f.kind == "degree") {
    d.kind = FamilyKind::degree;
    d.k = f.degree;
  } else if (f.kind == "interval") {
    d.kind = FamilyKind::interval;
    d.delta = f.delta;
  } else {
    d.kind = FamilyKind::lipschitz;
    d.eta = f.eta;
  }
  return make_family(d);
}

void check_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
}

struct Predictions {
  Matrix f;
  Space space;
};

// `arg` is a predictor JSON path or the word "fstar" (the dataset's ground truth).
Predictions load_predictions(const std::string& arg, const Dataset& ds, const std::string& encoding) {
  if (arg == "fstar") {
    const Space space = resolve_space(encoding, ds.num_classes());
    return {truth_matrix(ds, space), space};
  }
  check_file(arg);
  const auto p = io::load_predictor(arg);
  if (p.space().num_classes != ds.num_classes()) throw DomainError("predictor/dataset class mismatch");
  if (p.num_features() != ds.num_features()) throw DomainError("predictor/dataset feature mismatch");
  if (encoding != "auto" && resolve_space(encoding, ds.num_classes()) != p.space()) {
    throw DomainError("--encoding conflicts with the predictor's encoding");
  }
  return {evaluate(p, ds), p.space()};
}

Dataset load_dataset(const std::string& path) {
  check_file(path);
  return read_csv_file(path);
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

// ---- gen ----

struct GenOpts {
  Common common;
  std::string spec, out;
  std::optional<long long> n;
  bool seed_given = false;
};

int cmd_gen(const GenOpts& o, std::ostream& out) {
  SynthSpec spec = io::load_spec(o.spec);
  if (o.n) {
    if (*o.n < 1) throw DomainError("--n must be >= 1");
    spec.n = std::size_t(*o.n);
  }
  if (o.seed_given) spec.seed = o.common.seed;
  const Dataset ds = generate(spec);
  write_csv_file(o.out, ds);
  const HypothesisClass cls = spec_class(spec, ds);
  json groups = json::array();
  for (const auto& c : cls.members()) groups.push_back({{"name", c.name()}, {"mass", group_mass(ds, c)}});
  const json summary{{"n", spec.n}, {"l", spec.l}, {"records", ds.size()}, {"groups", groups}};
  if (o.common.format == "json") {
    emit(out, summary);
  } else {
    out << "wrote " << ds.size() << " records (n=" << spec.n << ", l=" << spec.l << ") to " << o.out << "\n";
    for (const auto& g : groups) {
      out << "  " << g["name"].get<std::string>() << "  mass " << format_double(g["mass"].get<double>()) << "\n";
    }
  }
  return kOk;
}

// ---- train ----

struct TrainOpts {
  Common common;
  ClassOpts cls;
  FamilyOpts family;
  std::string data, out, trace;
  double alpha = 0.0;
  std::optional<double> step;
  std::optional<int> max_iter;
  std::optional<int> chunks;
  bool simplex = false;
};

void write_trace(const std::string& path, const TrainTrace& trace) {
  if (path.empty()) return;
  std::ofstream t(path);
  if (!t) throw DomainError("cannot write " + path);
  io::write_trace_csv(t, trace);
}

int cmd_train(const TrainOpts& o, std::ostream& out, std::ostream& err) {
  const Dataset ds = load_dataset(o.data);
  const HypothesisClass cls = parse_class(o.cls.desc, ds, o.cls.complements);
  const Space space = resolve_space(o.family.encoding, ds.num_classes());
  const WeightFamily family = build_family(o.family, space);
  BoostConfig bc;
  bc.alpha = o.alpha;
  bc.eta = o.step;
  bc.max_iterations = o.max_iter;
  bc.seed = o.common.seed;
  bc.simplex_project = o.simplex;
  if (o.chunks) bc.data_mode = DataMode::chunked(*o.chunks);
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = multicalibrate(ds, cls, family, bc);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    io::save_predictor(o.out, result.predictor);
    write_trace(o.trace, result.trace);
    const auto rep = audit(result.predictor, cls, family, ds);
    const json summary{{"iterations", result.trace.records.size()},
                       {"audit_max", rep.max_abs},
                       {"alpha", o.alpha},
                       {"family", family.name()},
                       {"class_size", cls.size()},
                       {"seconds", secs},
                       {"predictor", o.out}};
    if (o.common.format == "json") {
      emit(out, summary);
    } else {
      out << "trained " << family.name() << " predictor in " << result.trace.records.size()
          << " updates; in-sample audit max " << format_double(rep.max_abs) << " (alpha "
          << format_double(o.alpha) << ")\n";
    }
    return kOk;
  } catch (const NonTermination& e) {
    write_trace(o.trace, e.trace());
    err << "non-termination: " << e.what() << " (" << e.trace().records.size() << " updates traced)\n";
    return kNonTermination;
  }
}

// ---- audit ----

struct AuditOpts {
  Common common;
  ClassOpts cls;
  FamilyOpts family;
  std::string data, predictor;
  std::optional<double> alpha;
  bool exact = false;
};

int cmd_audit(const AuditOpts& o, std::ostream& out) {
  const Dataset ds = load_dataset(o.data);
  const auto pred = load_predictions(o.predictor, ds, o.family.encoding);
  const HypothesisClass cls = parse_class(o.cls.desc, ds, o.cls.complements);
  const WeightFamily family = build_family(o.family, pred.space);
  AuditOptions ao;
  ao.fstar_as_labels = o.exact;
  const auto rep = audit(pred.f, cls, family, ds, ao);
  if (o.common.format == "json") {
    json j = io::to_json(rep);
    j["family"] = family.name();
    j["alpha"] = o.alpha ? json(*o.alpha) : json(nullptr);
    j["pass"] = o.alpha ? json(rep.max_abs <= *o.alpha) : json(nullptr);
    emit(out, j);
  } else if (o.common.format == "csv") {
    io::write_audit_csv(out, rep);
  } else {
    io::write_audit_text(out, rep);
    if (o.alpha) out << (rep.max_abs <= *o.alpha ? "PASS" : "FAIL") << " at alpha " << format_double(*o.alpha) << "\n";
  }
  return o.alpha && rep.max_abs > *o.alpha ? kGateFail : kOk;
}

// ---- diagnose ----

struct DiagnoseOpts {
  Common common;
  ClassOpts cls;
  std::string data, predictor, encoding = "auto", mode = "exact";
  int degree = 2;
  double alpha = 0.0;
  std::optional<double> min_mass;
};

int cmd_diagnose(const DiagnoseOpts& o, std::ostream& out) {
  const Dataset ds = load_dataset(o.data);
  if (!ds.has_fstar()) throw DomainError("diagnose needs fstar columns in the dataset");
  if (!(o.alpha > 0.0)) throw DomainError("--alpha must be positive");
  const auto pred = load_predictions(o.predictor, ds, o.encoding);
  const HypothesisClass cls = parse_class(o.cls.desc, ds, o.cls.complements);
  DiagnosticOptions dopt;
  dopt.mode = o.mode == "sampled" ? EvalMode::sampled : EvalMode::exact;
  dopt.min_mass = o.min_mass.value_or(kDefaultMassFloor);

  const auto sandwich = sandwich_report(pred.f, ds, pred.space, cls, o.degree, o.alpha, dopt);
  bool pass = sandwich.all_pass();
  json confusions = json::array(), covariance = json::array(), tprs = json::array(), skipped = json::array();
  const int l = pred.space.num_classes;
  for (const auto& c : cls.members()) {
    if (!(group_mass(ds, c) >= dopt.min_mass)) {
      skipped.push_back(c.name());
      continue;
    }
    const auto cr = lowdeg::confusion(pred.f, c, ds, pred.space, o.alpha, dopt);
    pass = pass && cr.max_norm_pass && cr.psd_pass;
    confusions.push_back(io::to_json(cr));
    for (int ell = pred.space.scalar() ? 1 : 0; ell < l; ++ell) {
      const auto cov = covariance_report(pred.f, ell, c, ds, pred.space, o.alpha, dopt);
      pass = pass && cov.all_pass();
      covariance.push_back(io::to_json(cov));
      try {
        const auto t = tpr(pred.f, ds, pred.space, ell, c, o.alpha);
        json tj = io::to_json(t);
        tj["group"] = c.name();
        tj["label"] = ell;
        tprs.push_back(tj);
        if (t.pass) pass = pass && *t.pass;
      } catch (const InsufficientMass&) {
        // no positive labels in this group
      }
    }
  }
  const json doc{{"alpha", o.alpha},
                 {"k", o.degree},
                 {"mode", o.mode},
                 {"pass", pass},
                 {"sandwich", io::to_json(sandwich)},
                 {"confusion", confusions},
                 {"covariance", covariance},
                 {"tpr", tprs},
                 {"skipped", skipped}};
  if (o.common.format == "text") {
    out << "sandwich: " << (sandwich.all_pass() ? "PASS" : "FAIL") << " (" << sandwich.entries.size()
        << " entries)\n";
    for (const auto& cj : confusions) {
      out << "confusion " << cj["group"].get<std::string>() << ": max_norm_gap "
          << format_double(cj["max_norm_gap"].get<double>()) << " min_eig_gap "
          << format_double(cj["min_eig_gap"].get<double>())
          << ((cj["max_norm_pass"].get<bool>() && cj["psd_pass"].get<bool>()) ? " PASS" : " FAIL") << "\n";
    }
    for (const auto& cj : covariance) {
      out << "covariance " << cj["group"].get<std::string>() << " label " << cj["label"].get<int>()
          << ": Cov[f,y] " << format_double(cj["cov_f_y"].get<double>()) << " Var[f] "
          << format_double(cj["var_f"].get<double>()) << (cj["pass"].get<bool>() ? " PASS" : " FAIL") << "\n";
    }
    out << (pass ? "PASS" : "FAIL") << "\n";
  } else {
    emit(out, doc);
  }
  return pass ? kOk : kGateFail;
}

// ---- compare ----

struct CompareOpts {
  Common common;
  std::string spec, out;
  std::vector<std::size_t> sizes{1000};
  std::vector<std::uint64_t> seeds;
  int num_seeds = 5;
  double alpha = 0.02;
  double delta = 0.1;
  double test_fraction = 0.2;
  std::optional<int> max_iter;
};

int cmd_compare(const CompareOpts& o, std::ostream& out) {
  CompareConfig cfg;
  cfg.spec = io::load_spec(o.spec);
  cfg.sizes = o.sizes;
  cfg.seeds = o.seeds;
  if (cfg.seeds.empty()) {
    for (int s = 0; s < o.num_seeds; ++s) cfg.seeds.push_back(o.common.seed + std::uint64_t(s));
  }
  cfg.alpha = o.alpha;
  cfg.delta = o.delta;
  cfg.test_fraction = o.test_fraction;
  cfg.max_iterations = o.max_iter;
  const auto rows = run_compare(cfg);
  if (o.out.empty()) {
    write_compare_csv(out, rows);
  } else {
    std::ofstream f(o.out);
    if (!f) throw DomainError("cannot write " + o.out);
    write_compare_csv(f, rows);
    out << "wrote " << rows.size() << " rows to " << o.out << "\n";
  }
  return kOk;
}

// ---- counterexample ----

struct CounterexampleOpts {
  Common common;
  double eps = 1.0 / 6.0;
};

int cmd_counterexample(const CounterexampleOpts& o, std::ostream& out) {
  const auto ce = negative_covariance_family(o.eps);
  const Space space = Space::binary();
  const auto l2 = l2_regression(ce.cls, ce.data, PinnedCoefficient{0, 0.5});
  const auto logit = logistic_regression(ce.cls, ce.data);
  const Matrix f = evaluate(l2, ce.data);
  const Matrix h = evaluate(logit, ce.data);
  const GroupFunction& c11 = ce.cls[1];
  const auto cov = covariance_report(f, 1, c11, ce.data, space, 0.0);
  const auto ma = audit(f, ce.cls, constant_family(space), ce.data);
  const auto deg2 = audit(f, ce.cls, monomial_family(space, 2), ce.data);

  json points = json::array();
  for (std::size_t i = 0; i < ce.data.size(); ++i) {
    const auto x = ce.data.x(i);
    points.push_back({{"x", std::vector<double>(x.begin(), x.end())},
                      {"weight", ce.data.weight(i)},
                      {"y", ce.data.label(i)},
                      {"l2", f(i, 0)},
                      {"logistic", h(i, 0)}});
  }
  json coef = json::object(), theta = json::object();
  for (std::size_t a = 0; a < ce.cls.size(); ++a) {
    coef[ce.cls[a].name()] = l2.coefficients()[a];
    theta[ce.cls[a].name()] = logit.theta()[a];
  }
  const json doc{{"eps", o.eps},
                 {"points", points},
                 {"coefficients", coef},
                 {"theta", theta},
                 {"covariance", cov.cov_f_y},
                 {"covariance_group", c11.name()},
                 {"audit_ma", ma.max_abs},
                 {"audit_degree2", deg2.max_abs},
                 {"audit_degree2_witness",
                  {{"group", deg2.witness_entry().group}, {"weight", deg2.witness_entry().weight}}}};
  if (o.common.format == "json") {
    emit(out, doc);
    return kOk;
  }
  out << "points (x1,x2) weight y | L2 fit | logistic fit\n";
  for (const auto& p : points) {
    out << "  (" << p["x"][0].get<double>() << "," << p["x"][1].get<double>() << ") "
        << format_double(p["weight"].get<double>()) << " " << p["y"].get<int>() << " | "
        << format_double(p["l2"].get<double>()) << " | " << format_double(p["logistic"].get<double>()) << "\n";
  }
  out << "L2 coefficients (" << ce.cls[0].name() << " pinned to 1/2):";
  for (std::size_t a = 0; a < ce.cls.size(); ++a) {
    out << " " << ce.cls[a].name() << "=" << format_double(l2.coefficients()[a]);
  }
  out << "\nlogistic theta:";
  for (std::size_t a = 0; a < ce.cls.size(); ++a) {
    out << " " << ce.cls[a].name() << "=" << format_double(logit.theta()[a]);
  }
  out << "\nmultiaccuracy audit max " << format_double(ma.max_abs) << "; degree-2 audit max "
      << format_double(deg2.max_abs) << " at (" << deg2.witness_entry().group << ", "
      << deg2.witness_entry().weight << ")\n";
  out << "Cov[f, y | " << c11.name() << "] = " << format_double(cov.cov_f_y) << "\n";
  return kOk;
}

}  // namespace

HypothesisClass parse_class(const std::string& desc, const Dataset& ds, bool complements) {
  if (desc == "columns") {
    std::vector<int> cols(ds.num_features());
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = int(j);
    return indicator_class_from_columns(ds, cols, complements);
  }
  if (desc.rfind("columns:", 0) == 0) {
    std::vector<int> cols;
    for (const auto& s : split(desc.substr(8), ',')) cols.push_back(to_int(s, "column"));
    return indicator_class_from_columns(ds, cols, complements);
  }
  if (desc.rfind("stumps:", 0) == 0) {
    const auto parts = split(desc.substr(7), ':');
    if (parts.size() != 2) throw DomainError("stumps class needs stumps:<col>:<t1>,<t2>,...");
    std::vector<double> ts;
    for (const auto& s : split(parts[1], ',')) ts.push_back(to_double(s, "threshold"));
    auto stumps = threshold_stump_class(ds, to_int(parts[0], "column"), ts);
    std::vector<GroupFunction> members{GroupFunction::all()};
    members.insert(members.end(), stumps.members().begin(), stumps.members().end());
    return HypothesisClass("stumps", std::move(members));
  }
  if (desc.rfind("file:", 0) == 0) {
    auto cls = io::class_from_json(io::load_json(desc.substr(5)));
    for (const auto& c : cls.members()) {
      if (c.max_column() >= int(ds.num_features())) throw DomainError("class refers to a missing column");
    }
    return cls;
  }
  throw DomainError("unknown class description '" + desc + "'");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-degree multicalibration: audit, boost and diagnose predictors"};
  app.require_subcommand(1);

  GenOpts gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic dataset from a spec");
  add_common(g, gen.common);
  g->add_option("--spec", gen.spec, "Synthetic spec JSON")->required();
  g->add_option("--out", gen.out, "Output CSV")->required();
  g->add_option("--n", gen.n, "Override the record count");

  TrainOpts train;
  auto* t = app.add_subcommand("train", "Boost a predictor to (C, W, alpha)-multicalibration");
  add_common(t, train.common);
  add_class(t, train.cls);
  add_family(t, train.family);
  t->add_option("--data", train.data, "Training CSV")->required();
  t->add_option("--alpha", train.alpha, "Target alpha")->required();
  t->add_option("--step", train.step, "Step size eta (default alpha/2)");
  t->add_option("--max-iter", train.max_iter, "Iteration cap (default ceil(4l/alpha^2))");
  t->add_option("--chunks", train.chunks, "Use T disjoint chunks, one per update");
  t->add_flag("--simplex", train.simplex, "Renormalize predictions onto the simplex when reporting");
  t->add_option("--out", train.out, "Output predictor JSON")->required();
  t->add_option("--trace", train.trace, "Per-iteration trace CSV");

  AuditOpts aud;
  auto* a = app.add_subcommand("audit", "Audit a predictor");
  add_common(a, aud.common);
  add_class(a, aud.cls);
  add_family(a, aud.family);
  a->add_option("--data", aud.data, "Dataset CSV")->required();
  a->add_option("--predictor", aud.predictor, "Predictor JSON, or 'fstar'")->required();
  a->add_option("--alpha", aud.alpha, "Gate: exit 1 when the audit max exceeds alpha");
  a->add_flag("--exact", aud.exact, "Use fstar in place of the labels");

  DiagnoseOpts diag;
  auto* d = app.add_subcommand("diagnose", "Moment, TPR, confusion and covariance diagnostics");
  add_common(d, diag.common, "json");
  add_class(d, diag.cls);
  d->add_option("--data", diag.data, "Dataset CSV with fstar columns")->required();
  d->add_option("--predictor", diag.predictor, "Predictor JSON, or 'fstar'")->required();
  d->add_option("--degree", diag.degree, "Moment degree k")->capture_default_str();
  d->add_option("--alpha", diag.alpha, "Multicalibration level alpha")->required();
  d->add_option("--mode", diag.mode, "Evaluation mode")
      ->check(CLI::IsMember({"exact", "sampled"}))
      ->capture_default_str();
  d->add_option("--min-mass", diag.min_mass, "Skip groups below this mass");
  d->add_option("--encoding", diag.encoding, "Encoding when --predictor fstar")
      ->check(CLI::IsMember({"auto", "binary", "one-hot"}));

  CompareOpts cmp;
  auto* c = app.add_subcommand("compare", "MA / MC2 / MC-full comparison on a synthetic spec");
  add_common(c, cmp.common, "csv");
  c->add_option("--spec", cmp.spec, "Synthetic spec JSON")->required();
  c->add_option("--sizes", cmp.sizes, "Training-set sizes")->delimiter(',');
  c->add_option("--seeds", cmp.seeds, "Explicit seeds")->delimiter(',');
  c->add_option("--num-seeds", cmp.num_seeds, "Seeds --seed, --seed+1, ... when --seeds is absent")
      ->capture_default_str();
  c->add_option("--alpha", cmp.alpha, "Alpha for every method")->capture_default_str();
  c->add_option("--delta", cmp.delta, "Interval width for MC-full")->capture_default_str();
  c->add_option("--test-fraction", cmp.test_fraction, "Held-out fraction")->capture_default_str();
  c->add_option("--max-iter", cmp.max_iter, "Iteration cap per run");
  c->add_option("--out", cmp.out, "Output CSV (default standard output)");

  CounterexampleOpts ce;
  auto* x = app.add_subcommand("counterexample", "Reproduce the L2 / logistic counterexample");
  add_common(x, ce.common);
  x->add_option("--eps", ce.eps, "Mass parameter; 1/6 is the base example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }
  gen.seed_given = g->count("--seed") > 0;

  try {
    if (*g) return cmd_gen(gen, out);
    if (*t) return cmd_train(train, out, err);
    if (*a) return cmd_audit(aud, out);
    if (*d) return cmd_diagnose(diag, out);
    if (*c) return cmd_compare(cmp, out);
    if (*x) return cmd_counterexample(ce, out);
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kNonTermination;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace lowdeg::cli
