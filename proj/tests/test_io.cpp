#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "lowdeg/boost.h"
#include "lowdeg/error.h"
#include "lowdeg/json_io.h"
#include "lowdeg/synth.h"

using namespace lowdeg;
namespace fs = std::filesystem;

namespace {

SynthSpec spec3() {
  SynthSpec s;
  s.l = 3;
  s.n = 1500;
  s.seed = 8;
  s.features = {0.5, 0.4, 0.6};
  s.groups = {0, 1, 2};
  s.complements = true;
  s.fstar_rule.kind = FstarRule::Kind::softmax;
  s.fstar_rule.bias = {0.1, 0.0, -0.1};
  s.fstar_rule.coef = {{0.9, 0.0, -0.4}, {0.0, 0.7, 0.0}, {-0.3, 0.0, 0.6}};
  s.fstar_rule.interactions = {{{0, 2}, {0.0, -1.0, 1.0}}};
  return s;
}

}  // namespace

TEST(PredictorJson, RoundTripIsBitwise) {
  const auto spec = spec3();
  const auto ds = generate(spec);
  const auto cls = spec_class(spec, ds);
  BoostConfig cfg;
  cfg.alpha = 0.04;
  const auto res = multicalibrate(ds, cls, monomial_family(3, 2), cfg);
  ASSERT_FALSE(res.predictor.updates().empty());
  const auto path = fs::temp_directory_path() / "lowdeg_io_predictor.json";
  io::save_predictor(path.string(), res.predictor);
  const auto back = io::load_predictor(path.string());
  EXPECT_TRUE(evaluate(back, ds) == evaluate(res.predictor, ds));
  EXPECT_EQ(io::to_json(back).dump(), io::to_json(res.predictor).dump());
  fs::remove(path);
}

TEST(PredictorJson, IntervalAndLipschitzWeightsRoundTrip) {
  for (const auto& fam : {interval_family(Space::binary(), 0.25), lipschitz_basis(Space::binary(), 0.5)}) {
    for (const auto& w : fam.members()) {
      const auto back = io::weight_from_json(io::to_json(w), Space::binary());
      EXPECT_EQ(back.id(), w.id());
      for (double t : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
        const double p[1] = {t};
        EXPECT_EQ(back.eval_coord(p, 0), w.eval_coord(p, 0));
      }
    }
  }
}

TEST(PredictorJson, RejectsWrongFormatAndUnknownKeys) {
  const ComposedPredictor p(Space::binary(), 2, {0.5});
  auto j = io::to_json(p);
  EXPECT_NO_THROW(io::predictor_from_json(j));
  auto bad = j;
  bad["format"] = "something.else";
  EXPECT_THROW(io::predictor_from_json(bad), DomainError);
  bad = j;
  bad["version"] = 99;
  EXPECT_THROW(io::predictor_from_json(bad), DomainError);
  bad = j;
  bad["extra"] = 1;
  EXPECT_THROW(io::predictor_from_json(bad), DomainError);
}

TEST(SpecJson, RoundTripAndValidation) {
  const auto s = spec3();
  const auto j = io::to_json(s);
  const auto back = io::spec_from_json(j);
  EXPECT_EQ(io::to_json(back).dump(), j.dump());
  const auto a = generate(s), b = generate(back);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.label(i), b.label(i));

  auto bad = j;
  bad["unexpected"] = true;
  EXPECT_THROW(io::spec_from_json(bad), DomainError);
  bad = j;
  bad["l"] = 0;
  EXPECT_THROW(io::spec_from_json(bad), DomainError);
}

TEST(Json, ParseErrorsAreDomainErrors) {
  EXPECT_THROW(io::parse("{not json", "inline"), DomainError);
  EXPECT_THROW(io::load_json("/nonexistent/lowdeg.json"), DomainError);
}

TEST(Reports, AuditSerializations) {
  const auto ce = counterexample_dataset();
  const ConstantPredictor f(Space::binary(), {0.5});
  const auto rep = audit(f, ce.cls, monomial_family(Space::binary(), 2), ce.data);
  const auto j = io::to_json(rep);
  EXPECT_EQ(j["entries"].size(), rep.entries.size());
  EXPECT_DOUBLE_EQ(j["max_abs"].get<double>(), rep.max_abs);
  std::ostringstream csv;
  io::write_audit_csv(csv, rep);
  const auto text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), std::ptrdiff_t(rep.entries.size() + 1));
}
