#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "lowdeg/audit.h"
#include "lowdeg/boost.h"
#include "lowdeg/synth.h"

namespace lowdeg::io {

using nlohmann::json;

inline constexpr const char* kPredictorFormat = "lowdeg.predictor";
inline constexpr int kPredictorVersion = 1;

json to_json(const Space& space);
Space space_from_json(const json& j);

json to_json(const GroupFunction& c);  // throws DomainError for custom groups
GroupFunction group_from_json(const json& j);

json to_json(const HypothesisClass& cls);
HypothesisClass class_from_json(const json& j);

json to_json(const FamilyDesc& desc);
FamilyDesc family_desc_from_json(const json& j);

json to_json(const WeightFunction& w);
WeightFunction weight_from_json(const json& j, const Space& space);

// Exact round trip: doubles are written in shortest round-trip form.
json to_json(const ComposedPredictor& p);
ComposedPredictor predictor_from_json(const json& j);
void save_predictor(const std::string& path, const ComposedPredictor& p);
ComposedPredictor load_predictor(const std::string& path);

json to_json(const SynthSpec& spec);
SynthSpec spec_from_json(const json& j);
SynthSpec load_spec(const std::string& path);

json to_json(const TrainTrace& trace);
void write_trace_csv(std::ostream& out, const TrainTrace& trace);

json to_json(const AuditReport& r);
json to_json(const SandwichReport& r);
json to_json(const TprReport& r);
json to_json(const ConfusionReport& r);
json to_json(const CovarianceReport& r);
json to_json(const Matrix& m);

void write_audit_csv(std::ostream& out, const AuditReport& r);
void write_audit_text(std::ostream& out, const AuditReport& r, std::size_t top = 10);

// Parses a JSON document, rethrowing parse errors as DomainError.
json parse(const std::string& text, const std::string& source);
json load_json(const std::string& path);

}  // namespace lowdeg::io
