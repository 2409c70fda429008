#pragma once

#include <iosfwd>
#include <string>

#include "lowdeg/dataset.h"
#include "lowdeg/learner.h"

namespace lowdeg::cli {

enum Exit : int { kOk = 0, kGateFail = 1, kInputError = 2, kNonTermination = 3 };

// Entry point of the lowdeg tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// "columns" (every feature column), "columns:0,2,5", "stumps:<col>:<t1>,<t2>"
// or "file:<path>" (class JSON). Column classes start with the all-ones group.
HypothesisClass parse_class(const std::string& desc, const Dataset& ds, bool complements = false);

}  // namespace lowdeg::cli
