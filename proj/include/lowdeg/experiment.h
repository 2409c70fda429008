#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lowdeg/synth.h"

namespace lowdeg {

struct Split {
  Dataset train;
  Dataset test;
};

// Seeded shuffle; the first ceil((1 - test_fraction) n) records train.
Split train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed);

struct CompareConfig {
  SynthSpec spec;
  std::vector<std::size_t> sizes;      // training-set sizes
  std::vector<std::uint64_t> seeds;
  double alpha = 0.02;
  double delta = 0.1;                  // interval width for MC-full
  double test_fraction = 0.2;
  std::optional<int> max_iterations;
};

struct CompareRow {
  std::string method;  // MA, MC2, MC-full
  std::size_t size = 0;
  std::uint64_t seed = 0;
  std::string split;   // train, test
  std::string metric;  // multiaccuracy_error, excess_variance
  double value = 0.0;
  std::string status = "ok";
};

// For each (size, seed): generates spec.n = size / (1 - test_fraction)
// records with the cell seed, splits them, boosts each method from 1/2 in
// binary mode and evaluates both metrics on both splits. A failed sub-run
// yields NaN rows carrying the error message. Rows are sorted by
// (size, seed, method, split, metric).
std::vector<CompareRow> run_compare(const CompareConfig& config);
void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows);

// Median of the values of matching rows.
double median_metric(const std::vector<CompareRow>& rows, const std::string& method,
                     std::size_t size, const std::string& split, const std::string& metric);

}  // namespace lowdeg
