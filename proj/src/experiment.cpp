#include "lowdeg/experiment.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <tuple>

#include "lowdeg/audit.h"
#include "lowdeg/boost.h"
#include "lowdeg/error.h"

namespace lowdeg {

Split train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw DomainError("test fraction must lie in (0,1)");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto cut = std::size_t(std::ceil((1.0 - test_fraction) * double(ds.size())));
  if (cut == 0 || cut >= ds.size()) throw DomainError("split leaves an empty side");
  std::vector<std::size_t> train(order.begin(), order.begin() + long(cut));
  std::vector<std::size_t> test(order.begin() + long(cut), order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {ds.select(train), ds.select(test)};
}

std::vector<CompareRow> run_compare(const CompareConfig& config) {
  if (config.spec.l != 2) throw DomainError("the comparison experiment is binary");
  if (config.sizes.empty() || config.seeds.empty()) throw DomainError("need at least one size and seed");
  const Space space = Space::binary();
  const std::vector<std::pair<std::string, WeightFamily>> methods = {
      {"MA", constant_family(space)},
      {"MC2", monomial_family(space, 2)},
      {"MC-full", interval_family(space, config.delta)},
  };
  std::vector<CompareRow> rows;
  for (std::size_t size : config.sizes) {
    for (std::uint64_t seed : config.seeds) {
      SynthSpec spec = config.spec;
      spec.seed = seed;
      spec.n = std::size_t(std::ceil(double(size) / (1.0 - config.test_fraction)));
      const Dataset all = generate(spec);
      const Split split = train_test_split(all, config.test_fraction, seed);
      const HypothesisClass cls = spec_class(spec, all);
      for (const auto& [name, family] : methods) {
        auto emit = [&, name = name](const std::string& which, const std::string& metric, double v,
                                     const std::string& status) {
          rows.push_back({name, size, seed, which, metric, v, status});
        };
        try {
          BoostConfig bc;
          bc.alpha = config.alpha;
          bc.max_iterations = config.max_iterations;
          bc.seed = seed;
          const auto result = multicalibrate(split.train, cls, family, bc);
          for (const auto& [which, data] : {std::pair<std::string, const Dataset*>{"train", &split.train},
                                            {"test", &split.test}}) {
            const auto m = experiment_metrics(evaluate(result.predictor, *data), cls, *data);
            emit(which, "multiaccuracy_error", m.multiaccuracy_error, "ok");
            emit(which, "excess_variance", m.excess_variance, "ok");
          }
        } catch (const std::exception& e) {
          const double nan = std::numeric_limits<double>::quiet_NaN();
          for (const char* which : {"train", "test"}) {
            emit(which, "multiaccuracy_error", nan, e.what());
            emit(which, "excess_variance", nan, e.what());
          }
        }
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const CompareRow& a, const CompareRow& b) {
    return std::tie(a.size, a.seed, a.method, a.split, a.metric) <
           std::tie(b.size, b.seed, b.method, b.split, b.metric);
  });
  return rows;
}

void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows) {
  out << "method,size,seed,split,metric,value,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << r.method << "," << r.size << "," << r.seed << "," << r.split << "," << r.metric << ","
        << (std::isnan(r.value) ? std::string("nan") : format_double(r.value)) << "," << status << "\n";
  }
}

double median_metric(const std::vector<CompareRow>& rows, const std::string& method,
                     std::size_t size, const std::string& split, const std::string& metric) {
  std::vector<double> v;
  for (const auto& r : rows) {
    if (r.method == method && r.size == size && r.split == split && r.metric == metric &&
        !std::isnan(r.value)) {
      v.push_back(r.value);
    }
  }
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace lowdeg
