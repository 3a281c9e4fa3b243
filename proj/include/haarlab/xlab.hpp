#pragma once

#include "haarlab/measure.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace haarlab {

struct ExperimentReport {
  std::string name;
  std::map<std::string, std::string> params;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, double> summary;
  // Named assertions evaluated by the run.
  std::vector<std::pair<std::string, bool>> checks;
  std::string provenance;

  void add_row(std::vector<double> values);
  std::vector<double> column(const std::string& col) const;
  void check(const std::string& what, bool ok) { checks.emplace_back(what, ok); }
  bool passed() const;
};

// Git blob hash (SHA-1 of "blob <len>\0" + canonical JSON of name and params).
std::string provenance_hash(const std::string& name, const std::map<std::string, std::string>& params);

std::string to_json(const ExperimentReport& r);
std::string to_csv(const ExperimentReport& r);

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y);

// "lmp", "uniform", "random", or a JSON file path.
MeasureSpec measure_spec_from_token(const std::string& token, std::uint32_t depth, std::uint64_t seed);
std::string describe(const MeasureSpec& spec);

ExperimentReport run_sparse_failure(std::uint32_t jmax);
ExperimentReport run_bad_weight(std::uint32_t kmax);
ExperimentReport run_complexity_separation(std::uint32_t jmax);
// shift_token is a shift token or "maximal:N"; shift_seed feeds random shift coefficients.
ExperimentReport run_sparse_domination(const MeasureSpec& spec, const std::string& shift_token, int trials,
                                       std::uint64_t seed, std::uint64_t shift_seed = 0);
ExperimentReport run_weight_suite(const MeasureSpec& spec, double p, std::uint32_t N, int trials, std::uint64_t seed);
ExperimentReport run_czd_demo(const MeasureSpec& spec, int trials, std::uint64_t seed, bool rational);

}  // namespace haarlab
