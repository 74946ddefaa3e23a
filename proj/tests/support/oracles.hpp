#pragma once

// Independent reference implementations used only by tests. They are written
// for clarity rather than speed and share no code with the library paths they
// check.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "outreach/eval.hpp"
#include "outreach/lookalike.hpp"
#include "outreach/matching.hpp"
#include "outreach/records.hpp"

namespace oracle {

// Soundex from the published coding rules, letter by letter.
std::string soundex(const std::string& name);

// Jaro similarity with explicit match flags, then the Winkler prefix boost.
double jaro_winkler(const std::string& a, const std::string& b);

// Penalized objective (1/n) sum logloss + lambda * |beta|_1 on a dense design.
struct Problem {
  std::vector<std::vector<double>> x;  // rows
  std::vector<int> y;
};
double objective(const Problem& p, double b0, const std::vector<double>& beta, double lambda);
// Gradient of the unpenalized average loss: [d/d b0, d/d beta_j...].
std::vector<double> loss_gradient(const Problem& p, double b0, const std::vector<double>& beta);
std::vector<double> finite_difference_gradient(const Problem& p, double b0,
                                               const std::vector<double>& beta, double h = 1e-6);

struct Solution {
  double b0 = 0.0;
  std::vector<double> beta;
  double objective = 0.0;
};
// Accelerated proximal gradient with a fixed 1/L step, run to a tight
// tolerance; raw (unstandardized) features.
Solution proximal_gradient(const Problem& p, double lambda, int max_iter = 200000);

// Standardizes columns with population sd, as the trainer does.
Problem standardized(const Problem& p);

Problem to_problem(const outreach::TrainingSet& ts);

// Exhaustive best match: every reference record is scored.
struct BruteMatch {
  std::optional<std::string> id;
  double likelihood = 0.0;
};
BruteMatch brute_force_match(const outreach::SparseModel& model,
                             const outreach::NormalizedRecord& r,
                             std::span<const outreach::NormalizedRecord> reference);

// Sort-and-count decile table: explicit bin edges, counting per bin.
outreach::DecileTable decile_table(const std::vector<std::string>& ids,
                                   const std::vector<double>& scores,
                                   const std::vector<int>& labels);

// Hamilton apportionment by exhaustive comparison of remainders.
std::map<std::string, std::size_t> hamilton(std::size_t n, const std::map<std::string, double>& p);

}  // namespace oracle
