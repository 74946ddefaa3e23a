#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "outreach/records.hpp"

namespace outreach {

inline double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Labeled feature matrix for lookalike training. Row-major, rows() x cols().
struct TrainingSet {
  std::vector<std::string> feature_names;
  std::vector<std::string> record_ids;
  std::vector<std::string> groups;
  std::vector<int> labels;  // 1 = accountholder, 0 = sampled non-match
  std::vector<double> features;
  std::uint64_t seed = 0;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return feature_names.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * cols(), cols()};
  }
  std::size_t positives() const;

  // Rows in the given order.
  TrainingSet subset(std::span<const std::size_t> rows) const;
  template <typename T>
  void append_row(std::string id, std::string group, int label, std::span<const T> values) {
    record_ids.push_back(std::move(id));
    groups.push_back(std::move(group));
    labels.push_back(label);
    features.insert(features.end(), values.begin(), values.end());
  }
};

// Every reference row whose id is in `matched_positive_ids` becomes a
// positive; an equal number of negatives is sampled uniformly without
// replacement from the remaining rows. Positives come first, each block in
// reference order. Throws DataError when a positive id is not in the
// reference or there are too few unmatched rows.
TrainingSet build_training_set(const std::unordered_set<std::string>& matched_positive_ids,
                               const std::vector<std::string>& feature_names,
                               RecordRows reference, std::uint64_t seed);

void write_training_set(const std::filesystem::path& path, const TrainingSet& ts);
TrainingSet read_training_set(const std::filesystem::path& path);

// L1-penalized logistic model. Coefficients are stored sparsely and live on
// the standardized scale when `standardized()`; scoring applies the stored
// standardization to raw inputs.
class SparseModel {
 public:
  struct Term {
    std::size_t feature = 0;
    double coefficient = 0.0;
    bool operator==(const Term&) const = default;
  };

  std::vector<std::string> feature_names;
  double intercept = 0.0;
  std::vector<Term> terms;     // nonzero coefficients, ascending feature index
  std::vector<double> means;   // empty unless standardized
  std::vector<double> stdevs;  // empty unless standardized
  double lambda = 0.0;
  bool converged = true;
  int iterations = 0;
  std::string label;  // optional, e.g. the group a model was trained for

  bool standardized() const { return !means.empty(); }
  std::size_t nonzero_count() const { return terms.size(); }
  std::vector<double> dense_coefficients() const;

  // Intercept for raw (unstandardized) inputs.
  double raw_intercept() const;

  template <typename T>
  double linear_score(std::span<const T> x) const {
    double s = intercept;
    for (const auto& t : terms) {
      double v = static_cast<double>(x[t.feature]);
      if (standardized()) {
        v = stdevs[t.feature] > 0 ? (v - means[t.feature]) / stdevs[t.feature] : 0.0;
      }
      s += t.coefficient * v;
    }
    return s;
  }
  template <typename T>
  double score(std::span<const T> x) const {
    return logistic(linear_score(x));
  }

  bool operator==(const SparseModel&) const = default;
};

struct TrainConfig {
  double tolerance = 1e-7;  // stop when the largest coordinate update is below this
  int max_iterations = 200;  // outer Newton steps per lambda
  int max_sweeps = 5000;     // coordinate sweeps per Newton step
  bool standardize = true;
};

// Minimizes (1/n) * logistic loss + lambda * sum|coef| over (optionally
// standardized) features with an unpenalized intercept, by proximal Newton
// steps whose subproblems are solved with cyclic coordinate descent and
// soft-thresholding. Throws DataError on single-class input. A model that
// runs out of iterations is returned with converged = false.
SparseModel train_l1_logistic(const TrainingSet& ts, double lambda, const TrainConfig& config = {});

// Warm-started fits along `lambdas` (any order); result i matches lambdas[i].
std::vector<SparseModel> fit_path(const TrainingSet& ts, std::span<const double> lambdas,
                                  const TrainConfig& config = {});

// Smallest lambda at which every coefficient is zero.
double lambda_max(const TrainingSet& ts, bool standardize = true);

// `count` points, geometric from `max` down to max * min_ratio.
std::vector<double> lambda_grid(double max, int count = 50, double min_ratio = 1e-4);

struct CVConfig {
  int k = 4;
  std::vector<double> lambda_grid;  // empty: derive from the data
  int lambda_count = 50;
  double lambda_min_ratio = 1e-4;
  std::uint64_t seed = 0;
  TrainConfig train;
  std::size_t workers = 1;
};

struct CVResult {
  int k = 0;
  std::vector<int> fold_of;                // per training row
  std::vector<double> out_of_sample;       // per training row
  std::vector<SparseModel> fold_models;    // at the chosen lambda
  double chosen_lambda = 0.0;
  std::vector<double> lambda_grid;         // descending
  std::vector<double> mean_validation_loss;  // per grid point
};

// Stratified k-fold cross validation over a lambda grid. Folds deal shuffled
// positives then negatives round-robin, so fold sizes and per-fold label
// counts each differ by at most one. The chosen lambda minimizes mean
// validation log-loss (ties go to the larger lambda).
CVResult cross_validate(const TrainingSet& ts, const CVConfig& config);

struct FittedModel {
  SparseModel model;  // trained on every row at the chosen lambda
  CVResult cv;
};

FittedModel fit_with_cv(const TrainingSet& ts, const CVConfig& config);

struct ScoredRecord {
  std::string record_id;
  double score = 0.0;
  bool operator==(const ScoredRecord&) const = default;
};

// Sorts by score descending, then record_id ascending.
void rank_scores(std::vector<ScoredRecord>& scored);

// Throws DataError when `feature_names` differ from the model's.
std::vector<ScoredRecord> score_population(const SparseModel& model,
                                           const std::vector<std::string>& feature_names,
                                           RecordRows rows);

// Nonzero coefficients by descending magnitude (ties by name).
std::vector<std::pair<std::string, double>> selected_variables(const SparseModel& model);

std::string model_to_text(const SparseModel& model);
SparseModel model_from_text(std::string_view text);
void write_model(const std::filesystem::path& path, const SparseModel& model);
SparseModel read_model(const std::filesystem::path& path);

}  // namespace outreach
