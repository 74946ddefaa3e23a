#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "outreach/lookalike.hpp"
#include "outreach/records.hpp"

namespace outreach {

struct GroupModel {
  SparseModel model;
  CVResult cv;
  TrainingSet training;  // the balanced rows the model was fit on
  std::size_t positives = 0;
  bool small_sample = false;
};

struct GroupModelSet {
  std::map<std::string, GroupModel> models;
  // Groups that could not be trained, with the reason.
  std::map<std::string, std::string> errors;
  std::vector<std::string> warnings;
};

struct GroupTrainConfig {
  CVConfig cv;
  std::size_t min_positives = 500;
  std::uint64_t seed = 0;  // down-sampling; group i uses seed + i in sorted group order
};

// One model per group present in `ts`, each fit only on that group's rows
// after down-sampling the majority class to a 50/50 split. A group holding a
// single class is recorded in `errors` and skipped. Rows with an empty group
// label throw DataError.
GroupModelSet train_group_models(const TrainingSet& ts, const GroupTrainConfig& config);

// Largest-remainder apportionment. Proportions must be non-negative and sum
// to 1 within 1e-9; leftover units go to the largest fractional remainders,
// ties broken by group name.
std::map<std::string, std::size_t> apportion(std::size_t n,
                                             const std::map<std::string, double>& proportions);

std::map<std::string, double> read_proportions(const std::filesystem::path& path);

struct TargetEntry {
  std::string record_id;
  std::string group;
  double score = 0.0;
  bool operator==(const TargetEntry&) const = default;
};

struct TargetList {
  std::vector<TargetEntry> entries;
  std::map<std::string, std::size_t> quotas;
  std::map<std::string, std::size_t> shortfalls;  // quota minus available rows, when positive
  std::size_t unlabeled = 0;                      // population rows without a group
  std::size_t excluded = 0;                       // rows dropped as existing accountholders
  std::size_t size = 0;                           // requested N

  std::map<std::string, std::size_t> counts() const;
};

struct PullOptions {
  std::size_t workers = 1;
};

// Scores each group's rows with that group's model only and keeps the
// group's top quota (score descending, record_id ascending). Groups are
// interleaved in the final order by within-group position relative to quota,
// then by group name. Rows whose id is in `exclude` are skipped. Throws
// DataError when a group with a positive quota has no model.
TargetList proportional_pull(const std::map<std::string, SparseModel>& models,
                             const std::vector<std::string>& feature_names, RecordRows population,
                             std::size_t n, const std::map<std::string, double>& proportions,
                             const std::unordered_set<std::string>& exclude = {},
                             const PullOptions& options = {});

void write_target_list(const std::filesystem::path& path, const TargetList& list);

}  // namespace outreach
