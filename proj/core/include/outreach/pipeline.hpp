#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "outreach/balance.hpp"
#include "outreach/blocking.hpp"
#include "outreach/config.hpp"
#include "outreach/eval.hpp"
#include "outreach/lookalike.hpp"
#include "outreach/matching.hpp"
#include "outreach/records.hpp"

namespace outreach {

struct RunConfig {
  std::filesystem::path reference;
  std::filesystem::path input;
  std::filesystem::path proportions;
  std::filesystem::path truth;  // optional: signup labels for evaluation
  std::filesystem::path output_dir;
  std::filesystem::path pair_model;  // optional: replaces the shipped pair model
  std::filesystem::path abbreviations;  // optional: replaces the bundled table

  ColumnMapping mapping;
  std::map<std::string, std::string> mapping_entries;

  Backend backend = Backend::kMemory;
  std::size_t hot_key_cap = 1000;
  bool exclude_hot = true;
  double accept_threshold = 0.5;

  int cv_k = 4;
  std::vector<double> lambdas;  // empty: geometric grid
  int lambda_count = 50;
  double lambda_min_ratio = 1e-4;
  double tolerance = 1e-7;
  int max_iterations = 200;

  std::size_t targets = 10000;
  std::size_t min_positives = 500;

  std::uint64_t training_seed = 1;
  std::uint64_t cv_seed = 2;
  std::uint64_t balance_seed = 3;
  std::size_t workers = 4;

  // Defaults, then `file` entries, then `overrides`. Unknown keys throw ConfigError.
  static RunConfig resolve(const KeyValueConfig& file, const KeyValueConfig& overrides = {});
  KeyValueConfig to_config() const;

  CVConfig cv_config() const;
};

struct StageSummary {
  std::size_t reference_rows = 0;
  std::size_t input_rows = 0;
  std::size_t reference_row_errors = 0;
  std::size_t input_row_errors = 0;
  IndexStats index;
  double mean_candidates = 0.0;
  MatchReport matches;
  std::size_t training_rows = 0;
  std::size_t training_positives = 0;
  SparseModel pooled_model;
  double pooled_lambda = 0.0;
  std::map<std::string, SparseModel> group_models;
  std::map<std::string, std::string> group_errors;
  std::vector<std::string> warnings;
  TargetList targets;
  std::string label_source;
  std::map<std::string, DecileTable> deciles;  // "pooled" plus one per group
};

struct RunResult {
  StageSummary summary;
  std::string report;
  std::filesystem::path report_path;
};

// Runs every stage and writes its artifact under cfg.output_dir. A stage
// failure is rethrown as StageError naming the stage.
RunResult run_pipeline(const RunConfig& cfg);

// Human-readable summary; contains no timings so reruns are byte-identical.
std::string render_report(const RunConfig& cfg, const StageSummary& s);

// Row errors as CSV: file,line,record_id,reason.
void write_row_errors(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, RowError>>& errors);

// record_id,group,score,group_score,label for evaluation.
struct ScoreRow {
  std::string record_id;
  std::string group;
  double score = 0.0;
  double group_score = 0.0;
  int label = 0;
};
void write_scores(const std::filesystem::path& path, const std::vector<ScoreRow>& rows);

// Decile tables from a scores CSV. With `by_group`, one table per value of
// the group column plus "pooled".
std::map<std::string, DecileTable> decile_tables_from_csv(const std::filesystem::path& scores,
                                                          const std::string& score_column,
                                                          const std::string& label_column,
                                                          bool by_group);

}  // namespace outreach
