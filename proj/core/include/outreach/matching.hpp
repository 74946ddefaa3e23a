#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "outreach/blocking.hpp"
#include "outreach/lookalike.hpp"
#include "outreach/phonetics.hpp"
#include "outreach/records.hpp"

namespace outreach {

inline constexpr std::size_t kPairFeatureCount = 16;

enum class PairFeature : std::size_t {
  kFirstNameSim,
  kLastNameSim,
  kPhoneticFirstEq,
  kPhoneticLastEq,
  kNicknameHit,
  kHouseNumberEq,
  kStreetSim,
  kZip5Eq,
  kZip3Eq,
  kCityStateEq,
  kPhoneEq,
  kEmailEq,
  kDobEq,
  kDobYmEq,
  kNameRarity,
  kGeoProximity,
};

std::string_view pair_feature_name(PairFeature f);
const std::vector<std::string>& pair_feature_names();

struct PairFeatureVector {
  std::array<double, kPairFeatureCount> values{};
  // Set when an underlying field is empty on either side; the value is then 0.
  std::array<bool, kPairFeatureCount> missing{};

  double operator[](PairFeature f) const { return values[static_cast<std::size_t>(f)]; }
  double& operator[](PairFeature f) { return values[static_cast<std::size_t>(f)]; }
  bool is_missing(PairFeature f) const { return missing[static_cast<std::size_t>(f)]; }
  bool operator==(const PairFeatureVector&) const = default;
};

// First-name aliases, symmetric.
class NicknameTable {
 public:
  static const NicknameTable& bundled();
  static NicknameTable parse(std::string_view csv_text);
  static NicknameTable load(const std::filesystem::path& path);

  void add(std::string_view a, std::string_view b);
  bool aliases(std::string_view a, std::string_view b) const;
  std::size_t size() const { return pairs_.size(); }

 private:
  std::unordered_set<std::string> pairs_;  // "A|B" with A < B
};

struct MatchTables {
  const NameFrequencyTable* surnames = &NameFrequencyTable::bundled_surnames();
  const NicknameTable* nicknames = &NicknameTable::bundled();
};

PairFeatureVector pair_features(const NormalizedRecord& a, const NormalizedRecord& b,
                                const MatchTables& tables = {});

// Shipped hand-set weights over the 16 pair features (raw scale).
const SparseModel& default_pair_model();

// Throws DataError unless the model has exactly one coefficient per pair feature.
double score_pair(const SparseModel& model, const PairFeatureVector& f);

// Validates a model for pair scoring once, up front.
void check_pair_model(const SparseModel& model);

struct MatchResult {
  std::string input_id;
  std::optional<std::string> matched_id;
  double likelihood = 0.0;
  bool accepted = false;
  std::size_t n_candidates = 0;
  bool operator==(const MatchResult&) const = default;
};

// Reference rows addressed by the index's ordinals.
class ReferenceStore {
 public:
  // `records` must hold exactly the indexed ids.
  ReferenceStore(const BlockingIndex& index, std::span<const NormalizedRecord> records);
  const NormalizedRecord& at(std::uint32_t ordinal) const { return *rows_[ordinal]; }
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<const NormalizedRecord*> rows_;
};

struct MatchOptions {
  double accept_threshold = 0.5;
  std::size_t workers = 1;
  MatchTables tables;
};

MatchResult best_match(const BlockingIndex& index, const SparseModel& model,
                       const NormalizedRecord& r, const ReferenceStore& store,
                       const MatchOptions& options = {});

struct MatchReport {
  std::vector<MatchResult> results;  // input order
  std::size_t accepted = 0;
  double match_rate = 0.0;           // accepted / total, 0 for no inputs
};

MatchReport match_file(const BlockingIndex& index, const SparseModel& model,
                       std::span<const NormalizedRecord> inputs, const ReferenceStore& store,
                       const MatchOptions& options = {});

void write_match_report(const std::filesystem::path& path, const MatchReport& report);
MatchReport read_match_report(const std::filesystem::path& path);

// Ids of matched reference records across accepted results.
std::unordered_set<std::string> accepted_reference_ids(const MatchReport& report);

struct LabeledPair {
  PairFeatureVector features;
  int label = 0;
};

// Unpenalized logistic fit on labeled pairs, on the raw feature scale.
SparseModel fit_pair_model(std::span<const LabeledPair> pairs, const TrainConfig& config = {});

}  // namespace outreach
