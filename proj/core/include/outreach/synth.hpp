#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "outreach/config.hpp"
#include "outreach/records.hpp"

namespace outreach {

struct SynthConfig {
  std::uint64_t seed = 20240601;
  std::size_t reference_size = 100000;
  std::size_t input_size = 10000;
  double duplicate_rate = 0.30;

  // Per-duplicate perturbation probabilities.
  double typo_prob = 0.08;         // applied to first and last name independently
  double nickname_prob = 0.08;
  double move_prob = 0.10;
  double blank_phone_prob = 0.15;
  double blank_email_prob = 0.15;
  double blank_dob_prob = 0.05;
  double blank_middle_prob = 0.30;

  // Fields absent from reference rows.
  double ref_missing_phone_prob = 0.10;
  double ref_missing_email_prob = 0.20;

  std::vector<std::string> group_names = {"white", "hispanic", "black", "asian", "native"};
  std::vector<double> group_shares = {0.61, 0.17, 0.14, 0.06, 0.02};

  std::size_t feature_count = 620;
  std::vector<std::string> signal_features = {"parent_prob",    "income",
                                              "homeowner_prob", "tract_income",
                                              "age",            "years_at_address"};
  std::vector<double> signal_weights = {1.3, 1.2, 0.8, 0.7, 0.6, 0.5};
  double base_rate = 0.12;

  static SynthConfig from_config(const KeyValueConfig& kv);
  static SynthConfig load(const std::filesystem::path& path);
  KeyValueConfig to_config() const;

  // Throws ConfigError on an infeasible or inconsistent configuration.
  void validate() const;

  bool operator==(const SynthConfig&) const = default;
};

struct TruthPair {
  std::string input_id;
  std::string reference_id;
  bool operator==(const TruthPair&) const = default;
};

struct TruthSet {
  std::vector<TruthPair> pairs;                      // input order
  std::map<std::string, int> signup;                 // per reference and input id
  std::map<std::string, std::string> source;         // "reference" | "input"
};

struct Population {
  std::vector<std::string> feature_names;
  std::vector<PersonRecord> records;
  std::vector<int> signup;  // parallel to records
  double intercept = 0.0;   // calibrated logistic intercept
};

struct InputFile {
  std::vector<PersonRecord> records;
  std::vector<TruthPair> pairs;
};

// Reference population with group labels, features and signup labels drawn
// from a logistic model over the signal features.
Population generate_population(const SynthConfig& cfg);

// Inputs are perturbed copies of signed-up reference rows plus fresh
// distractor people, shuffled together. Inputs carry identity fields only.
InputFile perturb_duplicates(const Population& reference, const SynthConfig& cfg);

struct Scenario {
  Population reference;
  InputFile inputs;
  TruthSet truth;
};

Scenario generate_scenario(const SynthConfig& cfg);

// record_id,source,signup,duplicate_of
void write_truth(const std::filesystem::path& path, const Scenario& scenario);
TruthSet read_truth(const std::filesystem::path& path);

// group,proportion from the configured shares.
void write_group_shares(const std::filesystem::path& path, const SynthConfig& cfg);

// Single character edit that always changes a name of two or more letters.
std::string apply_typo(const std::string& name, std::mt19937_64& rng);

}  // namespace outreach
