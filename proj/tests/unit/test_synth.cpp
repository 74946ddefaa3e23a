#include <doctest.h>

#include <map>
#include <set>

#include "fixtures.hpp"
#include "outreach/error.hpp"
#include "outreach/synth.hpp"

using namespace outreach;

namespace {

std::map<std::string, const PersonRecord*> by_id(const std::vector<PersonRecord>& rows) {
  std::map<std::string, const PersonRecord*> out;
  for (const auto& r : rows) out[r.record_id] = &r;
  return out;
}

SynthConfig no_perturbation(SynthConfig c) {
  c.typo_prob = c.nickname_prob = c.move_prob = 0.0;
  c.blank_phone_prob = c.blank_email_prob = c.blank_dob_prob = c.blank_middle_prob = 0.0;
  return c;
}

}  // namespace

TEST_CASE("population is deterministic") {
  const auto cfg = fixtures::small_config(10000, 100, 8, 77);
  const auto a = generate_population(cfg);
  const auto b = generate_population(cfg);
  CHECK(a.records == b.records);
  CHECK(a.signup == b.signup);
  CHECK(a.feature_names == b.feature_names);
  auto other = cfg;
  other.seed = 78;
  CHECK(generate_population(other).records != a.records);
}

TEST_CASE("realized shares and base rate") {
  auto cfg = fixtures::small_config(10000, 100, 8, 5);
  cfg.group_names = {"a", "b"};
  cfg.group_shares = {0.5, 0.5};
  const auto pop = generate_population(cfg);
  std::map<std::string, std::size_t> counts;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < pop.records.size(); ++i) {
    ++counts[pop.records[i].group];
    positives += pop.signup[i];
  }
  CHECK(std::abs(counts["a"] / 10000.0 - 0.5) <= 0.02);
  CHECK(std::abs(counts["b"] / 10000.0 - 0.5) <= 0.02);
  const double rate = positives / 10000.0;
  CHECK(rate >= 0.10);
  CHECK(rate <= 0.14);
}

TEST_CASE("default shares at scale") {
  const auto pop = generate_population(fixtures::small_config(30000, 10, 8, 9));
  const SynthConfig defaults;
  std::map<std::string, std::size_t> counts;
  for (const auto& r : pop.records) ++counts[r.group];
  for (std::size_t g = 0; g < defaults.group_names.size(); ++g) {
    CHECK(std::abs(counts[defaults.group_names[g]] / 30000.0 - defaults.group_shares[g]) <= 0.02);
  }
}

TEST_CASE("feature dimensionality") {
  const auto pop = generate_population(fixtures::small_config(300, 10, 620, 3));
  REQUIRE(pop.feature_names.size() == 620);
  CHECK(std::set<std::string>(pop.feature_names.begin(), pop.feature_names.end()).size() == 620);
  const SynthConfig defaults;
  for (const auto& s : defaults.signal_features) {
    CHECK(std::find(pop.feature_names.begin(), pop.feature_names.end(), s) != pop.feature_names.end());
  }
  for (const auto& r : pop.records) REQUIRE(r.features.size() == 620);
}

TEST_CASE("truth pairs reference existing ids") {
  const auto s = generate_scenario(fixtures::small_config(3000, 700, 6, 12));
  const auto refs = by_id(s.reference.records);
  const auto ins = by_id(s.inputs.records);
  CHECK(s.inputs.records.size() == 700);
  CHECK(s.truth.pairs.size() == 210);
  std::set<std::string> seen;
  for (const auto& p : s.truth.pairs) {
    CHECK(refs.count(p.reference_id) == 1);
    CHECK(ins.count(p.input_id) == 1);
    CHECK(seen.insert(p.input_id).second);
    // duplicates come from signed-up records
    CHECK(s.truth.signup.at(p.reference_id) == 1);
  }
  CHECK(s.truth.signup.size() == 3700);
  CHECK(s.truth.source.at(s.inputs.records[0].record_id) == "input");
}

TEST_CASE("zero perturbation copies identity fields exactly") {
  const auto s = generate_scenario(no_perturbation(fixtures::small_config(2000, 400, 6, 19)));
  const auto refs = by_id(s.reference.records);
  const auto ins = by_id(s.inputs.records);
  for (const auto& p : s.truth.pairs) {
    const auto& a = *ins.at(p.input_id);
    const auto& b = *refs.at(p.reference_id);
    for (std::size_t f = 1; f < kFieldCount - 1; ++f) {
      CHECK(field_ref(a, static_cast<Field>(f)) == field_ref(b, static_cast<Field>(f)));
    }
  }
}

TEST_CASE("forced typos always change the name") {
  auto cfg = no_perturbation(fixtures::small_config(2000, 400, 6, 23));
  cfg.typo_prob = 1.0;
  const auto s = generate_scenario(cfg);
  const auto refs = by_id(s.reference.records);
  const auto ins = by_id(s.inputs.records);
  for (const auto& p : s.truth.pairs) {
    CHECK(ins.at(p.input_id)->last_name != refs.at(p.reference_id)->last_name);
    CHECK(ins.at(p.input_id)->first_name != refs.at(p.reference_id)->first_name);
  }
  std::mt19937_64 rng(4);
  for (const std::string name : {"A", "LI", "SMITH", "VANDERBILT"}) {
    for (int i = 0; i < 200; ++i) CHECK(apply_typo(name, rng) != name);
  }
}

TEST_CASE("truth file round trip") {
  fixtures::TempDir dir("synth");
  const auto s = generate_scenario(fixtures::small_config(500, 100, 6, 29));
  write_truth(dir / "truth.csv", s);
  const auto t = read_truth(dir / "truth.csv");
  CHECK(t.pairs == s.truth.pairs);
  CHECK(t.signup == s.truth.signup);
  CHECK(t.source == s.truth.source);
}

TEST_CASE("config file round trip and validation") {
  const auto c = fixtures::default_config();
  CHECK(c == SynthConfig{});
  CHECK(SynthConfig::from_config(c.to_config()) == c);

  auto kv = c.to_config();
  kv.set("typo_prob", "1.5");
  CHECK_THROWS_AS(SynthConfig::from_config(kv), ConfigError);
  kv = c.to_config();
  kv.set("typo_probability", "0.1");
  CHECK_THROWS_AS(SynthConfig::from_config(kv), ConfigError);
  kv = c.to_config();
  kv.set("group_shares", "0.5,0.4,0.05,0.03,0.01");
  CHECK_THROWS_AS(SynthConfig::from_config(kv), ConfigError);
  SynthConfig empty;
  empty.reference_size = 0;
  CHECK_THROWS_AS(empty.validate(), ConfigError);
  SynthConfig too_many_dups = fixtures::small_config(100, 1000, 6, 1);
  too_many_dups.duplicate_rate = 1.0;
  CHECK_THROWS_AS(generate_scenario(too_many_dups), ConfigError);
}

TEST_CASE("group shares file") {
  fixtures::TempDir dir("synth");
  write_group_shares(dir / "p.csv", SynthConfig{});
  const auto text = fixtures::read_file(dir / "p.csv");
  CHECK(text.rfind("group,proportion\n", 0) == 0);
  CHECK(text.find("white,0.61\n") != std::string::npos);
}
