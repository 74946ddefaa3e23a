#include <doctest.h>

#include <map>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "outreach/error.hpp"
#include "outreach/matching.hpp"
#include "outreach/synth.hpp"

using namespace outreach;

namespace {

constexpr PairFeature kEquality[] = {
    PairFeature::kPhoneticFirstEq, PairFeature::kPhoneticLastEq, PairFeature::kNicknameHit,
    PairFeature::kHouseNumberEq,   PairFeature::kZip5Eq,         PairFeature::kZip3Eq,
    PairFeature::kCityStateEq,     PairFeature::kPhoneEq,        PairFeature::kEmailEq,
    PairFeature::kDobEq,           PairFeature::kDobYmEq,        PairFeature::kGeoProximity};

PairFeatureVector all_ones() {
  PairFeatureVector f;
  f.values.fill(1.0);
  return f;
}

struct Fixture {
  std::vector<NormalizedRecord> reference;
  BlockingIndex index;
  ReferenceStore store;

  explicit Fixture(std::vector<NormalizedRecord> refs)
      : reference(std::move(refs)), index(build_index(reference)), store(index, reference) {}
};

}  // namespace

TEST_CASE("identity pair") {
  const auto a = fixtures::full_record("A");
  const auto f = pair_features(a, a);
  for (auto which : kEquality) CHECK(f[which] == 1.0);
  CHECK(f[PairFeature::kFirstNameSim] == 1.0);
  CHECK(f[PairFeature::kLastNameSim] == 1.0);
  CHECK(f[PairFeature::kStreetSim] == 1.0);
  CHECK(f[PairFeature::kNameRarity] > 0.99);
  for (bool m : f.missing) CHECK_FALSE(m);
  CHECK(score_pair(default_pair_model(), f) >= 0.99);
}

TEST_CASE("pair sharing nothing") {
  PersonRecord r;
  r.record_id = "B";
  r.first_name = "Zed";
  r.last_name = "Quill";
  r.street_number = "9";
  r.street_name = "Xylo Rd";
  r.city = "Boise";
  r.state = "ID";
  r.zip = "83702";
  r.phone = "2085550199";
  r.email = "zq@x.org";
  r.dob = "2001-11-30";
  const auto f = pair_features(fixtures::full_record("A"), normalize_record(r));
  for (auto which : kEquality) CHECK(f[which] == 0.0);
  CHECK(f[PairFeature::kNameRarity] == 0.0);
  CHECK(f[PairFeature::kLastNameSim] == 0.0);
  for (bool m : f.missing) CHECK_FALSE(m);
}

TEST_CASE("missing fields zero the component and set the flag") {
  auto a = fixtures::full_record("A");
  PersonRecord raw = a;
  raw.phone.clear();
  raw.dob.clear();
  const auto b = normalize_record(raw);
  const auto f = pair_features(a, b);
  CHECK(f[PairFeature::kPhoneEq] == 0.0);
  CHECK(f.is_missing(PairFeature::kPhoneEq));
  CHECK(f.is_missing(PairFeature::kDobEq));
  CHECK(f.is_missing(PairFeature::kDobYmEq));
  CHECK_FALSE(f.is_missing(PairFeature::kEmailEq));
  CHECK(pair_features(b, a) == f);
}

TEST_CASE("nickname aliases") {
  PersonRecord x, y;
  x.first_name = "WILLIAM";
  y.first_name = "BILL";
  const auto f = pair_features(normalize_record(x), normalize_record(y));
  CHECK(f[PairFeature::kNicknameHit] == 1.0);
  const auto& t = NicknameTable::bundled();
  CHECK(t.size() >= 150);
  CHECK(t.aliases("BILL", "WILLIAM"));
  CHECK(t.aliases("ROBERT", "BOB"));
  CHECK_FALSE(t.aliases("ROBERT", "WILLIAM"));
  const auto custom = NicknameTable::parse("name,alias\nXAVIER,XAV\n");
  CHECK(custom.aliases("XAV", "XAVIER"));
  MatchTables tables;
  tables.nicknames = &custom;
  CHECK(pair_features(normalize_record(x), normalize_record(y), tables)[PairFeature::kNicknameHit] == 0.0);
}

TEST_CASE("default model scores") {
  const auto& m = default_pair_model();
  CHECK(m.feature_names == pair_feature_names());
  CHECK(score_pair(m, PairFeatureVector{}) <= 0.01);
  CHECK(score_pair(m, all_ones()) >= 0.99);
  for (double c : m.dense_coefficients()) CHECK(c >= 0.0);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    PairFeatureVector f;
    for (auto& v : f.values) v = u(rng) < 0.5 ? 0.0 : u(rng);
    auto g = f;
    f[PairFeature::kPhoneEq] = 0.0;
    g[PairFeature::kPhoneEq] = 1.0;
    CHECK(score_pair(m, g) >= score_pair(m, f));
    const double s = score_pair(m, f);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("dimension mismatch is an error") {
  SparseModel m;
  m.feature_names = {"a", "b"};
  CHECK_THROWS_AS(score_pair(m, PairFeatureVector{}), DataError);
  CHECK_THROWS_AS(check_pair_model(m), DataError);
}

TEST_CASE("pair scores are symmetric on synthetic pairs") {
  const auto s = generate_scenario(fixtures::small_config(2000, 400, 6, 3));
  const auto ref = normalize_all(s.reference.records);
  const auto in = normalize_all(s.inputs.records);
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto& b = ref[(i * 37) % ref.size()];
    CHECK(pair_features(in[i], b) == pair_features(b, in[i]));
    CHECK(score_pair(default_pair_model(), pair_features(in[i], b)) ==
          score_pair(default_pair_model(), pair_features(b, in[i])));
  }
}

TEST_CASE("best match basics") {
  Fixture fx({fixtures::full_record("B"), fixtures::full_record("A")});
  SUBCASE("identical candidates tie to the smaller id") {
    const auto r = best_match(fx.index, default_pair_model(), fixtures::full_record("Q"), fx.store);
    CHECK(r.matched_id == std::optional<std::string>("A"));
    CHECK(r.accepted);
    CHECK(r.n_candidates == 2);
    CHECK(r.input_id == "Q");
  }
  SUBCASE("no candidates") {
    PersonRecord raw;
    raw.record_id = "Z";
    raw.first_name = "Zed";
    const auto r = best_match(fx.index, default_pair_model(), normalize_record(raw), fx.store);
    CHECK_FALSE(r.matched_id.has_value());
    CHECK_FALSE(r.accepted);
    CHECK(r.n_candidates == 0);
    CHECK(r.likelihood == 0.0);
  }
  SUBCASE("threshold") {
    MatchOptions opt;
    opt.accept_threshold = 1.0;
    const auto r = best_match(fx.index, default_pair_model(), fixtures::full_record("Q"), fx.store, opt);
    CHECK(r.matched_id.has_value());
    CHECK_FALSE(r.accepted);
  }
}

TEST_CASE("match rates at the extremes") {
  const auto s = generate_scenario(fixtures::small_config(1000, 10, 6, 12));
  const auto ref = normalize_all(s.reference.records);
  Fixture fx(ref);
  const auto same = match_file(fx.index, default_pair_model(), ref, fx.store);
  CHECK(same.match_rate == 1.0);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(same.results[i].input_id == ref[i].record_id);
    CHECK(same.results[i].matched_id == std::optional<std::string>(ref[i].record_id));
  }

  const auto other = generate_scenario(fixtures::small_config(500, 10, 6, 99));
  std::vector<PersonRecord> disjoint;
  for (auto r : other.reference.records) {
    r.record_id = "X" + r.record_id;
    r.first_name = "Q" + r.first_name;
    r.last_name = "ZQ" + r.last_name + "X";
    r.phone.clear();
    r.email.clear();
    r.street_number = "99999";
    r.zip = "00001";
    disjoint.push_back(std::move(r));
  }
  const auto none = match_file(fx.index, default_pair_model(), normalize_all(disjoint), fx.store);
  CHECK(none.match_rate == 0.0);
  CHECK(none.accepted == 0);
}

TEST_CASE("blocked argmax agrees with exhaustive scoring") {
  const auto s = generate_scenario(fixtures::small_config(2000, 400, 6, 31));
  const auto ref = normalize_all(s.reference.records);
  const auto in = normalize_all(s.inputs.records);
  Fixture fx(ref);
  MatchOptions opt;
  opt.workers = 3;
  const auto report = match_file(fx.index, default_pair_model(), in, fx.store, opt);
  REQUIRE(report.results.size() == in.size());
  std::size_t disagreements = 0, accepted = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto& got = report.results[i];
    CHECK(got.input_id == in[i].record_id);
    const auto brute = oracle::brute_force_match(default_pair_model(), in[i], ref);
    if (!got.accepted) continue;
    ++accepted;
    if (got.likelihood != brute.likelihood || got.matched_id != brute.id) {
      // only allowed when blocking dropped the true argmax
      const auto c = candidates(fx.index, in[i]);
      CHECK_FALSE(std::binary_search(c.begin(), c.end(), *brute.id));
      ++disagreements;
    }
  }
  CHECK(accepted > 0);
  CHECK(static_cast<double>(disagreements) <= 0.02 * static_cast<double>(accepted));
  CHECK(report.match_rate == doctest::Approx(static_cast<double>(accepted) / in.size()));
}

TEST_CASE("parallel matching preserves order and results") {
  const auto s = generate_scenario(fixtures::small_config(1500, 500, 6, 17));
  const auto ref = normalize_all(s.reference.records);
  const auto in = normalize_all(s.inputs.records);
  Fixture fx(ref);
  MatchOptions one, many;
  many.workers = 6;
  const auto a = match_file(fx.index, default_pair_model(), in, fx.store, one);
  const auto b = match_file(fx.index, default_pair_model(), in, fx.store, many);
  CHECK(a.results == b.results);
  CHECK(a.accepted == b.accepted);
}

TEST_CASE("match report round trip") {
  fixtures::TempDir dir("matching");
  MatchReport r;
  r.results.push_back({"I1", std::string("R9"), 0.875, true, 4});
  r.results.push_back({"I2", std::nullopt, 0.0, false, 0});
  r.results.push_back({"I3", std::string("R2"), 0.1234567890123, false, 12});
  r.accepted = 1;
  r.match_rate = 1.0 / 3.0;
  write_match_report(dir / "m.csv", r);
  CHECK(fixtures::read_file(dir / "m.csv").rfind("input_id,matched_id,likelihood,accepted,n_candidates\n", 0) == 0);
  const auto back = read_match_report(dir / "m.csv");
  CHECK(back.results == r.results);
  CHECK(back.accepted == 1);
  CHECK(back.match_rate == doctest::Approx(1.0 / 3.0));
  CHECK(accepted_reference_ids(back) == std::unordered_set<std::string>{"R9"});
}

TEST_CASE("supervised pair model separates labeled pairs") {
  const auto s = generate_scenario(fixtures::small_config(1500, 500, 6, 23));
  const auto ref = normalize_all(s.reference.records);
  const auto in = normalize_all(s.inputs.records);
  std::map<std::string, const NormalizedRecord*> by_id;
  for (const auto& r : ref) by_id[r.record_id] = &r;
  std::map<std::string, std::string> truth;
  for (const auto& p : s.inputs.pairs) truth[p.input_id] = p.reference_id;

  std::vector<LabeledPair> pairs;
  for (std::size_t i = 0; i < in.size(); ++i) {
    auto it = truth.find(in[i].record_id);
    if (it != truth.end()) pairs.push_back({pair_features(in[i], *by_id[it->second]), 1});
    pairs.push_back({pair_features(in[i], ref[(i * 131) % ref.size()]), 0});
  }
  const auto m = fit_pair_model(pairs);
  CHECK_FALSE(m.standardized());
  CHECK(m.feature_names == pair_feature_names());
  std::size_t correct = 0;
  for (const auto& p : pairs) correct += (score_pair(m, p.features) >= 0.5) == (p.label == 1);
  CHECK(static_cast<double>(correct) / pairs.size() >= 0.97);
}
