#include "outreach/matching.hpp"

#include <algorithm>
#include <fstream>

#include "outreach/bundled_data.hpp"
#include "outreach/csv.hpp"
#include "outreach/error.hpp"
#include "outreach/format.hpp"
#include "outreach/parallel.hpp"

namespace outreach {

namespace {

constexpr std::array<std::string_view, kPairFeatureCount> kPairFeatureNames = {
    "first_name_sim", "last_name_sim",  "phonetic_first_eq", "phonetic_last_eq",
    "nickname_hit",   "house_number_eq", "street_sim",       "zip5_eq",
    "zip3_eq",        "city_state_eq",  "phone_eq",          "email_eq",
    "dob_eq",         "dob_ym_eq",      "name_rarity",       "geo_proximity",
};

std::string alias_key(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  std::string key(a);
  key.push_back('|');
  key.append(b);
  return key;
}

}  // namespace

std::string_view pair_feature_name(PairFeature f) {
  return kPairFeatureNames[static_cast<std::size_t>(f)];
}

const std::vector<std::string>& pair_feature_names() {
  static const std::vector<std::string> names(kPairFeatureNames.begin(), kPairFeatureNames.end());
  return names;
}

NicknameTable NicknameTable::parse(std::string_view csv_text) {
  const CsvTable t = parse_csv(csv_text);
  const int name = t.column("name");
  const int alias = t.column("alias");
  if (name < 0 || alias < 0) throw DataError("nickname table needs columns name,alias");
  NicknameTable table;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw DataError("nickname table: ragged row");
    table.add(row[name], row[alias]);
  }
  return table;
}

NicknameTable NicknameTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read nickname table '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text);
}

const NicknameTable& NicknameTable::bundled() {
  static const NicknameTable table = parse(bundled::nicknames());
  return table;
}

void NicknameTable::add(std::string_view a, std::string_view b) {
  const std::string na = normalize_name(a);
  const std::string nb = normalize_name(b);
  if (na.empty() || nb.empty() || na == nb) return;
  pairs_.insert(alias_key(na, nb));
}

bool NicknameTable::aliases(std::string_view a, std::string_view b) const {
  return pairs_.count(alias_key(a, b)) > 0;
}

PairFeatureVector pair_features(const NormalizedRecord& a, const NormalizedRecord& b,
                                const MatchTables& tables) {
  PairFeatureVector f;
  auto set = [&](PairFeature which, bool present, double value) {
    const auto i = static_cast<std::size_t>(which);
    f.missing[i] = !present;
    f.values[i] = present ? value : 0.0;
  };
  auto both = [](const std::string& x, const std::string& y) { return !x.empty() && !y.empty(); };
  auto eq = [](bool v) { return v ? 1.0 : 0.0; };

  const bool first = both(a.first_name, b.first_name);
  const bool last = both(a.last_name, b.last_name);
  set(PairFeature::kFirstNameSim, first, first ? string_similarity(a.first_name, b.first_name) : 0);
  set(PairFeature::kLastNameSim, last, last ? string_similarity(a.last_name, b.last_name) : 0);
  set(PairFeature::kPhoneticFirstEq, first,
      first && eq(phonetic_code(a.first_name) == phonetic_code(b.first_name)));
  set(PairFeature::kPhoneticLastEq, last,
      last && eq(phonetic_code(a.last_name) == phonetic_code(b.last_name)));
  set(PairFeature::kNicknameHit, first,
      first && eq(a.first_name == b.first_name ||
                  tables.nicknames->aliases(a.first_name, b.first_name)));

  const bool house = both(a.street_number, b.street_number);
  set(PairFeature::kHouseNumberEq, house, eq(house && a.street_number == b.street_number));
  const bool street = both(a.street_name, b.street_name);
  set(PairFeature::kStreetSim, street, street ? string_similarity(a.street_name, b.street_name) : 0);

  const bool zip = both(a.zip, b.zip);
  const bool zip3 = zip && a.zip.compare(0, 3, b.zip, 0, 3) == 0;
  set(PairFeature::kZip5Eq, zip, eq(zip && a.zip == b.zip));
  set(PairFeature::kZip3Eq, zip, eq(zip3));
  const bool place = both(a.city, b.city) && both(a.state, b.state);
  set(PairFeature::kCityStateEq, place, eq(place && a.city == b.city && a.state == b.state));

  const bool phone = both(a.phone, b.phone);
  set(PairFeature::kPhoneEq, phone, eq(phone && a.phone == b.phone));
  const bool email = both(a.email, b.email);
  set(PairFeature::kEmailEq, email, eq(email && a.email == b.email));
  const bool dob = both(a.dob, b.dob);
  set(PairFeature::kDobEq, dob, eq(dob && a.dob == b.dob));
  const std::string ym_a = dob_year_month(a.dob);
  const std::string ym_b = dob_year_month(b.dob);
  const bool ym = !ym_a.empty() && !ym_b.empty();
  set(PairFeature::kDobYmEq, ym, eq(ym && ym_a == ym_b));

  // Agreement on a rare surname is stronger evidence than on a common one.
  set(PairFeature::kNameRarity, last,
      last && a.last_name == b.last_name
          ? 1.0 - name_commonness(a.last_name, *tables.surnames)
          : 0.0);
  set(PairFeature::kGeoProximity, zip, eq(zip3));
  return f;
}

const SparseModel& default_pair_model() {
  static const SparseModel model = [] {
    SparseModel m;
    m.feature_names = pair_feature_names();
    m.label = "default-pair-model";
    m.intercept = -11.0;
    const std::array<double, kPairFeatureCount> weights = {
        2.5,  // first_name_sim
        3.0,  // last_name_sim
        0.5,  // phonetic_first_eq
        0.5,  // phonetic_last_eq
        1.0,  // nickname_hit
        1.0,  // house_number_eq
        0.8,  // street_sim
        1.0,  // zip5_eq
        0.3,  // zip3_eq
        0.7,  // city_state_eq
        3.0,  // phone_eq
        3.0,  // email_eq
        3.0,  // dob_eq
        0.8,  // dob_ym_eq
        0.5,  // name_rarity
        0.2,  // geo_proximity
    };
    for (std::size_t j = 0; j < kPairFeatureCount; ++j) m.terms.push_back({j, weights[j]});
    return m;
  }();
  return model;
}

void check_pair_model(const SparseModel& model) {
  if (model.feature_names.size() != kPairFeatureCount) {
    throw DataError("pair model has " + std::to_string(model.feature_names.size()) +
                    " features, expected " + std::to_string(kPairFeatureCount));
  }
  for (const auto& t : model.terms) {
    if (t.feature >= kPairFeatureCount) throw DataError("pair model term out of range");
  }
}

double score_pair(const SparseModel& model, const PairFeatureVector& f) {
  check_pair_model(model);
  return model.score(std::span<const double>(f.values));
}

ReferenceStore::ReferenceStore(const BlockingIndex& index,
                               std::span<const NormalizedRecord> records) {
  std::unordered_map<std::string_view, const NormalizedRecord*> by_id;
  by_id.reserve(records.size());
  for (const auto& r : records) by_id.emplace(r.record_id, &r);
  rows_.reserve(index.ids().size());
  for (const auto& id : index.ids()) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw DataError("indexed id '" + id + "' is missing from the reference records");
    }
    rows_.push_back(it->second);
  }
}

namespace {

MatchResult match_one(const BlockingIndex& index, const SparseModel& model,
                      const NormalizedRecord& r, const ReferenceStore& store,
                      const MatchOptions& options) {
  MatchResult result;
  result.input_id = r.record_id;
  const auto ordinals = index.candidate_ordinals(r);
  result.n_candidates = ordinals.size();
  // Ordinals ascend with record id, so strict > keeps the smaller id on ties.
  double best = -1.0;
  std::uint32_t best_ord = 0;
  for (auto ord : ordinals) {
    const PairFeatureVector f = pair_features(r, store.at(ord), options.tables);
    const double s = model.score(std::span<const double>(f.values));
    if (s > best) {
      best = s;
      best_ord = ord;
    }
  }
  if (ordinals.empty()) return result;
  result.matched_id = index.ids()[best_ord];
  result.likelihood = best;
  result.accepted = best >= options.accept_threshold;
  return result;
}

}  // namespace

MatchResult best_match(const BlockingIndex& index, const SparseModel& model,
                       const NormalizedRecord& r, const ReferenceStore& store,
                       const MatchOptions& options) {
  check_pair_model(model);
  return match_one(index, model, r, store, options);
}

MatchReport match_file(const BlockingIndex& index, const SparseModel& model,
                       std::span<const NormalizedRecord> inputs, const ReferenceStore& store,
                       const MatchOptions& options) {
  check_pair_model(model);
  MatchReport report;
  report.results.resize(inputs.size());
  parallel_for(inputs.size(), options.workers, [&](std::size_t i) {
    report.results[i] = match_one(index, model, inputs[i], store, options);
  });
  for (const auto& r : report.results) report.accepted += r.accepted ? 1 : 0;
  if (!inputs.empty()) {
    report.match_rate = static_cast<double>(report.accepted) / static_cast<double>(inputs.size());
  }
  return report;
}

void write_match_report(const std::filesystem::path& path, const MatchReport& report) {
  CsvWriter out(path);
  out.row({"input_id", "matched_id", "likelihood", "accepted", "n_candidates"});
  for (const auto& r : report.results) {
    out.field(r.input_id).field(r.matched_id.value_or(""));
    out.field(r.likelihood).field(r.accepted ? 1 : 0).field(r.n_candidates);
    out.end_row();
  }
  out.flush();
}

MatchReport read_match_report(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const std::vector<std::string> expected = {"input_id", "matched_id", "likelihood", "accepted",
                                             "n_candidates"};
  if (t.header != expected) {
    throw DataError(path.string() + ": expected header input_id,matched_id,likelihood,accepted,n_candidates");
  }
  MatchReport report;
  for (const auto& row : t.rows) {
    if (row.size() != expected.size()) throw DataError(path.string() + ": ragged row");
    MatchResult r;
    r.input_id = row[0];
    if (!row[1].empty()) r.matched_id = row[1];
    const auto likelihood = parse_double(row[2]);
    const auto accepted = parse_int(row[3]);
    const auto n = parse_int(row[4]);
    if (!likelihood || !accepted || !n || *n < 0) {
      throw DataError(path.string() + ": bad values for '" + r.input_id + "'");
    }
    r.likelihood = *likelihood;
    r.accepted = *accepted != 0;
    r.n_candidates = static_cast<std::size_t>(*n);
    if (r.accepted && !r.matched_id) throw DataError(path.string() + ": accepted row without match");
    report.accepted += r.accepted ? 1 : 0;
    report.results.push_back(std::move(r));
  }
  if (!report.results.empty()) {
    report.match_rate =
        static_cast<double>(report.accepted) / static_cast<double>(report.results.size());
  }
  return report;
}

std::unordered_set<std::string> accepted_reference_ids(const MatchReport& report) {
  std::unordered_set<std::string> ids;
  for (const auto& r : report.results) {
    if (r.accepted) ids.insert(*r.matched_id);
  }
  return ids;
}

SparseModel fit_pair_model(std::span<const LabeledPair> pairs, const TrainConfig& config) {
  TrainingSet ts;
  ts.feature_names = pair_feature_names();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ts.append_row("pair" + std::to_string(i), "", pairs[i].label,
                  std::span<const double>(pairs[i].features.values));
  }
  TrainConfig raw = config;
  raw.standardize = false;
  SparseModel m = train_l1_logistic(ts, 0.0, raw);
  m.label = "fitted-pair-model";
  return m;
}

}  // namespace outreach
