#include "outreach/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "outreach/bundled_data.hpp"
#include "outreach/csv.hpp"
#include "outreach/error.hpp"
#include "outreach/format.hpp"
#include "outreach/lookalike.hpp"

namespace outreach {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    const auto item = trim(std::string_view(text).substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

std::string join_doubles(const std::vector<double>& values) {
  std::vector<std::string> parts;
  for (double v : values) parts.push_back(format_double(v));
  return join_list(parts);
}

std::size_t get_size(const KeyValueConfig& kv, std::string_view key, std::size_t fallback) {
  const long long v = kv.get_int(key, static_cast<long long>(fallback));
  if (v < 0) throw ConfigError(std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "seed",           "reference_size",         "input_size",
      "duplicate_rate", "typo_prob",              "nickname_prob",
      "move_prob",      "blank_phone_prob",       "blank_email_prob",
      "blank_dob_prob", "blank_middle_prob",      "ref_missing_phone_prob",
      "ref_missing_email_prob", "group_names",    "group_shares",
      "feature_count",  "signal_features",        "signal_weights",
      "base_rate",
  };
  return keys;
}

}  // namespace

SynthConfig SynthConfig::from_config(const KeyValueConfig& kv) {
  for (const auto& [key, value] : kv.entries()) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown synth setting '" + key + "'");
    }
  }
  SynthConfig c;
  const long long seed = kv.get_int("seed", static_cast<long long>(c.seed));
  if (seed < 0) throw ConfigError("seed must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  c.reference_size = get_size(kv, "reference_size", c.reference_size);
  c.input_size = get_size(kv, "input_size", c.input_size);
  c.duplicate_rate = kv.get_double("duplicate_rate", c.duplicate_rate);
  c.typo_prob = kv.get_double("typo_prob", c.typo_prob);
  c.nickname_prob = kv.get_double("nickname_prob", c.nickname_prob);
  c.move_prob = kv.get_double("move_prob", c.move_prob);
  c.blank_phone_prob = kv.get_double("blank_phone_prob", c.blank_phone_prob);
  c.blank_email_prob = kv.get_double("blank_email_prob", c.blank_email_prob);
  c.blank_dob_prob = kv.get_double("blank_dob_prob", c.blank_dob_prob);
  c.blank_middle_prob = kv.get_double("blank_middle_prob", c.blank_middle_prob);
  c.ref_missing_phone_prob = kv.get_double("ref_missing_phone_prob", c.ref_missing_phone_prob);
  c.ref_missing_email_prob = kv.get_double("ref_missing_email_prob", c.ref_missing_email_prob);
  if (auto v = kv.find("group_names")) c.group_names = split_list(*v);
  c.group_shares = kv.get_doubles("group_shares", c.group_shares);
  c.feature_count = get_size(kv, "feature_count", c.feature_count);
  if (auto v = kv.find("signal_features")) c.signal_features = split_list(*v);
  c.signal_weights = kv.get_doubles("signal_weights", c.signal_weights);
  c.base_rate = kv.get_double("base_rate", c.base_rate);
  c.validate();
  return c;
}

SynthConfig SynthConfig::load(const std::filesystem::path& path) {
  return from_config(KeyValueConfig::load(path));
}

KeyValueConfig SynthConfig::to_config() const {
  KeyValueConfig kv;
  kv.set("seed", std::to_string(seed));
  kv.set("reference_size", std::to_string(reference_size));
  kv.set("input_size", std::to_string(input_size));
  kv.set("duplicate_rate", format_double(duplicate_rate));
  kv.set("typo_prob", format_double(typo_prob));
  kv.set("nickname_prob", format_double(nickname_prob));
  kv.set("move_prob", format_double(move_prob));
  kv.set("blank_phone_prob", format_double(blank_phone_prob));
  kv.set("blank_email_prob", format_double(blank_email_prob));
  kv.set("blank_dob_prob", format_double(blank_dob_prob));
  kv.set("blank_middle_prob", format_double(blank_middle_prob));
  kv.set("ref_missing_phone_prob", format_double(ref_missing_phone_prob));
  kv.set("ref_missing_email_prob", format_double(ref_missing_email_prob));
  kv.set("group_names", join_list(group_names));
  kv.set("group_shares", join_doubles(group_shares));
  kv.set("feature_count", std::to_string(feature_count));
  kv.set("signal_features", join_list(signal_features));
  kv.set("signal_weights", join_doubles(signal_weights));
  kv.set("base_rate", format_double(base_rate));
  return kv;
}

void SynthConfig::validate() const {
  auto prob = [](std::string_view name, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must be in [0,1]");
  };
  prob("duplicate_rate", duplicate_rate);
  prob("typo_prob", typo_prob);
  prob("nickname_prob", nickname_prob);
  prob("move_prob", move_prob);
  prob("blank_phone_prob", blank_phone_prob);
  prob("blank_email_prob", blank_email_prob);
  prob("blank_dob_prob", blank_dob_prob);
  prob("blank_middle_prob", blank_middle_prob);
  prob("ref_missing_phone_prob", ref_missing_phone_prob);
  prob("ref_missing_email_prob", ref_missing_email_prob);
  if (reference_size == 0) throw ConfigError("reference_size must be > 0");
  if (reference_size > 9999999 || input_size > 9999999) {
    throw ConfigError("sizes above 9,999,999 records are not supported");
  }
  if (group_names.empty() || group_names.size() != group_shares.size()) {
    throw ConfigError("group_names and group_shares must be non-empty and the same length");
  }
  double total = 0.0;
  for (double s : group_shares) {
    if (!(s >= 0.0)) throw ConfigError("group shares must be non-negative");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("group shares must sum to 1");
  for (const auto& g : group_names) {
    if (g.find_first_of(",/\\ \t\r\n") != std::string::npos) {
      throw ConfigError("group name '" + g + "' contains a separator or whitespace");
    }
  }
  if (signal_features.size() != signal_weights.size()) {
    throw ConfigError("signal_features and signal_weights must be the same length");
  }
  if (signal_features.size() > feature_count) {
    throw ConfigError("feature_count is smaller than the number of signal features");
  }
  if (!(base_rate > 0.0 && base_rate < 1.0)) {
    throw ConfigError("base_rate must be strictly between 0 and 1");
  }
}

namespace {

struct WeightedNames {
  std::vector<std::string> names;
  std::discrete_distribution<std::size_t> pick;
};

WeightedNames load_names(std::string_view csv_text) {
  const CsvTable t = parse_csv(csv_text);
  std::vector<double> weights;
  WeightedNames out;
  for (const auto& row : t.rows) {
    out.names.push_back(row[0]);
    weights.push_back(*parse_double(row[1]));
  }
  out.pick = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
  return out;
}

struct Place {
  std::string city;
  std::string state;
  std::vector<std::string> zips;
};

std::string title_case(std::string_view upper) {
  std::string out(upper);
  bool start = true;
  for (char& c : out) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      c = start ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      start = false;
    } else {
      start = c == ' ' || c == '-';
    }
  }
  return out;
}

class Generator {
 public:
  Generator()
      : forenames_(load_names(bundled::forenames())), surnames_(load_names(bundled::surnames())) {
    const CsvTable places = parse_csv(bundled::places());
    std::vector<double> weights;
    for (const auto& row : places.rows) {
      Place p{title_case(row[0]), row[1], {}};
      std::string_view zips = row[3];
      while (!zips.empty()) {
        const auto space = zips.find(' ');
        p.zips.emplace_back(zips.substr(0, space));
        zips = space == std::string_view::npos ? std::string_view() : zips.substr(space + 1);
      }
      places_.push_back(std::move(p));
      weights.push_back(*parse_double(row[2]));
    }
    pick_place_ = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
    for (const auto& row : parse_csv(bundled::streets()).rows) streets_.push_back(row[0]);
    for (const auto& row : parse_csv(bundled::nicknames()).rows) {
      aliases_[row[0]].push_back(row[1]);
      aliases_[row[1]].push_back(row[0]);
    }
    for (auto& [name, list] : aliases_) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
  }

  PersonRecord person(std::mt19937_64& rng, double missing_phone, double missing_email) {
    PersonRecord r;
    r.first_name = title_case(forenames_.names[forenames_.pick(rng)]);
    if (coin(rng, 0.6)) r.middle_name = std::string(1, static_cast<char>('A' + uniform(rng, 0, 25)));
    r.last_name = title_case(surnames_.names[surnames_.pick(rng)]);
    if (coin(rng, 0.02)) r.suffix = std::array<const char*, 3>{"Jr", "Sr", "III"}[uniform(rng, 0, 2)];
    address(rng, r);
    const bool has_phone = !coin(rng, missing_phone);
    const bool has_email = !coin(rng, missing_email);
    if (has_phone) r.phone = phone(rng);
    if (has_email) r.email = email(rng, r);
    r.dob = dob(rng);
    return r;
  }

  void address(std::mt19937_64& rng, PersonRecord& r) {
    const Place& p = places_[pick_place_(rng)];
    r.street_number = std::to_string(uniform(rng, 1, 9999));
    r.street_name = streets_[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(streets_.size()) - 1))];
    r.unit = coin(rng, 0.1) ? "Apt " + std::to_string(uniform(rng, 1, 40)) : "";
    r.city = p.city;
    r.state = p.state;
    r.zip = p.zips[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(p.zips.size()) - 1))];
  }

  // Alias for a first name, or empty when the name has none.
  std::string alias(std::mt19937_64& rng, const std::string& first) {
    auto it = aliases_.find(to_upper(first));
    if (it == aliases_.end()) return {};
    const auto& list = it->second;
    return title_case(list[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(list.size()) - 1))]);
  }

  static bool coin(std::mt19937_64& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
  }
  static int uniform(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  }

 private:
  static std::string phone(std::mt19937_64& rng) {
    static constexpr std::array<int, 13> kAreaCodes = {312, 773, 872, 630, 331, 847, 224,
                                                       708, 815, 779, 217, 309, 618};
    const int area = kAreaCodes[static_cast<std::size_t>(uniform(rng, 0, 12))];
    const int exchange = uniform(rng, 200, 999);
    const int line = uniform(rng, 0, 9999);
    char buf[32];
    std::snprintf(buf, sizeof buf, "(%03d) %03d-%04d", area, exchange, line);
    return buf;
  }

  static std::string email(std::mt19937_64& rng, const PersonRecord& r) {
    static constexpr std::array<const char*, 5> kDomains = {"gmail.com", "yahoo.com", "hotmail.com",
                                                            "aol.com", "outlook.com"};
    std::string local = to_lower(r.first_name) + "." + to_lower(r.last_name);
    std::erase_if(local, [](char c) { return c == ' ' || c == '\''; });
    local += std::to_string(uniform(rng, 1, 9999));
    return local + "@" + kDomains[static_cast<std::size_t>(uniform(rng, 0, 4))];
  }

  static std::string dob(std::mt19937_64& rng) {
    static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const int year = uniform(rng, 1940, 2002);
    const int month = uniform(rng, 1, 12);
    int days = kDays[static_cast<std::size_t>(month - 1)];
    if (month == 2 && year % 4 == 0) days = 29;
    const int day = uniform(rng, 1, days);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
  }

  WeightedNames forenames_;
  WeightedNames surnames_;
  std::vector<Place> places_;
  std::discrete_distribution<std::size_t> pick_place_;
  std::vector<std::string> streets_;
  std::unordered_map<std::string, std::vector<std::string>> aliases_;
};

// Stored scale of the i-th signal feature: value = offset + scale * z.
struct SignalScale {
  double offset;
  double scale;
  double resolution;
};

constexpr std::array<SignalScale, 6> kSignalScales = {{
    {0.40, 0.15, 0.001},
    {55000.0, 20000.0, 1.0},
    {0.60, 0.20, 0.001},
    {60000.0, 15000.0, 1.0},
    {45.0, 12.0, 0.1},
    {10.0, 6.0, 0.1},
}};

double round_to(double v, double resolution) { return std::round(v / resolution) * resolution; }

std::string make_id(char prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%07zu", prefix, n);
  return buf;
}

}  // namespace

std::string apply_typo(const std::string& name, std::mt19937_64& rng) {
  std::vector<std::size_t> letters;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (std::isalpha(static_cast<unsigned char>(name[i]))) letters.push_back(i);
  }
  if (letters.empty()) return name;
  auto random_letter = [&](bool upper) {
    const char c = static_cast<char>('a' + Generator::uniform(rng, 0, 25));
    return upper ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
  };
  for (int attempt = 0; attempt < 32; ++attempt) {
    std::string out = name;
    const std::size_t k = static_cast<std::size_t>(
        Generator::uniform(rng, 0, static_cast<int>(letters.size()) - 1));
    const std::size_t at = letters[k];
    const bool upper = std::isupper(static_cast<unsigned char>(name[at])) != 0;
    switch (Generator::uniform(rng, 0, 3)) {
      case 0:
        out[at] = random_letter(upper);
        break;
      case 1:
        if (letters.size() < 2) continue;
        out.erase(at, 1);
        if (at == letters.front() && upper && at < out.size()) {
          out[at] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[at])));
        }
        break;
      case 2:
        out.insert(out.begin() + static_cast<std::ptrdiff_t>(at + 1), random_letter(false));
        break;
      default: {
        if (k + 1 >= letters.size() || letters[k + 1] != at + 1) continue;
        const bool upper_next = std::isupper(static_cast<unsigned char>(name[at + 1])) != 0;
        std::swap(out[at], out[at + 1]);
        auto set_case = [](char c, bool u) {
          return static_cast<char>(u ? std::toupper(static_cast<unsigned char>(c))
                                     : std::tolower(static_cast<unsigned char>(c)));
        };
        out[at] = set_case(out[at], upper);
        out[at + 1] = set_case(out[at + 1], upper_next);
        break;
      }
    }
    if (to_upper(out) != to_upper(name)) return out;
  }
  // Substitution with a different letter always changes the name.
  std::string out = name;
  const std::size_t at = letters.front();
  const char original = static_cast<char>(std::toupper(static_cast<unsigned char>(name[at])));
  out[at] = original == 'Z' ? 'A' : static_cast<char>(original + 1);
  return out;
}

Population generate_population(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  Generator gen;
  Population pop;
  pop.feature_names = cfg.signal_features;
  for (std::size_t j = cfg.signal_features.size(); j < cfg.feature_count; ++j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "v%03zu", j - cfg.signal_features.size() + 1);
    pop.feature_names.emplace_back(buf);
  }
  for (std::size_t a = 0; a < pop.feature_names.size(); ++a) {
    for (std::size_t b = a + 1; b < pop.feature_names.size(); ++b) {
      if (pop.feature_names[a] == pop.feature_names[b]) {
        throw ConfigError("duplicate feature name '" + pop.feature_names[a] + "'");
      }
    }
  }

  const std::size_t n = cfg.reference_size;
  const std::size_t signals = cfg.signal_features.size();
  const std::size_t noise = cfg.feature_count - signals;
  std::vector<double> noise_rate(noise);
  for (std::size_t j = 0; j < noise; ++j) {
    const double golden = std::fmod(0.6180339887498949 * static_cast<double>(j + 1), 1.0);
    noise_rate[j] = 0.1 + 0.8 * golden;
  }
  // Group-level shifts of the latent signal.
  std::vector<double> shift(cfg.group_names.size());
  for (std::size_t g = 0; g < shift.size(); ++g) {
    shift[g] = 0.25 * std::sin(1.7 * static_cast<double>(g + 1));
  }

  std::discrete_distribution<std::size_t> pick_group(cfg.group_shares.begin(),
                                                     cfg.group_shares.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> linear(n, 0.0);
  pop.records.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    PersonRecord r = gen.person(rng, cfg.ref_missing_phone_prob, cfg.ref_missing_email_prob);
    r.record_id = make_id('R', i + 1);
    const std::size_t g = pick_group(rng);
    r.group = cfg.group_names[g];
    r.features.resize(cfg.feature_count);
    for (std::size_t k = 0; k < signals; ++k) {
      const double z = normal(rng) + shift[g];
      linear[i] += cfg.signal_weights[k] * z;
      const SignalScale& s = kSignalScales[k % kSignalScales.size()];
      r.features[k] = static_cast<float>(round_to(s.offset + s.scale * z, s.resolution));
    }
    for (std::size_t j = 0; j < noise; ++j) {
      const double v = j % 2 == 0 ? (unit(rng) < noise_rate[j] ? 1.0 : 0.0)
                                  : round_to(normal(rng), 0.01);
      r.features[signals + j] = static_cast<float>(v);
    }
    pop.records.push_back(std::move(r));
  }

  // Intercept so the mean signup probability equals the configured base rate.
  auto mean_probability = [&](double b) {
    double sum = 0.0;
    for (double l : linear) sum += logistic(b + l);
    return sum / static_cast<double>(n);
  };
  double lo = -50.0;
  double hi = 50.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_probability(mid) < cfg.base_rate ? lo : hi) = mid;
  }
  pop.intercept = 0.5 * (lo + hi);
  pop.signup.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pop.signup[i] = unit(rng) < logistic(pop.intercept + linear[i]) ? 1 : 0;
  }
  return pop;
}

InputFile perturb_duplicates(const Population& reference, const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed + 1);
  Generator gen;

  std::vector<std::size_t> signed_up;
  for (std::size_t i = 0; i < reference.records.size(); ++i) {
    if (reference.signup[i]) signed_up.push_back(i);
  }
  const auto n_dup = static_cast<std::size_t>(
      std::llround(static_cast<double>(cfg.input_size) * cfg.duplicate_rate));
  if (n_dup > signed_up.size()) {
    throw ConfigError("need " + std::to_string(n_dup) + " signed-up reference rows for duplicates, have " +
                      std::to_string(signed_up.size()));
  }
  std::vector<std::size_t> sources;
  std::sample(signed_up.begin(), signed_up.end(), std::back_inserter(sources),
              static_cast<std::ptrdiff_t>(n_dup), rng);

  struct Entry {
    PersonRecord record;
    std::string duplicate_of;
  };
  std::vector<Entry> entries;
  entries.reserve(cfg.input_size);
  for (std::size_t src : sources) {
    const PersonRecord& ref = reference.records[src];
    PersonRecord r;
    for (std::size_t f = 1; f < kFieldCount - 1; ++f) {
      field_ref(r, static_cast<Field>(f)) = field_ref(ref, static_cast<Field>(f));
    }
    if (Generator::coin(rng, cfg.nickname_prob)) {
      const std::string alias = gen.alias(rng, r.first_name);
      if (!alias.empty()) r.first_name = alias;
    }
    if (Generator::coin(rng, cfg.typo_prob)) r.first_name = apply_typo(r.first_name, rng);
    if (Generator::coin(rng, cfg.typo_prob)) r.last_name = apply_typo(r.last_name, rng);
    if (Generator::coin(rng, cfg.move_prob)) gen.address(rng, r);
    if (Generator::coin(rng, cfg.blank_phone_prob)) r.phone.clear();
    if (Generator::coin(rng, cfg.blank_email_prob)) r.email.clear();
    if (Generator::coin(rng, cfg.blank_dob_prob)) r.dob.clear();
    if (Generator::coin(rng, cfg.blank_middle_prob)) r.middle_name.clear();
    entries.push_back({std::move(r), ref.record_id});
  }
  while (entries.size() < cfg.input_size) {
    PersonRecord r = gen.person(rng, cfg.ref_missing_phone_prob, cfg.ref_missing_email_prob);
    entries.push_back({std::move(r), ""});
  }
  std::shuffle(entries.begin(), entries.end(), rng);

  InputFile out;
  out.records.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].record.record_id = make_id('I', i + 1);
    if (!entries[i].duplicate_of.empty()) {
      out.pairs.push_back({entries[i].record.record_id, entries[i].duplicate_of});
    }
    out.records.push_back(std::move(entries[i].record));
  }
  return out;
}

Scenario generate_scenario(const SynthConfig& cfg) {
  Scenario s;
  s.reference = generate_population(cfg);
  s.inputs = perturb_duplicates(s.reference, cfg);
  for (std::size_t i = 0; i < s.reference.records.size(); ++i) {
    s.truth.signup[s.reference.records[i].record_id] = s.reference.signup[i];
    s.truth.source[s.reference.records[i].record_id] = "reference";
  }
  for (const auto& r : s.inputs.records) {
    s.truth.signup[r.record_id] = 1;
    s.truth.source[r.record_id] = "input";
  }
  s.truth.pairs = s.inputs.pairs;
  return s;
}

void write_truth(const std::filesystem::path& path, const Scenario& scenario) {
  std::unordered_map<std::string_view, std::string_view> dup_of;
  for (const auto& p : scenario.inputs.pairs) dup_of.emplace(p.input_id, p.reference_id);
  CsvWriter out(path);
  out.row({"record_id", "source", "signup", "duplicate_of"});
  for (std::size_t i = 0; i < scenario.reference.records.size(); ++i) {
    out.field(scenario.reference.records[i].record_id).field("reference");
    out.field(scenario.reference.signup[i]).field("");
    out.end_row();
  }
  for (const auto& r : scenario.inputs.records) {
    auto it = dup_of.find(r.record_id);
    out.field(r.record_id).field("input").field(1);
    out.field(it == dup_of.end() ? std::string_view() : it->second);
    out.end_row();
  }
  out.flush();
}

TruthSet read_truth(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const std::vector<std::string> expected = {"record_id", "source", "signup", "duplicate_of"};
  if (t.header != expected) {
    throw DataError(path.string() + ": expected header record_id,source,signup,duplicate_of");
  }
  TruthSet truth;
  for (const auto& row : t.rows) {
    if (row.size() != 4) throw DataError(path.string() + ": ragged row");
    const auto signup = parse_int(row[2]);
    if (!signup || (*signup != 0 && *signup != 1)) {
      throw DataError(path.string() + ": bad signup value for '" + row[0] + "'");
    }
    truth.signup[row[0]] = static_cast<int>(*signup);
    truth.source[row[0]] = row[1];
    if (!row[3].empty()) truth.pairs.push_back({row[0], row[3]});
  }
  return truth;
}

void write_group_shares(const std::filesystem::path& path, const SynthConfig& cfg) {
  CsvWriter out(path);
  out.row({"group", "proportion"});
  for (std::size_t g = 0; g < cfg.group_names.size(); ++g) {
    out.field(cfg.group_names[g]).field(cfg.group_shares[g]);
    out.end_row();
  }
  out.flush();
}

}  // namespace outreach
