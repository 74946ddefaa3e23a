#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "outreach/phonetics.hpp"
#include "outreach/records.hpp"

using namespace outreach;

namespace {

std::string random_word(std::mt19937_64& rng, const std::string& alphabet, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  for (int k = len(rng); k > 0; --k) s.push_back(alphabet[pick(rng)]);
  return s;
}

}  // namespace

TEST_CASE("soundex examples") {
  CHECK(phonetic_code("ROBERT") == "R163");
  CHECK(phonetic_code("RUPERT") == "R163");
  CHECK(phonetic_code("SMITH") == "S530");
  CHECK(phonetic_code("SMYTH") == "S530");
  CHECK(phonetic_code("ASHCRAFT") == "A261");
  CHECK(phonetic_code("TYMCZAK") == "T522");
  CHECK(phonetic_code("PFISTER") == "P236");
  CHECK(phonetic_code("LEE") == "L000");
  CHECK(phonetic_code("") == "0000");
  CHECK(phonetic_code("  --  ") == "0000");
}

TEST_CASE("soundex agrees with the reference encoder on random names") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20000; ++i) {
    const auto w = random_word(rng, "ABCDEFGHIJKLMNOPQRSTUVWXYZHWAEIOU ", 14);
    INFO(w);
    REQUIRE(phonetic_code(w) == oracle::soundex(w));
  }
}

TEST_CASE("soundex is stable under re-normalization and trailing vowels") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 5000; ++i) {
    const auto raw = random_word(rng, "abcdefghijklmnopqrstuvwxyz .'-", 12);
    const auto once = normalize_name(raw);
    CHECK(phonetic_code(normalize_name(once)) == phonetic_code(once));
    if (!once.empty()) {
      CHECK(phonetic_code(once + "A") == phonetic_code(once));
      CHECK(phonetic_code(once + "EY") == phonetic_code(once));
    }
  }
}

TEST_CASE("jaro-winkler examples") {
  CHECK(string_similarity("MARTHA", "MARTHA") == 1.0);
  CHECK(string_similarity("ABC", "XYZ") == 0.0);
  CHECK(string_similarity("MARTHA", "MARHTA") == doctest::Approx(0.961).epsilon(0.001));
  CHECK(string_similarity("DWAYNE", "DUANE") == doctest::Approx(0.84).epsilon(0.001));
  CHECK(string_similarity("DIXON", "DICKSONX") == doctest::Approx(0.8133).epsilon(0.001));
  CHECK(string_similarity("", "") == 0.0);
  CHECK(string_similarity("A", "") == 0.0);
}

TEST_CASE("jaro-winkler properties on random strings") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20000; ++i) {
    const auto a = random_word(rng, "ABCDEFGHIJ", 10);
    const auto b = random_word(rng, "ABCDEFGHIJ", 10);
    INFO(a << " / " << b);
    const double s = string_similarity(a, b);
    REQUIRE(s == doctest::Approx(oracle::jaro_winkler(a, b)).epsilon(1e-12));
    REQUIRE(s == string_similarity(b, a));
    REQUIRE(s >= 0.0);
    REQUIRE(s <= 1.0);
    if (!a.empty()) REQUIRE(string_similarity(a, a) == 1.0);
    if (a != b) REQUIRE(s < 1.0);
  }
}

TEST_CASE("name commonness") {
  const auto t = NameFrequencyTable::parse("name,relative_frequency\nSMITH,0.01\nLEE,0.004\n");
  CHECK(name_commonness("SMITH", t) == 0.01);
  CHECK(name_commonness("ZZXQ", t) == t.floor());
  CHECK(t.floor() > 0.0);
  CHECK(t.floor() <= 0.004);
  CHECK(name_commonness("LEE", t) < name_commonness("SMITH", t));
}

TEST_CASE("bundled surname table") {
  const auto& t = NameFrequencyTable::bundled_surnames();
  REQUIRE(t.size() > 100);
  std::string top;
  double best = 0.0;
  for (const auto& [name, f] : t.entries()) {
    CHECK(f > 0.0);
    CHECK(f <= 1.0);
    if (f > best) {
      best = f;
      top = name;
    }
  }
  CHECK(top == "SMITH");
  for (const auto& [name, f] : t.entries()) CHECK(name_commonness(name, t) <= name_commonness(top, t));
  CHECK(name_commonness("ZZXQ", t) == t.floor());
  CHECK(t.floor() > 0.0);
  CHECK(NameFrequencyTable::bundled_forenames().size() > 100);
}
