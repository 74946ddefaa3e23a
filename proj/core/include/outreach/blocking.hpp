#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "outreach/records.hpp"

namespace outreach {

inline constexpr int kTokenTypeCount = 9;

// A blocking key of one of the nine token types. `key` joins normalized field
// fragments with '|'.
//
//   1 first|last|zip                      exact full name within a zip
//   2 state|city|soundex(last)            phonetic surname within a city
//   3 soundex(first)|last initial|zip
//   4 email
//   5 phone
//   6 street number|soundex(street)|zip
//   7 last|dob year-month
//   8 soundex(first)|soundex(last)|state
//   9 first initial|last|city
struct BlockingToken {
  int token_type = 0;
  std::string key;

  // Key in the shared store, "<type>:<key>".
  std::string storage_key() const;

  auto operator<=>(const BlockingToken&) const = default;
};

// At most one token per type, ordered by type. A type is skipped when any of
// its constituent fields is empty.
std::vector<BlockingToken> tokens_for(const NormalizedRecord& r);

// "YYYY-MM" from an ISO date, empty if the date is absent or malformed.
std::string dob_year_month(std::string_view dob);

// Token key -> posting list of record ordinals (ascending).
class KeyValueStore {
 public:
  virtual ~KeyValueStore() = default;

  // Empty span when the key is absent.
  virtual std::span<const std::uint32_t> find(std::string_view key) const = 0;
  virtual std::size_t key_count() const = 0;
  // Visits every entry in ascending key order.
  virtual void for_each(
      const std::function<void(std::string_view, std::span<const std::uint32_t>)>& fn) const = 0;
  virtual std::string_view backend_name() const = 0;
};

enum class Backend { kMemory, kDisk };

Backend parse_backend(std::string_view name);

struct IndexOptions {
  Backend backend = Backend::kMemory;
  // Index file for the disk backend.
  std::filesystem::path disk_path;
  // Keys with more ids than this are "hot".
  std::size_t hot_key_cap = 1000;
  // Skip hot keys when forming candidate sets.
  bool exclude_hot = true;
};

struct IndexStats {
  std::size_t record_count = 0;
  std::size_t key_count = 0;
  std::size_t posting_count = 0;
  std::size_t hot_key_count = 0;
  double mean_set_size = 0.0;  // mean ids per key
  std::size_t max_set_size = 0;
  std::array<std::size_t, kTokenTypeCount> keys_per_type{};
};

class BlockingIndex {
 public:
  BlockingIndex(std::vector<std::string> ids, std::unique_ptr<KeyValueStore> store,
                std::size_t hot_key_cap, bool exclude_hot);

  BlockingIndex(BlockingIndex&&) noexcept = default;
  BlockingIndex& operator=(BlockingIndex&&) noexcept = default;

  // Opens an index file written by save(); lookups are served from a
  // read-only memory map.
  static BlockingIndex open(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // Indexed record ids in ascending order; ordinals index into this.
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const std::uint32_t> postings(const BlockingToken& token) const;

  // Ordinals of candidate records, ascending and unique.
  std::vector<std::uint32_t> candidate_ordinals(const NormalizedRecord& r) const;

  IndexStats stats() const;
  const KeyValueStore& store() const { return *store_; }
  std::size_t hot_key_cap() const { return hot_key_cap_; }
  bool exclude_hot() const { return exclude_hot_; }

 private:
  std::vector<std::string> ids_;
  std::unique_ptr<KeyValueStore> store_;
  std::size_t hot_key_cap_;
  bool exclude_hot_;
};

// Throws DataError on duplicate record ids, Error when the disk backend cannot
// be created.
BlockingIndex build_index(std::span<const NormalizedRecord> records,
                          const IndexOptions& options = {});

// Union of the record's token postings, as ascending record ids.
std::vector<std::string> candidates(const BlockingIndex& index, const NormalizedRecord& r);

namespace detail {

std::unique_ptr<KeyValueStore> make_memory_store(
    std::vector<std::pair<std::string, std::vector<std::uint32_t>>> entries);

void write_index_file(const std::filesystem::path& path, const std::vector<std::string>& ids,
                      const KeyValueStore& store, std::size_t hot_key_cap, bool exclude_hot);

struct OpenedIndexFile {
  std::vector<std::string> ids;
  std::unique_ptr<KeyValueStore> store;
  std::size_t hot_key_cap = 0;
  bool exclude_hot = true;
};

OpenedIndexFile open_index_file(const std::filesystem::path& path);

}  // namespace detail

}  // namespace outreach
