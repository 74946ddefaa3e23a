#include "outreach/blocking.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "outreach/error.hpp"
#include "outreach/phonetics.hpp"

namespace outreach {

std::string BlockingToken::storage_key() const {
  return std::to_string(token_type) + ":" + key;
}

std::string dob_year_month(std::string_view dob) {
  if (dob.size() < 7 || dob[4] != '-') return {};
  for (std::size_t i : {0, 1, 2, 3, 5, 6}) {
    if (dob[i] < '0' || dob[i] > '9') return {};
  }
  return std::string(dob.substr(0, 7));
}

namespace {

std::string join(std::initializer_list<std::string_view> parts) {
  std::string out;
  bool first = true;
  for (auto p : parts) {
    if (!first) out.push_back('|');
    out.append(p);
    first = false;
  }
  return out;
}

}  // namespace

std::vector<BlockingToken> tokens_for(const NormalizedRecord& r) {
  std::vector<BlockingToken> out;
  out.reserve(kTokenTypeCount);
  auto emit = [&](int type, std::initializer_list<std::string_view> parts) {
    for (auto p : parts) {
      if (p.empty()) return;
    }
    out.push_back({type, join(parts)});
  };

  const std::string first_code = r.first_name.empty() ? "" : phonetic_code(r.first_name);
  const std::string last_code = r.last_name.empty() ? "" : phonetic_code(r.last_name);
  const std::string street_code = r.street_name.empty() ? "" : phonetic_code(r.street_name);
  const std::string_view first_initial = std::string_view(r.first_name).substr(0, 1);
  const std::string_view last_initial = std::string_view(r.last_name).substr(0, 1);
  const std::string year_month = dob_year_month(r.dob);

  emit(1, {r.first_name, r.last_name, r.zip});
  emit(2, {r.state, r.city, last_code});
  emit(3, {first_code, last_initial, r.zip});
  emit(4, {r.email});
  emit(5, {r.phone});
  emit(6, {r.street_number, street_code, r.zip});
  emit(7, {r.last_name, year_month});
  emit(8, {first_code, last_code, r.state});
  emit(9, {first_initial, r.last_name, r.city});
  return out;
}

Backend parse_backend(std::string_view name) {
  if (name == "memory") return Backend::kMemory;
  if (name == "disk") return Backend::kDisk;
  throw ConfigError("unknown blocking backend '" + std::string(name) + "' (memory|disk)");
}

namespace {

class MemoryStore final : public KeyValueStore {
 public:
  explicit MemoryStore(std::vector<std::pair<std::string, std::vector<std::uint32_t>>> entries) {
    std::sort(entries.begin(), entries.end());
    sorted_keys_.reserve(entries.size());
    map_.reserve(entries.size());
    for (auto& [k, v] : entries) {
      auto [it, inserted] = map_.emplace(std::move(k), std::move(v));
      if (inserted) sorted_keys_.push_back(&it->first);
    }
  }

  std::span<const std::uint32_t> find(std::string_view key) const override {
    auto it = map_.find(std::string(key));
    if (it == map_.end()) return {};
    return it->second;
  }

  std::size_t key_count() const override { return map_.size(); }

  void for_each(const std::function<void(std::string_view, std::span<const std::uint32_t>)>& fn)
      const override {
    for (const std::string* k : sorted_keys_) fn(*k, map_.at(*k));
  }

  std::string_view backend_name() const override { return "memory"; }

 private:
  std::unordered_map<std::string, std::vector<std::uint32_t>> map_;
  std::vector<const std::string*> sorted_keys_;
};

}  // namespace

namespace detail {

std::unique_ptr<KeyValueStore> make_memory_store(
    std::vector<std::pair<std::string, std::vector<std::uint32_t>>> entries) {
  return std::make_unique<MemoryStore>(std::move(entries));
}

}  // namespace detail

BlockingIndex::BlockingIndex(std::vector<std::string> ids, std::unique_ptr<KeyValueStore> store,
                             std::size_t hot_key_cap, bool exclude_hot)
    : ids_(std::move(ids)),
      store_(std::move(store)),
      hot_key_cap_(hot_key_cap),
      exclude_hot_(exclude_hot) {}

BlockingIndex BlockingIndex::open(const std::filesystem::path& path) {
  auto opened = detail::open_index_file(path);
  return BlockingIndex(std::move(opened.ids), std::move(opened.store), opened.hot_key_cap,
                       opened.exclude_hot);
}

void BlockingIndex::save(const std::filesystem::path& path) const {
  detail::write_index_file(path, ids_, *store_, hot_key_cap_, exclude_hot_);
}

std::span<const std::uint32_t> BlockingIndex::postings(const BlockingToken& token) const {
  return store_->find(token.storage_key());
}

std::vector<std::uint32_t> BlockingIndex::candidate_ordinals(const NormalizedRecord& r) const {
  std::vector<std::uint32_t> out;
  for (const auto& token : tokens_for(r)) {
    const auto ids = postings(token);
    if (exclude_hot_ && ids.size() > hot_key_cap_) continue;
    out.insert(out.end(), ids.begin(), ids.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

IndexStats BlockingIndex::stats() const {
  IndexStats s;
  s.record_count = ids_.size();
  s.key_count = store_->key_count();
  store_->for_each([&](std::string_view key, std::span<const std::uint32_t> ids) {
    s.posting_count += ids.size();
    s.max_set_size = std::max(s.max_set_size, ids.size());
    if (ids.size() > hot_key_cap_) ++s.hot_key_count;
    const auto colon = key.find(':');
    const int type = std::stoi(std::string(key.substr(0, colon)));
    if (type >= 1 && type <= kTokenTypeCount) ++s.keys_per_type[type - 1];
  });
  if (s.key_count > 0) {
    s.mean_set_size = static_cast<double>(s.posting_count) / static_cast<double>(s.key_count);
  }
  return s;
}

BlockingIndex build_index(std::span<const NormalizedRecord> records, const IndexOptions& options) {
  // Ordinals follow sorted id order so the index does not depend on input order.
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].record_id < records[b].record_id;
  });
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (std::size_t i : order) {
    if (!ids.empty() && ids.back() == records[i].record_id) {
      throw DataError("duplicate record_id '" + records[i].record_id + "' in reference records");
    }
    ids.push_back(records[i].record_id);
  }

  std::unordered_map<std::string, std::vector<std::uint32_t>> postings;
  postings.reserve(records.size() * 4);
  for (std::uint32_t ord = 0; ord < order.size(); ++ord) {
    for (const auto& token : tokens_for(records[order[ord]])) {
      postings[token.storage_key()].push_back(ord);
    }
  }
  std::vector<std::pair<std::string, std::vector<std::uint32_t>>> entries;
  entries.reserve(postings.size());
  for (auto& [k, v] : postings) entries.emplace_back(k, std::move(v));
  postings.clear();

  BlockingIndex memory(std::move(ids), detail::make_memory_store(std::move(entries)),
                       options.hot_key_cap, options.exclude_hot);
  if (options.backend == Backend::kMemory) return memory;

  if (options.disk_path.empty()) throw ConfigError("disk backend needs an index file path");
  memory.save(options.disk_path);
  return BlockingIndex::open(options.disk_path);
}

std::vector<std::string> candidates(const BlockingIndex& index, const NormalizedRecord& r) {
  std::vector<std::string> out;
  for (auto ord : index.candidate_ordinals(r)) out.push_back(index.ids()[ord]);
  return out;
}

}  // namespace outreach
