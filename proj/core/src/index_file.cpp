// Single-file blocking index.
//
// Layout (little-endian, sections 8-byte aligned):
//   Header
//   u64 id_offsets[id_count + 1]       into the id blob
//   char id_blob[]
//   KeyEntry entries[key_count]        sorted by key bytes
//   char key_blob[]
//   u32 postings[posting_count]
#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <fstream>

#include "outreach/blocking.hpp"
#include "outreach/error.hpp"

namespace outreach::detail {

namespace {

constexpr char kMagic[8] = {'O', 'U', 'T', 'R', 'I', 'D', 'X', '1'};
constexpr std::uint32_t kVersion = 1;

struct Header {
  char magic[8];
  std::uint32_t version;
  std::uint32_t exclude_hot;
  std::uint64_t hot_key_cap;
  std::uint64_t id_count;
  std::uint64_t id_blob_size;
  std::uint64_t key_count;
  std::uint64_t key_blob_size;
  std::uint64_t posting_count;
};

struct KeyEntry {
  std::uint64_t key_offset;
  std::uint64_t key_size;
  std::uint64_t posting_offset;
  std::uint64_t posting_size;
};

std::uint64_t aligned(std::uint64_t n) { return (n + 7) & ~std::uint64_t{7}; }

class MappedFile {
 public:
  explicit MappedFile(const std::filesystem::path& path) {
    const int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) throw DataError("cannot open index '" + path.string() + "'");
    struct stat st {};
    if (::fstat(fd, &st) != 0) {
      ::close(fd);
      throw DataError("cannot stat index '" + path.string() + "'");
    }
    size_ = static_cast<std::size_t>(st.st_size);
    if (size_ > 0) {
      void* p = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
      if (p == MAP_FAILED) {
        ::close(fd);
        throw Error("mmap failed for '" + path.string() + "'");
      }
      data_ = static_cast<const char*>(p);
    }
    ::close(fd);
  }
  ~MappedFile() {
    if (data_) ::munmap(const_cast<char*>(data_), size_);
  }
  MappedFile(const MappedFile&) = delete;
  MappedFile& operator=(const MappedFile&) = delete;

  const char* data() const { return data_; }
  std::size_t size() const { return size_; }

 private:
  const char* data_ = nullptr;
  std::size_t size_ = 0;
};

class MappedStore final : public KeyValueStore {
 public:
  MappedStore(std::unique_ptr<MappedFile> file, const KeyEntry* entries, std::size_t key_count,
              const char* key_blob, const std::uint32_t* postings)
      : file_(std::move(file)),
        entries_(entries),
        key_count_(key_count),
        key_blob_(key_blob),
        postings_(postings) {}

  std::span<const std::uint32_t> find(std::string_view key) const override {
    const KeyEntry* end = entries_ + key_count_;
    const KeyEntry* it = std::lower_bound(
        entries_, end, key, [&](const KeyEntry& e, std::string_view k) { return key_of(e) < k; });
    if (it == end || key_of(*it) != key) return {};
    return {postings_ + it->posting_offset, static_cast<std::size_t>(it->posting_size)};
  }

  std::size_t key_count() const override { return key_count_; }

  void for_each(const std::function<void(std::string_view, std::span<const std::uint32_t>)>& fn)
      const override {
    for (std::size_t i = 0; i < key_count_; ++i) {
      const KeyEntry& e = entries_[i];
      fn(key_of(e), {postings_ + e.posting_offset, static_cast<std::size_t>(e.posting_size)});
    }
  }

  std::string_view backend_name() const override { return "disk"; }

 private:
  std::string_view key_of(const KeyEntry& e) const {
    return {key_blob_ + e.key_offset, static_cast<std::size_t>(e.key_size)};
  }

  std::unique_ptr<MappedFile> file_;
  const KeyEntry* entries_;
  std::size_t key_count_;
  const char* key_blob_;
  const std::uint32_t* postings_;
};

void pad(std::ofstream& out, std::uint64_t written) {
  static const char zeros[8] = {};
  out.write(zeros, static_cast<std::streamsize>(aligned(written) - written));
}

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace

void write_index_file(const std::filesystem::path& path, const std::vector<std::string>& ids,
                      const KeyValueStore& store, std::size_t hot_key_cap, bool exclude_hot) {
  std::vector<KeyEntry> entries;
  std::string key_blob;
  std::vector<std::uint32_t> postings;
  entries.reserve(store.key_count());
  store.for_each([&](std::string_view key, std::span<const std::uint32_t> ords) {
    entries.push_back({key_blob.size(), key.size(), postings.size(), ords.size()});
    key_blob.append(key);
    postings.insert(postings.end(), ords.begin(), ords.end());
  });

  std::vector<std::uint64_t> id_offsets;
  std::string id_blob;
  id_offsets.reserve(ids.size() + 1);
  for (const auto& id : ids) {
    id_offsets.push_back(id_blob.size());
    id_blob.append(id);
  }
  id_offsets.push_back(id_blob.size());

  Header h{};
  std::memcpy(h.magic, kMagic, sizeof kMagic);
  h.version = kVersion;
  h.exclude_hot = exclude_hot ? 1 : 0;
  h.hot_key_cap = hot_key_cap;
  h.id_count = ids.size();
  h.id_blob_size = id_blob.size();
  h.key_count = entries.size();
  h.key_blob_size = key_blob.size();
  h.posting_count = postings.size();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot create index file '" + path.string() + "'");
  write_pod(out, h);
  out.write(reinterpret_cast<const char*>(id_offsets.data()),
            static_cast<std::streamsize>(id_offsets.size() * sizeof(std::uint64_t)));
  out.write(id_blob.data(), static_cast<std::streamsize>(id_blob.size()));
  pad(out, id_blob.size());
  out.write(reinterpret_cast<const char*>(entries.data()),
            static_cast<std::streamsize>(entries.size() * sizeof(KeyEntry)));
  out.write(key_blob.data(), static_cast<std::streamsize>(key_blob.size()));
  pad(out, key_blob.size());
  out.write(reinterpret_cast<const char*>(postings.data()),
            static_cast<std::streamsize>(postings.size() * sizeof(std::uint32_t)));
  out.flush();
  if (!out) throw Error("failed writing index file '" + path.string() + "'");
}

OpenedIndexFile open_index_file(const std::filesystem::path& path) {
  auto file = std::make_unique<MappedFile>(path);
  const char* base = file->data();
  const std::size_t size = file->size();
  auto corrupt = [&](const char* what) {
    return DataError("index file '" + path.string() + "' is corrupt: " + what);
  };
  if (size < sizeof(Header)) throw corrupt("too short");
  Header h;
  std::memcpy(&h, base, sizeof h);
  if (std::memcmp(h.magic, kMagic, sizeof kMagic) != 0) throw corrupt("bad magic");
  if (h.version != kVersion) throw corrupt("unsupported version");

  std::uint64_t offset = sizeof(Header);
  const std::uint64_t id_offsets_at = offset;
  offset += (h.id_count + 1) * sizeof(std::uint64_t);
  const std::uint64_t id_blob_at = offset;
  offset = aligned(offset + h.id_blob_size);
  const std::uint64_t entries_at = offset;
  offset += h.key_count * sizeof(KeyEntry);
  const std::uint64_t key_blob_at = offset;
  offset = aligned(offset + h.key_blob_size);
  const std::uint64_t postings_at = offset;
  offset += h.posting_count * sizeof(std::uint32_t);
  if (offset != size) throw corrupt("section sizes do not match file size");

  OpenedIndexFile opened;
  opened.hot_key_cap = h.hot_key_cap;
  opened.exclude_hot = h.exclude_hot != 0;
  opened.ids.reserve(h.id_count);
  const auto* id_offsets = reinterpret_cast<const std::uint64_t*>(base + id_offsets_at);
  for (std::uint64_t i = 0; i < h.id_count; ++i) {
    if (id_offsets[i + 1] < id_offsets[i] || id_offsets[i + 1] > h.id_blob_size) {
      throw corrupt("id table");
    }
    opened.ids.emplace_back(base + id_blob_at + id_offsets[i], id_offsets[i + 1] - id_offsets[i]);
  }

  const auto* entries = reinterpret_cast<const KeyEntry*>(base + entries_at);
  for (std::uint64_t i = 0; i < h.key_count; ++i) {
    const KeyEntry& e = entries[i];
    if (e.key_offset + e.key_size > h.key_blob_size ||
        e.posting_offset + e.posting_size > h.posting_count) {
      throw corrupt("key table");
    }
  }
  const auto* postings = reinterpret_cast<const std::uint32_t*>(base + postings_at);
  for (std::uint64_t i = 0; i < h.posting_count; ++i) {
    if (postings[i] >= h.id_count) throw corrupt("posting out of range");
  }
  opened.store = std::make_unique<MappedStore>(std::move(file), entries, h.key_count,
                                               base + key_blob_at, postings);
  return opened;
}

}  // namespace outreach::detail
