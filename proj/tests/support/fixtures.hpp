#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "outreach/records.hpp"
#include "outreach/synth.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path source_dir();
std::filesystem::path cli_path();

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

// A small scenario: same generator as the default, fewer rows and features.
outreach::SynthConfig small_config(std::size_t reference = 4000, std::size_t inputs = 600,
                                   std::size_t features = 24, std::uint64_t seed = 7);

outreach::SynthConfig default_config();

// Record with every identity field populated, normalized.
outreach::NormalizedRecord full_record(const std::string& id);

outreach::NormalizedRecord normalized(outreach::PersonRecord r);

// Runs the CLI with `args`, stdout and stderr to `log`. Returns the exit code.
int run_cli(const std::vector<std::string>& args, const std::filesystem::path& log);

}  // namespace fixtures
