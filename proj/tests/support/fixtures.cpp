#include "fixtures.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fixtures {

namespace {
std::atomic<int> counter{0};
}

TempDir::TempDir(const std::string& tag) {
  const auto base = std::filesystem::temp_directory_path();
  path_ = base / ("outreach-" + tag + "-" + std::to_string(::getpid()) + "-" +
                  std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::filesystem::path source_dir() { return OUTREACH_SOURCE_DIR; }

std::filesystem::path cli_path() { return OUTREACH_CLI_PATH; }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

outreach::SynthConfig small_config(std::size_t reference, std::size_t inputs, std::size_t features,
                                   std::uint64_t seed) {
  outreach::SynthConfig c;
  c.reference_size = reference;
  c.input_size = inputs;
  c.feature_count = features;
  c.seed = seed;
  return c;
}

outreach::SynthConfig default_config() {
  return outreach::SynthConfig::load(source_dir() / "config" / "synth_default.conf");
}

outreach::NormalizedRecord full_record(const std::string& id) {
  outreach::PersonRecord r;
  r.record_id = id;
  r.first_name = "William";
  r.middle_name = "J";
  r.last_name = "Okafor";
  r.suffix = "Jr";
  r.street_number = "1420";
  r.street_name = "Maple Ave";
  r.unit = "Apt 2";
  r.city = "Evanston";
  r.state = "IL";
  r.zip = "60201";
  r.phone = "(847) 555-0142";
  r.email = "w.okafor@example.com";
  r.dob = "1979-03-14";
  r.group = "g1";
  return outreach::normalize_record(r);
}

outreach::NormalizedRecord normalized(outreach::PersonRecord r) {
  return outreach::normalize_record(std::move(r));
}

int run_cli(const std::vector<std::string>& args, const std::filesystem::path& log) {
  std::string cmd = "'" + cli_path().string() + "'";
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

}  // namespace fixtures
