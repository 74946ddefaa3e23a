#include <doctest.h>

#include "fixtures.hpp"
#include "outreach/csv.hpp"
#include "outreach/error.hpp"
#include "outreach/format.hpp"
#include "outreach/pipeline.hpp"
#include "outreach/synth.hpp"

using namespace outreach;
namespace fs = std::filesystem;

namespace {

// Small scenario on disk plus a matching run configuration.
struct Workspace {
  fixtures::TempDir dir{"pipeline"};
  KeyValueConfig conf;

  Workspace() {
    const auto cfg = fixtures::small_config(6000, 800, 10, 31);
    const auto s = generate_scenario(cfg);
    write_record_file(dir / "ref.csv", s.reference.feature_names, s.reference.records);
    write_record_file(dir / "in.csv", {}, s.inputs.records);
    write_truth(dir / "truth.csv", s);
    write_group_shares(dir / "props.csv", cfg);
    conf.set("reference", (dir / "ref.csv").string());
    conf.set("input", (dir / "in.csv").string());
    conf.set("proportions", (dir / "props.csv").string());
    conf.set("truth", (dir / "truth.csv").string());
    conf.set("output_dir", (dir / "out").string());
    conf.set("cv.lambda_count", "8");
    conf.set("cv.lambda_min_ratio", "0.01");
    conf.set("targets", "500");
    conf.set("workers", "2");
  }
};

}  // namespace

TEST_CASE("run config precedence and validation") {
  KeyValueConfig file;
  file.set("output_dir", "/tmp/x");
  file.set("targets", "77");
  file.set("accept_threshold", "0.7");
  KeyValueConfig cli;
  cli.set("targets", "88");
  const auto c = RunConfig::resolve(file, cli);
  CHECK(c.targets == 88);
  CHECK(c.accept_threshold == 0.7);
  CHECK(c.cv_k == 4);
  CHECK(c.hot_key_cap == 1000);
  CHECK(c.backend == Backend::kMemory);
  CHECK(RunConfig::resolve(c.to_config()).to_config().to_text() == c.to_config().to_text());

  KeyValueConfig bad = file;
  bad.set("no_such_key", "1");
  CHECK_THROWS_AS(RunConfig::resolve(bad), ConfigError);
  CHECK_THROWS_AS(RunConfig::resolve(KeyValueConfig{}), ConfigError);
  bad = file;
  bad.set("backend", "cloud");
  CHECK_THROWS_AS(RunConfig::resolve(bad), ConfigError);
  bad = file;
  bad.set("cv.k", "1");
  CHECK_THROWS_AS(RunConfig::resolve(bad), ConfigError);
  bad = file;
  bad.set("accept_threshold", "1.5");
  CHECK_THROWS_AS(RunConfig::resolve(bad), ConfigError);

  file.set("map.first_name", "given");
  const auto mapped = RunConfig::resolve(file);
  CHECK(mapped.mapping.column(Field::kFirstName) == "given");
  CHECK(mapped.mapping.is_explicit(Field::kFirstName));
}

TEST_CASE("end-to-end run writes every artifact") {
  Workspace ws;
  const auto cfg = RunConfig::resolve(ws.conf);
  const auto result = run_pipeline(cfg);
  const auto out = ws.dir / "out";
  for (const char* name : {"effective_config.conf", "ingest_errors.csv", "matches.csv",
                           "training_set.csv", "models/pooled.model", "targets.csv", "scores.csv",
                           "deciles/decile_pooled.csv", "deciles/decile_pooled.txt", "report.txt"}) {
    CHECK_MESSAGE(fs::exists(out / name), name);
  }
  const auto& s = result.summary;
  CHECK(s.reference_rows == 6000);
  CHECK(s.input_rows == 800);
  CHECK(s.group_models.size() == 5);
  for (const auto& [g, m] : s.group_models) CHECK(fs::exists(out / "models" / ("group_" + g + ".model")));
  CHECK(s.targets.entries.size() == 500);
  CHECK(s.deciles.count("pooled") == 1);
  CHECK(s.deciles.size() == 6);
  CHECK(s.training_rows == 2 * s.training_positives);
  CHECK(s.training_positives == accepted_reference_ids(s.matches).size());

  // match rate reported is the matcher's own aggregate
  const auto from_disk = read_match_report(out / "matches.csv");
  CHECK(from_disk.results == s.matches.results);
  const auto report = fixtures::read_file(out / "report.txt");
  CHECK(report == result.report);
  CHECK(report.find("match rate: " + format_double(s.matches.match_rate) + "\n") != std::string::npos);
  for (const char* section : {"[ingest]", "[index]", "[match]", "[training]", "[targets]", "[evaluation]"}) {
    CHECK_MESSAGE(report.find(section) != std::string::npos, section);
  }

  // matched accountholders never reappear as targets
  const auto matched = accepted_reference_ids(s.matches);
  for (const auto& e : s.targets.entries) CHECK(matched.count(e.record_id) == 0);

  // the effective config reproduces the run configuration
  const auto effective = KeyValueConfig::load(out / "effective_config.conf");
  CHECK(RunConfig::resolve(effective).to_config().to_text() == cfg.to_config().to_text());

  // evaluate-from-file agrees with the in-run tables
  const auto tables = decile_tables_from_csv(out / "scores.csv", "score", "label", true);
  CHECK(tables.at("pooled") == s.deciles.at("pooled"));
}

TEST_CASE("rerun is byte-identical") {
  Workspace ws;
  run_pipeline(RunConfig::resolve(ws.conf));
  const auto out = ws.dir / "out";
  const auto targets = fixtures::read_file(out / "targets.csv");
  const auto report = fixtures::read_file(out / "report.txt");
  const auto scores = fixtures::read_file(out / "scores.csv");
  KeyValueConfig more;
  more.set("workers", "5");
  run_pipeline(RunConfig::resolve(ws.conf, more));
  CHECK(fixtures::read_file(out / "targets.csv") == targets);
  CHECK(fixtures::read_file(out / "report.txt") == report);
  CHECK(fixtures::read_file(out / "scores.csv") == scores);
}

TEST_CASE("disk backend gives the same result") {
  Workspace ws;
  const auto a = run_pipeline(RunConfig::resolve(ws.conf));
  KeyValueConfig disk;
  disk.set("backend", "disk");
  disk.set("output_dir", (ws.dir / "out_disk").string());
  const auto b = run_pipeline(RunConfig::resolve(ws.conf, disk));
  CHECK(fs::exists(ws.dir / "out_disk" / "index.bin"));
  CHECK(a.summary.matches.results == b.summary.matches.results);
  CHECK(fixtures::read_file(ws.dir / "out" / "targets.csv") ==
        fixtures::read_file(ws.dir / "out_disk" / "targets.csv"));
}

TEST_CASE("missing reference fails in ingest and writes only the config copy") {
  Workspace ws;
  KeyValueConfig o;
  o.set("reference", (ws.dir / "nope.csv").string());
  const auto cfg = RunConfig::resolve(ws.conf, o);
  try {
    run_pipeline(cfg);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "ingest");
    CHECK(e.exit_code() == ExitCode::kConfigError);
  }
  std::vector<std::string> written;
  for (const auto& entry : fs::recursive_directory_iterator(ws.dir / "out")) {
    written.push_back(entry.path().filename().string());
  }
  CHECK(written == std::vector<std::string>{"effective_config.conf"});
}

TEST_CASE("malformed rows are reported and skipped") {
  Workspace ws;
  auto text = fixtures::read_file(ws.dir / "in.csv");
  text += "BAD1,Ann,,Lee,,1,Oak,,Chicago,IL,606,,,,\n";
  fixtures::write_file(ws.dir / "in.csv", text);
  const auto r = run_pipeline(RunConfig::resolve(ws.conf));
  CHECK(r.summary.input_row_errors == 1);
  CHECK(r.summary.input_rows == 800);
  const auto errors = fixtures::read_file(ws.dir / "out" / "ingest_errors.csv");
  CHECK(errors.find("BAD1") != std::string::npos);
}

TEST_CASE("without truth labels, evaluation uses the match indicator") {
  Workspace ws;
  KeyValueConfig o;
  o.set("truth", "");
  const auto r = run_pipeline(RunConfig::resolve(ws.conf, o));
  CHECK(r.summary.label_source.find("match") != std::string::npos);
  CHECK(r.summary.deciles.at("pooled").positives == accepted_reference_ids(r.summary.matches).size());
}
