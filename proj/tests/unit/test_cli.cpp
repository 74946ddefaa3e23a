#include <doctest.h>

#include "fixtures.hpp"
#include "outreach/balance.hpp"
#include "outreach/lookalike.hpp"
#include "outreach/matching.hpp"
#include "outreach/synth.hpp"

using namespace outreach;
namespace fs = std::filesystem;
using fixtures::run_cli;

namespace {

struct CliScenario {
  fixtures::TempDir dir{"cli"};
  fs::path log = dir / "log.txt";

  CliScenario() {
    const int code = run_cli({"synth", "--config", (fixtures::source_dir() / "config" / "synth_default.conf").string(),
                              "--set", "reference_size=5000", "--set", "input_size=600",
                              "--set", "feature_count=12", "--set", "seed=99",
                              "--out-ref", (dir / "ref.csv").string(),
                              "--out-in", (dir / "in.csv").string(),
                              "--out-truth", (dir / "truth.csv").string(),
                              "--out-proportions", (dir / "props.csv").string()},
                             log);
    REQUIRE(code == 0);
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  void write_run_config(const std::string& name, const std::string& out_dir,
                        const std::string& extra = "") const {
    fixtures::write_file(dir / name, "# test run\nreference = " + path("ref.csv") +
                                         "\ninput = " + path("in.csv") +
                                         "\nproportions = " + path("props.csv") +
                                         "\ntruth = " + path("truth.csv") +
                                         "\noutput_dir = " + path(out_dir) +
                                         "\ncv.lambda_count = 8\ncv.lambda_min_ratio = 0.01\n"
                                         "targets = 400\n" + extra);
  }
};

}  // namespace

TEST_CASE("synth writes the scenario files") {
  CliScenario s;
  CHECK(parse_record_file(s.dir / "ref.csv").records.size() == 5000);
  CHECK(parse_record_file(s.dir / "in.csv").records.size() == 600);
  CHECK(read_truth(s.dir / "truth.csv").pairs.size() == 180);
  CHECK(read_proportions(s.dir / "props.csv").size() == 5);
}

TEST_CASE("subcommands chain into a full run") {
  CliScenario s;
  const auto& log = s.log;
  CHECK(run_cli({"ingest", "--ref", s.path("in.csv"), "--out", s.path("in_norm.csv"),
                 "--errors", s.path("in_errors.csv")}, log) == 0);
  CHECK(fixtures::read_file(log).find("records: 600") != std::string::npos);
  CHECK(fs::exists(s.dir / "in_norm.csv"));

  CHECK(run_cli({"build-index", "--ref", s.path("ref.csv"), "--out", s.path("idx.bin")}, log) == 0);
  CHECK(run_cli({"index-stats", s.path("idx.bin")}, log) == 0);
  CHECK(fixtures::read_file(log).find("keys of type 9") != std::string::npos);

  CHECK(run_cli({"--workers", "3", "match", "--ref", s.path("ref.csv"), "--in", s.path("in.csv"),
                 "--index", s.path("idx.bin"), "--out", s.path("matches.csv")}, log) == 0);
  const auto matches = read_match_report(s.dir / "matches.csv");
  CHECK(matches.results.size() == 600);
  CHECK(matches.accepted > 150);

  CHECK(run_cli({"make-training", "--ref", s.path("ref.csv"), "--matches", s.path("matches.csv"),
                 "--out", s.path("training.csv"), "--seed", "4"}, log) == 0);
  const auto ts = read_training_set(s.dir / "training.csv");
  CHECK(ts.rows() == 2 * ts.positives());

  CHECK(run_cli({"train", "--training", s.path("training.csv"), "--out", s.path("pooled.model"),
                 "--lambda-count", "8", "--lambda-min-ratio", "0.01"}, log) == 0);
  CHECK(read_model(s.dir / "pooled.model").feature_names == ts.feature_names);
  CHECK(run_cli({"train", "--training", s.path("training.csv"), "--out", s.path("models"),
                 "--by-group", "--lambda-count", "8", "--lambda-min-ratio", "0.01"}, log) == 0);
  CHECK(fs::exists(s.dir / "models" / "group_white.model"));

  CHECK(run_cli({"score", "--model", s.path("pooled.model"), "--pop", s.path("ref.csv"),
                 "--out", s.path("ranked.csv")}, log) == 0);
  CHECK(run_cli({"select", "--models", s.path("models"), "--pop", s.path("ref.csv"),
                 "--proportions", s.path("props.csv"), "--n", "300", "--out", s.path("targets.csv"),
                 "--exclude", s.path("matches.csv")}, log) == 0);
  const auto targets = fixtures::read_file(s.dir / "targets.csv");
  CHECK(targets.rfind("rank,record_id,group,score\n", 0) == 0);
  CHECK(std::count(targets.begin(), targets.end(), '\n') == 301);

  {
    std::string text = "record_id,score,label\n";
    for (int i = 0; i < 50; ++i) {
      text += "r" + std::to_string(i) + "," + std::to_string(i) + "," + (i > 40 ? "1" : "0") + "\n";
    }
    fixtures::write_file(s.dir / "scored.csv", text);
  }
  CHECK(run_cli({"evaluate", "--scores", s.path("scored.csv"), "--labels-col", "label",
                 "--out", s.path("eval")}, log) == 0);
  CHECK(fs::exists(s.dir / "eval" / "decile_pooled.csv"));
  CHECK(fixtures::read_file(log).find("top decile lift") != std::string::npos);
}

TEST_CASE("run is reproducible and honours overrides") {
  CliScenario s;
  s.write_run_config("run.conf", "out");
  CHECK(run_cli({"run", "--config", s.path("run.conf")}, s.log) == 0);
  const auto report = fixtures::read_file(s.dir / "out" / "report.txt");
  CHECK(fixtures::read_file(s.log).find(report) != std::string::npos);
  const auto targets = fixtures::read_file(s.dir / "out" / "targets.csv");
  CHECK(run_cli({"--workers", "2", "run", "--config", s.path("run.conf")}, s.log) == 0);
  CHECK(fixtures::read_file(s.dir / "out" / "targets.csv") == targets);
  CHECK(fixtures::read_file(s.dir / "out" / "report.txt") == report);
  CHECK(fixtures::read_file(s.dir / "out" / "effective_config.conf").find("workers = 2\n") !=
        std::string::npos);

  CHECK(run_cli({"run", "--config", s.path("run.conf"), "--set", "targets=250",
                 "--set", "output_dir=" + s.path("out2")}, s.log) == 0);
  const auto t2 = fixtures::read_file(s.dir / "out2" / "targets.csv");
  CHECK(std::count(t2.begin(), t2.end(), '\n') == 251);
}

TEST_CASE("exit codes") {
  CliScenario s;
  SUBCASE("missing reference is a config error in ingest") {
    fixtures::write_file(s.dir / "bad.conf", "reference = " + s.path("nope.csv") + "\ninput = " +
                                                 s.path("in.csv") + "\nproportions = " +
                                                 s.path("props.csv") + "\noutput_dir = " +
                                                 s.path("bad_out") + "\n");
    CHECK(run_cli({"run", "--config", s.path("bad.conf")}, s.log) == 2);
    CHECK(fixtures::read_file(s.log).find("ingest") != std::string::npos);
    std::vector<std::string> written;
    for (const auto& e : fs::recursive_directory_iterator(s.dir / "bad_out")) {
      written.push_back(e.path().filename().string());
    }
    CHECK(written == std::vector<std::string>{"effective_config.conf"});
  }
  SUBCASE("unknown config key") {
    s.write_run_config("typo.conf", "o", "acept_threshold = 0.4\n");
    CHECK(run_cli({"run", "--config", s.path("typo.conf")}, s.log) == 2);
  }
  SUBCASE("bad arguments") {
    CHECK(run_cli({"no-such-command"}, s.log) == 2);
    CHECK(run_cli({"match", "--ref", s.path("ref.csv")}, s.log) == 2);
    CHECK(run_cli({"--help"}, s.log) == 0);
  }
  SUBCASE("data errors") {
    fixtures::write_file(s.dir / "dup.csv", "record_id,first_name\nA,x\nA,y\n");
    CHECK(run_cli({"ingest", "--ref", s.path("dup.csv")}, s.log) == 3);
    fixtures::write_file(s.dir / "junk.bin", "junk");
    CHECK(run_cli({"index-stats", s.path("junk.bin")}, s.log) != 0);
  }
  SUBCASE("duplicate ids in the reference fail the ingest stage as data errors") {
    auto text = fixtures::read_file(s.dir / "ref.csv");
    const auto first_row_end = text.find('\n', text.find('\n') + 1);
    text += text.substr(text.find('\n') + 1, first_row_end - text.find('\n'));
    fixtures::write_file(s.dir / "ref.csv", text);
    s.write_run_config("run.conf", "dup_out");
    CHECK(run_cli({"run", "--config", s.path("run.conf")}, s.log) == 3);
    CHECK(fixtures::read_file(s.log).find("ingest") != std::string::npos);
  }
}
