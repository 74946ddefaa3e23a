// outreach: command line front end for the linkage and targeting pipeline.
#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "outreach/balance.hpp"
#include "outreach/blocking.hpp"
#include "outreach/config.hpp"
#include "outreach/csv.hpp"
#include "outreach/error.hpp"
#include "outreach/eval.hpp"
#include "outreach/format.hpp"
#include "outreach/lookalike.hpp"
#include "outreach/matching.hpp"
#include "outreach/pipeline.hpp"
#include "outreach/records.hpp"
#include "outreach/synth.hpp"

namespace fs = std::filesystem;
using namespace outreach;

namespace {

ColumnMapping mapping_from(const std::vector<std::string>& assignments) {
  KeyValueConfig kv;
  for (const auto& a : assignments) kv.assign(a);
  std::map<std::string, std::string> entries;
  for (const auto& [k, v] : kv.entries()) entries.emplace(k, v);
  return ColumnMapping::from_entries(entries);
}

std::vector<NormalizedRecord> load_normalized(const fs::path& path, const ColumnMapping& mapping,
                                              std::vector<std::string>* feature_names = nullptr) {
  RecordSet set = parse_record_file(path, mapping);
  for (const auto& e : set.errors) {
    std::cerr << path.string() << ":" << e.line << ": skipped '" << e.record_id << "': " << e.reason
              << "\n";
  }
  if (feature_names) *feature_names = set.feature_names;
  return normalize_all(std::move(set.records));
}

void print_stats(const IndexStats& s, std::string_view backend) {
  std::cout << "backend: " << backend << "\n"
            << "records: " << s.record_count << "\n"
            << "keys: " << s.key_count << "\n"
            << "postings: " << s.posting_count << "\n"
            << "hot keys: " << s.hot_key_count << "\n"
            << "mean ids per key: " << format_fixed(s.mean_set_size, 3) << "\n"
            << "max ids per key: " << s.max_set_size << "\n";
  for (int t = 0; t < kTokenTypeCount; ++t) {
    std::cout << "keys of type " << (t + 1) << ": " << s.keys_per_type[static_cast<std::size_t>(t)]
              << "\n";
  }
}

std::map<std::string, SparseModel> load_group_models(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("models directory '" + dir.string() + "' not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("group_", 0) == 0 && entry.path().extension() == ".model") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, SparseModel> models;
  for (const auto& f : files) {
    SparseModel m = read_model(f);
    if (m.label.empty()) throw DataError("model '" + f.string() + "' has no group label");
    const std::string group = m.label;
    if (!models.emplace(group, std::move(m)).second) {
      throw DataError("two models for group '" + group + "'");
    }
  }
  if (models.empty()) throw DataError("no group_*.model files in '" + dir.string() + "'");
  return models;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Record linkage, lookalike modeling and balanced target selection"};
  app.require_subcommand(1);
  std::size_t workers = 4;
  app.add_option("--workers", workers, "Worker threads for parallel stages")->check(CLI::PositiveNumber);

  std::vector<std::string> map_args;
  auto add_mapping = [&](CLI::App* sub) {
    sub->add_option("--map", map_args, "Column mapping field=column (repeatable)");
  };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate and normalize a record file");
  fs::path ingest_ref, ingest_out, ingest_errors;
  ingest->add_option("--ref", ingest_ref, "Record CSV")->required();
  ingest->add_option("--out", ingest_out, "Write normalized records here");
  ingest->add_option("--errors", ingest_errors, "Write row errors here");
  add_mapping(ingest);

  // build-index
  auto* build = app.add_subcommand("build-index", "Build the on-disk blocking index");
  fs::path build_ref, build_out;
  std::size_t hot_key_cap = 1000;
  bool include_hot = false;
  build->add_option("--ref", build_ref, "Reference CSV")->required();
  build->add_option("--out", build_out, "Index file")->required();
  build->add_option("--hot-key-cap", hot_key_cap, "Ids per key above which a key is hot");
  build->add_flag("--include-hot", include_hot, "Keep hot keys in candidate sets");
  add_mapping(build);

  // index-stats
  auto* stats = app.add_subcommand("index-stats", "Print statistics of an index file");
  fs::path stats_index;
  stats->add_option("index", stats_index, "Index file")->required();

  // match
  auto* match = app.add_subcommand("match", "Match input records against a reference file");
  fs::path match_ref, match_in, match_index, match_out, match_model;
  double threshold = 0.5;
  match->add_option("--ref", match_ref, "Reference CSV")->required();
  match->add_option("--in", match_in, "Input CSV")->required();
  match->add_option("--index", match_index, "Index file from build-index")->required();
  match->add_option("--out", match_out, "Match CSV")->required();
  match->add_option("--threshold", threshold, "Accept threshold")->check(CLI::Range(0.0, 1.0));
  match->add_option("--pair-model", match_model, "Pair model file (default: shipped weights)");
  add_mapping(match);

  // make-training
  auto* make_training = app.add_subcommand("make-training", "Build the 50/50 training set");
  fs::path mt_ref, mt_matches, mt_out;
  std::uint64_t mt_seed = 1;
  make_training->add_option("--ref", mt_ref, "Reference CSV with features")->required();
  make_training->add_option("--matches", mt_matches, "Match CSV")->required();
  make_training->add_option("--out", mt_out, "Training set CSV")->required();
  make_training->add_option("--seed", mt_seed, "Negative sampling seed");
  add_mapping(make_training);

  // train
  auto* train = app.add_subcommand("train", "Fit L1 logistic models with k-fold CV");
  fs::path train_in, train_out;
  bool by_group = false;
  int k = 4;
  int lambda_count = 50;
  double lambda_min_ratio = 1e-4;
  std::vector<double> lambdas;
  std::uint64_t cv_seed = 2;
  std::uint64_t balance_seed = 3;
  std::size_t min_positives = 500;
  train->add_option("--training", train_in, "Training set CSV")->required();
  train->add_option("--out", train_out, "Model file, or directory with --by-group")->required();
  train->add_flag("--by-group", by_group, "One model per group label");
  train->add_option("--k", k, "Cross-validation folds")->check(CLI::Range(2, 1000));
  train->add_option("--lambda-count", lambda_count, "Grid size")->check(CLI::PositiveNumber);
  train->add_option("--lambda-min-ratio", lambda_min_ratio, "Smallest grid point over lambda max");
  train->add_option("--lambdas", lambdas, "Explicit lambda grid")->delimiter(',');
  train->add_option("--seed", cv_seed, "Fold assignment seed");
  train->add_option("--balance-seed", balance_seed, "Per-group down-sampling seed");
  train->add_option("--min-positives", min_positives, "Small-sample warning threshold");

  // score
  auto* score = app.add_subcommand("score", "Rank a population with a model");
  fs::path score_model, score_pop, score_out;
  score->add_option("--model", score_model, "Model file")->required();
  score->add_option("--pop", score_pop, "Population CSV with features")->required();
  score->add_option("--out", score_out, "Ranked CSV record_id,score")->required();
  add_mapping(score);

  // select
  auto* select = app.add_subcommand("select", "Build a group-proportional target list");
  fs::path sel_models, sel_pop, sel_props, sel_out, sel_exclude;
  std::size_t sel_n = 0;
  select->add_option("--models", sel_models, "Directory of group_<g>.model files")->required();
  select->add_option("--pop", sel_pop, "Population CSV with features and groups")->required();
  select->add_option("--proportions", sel_props, "CSV group,proportion")->required();
  select->add_option("--n", sel_n, "Target list size")->required();
  select->add_option("--out", sel_out, "Target CSV")->required();
  select->add_option("--exclude", sel_exclude, "Match CSV; matched reference ids are excluded");
  add_mapping(select);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Decile tables and lift charts");
  fs::path ev_scores, ev_out;
  std::string labels_col, score_col = "score";
  bool ev_by_group = false;
  evaluate->add_option("--scores", ev_scores, "CSV with record_id, score and label columns")->required();
  evaluate->add_option("--labels-col", labels_col, "0/1 label column")->required();
  evaluate->add_option("--score-col", score_col, "Score column");
  evaluate->add_flag("--by-group", ev_by_group, "Also one table per value of the group column");
  evaluate->add_option("--out", ev_out, "Output directory")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scenario");
  fs::path syn_config, syn_ref, syn_in, syn_truth, syn_props;
  std::vector<std::string> syn_sets;
  synth->add_option("--config", syn_config, "Synth config file");
  synth->add_option("--set", syn_sets, "Override key=value (repeatable)");
  synth->add_option("--out-ref", syn_ref, "Reference CSV")->required();
  synth->add_option("--out-in", syn_in, "Input CSV")->required();
  synth->add_option("--out-truth", syn_truth, "Truth CSV")->required();
  synth->add_option("--out-proportions", syn_props, "Group shares CSV");

  // run
  auto* run = app.add_subcommand("run", "Run the full pipeline");
  fs::path run_config;
  std::vector<std::string> run_sets;
  run->add_option("--config", run_config, "Run config file")->required();
  run->add_option("--set", run_sets, "Override key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kConfigError);
  }

  try {
    const ColumnMapping mapping = mapping_from(map_args);

    if (*ingest) {
      RecordSet set = parse_record_file(ingest_ref, mapping);
      if (!ingest_errors.empty()) {
        std::vector<std::pair<std::string, RowError>> errors;
        for (const auto& e : set.errors) errors.emplace_back(ingest_ref.string(), e);
        write_row_errors(ingest_errors, errors);
      }
      std::cout << "records: " << set.records.size() << "\n"
                << "row errors: " << set.errors.size() << "\n"
                << "features: " << set.feature_names.size() << "\n";
      if (!ingest_out.empty()) {
        const auto normalized = normalize_all(std::move(set.records));
        const std::vector<PersonRecord> plain(normalized.begin(), normalized.end());
        write_record_file(ingest_out, set.feature_names, plain);
      }
    } else if (*build) {
      const auto ref = load_normalized(build_ref, mapping);
      IndexOptions options;
      options.backend = Backend::kDisk;
      options.disk_path = build_out;
      options.hot_key_cap = hot_key_cap;
      options.exclude_hot = !include_hot;
      const BlockingIndex index = build_index(ref, options);
      print_stats(index.stats(), index.store().backend_name());
    } else if (*stats) {
      const BlockingIndex index = BlockingIndex::open(stats_index);
      print_stats(index.stats(), index.store().backend_name());
    } else if (*match) {
      const auto ref = load_normalized(match_ref, mapping);
      const auto in = load_normalized(match_in, mapping);
      const BlockingIndex index = BlockingIndex::open(match_index);
      const SparseModel model = match_model.empty() ? default_pair_model() : read_model(match_model);
      const ReferenceStore store(index, ref);
      MatchOptions options;
      options.accept_threshold = threshold;
      options.workers = workers;
      const MatchReport report = match_file(index, model, in, store, options);
      write_match_report(match_out, report);
      std::cout << "inputs: " << report.results.size() << "\n"
                << "accepted: " << report.accepted << "\n"
                << "match rate: " << format_double(report.match_rate) << "\n";
    } else if (*make_training) {
      std::vector<std::string> names;
      const auto ref = load_normalized(mt_ref, mapping, &names);
      const MatchReport report = read_match_report(mt_matches);
      const TrainingSet ts = build_training_set(accepted_reference_ids(report), names, ref, mt_seed);
      write_training_set(mt_out, ts);
      std::cout << "rows: " << ts.rows() << " (" << ts.positives() << " positive)\n";
    } else if (*train) {
      const TrainingSet ts = read_training_set(train_in);
      CVConfig cv;
      cv.k = k;
      cv.lambda_grid = lambdas;
      cv.lambda_count = lambda_count;
      cv.lambda_min_ratio = lambda_min_ratio;
      cv.seed = cv_seed;
      cv.workers = workers;
      if (by_group) {
        GroupTrainConfig gc;
        gc.cv = cv;
        gc.min_positives = min_positives;
        gc.seed = balance_seed;
        const GroupModelSet set = train_group_models(ts, gc);
        fs::create_directories(train_out);
        for (const auto& [g, gm] : set.models) {
          write_model(train_out / ("group_" + g + ".model"), gm.model);
          std::cout << g << ": lambda " << format_double(gm.model.lambda) << ", "
                    << gm.model.nonzero_count() << " variables\n";
        }
        for (const auto& [g, why] : set.errors) std::cerr << g << ": skipped: " << why << "\n";
        for (const auto& w : set.warnings) std::cerr << "warning: " << w << "\n";
      } else {
        FittedModel fitted = fit_with_cv(ts, cv);
        write_model(train_out, fitted.model);
        std::cout << "lambda: " << format_double(fitted.model.lambda) << "\n"
                  << "selected variables: " << fitted.model.nonzero_count() << "\n";
        for (const auto& [name, coef] : selected_variables(fitted.model)) {
          std::cout << "  " << name << " " << format_fixed(coef, 4) << "\n";
        }
      }
    } else if (*score) {
      const SparseModel model = read_model(score_model);
      std::vector<std::string> names;
      const auto pop = load_normalized(score_pop, mapping, &names);
      const auto ranked = score_population(model, names, pop);
      CsvWriter out(score_out);
      out.row({"record_id", "score"});
      for (const auto& r : ranked) {
        out.field(r.record_id).field(r.score);
        out.end_row();
      }
      out.flush();
    } else if (*select) {
      const auto models = load_group_models(sel_models);
      std::vector<std::string> names;
      const auto pop = load_normalized(sel_pop, mapping, &names);
      std::unordered_set<std::string> exclude;
      if (!sel_exclude.empty()) exclude = accepted_reference_ids(read_match_report(sel_exclude));
      PullOptions options;
      options.workers = workers;
      const TargetList list =
          proportional_pull(models, names, pop, sel_n, read_proportions(sel_props), exclude, options);
      write_target_list(sel_out, list);
      const auto counts = list.counts();
      for (const auto& [g, q] : list.quotas) {
        std::cout << g << ": quota " << q << ", selected " << (counts.count(g) ? counts.at(g) : 0)
                  << "\n";
      }
      for (const auto& [g, sf] : list.shortfalls) {
        std::cerr << "shortfall: group '" << g << "' is " << sf << " short of its quota\n";
      }
      if (list.unlabeled) std::cerr << "skipped " << list.unlabeled << " rows without a group\n";
    } else if (*evaluate) {
      const auto tables = decile_tables_from_csv(ev_scores, score_col, labels_col, ev_by_group);
      render_decile_report(tables, ev_out);
      for (const auto& [g, t] : tables) {
        std::cout << render_decile_chart(g, t);
        if (t.base_rate > 0) std::cout << "top decile lift: " << format_fixed(lift(t, 1), 3) << "\n";
        std::cout << "\n";
      }
    } else if (*synth) {
      KeyValueConfig kv;
      if (!syn_config.empty()) kv = KeyValueConfig::load(syn_config);
      for (const auto& s : syn_sets) kv.assign(s);
      const SynthConfig cfg = SynthConfig::from_config(kv);
      const Scenario scenario = generate_scenario(cfg);
      for (const auto& out : {syn_ref, syn_in, syn_truth, syn_props}) {
        if (!out.empty() && fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
      }
      write_record_file(syn_ref, scenario.reference.feature_names, scenario.reference.records);
      write_record_file(syn_in, {}, scenario.inputs.records);
      write_truth(syn_truth, scenario);
      if (!syn_props.empty()) write_group_shares(syn_props, cfg);
      std::cout << "reference rows: " << scenario.reference.records.size() << "\n"
                << "input rows: " << scenario.inputs.records.size() << "\n"
                << "true duplicates: " << scenario.inputs.pairs.size() << "\n";
    } else if (*run) {
      KeyValueConfig overrides;
      for (const auto& s : run_sets) overrides.assign(s);
      if (app.count("--workers") && !overrides.contains("workers")) {
        overrides.set("workers", std::to_string(workers));
      }
      const KeyValueConfig file = KeyValueConfig::load(run_config);
      const RunConfig cfg = RunConfig::resolve(file, overrides);
      const RunResult result = run_pipeline(cfg);
      std::cout << result.report;
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kStageFailure);
  }
  return 0;
}
