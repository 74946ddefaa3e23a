#include "outreach/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "outreach/csv.hpp"
#include "outreach/error.hpp"
#include "outreach/format.hpp"
#include "outreach/synth.hpp"

namespace outreach {

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "reference",        "input",          "proportions",      "truth",
      "output_dir",       "pair_model",     "abbreviations",    "backend",
      "hot_key_cap",      "exclude_hot",    "accept_threshold", "cv.k",
      "cv.lambdas",       "cv.lambda_count", "cv.lambda_min_ratio", "train.tolerance",
      "train.max_iterations", "targets",    "min_positives",    "seed.training",
      "seed.cv",          "seed.balance",   "workers",
  };
  return keys;
}

std::size_t non_negative(const KeyValueConfig& kv, std::string_view key, std::size_t fallback) {
  const long long v = kv.get_int(key, static_cast<long long>(fallback));
  if (v < 0) throw ConfigError(std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

std::string path_text(const std::filesystem::path& p) { return p.generic_string(); }

}  // namespace

RunConfig RunConfig::resolve(const KeyValueConfig& file, const KeyValueConfig& overrides) {
  KeyValueConfig kv = file;
  for (const auto& [k, v] : overrides.entries()) kv.set(k, v);
  for (const auto& [key, value] : kv.entries()) {
    if (key.rfind("map.", 0) == 0) continue;
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown setting '" + key + "'");
    }
  }

  RunConfig c;
  c.reference = kv.get_string("reference", "");
  c.input = kv.get_string("input", "");
  c.proportions = kv.get_string("proportions", "");
  c.truth = kv.get_string("truth", "");
  c.output_dir = kv.get_string("output_dir", "");
  c.pair_model = kv.get_string("pair_model", "");
  c.abbreviations = kv.get_string("abbreviations", "");
  c.mapping_entries = kv.with_prefix("map.");
  c.mapping = ColumnMapping::from_entries(c.mapping_entries);
  c.backend = parse_backend(kv.get_string("backend", "memory"));
  c.hot_key_cap = non_negative(kv, "hot_key_cap", c.hot_key_cap);
  c.exclude_hot = kv.get_bool("exclude_hot", c.exclude_hot);
  c.accept_threshold = kv.get_double("accept_threshold", c.accept_threshold);
  c.cv_k = static_cast<int>(kv.get_int("cv.k", c.cv_k));
  c.lambdas = kv.get_doubles("cv.lambdas", {});
  c.lambda_count = static_cast<int>(kv.get_int("cv.lambda_count", c.lambda_count));
  c.lambda_min_ratio = kv.get_double("cv.lambda_min_ratio", c.lambda_min_ratio);
  c.tolerance = kv.get_double("train.tolerance", c.tolerance);
  c.max_iterations = static_cast<int>(kv.get_int("train.max_iterations", c.max_iterations));
  c.targets = non_negative(kv, "targets", c.targets);
  c.min_positives = non_negative(kv, "min_positives", c.min_positives);
  c.training_seed = non_negative(kv, "seed.training", c.training_seed);
  c.cv_seed = non_negative(kv, "seed.cv", c.cv_seed);
  c.balance_seed = non_negative(kv, "seed.balance", c.balance_seed);
  c.workers = std::max<std::size_t>(1, non_negative(kv, "workers", c.workers));

  if (c.output_dir.empty()) throw ConfigError("output_dir is required");
  if (!(c.accept_threshold >= 0.0 && c.accept_threshold <= 1.0)) {
    throw ConfigError("accept_threshold must be in [0,1]");
  }
  if (c.cv_k < 2) throw ConfigError("cv.k must be >= 2");
  if (c.lambda_count < 1) throw ConfigError("cv.lambda_count must be >= 1");
  for (double l : c.lambdas) {
    if (!(l >= 0.0)) throw ConfigError("cv.lambdas must be >= 0");
  }
  if (!(c.tolerance > 0.0)) throw ConfigError("train.tolerance must be > 0");
  if (c.max_iterations < 1) throw ConfigError("train.max_iterations must be >= 1");
  return c;
}

KeyValueConfig RunConfig::to_config() const {
  KeyValueConfig kv;
  kv.set("reference", path_text(reference));
  kv.set("input", path_text(input));
  kv.set("proportions", path_text(proportions));
  kv.set("truth", path_text(truth));
  kv.set("output_dir", path_text(output_dir));
  kv.set("pair_model", path_text(pair_model));
  kv.set("abbreviations", path_text(abbreviations));
  for (const auto& [k, v] : mapping_entries) kv.set("map." + k, v);
  kv.set("backend", backend == Backend::kDisk ? "disk" : "memory");
  kv.set("hot_key_cap", std::to_string(hot_key_cap));
  kv.set("exclude_hot", exclude_hot ? "true" : "false");
  kv.set("accept_threshold", format_double(accept_threshold));
  kv.set("cv.k", std::to_string(cv_k));
  std::string lambda_list;
  for (double l : lambdas) lambda_list += (lambda_list.empty() ? "" : ",") + format_double(l);
  kv.set("cv.lambdas", lambda_list);
  kv.set("cv.lambda_count", std::to_string(lambda_count));
  kv.set("cv.lambda_min_ratio", format_double(lambda_min_ratio));
  kv.set("train.tolerance", format_double(tolerance));
  kv.set("train.max_iterations", std::to_string(max_iterations));
  kv.set("targets", std::to_string(targets));
  kv.set("min_positives", std::to_string(min_positives));
  kv.set("seed.training", std::to_string(training_seed));
  kv.set("seed.cv", std::to_string(cv_seed));
  kv.set("seed.balance", std::to_string(balance_seed));
  kv.set("workers", std::to_string(workers));
  return kv;
}

CVConfig RunConfig::cv_config() const {
  CVConfig cv;
  cv.k = cv_k;
  cv.lambda_grid = lambdas;
  cv.lambda_count = lambda_count;
  cv.lambda_min_ratio = lambda_min_ratio;
  cv.seed = cv_seed;
  cv.train.tolerance = tolerance;
  cv.train.max_iterations = max_iterations;
  cv.workers = workers;
  return cv;
}

void write_row_errors(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, RowError>>& errors) {
  CsvWriter out(path);
  out.row({"file", "line", "record_id", "reason"});
  for (const auto& [file, e] : errors) {
    out.field(file).field(e.line).field(e.record_id).field(e.reason);
    out.end_row();
  }
  out.flush();
}

void write_scores(const std::filesystem::path& path, const std::vector<ScoreRow>& rows) {
  CsvWriter out(path);
  out.row({"record_id", "group", "score", "group_score", "label"});
  for (const auto& r : rows) {
    out.field(r.record_id).field(r.group).field(r.score);
    if (std::isnan(r.group_score)) {
      out.field("");
    } else {
      out.field(r.group_score);
    }
    out.field(r.label);
    out.end_row();
  }
  out.flush();
}

std::map<std::string, DecileTable> decile_tables_from_csv(const std::filesystem::path& scores,
                                                          const std::string& score_column,
                                                          const std::string& label_column,
                                                          bool by_group) {
  const CsvTable t = read_csv(scores);
  const int id_col = t.column("record_id");
  const int score_col = t.column(score_column);
  const int label_col = t.column(label_column);
  const int group_col = t.column("group");
  if (id_col < 0) throw DataError(scores.string() + ": missing record_id column");
  if (score_col < 0) throw DataError(scores.string() + ": missing score column '" + score_column + "'");
  if (label_col < 0) throw DataError(scores.string() + ": missing label column '" + label_column + "'");
  if (by_group && group_col < 0) throw DataError(scores.string() + ": missing group column");

  struct Columns {
    std::vector<std::string> ids;
    std::vector<double> scores;
    std::vector<int> labels;
  };
  std::map<std::string, Columns> split;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw DataError(scores.string() + ": ragged row");
    if (row[score_col].empty()) continue;
    const auto s = parse_double(row[score_col]);
    const auto y = parse_int(row[label_col]);
    if (!s || !y) throw DataError(scores.string() + ": bad score or label for '" + row[id_col] + "'");
    auto add = [&](const std::string& key) {
      auto& c = split[key];
      c.ids.push_back(row[id_col]);
      c.scores.push_back(*s);
      c.labels.push_back(static_cast<int>(*y));
    };
    add("pooled");
    if (by_group && !row[group_col].empty()) add(row[group_col]);
  }
  std::map<std::string, DecileTable> tables;
  for (const auto& [key, c] : split) tables.emplace(key, decile_table(c.ids, c.scores, c.labels));
  return tables;
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  } catch (const std::exception& e) {
    throw StageError(name, std::string(e.what()));
  }
}

void require_file(const std::filesystem::path& p, const char* key) {
  if (p.empty()) throw ConfigError(std::string(key) + " is required");
  std::error_code ec;
  if (!std::filesystem::is_regular_file(p, ec)) {
    throw ConfigError(std::string(key) + " '" + p.string() + "' does not exist");
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

std::string model_file_name(const std::string& group) {
  if (group.empty() || group.find_first_of("/\\:") != std::string::npos || group == "." ||
      group == "..") {
    throw DataError("group label '" + group + "' cannot be used in a file name");
  }
  return "group_" + group + ".model";
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string render_report(const RunConfig& cfg, const StageSummary& s) {
  std::ostringstream out;
  out << "outreach run report\n\n";
  out << "[ingest]\n";
  out << "reference rows: " << s.reference_rows << " (" << s.reference_row_errors << " row errors)\n";
  out << "input rows: " << s.input_rows << " (" << s.input_row_errors << " row errors)\n\n";

  out << "[index]\n";
  out << "backend: " << (cfg.backend == Backend::kDisk ? "disk" : "memory") << "\n";
  out << "keys: " << s.index.key_count << "\n";
  out << "postings: " << s.index.posting_count << "\n";
  out << "hot keys (> " << cfg.hot_key_cap << " ids): " << s.index.hot_key_count
      << (cfg.exclude_hot ? ", excluded" : ", included") << "\n";
  out << "max ids per key: " << s.index.max_set_size << "\n";
  out << "mean candidates per input: " << format_fixed(s.mean_candidates, 3) << "\n\n";

  out << "[match]\n";
  out << "accept threshold: " << format_double(cfg.accept_threshold) << "\n";
  out << "accepted: " << s.matches.accepted << " of " << s.matches.results.size() << "\n";
  out << "match rate: " << format_double(s.matches.match_rate) << "\n\n";

  out << "[training]\n";
  out << "rows: " << s.training_rows << " (" << s.training_positives << " positive)\n";
  out << "pooled model: lambda " << format_double(s.pooled_model.lambda) << ", "
      << s.pooled_model.nonzero_count() << " of " << s.pooled_model.feature_names.size()
      << " variables selected" << (s.pooled_model.converged ? "" : ", NOT CONVERGED") << "\n";
  out << "top variables:\n";
  const auto selected = selected_variables(s.pooled_model);
  for (std::size_t i = 0; i < selected.size() && i < 10; ++i) {
    out << "  " << pad(selected[i].first, 20) << format_fixed(selected[i].second, 4) << "\n";
  }
  out << "group models:\n";
  for (const auto& [g, m] : s.group_models) {
    out << "  " << pad(g, 12) << "lambda " << format_double(m.lambda) << ", " << m.nonzero_count()
        << " variables" << (m.converged ? "" : ", NOT CONVERGED") << "\n";
  }
  for (const auto& [g, why] : s.group_errors) out << "  " << pad(g, 12) << "skipped: " << why << "\n";
  for (const auto& w : s.warnings) out << "warning: " << w << "\n";
  out << "\n";

  out << "[targets]\n";
  out << "requested: " << s.targets.size << "\n";
  out << "selected: " << s.targets.entries.size() << "\n";
  out << "excluded accountholders: " << s.targets.excluded << "\n";
  out << "unlabeled population rows: " << s.targets.unlabeled << "\n";
  const auto counts = s.targets.counts();
  out << pad("group", 12) << pad("quota", 10) << pad("selected", 10) << "shortfall\n";
  for (const auto& [g, q] : s.targets.quotas) {
    const auto c = counts.count(g) ? counts.at(g) : 0;
    const auto sf = s.targets.shortfalls.count(g) ? s.targets.shortfalls.at(g) : 0;
    out << pad(g, 12) << pad(std::to_string(q), 10) << pad(std::to_string(c), 10) << sf << "\n";
  }
  out << "\n";

  out << "[evaluation]\n";
  out << "labels: " << s.label_source << "\n";
  for (const auto& [key, t] : s.deciles) {
    out << "\n" << key << " (n " << t.n << ", base rate " << format_fixed(t.base_rate, 4) << ")\n";
    out << pad("decile", 8) << pad("count", 8) << pad("positives", 11) << pad("rate", 8) << "lift\n";
    for (const auto& row : t.rows) {
      out << pad(std::to_string(row.decile), 8) << pad(std::to_string(row.count), 8)
          << pad(std::to_string(row.positives), 11) << pad(format_fixed(row.rate, 4), 8)
          << (t.base_rate > 0 ? format_fixed(row.rate / t.base_rate, 3) : std::string("-")) << "\n";
    }
  }
  return out.str();
}

RunResult run_pipeline(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path out_dir = cfg.output_dir;
  {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw StageError("config", ConfigError("cannot create output_dir '" + out_dir.string() + "'"));
  }
  write_text(out_dir / "effective_config.conf", cfg.to_config().to_text());

  RunResult result;
  StageSummary& s = result.summary;

  // ingest
  struct Ingested {
    std::vector<std::string> feature_names;
    std::vector<NormalizedRecord> reference;
    std::vector<NormalizedRecord> inputs;
  };
  Ingested data = stage("ingest", [&] {
    require_file(cfg.reference, "reference");
    require_file(cfg.input, "input");
    require_file(cfg.proportions, "proportions");
    if (!cfg.truth.empty()) require_file(cfg.truth, "truth");
    if (!cfg.pair_model.empty()) require_file(cfg.pair_model, "pair_model");
    if (!cfg.abbreviations.empty()) require_file(cfg.abbreviations, "abbreviations");
    const AbbreviationTable abbreviations = cfg.abbreviations.empty()
                                                ? AbbreviationTable::bundled()
                                                : AbbreviationTable::load(cfg.abbreviations);
    RecordSet ref = parse_record_file(cfg.reference, cfg.mapping);
    RecordSet in = parse_record_file(cfg.input, cfg.mapping);
    std::vector<std::pair<std::string, RowError>> errors;
    for (auto& e : ref.errors) errors.emplace_back("reference", std::move(e));
    for (auto& e : in.errors) errors.emplace_back("input", std::move(e));
    write_row_errors(out_dir / "ingest_errors.csv", errors);
    s.reference_rows = ref.records.size();
    s.input_rows = in.records.size();
    s.reference_row_errors = ref.errors.size();
    s.input_row_errors = in.errors.size();
    Ingested d;
    d.feature_names = std::move(ref.feature_names);
    d.reference = normalize_all(std::move(ref.records), abbreviations);
    d.inputs = normalize_all(std::move(in.records), abbreviations);
    return d;
  });

  BlockingIndex index = stage("index", [&] {
    IndexOptions options;
    options.backend = cfg.backend;
    options.disk_path = out_dir / "index.bin";
    options.hot_key_cap = cfg.hot_key_cap;
    options.exclude_hot = cfg.exclude_hot;
    BlockingIndex built = build_index(data.reference, options);
    s.index = built.stats();
    return built;
  });

  stage("match", [&] {
    const SparseModel model = cfg.pair_model.empty() ? default_pair_model() : read_model(cfg.pair_model);
    check_pair_model(model);
    const ReferenceStore store(index, data.reference);
    MatchOptions options;
    options.accept_threshold = cfg.accept_threshold;
    options.workers = cfg.workers;
    s.matches = match_file(index, model, data.inputs, store, options);
    double total = 0.0;
    for (const auto& r : s.matches.results) total += static_cast<double>(r.n_candidates);
    s.mean_candidates = s.matches.results.empty() ? 0.0 : total / static_cast<double>(s.matches.results.size());
    write_match_report(out_dir / "matches.csv", s.matches);
    return 0;
  });
  const auto matched = accepted_reference_ids(s.matches);

  TrainingSet training = stage("make-training", [&] {
    TrainingSet ts = build_training_set(matched, data.feature_names, data.reference, cfg.training_seed);
    write_training_set(out_dir / "training_set.csv", ts);
    s.training_rows = ts.rows();
    s.training_positives = ts.positives();
    return ts;
  });

  struct Trained {
    FittedModel pooled;
    GroupModelSet groups;
  };
  Trained trained = stage("train", [&] {
    Trained t;
    t.pooled = fit_with_cv(training, cfg.cv_config());
    t.pooled.model.label = "pooled";
    GroupTrainConfig gc;
    gc.cv = cfg.cv_config();
    gc.min_positives = cfg.min_positives;
    gc.seed = cfg.balance_seed;
    t.groups = train_group_models(training, gc);

    const fs::path models_dir = out_dir / "models";
    fs::create_directories(models_dir);
    write_model(models_dir / "pooled.model", t.pooled.model);
    for (const auto& [g, gm] : t.groups.models) write_model(models_dir / model_file_name(g), gm.model);
    s.pooled_model = t.pooled.model;
    s.pooled_lambda = t.pooled.cv.chosen_lambda;
    for (const auto& [g, gm] : t.groups.models) s.group_models.emplace(g, gm.model);
    s.group_errors = t.groups.errors;
    s.warnings = t.groups.warnings;
    return t;
  });

  stage("select", [&] {
    const auto proportions = read_proportions(cfg.proportions);
    PullOptions options;
    options.workers = cfg.workers;
    s.targets = proportional_pull(s.group_models, data.feature_names, data.reference, cfg.targets,
                                  proportions, matched, options);
    write_target_list(out_dir / "targets.csv", s.targets);
    return 0;
  });

  stage("evaluate", [&] {
    std::unordered_map<std::string, int> truth_labels;
    if (!cfg.truth.empty()) {
      const TruthSet truth = read_truth(cfg.truth);
      for (const auto& [id, y] : truth.signup) truth_labels.emplace(id, y);
      s.label_source = "signup (truth file)";
    } else {
      s.label_source = "matched accountholder";
    }

    // Training rows are scored out of sample; everything else by the final model.
    std::unordered_map<std::string, double> pooled_oos;
    for (std::size_t i = 0; i < training.rows(); ++i) {
      pooled_oos.emplace(training.record_ids[i], trained.pooled.cv.out_of_sample[i]);
    }
    std::unordered_map<std::string, double> group_oos;
    for (const auto& [g, gm] : trained.groups.models) {
      for (std::size_t i = 0; i < gm.training.rows(); ++i) {
        group_oos.emplace(gm.training.record_ids[i], gm.cv.out_of_sample[i]);
      }
    }

    std::vector<ScoreRow> rows;
    rows.reserve(data.reference.size());
    for (const auto& r : data.reference) {
      ScoreRow row;
      row.record_id = r.record_id;
      row.group = r.group;
      const std::span<const float> x(r.features);
      auto p = pooled_oos.find(r.record_id);
      row.score = p != pooled_oos.end() ? p->second : trained.pooled.model.score(x);
      auto gm = trained.groups.models.find(r.group);
      if (gm == trained.groups.models.end()) {
        row.group_score = std::nan("");
      } else {
        auto q = group_oos.find(r.record_id);
        row.group_score = q != group_oos.end() ? q->second : gm->second.model.score(x);
      }
      if (!cfg.truth.empty()) {
        auto y = truth_labels.find(r.record_id);
        if (y == truth_labels.end()) throw DataError("truth file has no label for '" + r.record_id + "'");
        row.label = y->second;
      } else {
        row.label = matched.count(r.record_id) ? 1 : 0;
      }
      rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(),
              [](const ScoreRow& a, const ScoreRow& b) { return a.record_id < b.record_id; });
    write_scores(out_dir / "scores.csv", rows);

    std::map<std::string, std::vector<std::size_t>> by_group;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!std::isnan(rows[i].group_score)) by_group[rows[i].group].push_back(i);
    }
    auto table = [&](const std::vector<std::size_t>& idx, bool group_scores) {
      std::vector<std::string> ids;
      std::vector<double> scores;
      std::vector<int> labels;
      for (std::size_t i : idx) {
        ids.push_back(rows[i].record_id);
        scores.push_back(group_scores ? rows[i].group_score : rows[i].score);
        labels.push_back(rows[i].label);
      }
      return decile_table(ids, scores, labels);
    };
    std::vector<std::size_t> all(rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    s.deciles.emplace("pooled", table(all, false));
    for (const auto& [g, idx] : by_group) {
      if (g == "pooled") throw DataError("group label 'pooled' is reserved");
      if (idx.size() >= 10) s.deciles.emplace(g, table(idx, true));
    }
    render_decile_report(s.deciles, out_dir / "deciles");
    return 0;
  });

  result.report = render_report(cfg, s);
  result.report_path = out_dir / "report.txt";
  stage("report", [&] {
    write_text(result.report_path, result.report);
    return 0;
  });
  return result;
}

}  // namespace outreach
