#include "outreach/lookalike.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "outreach/csv.hpp"
#include "outreach/error.hpp"
#include "outreach/format.hpp"
#include "outreach/parallel.hpp"

namespace outreach {

std::size_t TrainingSet::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

TrainingSet TrainingSet::subset(std::span<const std::size_t> rows) const {
  TrainingSet out;
  out.feature_names = feature_names;
  out.seed = seed;
  out.features.reserve(rows.size() * cols());
  for (std::size_t r : rows) out.append_row(record_ids[r], groups[r], labels[r], row(r));
  return out;
}

TrainingSet build_training_set(const std::unordered_set<std::string>& matched_positive_ids,
                               const std::vector<std::string>& feature_names,
                               RecordRows reference, std::uint64_t seed) {
  std::vector<std::size_t> positive_rows;
  std::vector<std::size_t> unmatched_rows;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const auto& r = reference[i];
    if (r.features.size() != feature_names.size()) {
      throw DataError("reference row '" + r.record_id + "' has no feature values");
    }
    (matched_positive_ids.count(r.record_id) ? positive_rows : unmatched_rows).push_back(i);
  }
  if (positive_rows.size() != matched_positive_ids.size()) {
    throw DataError("some matched ids are not present in the reference rows");
  }
  if (unmatched_rows.size() < positive_rows.size()) {
    throw DataError("need " + std::to_string(positive_rows.size()) +
                    " unmatched reference rows for negatives, found " +
                    std::to_string(unmatched_rows.size()));
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> negative_rows;
  negative_rows.reserve(positive_rows.size());
  std::sample(unmatched_rows.begin(), unmatched_rows.end(), std::back_inserter(negative_rows),
              static_cast<std::ptrdiff_t>(positive_rows.size()), rng);

  TrainingSet ts;
  ts.feature_names = feature_names;
  ts.seed = seed;
  ts.features.reserve((positive_rows.size() * 2) * feature_names.size());
  for (std::size_t i : positive_rows) {
    const auto& r = reference[i];
    ts.append_row(r.record_id, r.group, 1, std::span<const float>(r.features));
  }
  for (std::size_t i : negative_rows) {
    const auto& r = reference[i];
    ts.append_row(r.record_id, r.group, 0, std::span<const float>(r.features));
  }
  return ts;
}

void write_training_set(const std::filesystem::path& path, const TrainingSet& ts) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  std::string line = "record_id,group,label";
  for (const auto& name : ts.feature_names) {
    line.push_back(',');
    append_csv_field(line, "f_" + name);
  }
  line.push_back('\n');
  out << line;
  for (std::size_t i = 0; i < ts.rows(); ++i) {
    line.clear();
    append_csv_field(line, ts.record_ids[i]);
    line.push_back(',');
    append_csv_field(line, ts.groups[i]);
    line.push_back(',');
    line += std::to_string(ts.labels[i]);
    for (double v : ts.row(i)) {
      line.push_back(',');
      line += format_double(v);
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

TrainingSet read_training_set(const std::filesystem::path& path) {
  CsvReader reader(path);
  std::vector<std::string> header;
  if (!reader.next(header) || header.size() < 3 || header[0] != "record_id" ||
      header[1] != "group" || header[2] != "label") {
    throw DataError(path.string() + ": expected header record_id,group,label,f_...");
  }
  TrainingSet ts;
  for (std::size_t c = 3; c < header.size(); ++c) {
    if (header[c].rfind("f_", 0) != 0) throw DataError(path.string() + ": bad feature column");
    ts.feature_names.push_back(header[c].substr(2));
  }
  std::vector<std::string> row;
  std::vector<double> values(ts.cols());
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) {
      throw DataError(path.string() + ":" + std::to_string(reader.line()) + ": column count");
    }
    const auto label = parse_int(row[2]);
    if (!label || (*label != 0 && *label != 1)) {
      throw DataError(path.string() + ":" + std::to_string(reader.line()) + ": label must be 0/1");
    }
    for (std::size_t c = 0; c < ts.cols(); ++c) {
      const auto v = parse_double(row[c + 3]);
      if (!v) throw DataError(path.string() + ":" + std::to_string(reader.line()) + ": feature");
      values[c] = *v;
    }
    ts.append_row(row[0], row[1], static_cast<int>(*label), std::span<const double>(values));
  }
  return ts;
}

std::vector<double> SparseModel::dense_coefficients() const {
  std::vector<double> out(feature_names.size(), 0.0);
  for (const auto& t : terms) out[t.feature] = t.coefficient;
  return out;
}

double SparseModel::raw_intercept() const {
  if (!standardized()) return intercept;
  double b = intercept;
  for (const auto& t : terms) {
    if (stdevs[t.feature] > 0) b -= t.coefficient * means[t.feature] / stdevs[t.feature];
  }
  return b;
}

namespace {

// Column-major design matrix, standardized when `mean` is non-empty.
struct Design {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<double> y;

  const double* col(std::size_t j) const { return x.data() + j * n; }
};

Design make_design(const TrainingSet& ts, bool standardize) {
  Design D;
  D.n = ts.rows();
  D.d = ts.cols();
  D.x.resize(D.n * D.d);
  D.y.resize(D.n);
  for (std::size_t i = 0; i < D.n; ++i) D.y[i] = ts.labels[i];
  for (std::size_t i = 0; i < D.n; ++i) {
    const double* r = ts.features.data() + i * D.d;
    for (std::size_t j = 0; j < D.d; ++j) D.x[j * D.n + i] = r[j];
  }
  if (!standardize) return D;
  D.mean.assign(D.d, 0.0);
  D.sd.assign(D.d, 0.0);
  for (std::size_t j = 0; j < D.d; ++j) {
    double* c = D.x.data() + j * D.n;
    double m = 0.0;
    for (std::size_t i = 0; i < D.n; ++i) m += c[i];
    m /= static_cast<double>(D.n);
    double v = 0.0;
    for (std::size_t i = 0; i < D.n; ++i) v += (c[i] - m) * (c[i] - m);
    double s = std::sqrt(v / static_cast<double>(D.n));
    if (!(s > 1e-12 * std::max(1.0, std::abs(m)))) s = 0.0;
    D.mean[j] = m;
    D.sd[j] = s;
    for (std::size_t i = 0; i < D.n; ++i) c[i] = s > 0 ? (c[i] - m) / s : 0.0;
  }
  return D;
}

void require_both_classes(const TrainingSet& ts) {
  const std::size_t pos = ts.positives();
  if (ts.rows() == 0 || pos == 0 || pos == ts.rows()) {
    throw DataError("training data must contain both classes (" + std::to_string(pos) +
                    " positives of " + std::to_string(ts.rows()) + " rows)");
  }
}

struct SolverState {
  double b0 = 0.0;
  std::vector<double> beta;
  bool converged = true;
  int iterations = 0;
};

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double penalized_objective(const Design& D, std::span<const double> eta,
                           std::span<const double> beta, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < D.n; ++i) loss += softplus(eta[i]) - D.y[i] * eta[i];
  double l1 = 0.0;
  for (double b : beta) l1 += std::abs(b);
  return loss / static_cast<double>(D.n) + lambda * l1;
}

double soft_threshold(double g, double lambda) {
  if (g > lambda) return g - lambda;
  if (g < -lambda) return g + lambda;
  return 0.0;
}

// Proximal Newton: each outer step builds the weighted least-squares model of
// the log-likelihood at the current point, solves its lasso subproblem with
// cyclic coordinate descent, then backtracks along the resulting direction.
void solve(const Design& D, double lambda, SolverState& s, const TrainConfig& cfg) {
  const std::size_t n = D.n;
  const std::size_t d = D.d;
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inner_tol = cfg.tolerance * 0.1;

  std::vector<double> eta(n, s.b0);
  for (std::size_t j = 0; j < d; ++j) {
    if (s.beta[j] == 0.0) continue;
    const double* c = D.col(j);
    for (std::size_t i = 0; i < n; ++i) eta[i] += s.beta[j] * c[i];
  }

  std::vector<double> w(n), res(n), res0(n), h(d), beta_new(d), eta_trial(n), beta_trial(d);
  double f_old = penalized_objective(D, eta, s.beta, lambda);
  s.converged = false;

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    s.iterations = iter;
    double sum_w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = logistic(eta[i]);
      w[i] = std::max(p * (1.0 - p), 1e-5);
      res[i] = (D.y[i] - p) / w[i];
      res0[i] = res[i];
      sum_w += w[i];
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double* c = D.col(j);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += w[i] * c[i] * c[i];
      h[j] = acc * inv_n;
    }

    double b0_new = s.b0;
    beta_new = s.beta;
    auto sweep = [&](bool full) {
      double max_delta = 0.0;
      double num = 0.0;
      for (std::size_t i = 0; i < n; ++i) num += w[i] * res[i];
      const double d0 = num / sum_w;
      if (d0 != 0.0) {
        b0_new += d0;
        for (std::size_t i = 0; i < n; ++i) res[i] -= d0;
        max_delta = std::abs(d0);
      }
      for (std::size_t j = 0; j < d; ++j) {
        if (h[j] <= 0.0) continue;
        if (!full && beta_new[j] == 0.0) continue;
        const double* c = D.col(j);
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) g += w[i] * c[i] * res[i];
        g = g * inv_n + h[j] * beta_new[j];
        const double updated = soft_threshold(g, lambda) / h[j];
        const double delta = updated - beta_new[j];
        if (delta == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) res[i] -= delta * c[i];
        beta_new[j] = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
      return max_delta;
    };
    bool full = true;
    for (int k = 0; k < cfg.max_sweeps; ++k) {
      const double max_delta = sweep(full);
      if (full) {
        if (max_delta < inner_tol) break;
        full = false;
      } else if (max_delta < inner_tol) {
        full = true;
      }
    }

    // Directional derivative of the penalized objective along the step.
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = logistic(eta[i]);
      slope += (p - D.y[i]) * (res0[i] - res[i]);
    }
    slope *= inv_n;
    double l1_old = 0.0;
    double l1_new = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      l1_old += std::abs(s.beta[j]);
      l1_new += std::abs(beta_new[j]);
    }
    slope += lambda * (l1_new - l1_old);

    double max_step = std::abs(b0_new - s.b0);
    for (std::size_t j = 0; j < d; ++j) max_step = std::max(max_step, std::abs(beta_new[j] - s.beta[j]));
    if (max_step < cfg.tolerance) {
      s.b0 = b0_new;
      s.beta = beta_new;
      s.converged = true;
      return;
    }

    double t = 1.0;
    bool accepted = false;
    double f_new = f_old;
    for (int ls = 0; ls < 50; ++ls) {
      for (std::size_t i = 0; i < n; ++i) eta_trial[i] = eta[i] + t * (res0[i] - res[i]);
      for (std::size_t j = 0; j < d; ++j) beta_trial[j] = s.beta[j] + t * (beta_new[j] - s.beta[j]);
      f_new = penalized_objective(D, eta_trial, beta_trial, lambda);
      if (f_new <= f_old + 1e-4 * t * std::min(slope, 0.0)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // No decrease available at working precision: the current point is optimal.
      s.converged = true;
      return;
    }
    s.b0 += t * (b0_new - s.b0);
    for (std::size_t j = 0; j < d; ++j) {
      // Exact zeros from soft-thresholding must stay exact after a full step.
      s.beta[j] = t == 1.0 ? beta_new[j] : beta_trial[j];
    }
    eta.swap(eta_trial);
    f_old = f_new;
    if (t * max_step < cfg.tolerance) {
      s.converged = true;
      return;
    }
  }
}

SparseModel to_model(const Design& D, const TrainingSet& ts, const SolverState& s, double lambda) {
  SparseModel m;
  m.feature_names = ts.feature_names;
  m.intercept = s.b0;
  for (std::size_t j = 0; j < D.d; ++j) {
    if (s.beta[j] != 0.0) m.terms.push_back({j, s.beta[j]});
  }
  m.means = D.mean;
  m.stdevs = D.sd;
  m.lambda = lambda;
  m.converged = s.converged;
  m.iterations = s.iterations;
  return m;
}

SolverState null_state(const Design& D) {
  SolverState s;
  double ybar = 0.0;
  for (double y : D.y) ybar += y;
  ybar /= static_cast<double>(D.n);
  s.b0 = std::log(ybar / (1.0 - ybar));
  s.beta.assign(D.d, 0.0);
  return s;
}

double design_lambda_max(const Design& D) {
  double ybar = 0.0;
  for (double y : D.y) ybar += y;
  ybar /= static_cast<double>(D.n);
  double best = 0.0;
  for (std::size_t j = 0; j < D.d; ++j) {
    const double* c = D.col(j);
    double g = 0.0;
    for (std::size_t i = 0; i < D.n; ++i) g += c[i] * (D.y[i] - ybar);
    best = std::max(best, std::abs(g) / static_cast<double>(D.n));
  }
  return best;
}

// Fits along `lambdas` from largest to smallest with warm starts.
std::vector<SparseModel> fit_design_path(const Design& D, const TrainingSet& ts,
                                         std::span<const double> lambdas, const TrainConfig& cfg) {
  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });
  std::vector<SparseModel> out(lambdas.size());
  SolverState state = null_state(D);
  const double lmax = design_lambda_max(D);
  for (std::size_t idx : order) {
    if (!(lambdas[idx] >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (lambdas[idx] >= lmax) {
      // the null model is exact here; CD rounding could leave a 1e-17 coefficient
      state = null_state(D);
      state.converged = true;
    } else {
      solve(D, lambdas[idx], state, cfg);
    }
    out[idx] = to_model(D, ts, state, lambdas[idx]);
  }
  return out;
}

double log_loss(double p, int y) {
  constexpr double kEps = 1e-15;
  p = std::clamp(p, kEps, 1.0 - kEps);
  return y ? -std::log(p) : -std::log(1.0 - p);
}

}  // namespace

SparseModel train_l1_logistic(const TrainingSet& ts, double lambda, const TrainConfig& config) {
  const double lambdas[] = {lambda};
  return fit_path(ts, lambdas, config).front();
}

std::vector<SparseModel> fit_path(const TrainingSet& ts, std::span<const double> lambdas,
                                  const TrainConfig& config) {
  require_both_classes(ts);
  const Design D = make_design(ts, config.standardize);
  return fit_design_path(D, ts, lambdas, config);
}

double lambda_max(const TrainingSet& ts, bool standardize) {
  require_both_classes(ts);
  return design_lambda_max(make_design(ts, standardize));
}

std::vector<double> lambda_grid(double max, int count, double min_ratio) {
  if (count < 1) throw ConfigError("lambda grid needs at least one point");
  if (!(min_ratio > 0.0 && min_ratio <= 1.0)) throw ConfigError("lambda_min_ratio must be in (0,1]");
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = max;
    return grid;
  }
  const double step = std::log(min_ratio) / (count - 1);
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = max * std::exp(step * i);
  return grid;
}

CVResult cross_validate(const TrainingSet& ts, const CVConfig& config) {
  require_both_classes(ts);
  const std::size_t n = ts.rows();
  if (config.k < 2) throw ConfigError("cross validation needs k >= 2");
  if (static_cast<std::size_t>(config.k) > n) {
    throw DataError("k = " + std::to_string(config.k) + " exceeds the " + std::to_string(n) +
                    " training rows");
  }
  const std::size_t k = static_cast<std::size_t>(config.k);

  CVResult cv;
  cv.k = config.k;
  cv.lambda_grid = config.lambda_grid;
  if (cv.lambda_grid.empty()) {
    cv.lambda_grid = lambda_grid(lambda_max(ts, config.train.standardize), config.lambda_count,
                                 config.lambda_min_ratio);
  }
  std::sort(cv.lambda_grid.begin(), cv.lambda_grid.end(), std::greater<>());

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (ts.labels[i] ? pos : neg).push_back(i);
  std::mt19937_64 rng(config.seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  cv.fold_of.assign(n, 0);
  std::size_t position = 0;
  for (std::size_t i : pos) cv.fold_of[i] = static_cast<int>(position++ % k);
  for (std::size_t i : neg) cv.fold_of[i] = static_cast<int>(position++ % k);

  const std::size_t grid_size = cv.lambda_grid.size();
  std::vector<std::vector<SparseModel>> paths(k);
  std::vector<std::vector<double>> fold_loss(k, std::vector<double>(grid_size, 0.0));
  std::vector<std::vector<std::size_t>> validation(k);
  for (std::size_t i = 0; i < n; ++i) validation[cv.fold_of[i]].push_back(i);

  parallel_for(k, config.workers, [&](std::size_t f) {
    std::vector<std::size_t> train_rows;
    train_rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (cv.fold_of[i] != static_cast<int>(f)) train_rows.push_back(i);
    }
    const TrainingSet train = ts.subset(train_rows);
    require_both_classes(train);
    const Design D = make_design(train, config.train.standardize);
    paths[f] = fit_design_path(D, train, cv.lambda_grid, config.train);
    for (std::size_t g = 0; g < grid_size; ++g) {
      double loss = 0.0;
      for (std::size_t i : validation[f]) loss += log_loss(paths[f][g].score(ts.row(i)), ts.labels[i]);
      fold_loss[f][g] = loss / static_cast<double>(validation[f].size());
    }
  });

  cv.mean_validation_loss.assign(grid_size, 0.0);
  for (std::size_t g = 0; g < grid_size; ++g) {
    for (std::size_t f = 0; f < k; ++f) cv.mean_validation_loss[g] += fold_loss[f][g];
    cv.mean_validation_loss[g] /= static_cast<double>(k);
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid_size; ++g) {
    if (cv.mean_validation_loss[g] < cv.mean_validation_loss[best]) best = g;
  }
  cv.chosen_lambda = cv.lambda_grid[best];

  cv.out_of_sample.assign(n, 0.0);
  for (std::size_t f = 0; f < k; ++f) {
    cv.fold_models.push_back(paths[f][best]);
    for (std::size_t i : validation[f]) cv.out_of_sample[i] = paths[f][best].score(ts.row(i));
  }
  return cv;
}

FittedModel fit_with_cv(const TrainingSet& ts, const CVConfig& config) {
  FittedModel fitted;
  fitted.cv = cross_validate(ts, config);
  const auto& grid = fitted.cv.lambda_grid;
  const auto chosen = static_cast<std::size_t>(
      std::find(grid.begin(), grid.end(), fitted.cv.chosen_lambda) - grid.begin());
  const std::span<const double> prefix(grid.data(), chosen + 1);
  fitted.model = fit_path(ts, prefix, config.train).back();
  return fitted;
}

void rank_scores(std::vector<ScoredRecord>& scored) {
  std::sort(scored.begin(), scored.end(), [](const ScoredRecord& a, const ScoredRecord& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.record_id < b.record_id;
  });
}

std::vector<ScoredRecord> score_population(const SparseModel& model,
                                           const std::vector<std::string>& feature_names,
                                           RecordRows rows) {
  if (feature_names != model.feature_names) {
    throw DataError("population features do not match the model's " +
                    std::to_string(model.feature_names.size()) + " features");
  }
  std::vector<ScoredRecord> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.features.size() != feature_names.size()) {
      throw DataError("row '" + r.record_id + "' has the wrong number of features");
    }
    out.push_back({r.record_id, model.score(std::span<const float>(r.features))});
  }
  rank_scores(out);
  return out;
}

std::vector<std::pair<std::string, double>> selected_variables(const SparseModel& model) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& t : model.terms) out.emplace_back(model.feature_names[t.feature], t.coefficient);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (std::abs(a.second) != std::abs(b.second)) return std::abs(a.second) > std::abs(b.second);
    return a.first < b.first;
  });
  return out;
}

namespace {

constexpr std::string_view kModelHeader = "outreach-sparse-logistic 1";

void check_name(const std::string& name) {
  if (name.empty() || name.find_first_of(",\r\n") != std::string::npos) {
    throw DataError("feature name '" + name + "' cannot be serialized");
  }
}

}  // namespace

std::string model_to_text(const SparseModel& m) {
  std::ostringstream out;
  out << kModelHeader << '\n';
  if (m.label.find_first_of("\r\n") != std::string::npos) throw DataError("bad model label");
  out << "label " << m.label << '\n';
  out << "lambda " << format_double(m.lambda) << '\n';
  out << "intercept " << format_double(m.intercept) << '\n';
  out << "converged " << (m.converged ? 1 : 0) << '\n';
  out << "iterations " << m.iterations << '\n';
  out << "standardized " << (m.standardized() ? 1 : 0) << '\n';
  out << "features " << m.feature_names.size() << '\n';
  for (std::size_t j = 0; j < m.feature_names.size(); ++j) {
    check_name(m.feature_names[j]);
    out << m.feature_names[j];
    if (m.standardized()) out << ',' << format_double(m.means[j]) << ',' << format_double(m.stdevs[j]);
    out << '\n';
  }
  out << "coefficients " << m.terms.size() << '\n';
  for (const auto& t : m.terms) {
    out << m.feature_names[t.feature] << ',' << format_double(t.coefficient) << '\n';
  }
  return out.str();
}

SparseModel model_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw DataError("model file truncated after line " + std::to_string(line_no));
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  auto bad = [&](const std::string& what) {
    return DataError("model file line " + std::to_string(line_no) + ": " + what);
  };
  auto keyed = [&](std::string_view key) -> std::string {
    const std::string& l = next();
    if (l.rfind(std::string(key) + " ", 0) != 0 && l != key) throw bad("expected '" + std::string(key) + "'");
    return l.size() > key.size() ? l.substr(key.size() + 1) : std::string();
  };
  auto number = [&](std::string_view key) {
    const auto v = parse_double(keyed(key));
    if (!v) throw bad("bad number for '" + std::string(key) + "'");
    return *v;
  };
  auto count = [&](std::string_view key) {
    const auto v = parse_int(keyed(key));
    if (!v || *v < 0) throw bad("bad count for '" + std::string(key) + "'");
    return static_cast<std::size_t>(*v);
  };

  if (next() != kModelHeader) throw bad("not an outreach model (unknown version header)");
  SparseModel m;
  m.label = keyed("label");
  m.lambda = number("lambda");
  m.intercept = number("intercept");
  m.converged = number("converged") != 0.0;
  m.iterations = static_cast<int>(number("iterations"));
  const bool standardized = number("standardized") != 0.0;
  const std::size_t d = count("features");
  for (std::size_t j = 0; j < d; ++j) {
    const std::string& l = next();
    const auto c1 = l.find(',');
    m.feature_names.push_back(l.substr(0, c1));
    if (standardized) {
      const auto c2 = c1 == std::string::npos ? c1 : l.find(',', c1 + 1);
      if (c2 == std::string::npos) throw bad("expected name,mean,stdev");
      const auto mean = parse_double(l.substr(c1 + 1, c2 - c1 - 1));
      const auto sd = parse_double(l.substr(c2 + 1));
      if (!mean || !sd) throw bad("bad standardization numbers");
      m.means.push_back(*mean);
      m.stdevs.push_back(*sd);
    }
  }
  const std::size_t nnz = count("coefficients");
  for (std::size_t t = 0; t < nnz; ++t) {
    const std::string& l = next();
    const auto comma = l.rfind(',');
    if (comma == std::string::npos) throw bad("expected name,coefficient");
    const std::string name = l.substr(0, comma);
    const auto coef = parse_double(l.substr(comma + 1));
    if (!coef) throw bad("bad coefficient");
    auto it = std::find(m.feature_names.begin(), m.feature_names.end(), name);
    if (it == m.feature_names.end()) throw bad("coefficient for unknown feature '" + name + "'");
    m.terms.push_back({static_cast<std::size_t>(it - m.feature_names.begin()), *coef});
  }
  std::sort(m.terms.begin(), m.terms.end(),
            [](const auto& a, const auto& b) { return a.feature < b.feature; });
  return m;
}

void write_model(const std::filesystem::path& path, const SparseModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write model '" + path.string() + "'");
  out << model_to_text(model);
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

SparseModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read model '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return model_from_text(text.str());
}

}  // namespace outreach
