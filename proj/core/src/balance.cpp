#include "outreach/balance.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "outreach/csv.hpp"
#include "outreach/error.hpp"
#include "outreach/format.hpp"
#include "outreach/parallel.hpp"

namespace outreach {

namespace {

// Keeps every minority-class row and an equal-size sample of the majority.
TrainingSet balance_classes(const TrainingSet& group_rows, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < group_rows.rows(); ++i) {
    (group_rows.labels[i] ? pos : neg).push_back(i);
  }
  auto& majority = pos.size() > neg.size() ? pos : neg;
  const auto& minority = pos.size() > neg.size() ? neg : pos;
  if (majority.size() > minority.size()) {
    std::vector<std::size_t> kept;
    std::mt19937_64 rng(seed);
    std::sample(majority.begin(), majority.end(), std::back_inserter(kept),
                static_cast<std::ptrdiff_t>(minority.size()), rng);
    majority = std::move(kept);
  }
  std::vector<std::size_t> rows;
  rows.reserve(pos.size() + neg.size());
  rows.insert(rows.end(), pos.begin(), pos.end());
  rows.insert(rows.end(), neg.begin(), neg.end());
  return group_rows.subset(rows);
}

}  // namespace

GroupModelSet train_group_models(const TrainingSet& ts, const GroupTrainConfig& config) {
  std::map<std::string, std::vector<std::size_t>> rows_by_group;
  for (std::size_t i = 0; i < ts.rows(); ++i) {
    if (ts.groups[i].empty()) {
      throw DataError("training row '" + ts.record_ids[i] + "' has no group label");
    }
    rows_by_group[ts.groups[i]].push_back(i);
  }
  std::vector<std::string> names;
  for (const auto& [g, rows] : rows_by_group) names.push_back(g);

  struct Slot {
    std::optional<GroupModel> model;
    std::string error;
  };
  std::vector<Slot> slots(names.size());
  CVConfig cv = config.cv;
  const std::size_t workers = std::max<std::size_t>(1, cv.workers);
  cv.workers = 1;

  parallel_for(names.size(), workers, [&](std::size_t gi) {
    const TrainingSet group_rows = ts.subset(rows_by_group[names[gi]]);
    const std::size_t pos = group_rows.positives();
    if (pos == 0 || pos == group_rows.rows()) {
      slots[gi].error = "single class (" + std::to_string(pos) + " positives of " +
                        std::to_string(group_rows.rows()) + " rows)";
      return;
    }
    try {
      GroupModel gm;
      gm.training = balance_classes(group_rows, config.seed + gi);
      gm.positives = gm.training.positives();
      gm.small_sample = gm.positives < config.min_positives;
      FittedModel fitted = fit_with_cv(gm.training, cv);
      gm.model = std::move(fitted.model);
      gm.model.label = names[gi];
      gm.cv = std::move(fitted.cv);
      slots[gi].model = std::move(gm);
    } catch (const DataError& e) {
      slots[gi].error = e.what();
    }
  });

  GroupModelSet set;
  for (std::size_t gi = 0; gi < names.size(); ++gi) {
    if (slots[gi].model) {
      if (slots[gi].model->small_sample) {
        set.warnings.push_back("group '" + names[gi] + "': " +
                               std::to_string(slots[gi].model->positives) +
                               " positives is below the minimum of " +
                               std::to_string(config.min_positives));
      }
      set.models.emplace(names[gi], std::move(*slots[gi].model));
    } else {
      set.errors.emplace(names[gi], slots[gi].error);
    }
  }
  return set;
}

std::map<std::string, std::size_t> apportion(std::size_t n,
                                             const std::map<std::string, double>& proportions) {
  if (proportions.empty()) throw DataError("no proportions given");
  double total = 0.0;
  for (const auto& [g, p] : proportions) {
    if (!std::isfinite(p) || p < 0.0) {
      throw DataError("proportion for group '" + g + "' must be a non-negative number");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DataError("proportions sum to " + format_double(total) + ", expected 1");
  }

  struct Share {
    std::string group;
    std::size_t floor = 0;
    double remainder = 0.0;
  };
  std::vector<Share> shares;
  std::size_t assigned = 0;
  for (const auto& [g, p] : proportions) {
    const double exact = static_cast<double>(n) * (p / total);
    const double whole = std::floor(exact);
    shares.push_back({g, static_cast<std::size_t>(whole), exact - whole});
    assigned += static_cast<std::size_t>(whole);
  }
  std::vector<std::size_t> order(shares.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return shares[a].remainder > shares[b].remainder;
  });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) {
    ++shares[order[k % order.size()]].floor;
  }
  std::map<std::string, std::size_t> quotas;
  for (const auto& s : shares) quotas.emplace(s.group, s.floor);
  return quotas;
}

std::map<std::string, double> read_proportions(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const int g = t.column("group");
  const int p = t.column("proportion");
  if (g < 0 || p < 0) throw DataError(path.string() + ": expected columns group,proportion");
  std::map<std::string, double> out;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw DataError(path.string() + ": ragged row");
    const auto v = parse_double(row[p]);
    if (!v) throw DataError(path.string() + ": bad proportion for '" + row[g] + "'");
    if (!out.emplace(row[g], *v).second) {
      throw DataError(path.string() + ": duplicate group '" + row[g] + "'");
    }
  }
  return out;
}

std::map<std::string, std::size_t> TargetList::counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& e : entries) ++out[e.group];
  return out;
}

TargetList proportional_pull(const std::map<std::string, SparseModel>& models,
                             const std::vector<std::string>& feature_names, RecordRows population,
                             std::size_t n, const std::map<std::string, double>& proportions,
                             const std::unordered_set<std::string>& exclude,
                             const PullOptions& options) {
  TargetList list;
  list.size = n;
  list.quotas = apportion(n, proportions);

  std::map<std::string, std::vector<std::size_t>> rows_by_group;
  for (std::size_t i = 0; i < population.size(); ++i) {
    const auto& r = population[i];
    if (exclude.count(r.record_id)) {
      ++list.excluded;
      continue;
    }
    if (r.group.empty()) {
      ++list.unlabeled;
      continue;
    }
    if (r.features.size() != feature_names.size()) {
      throw DataError("population row '" + r.record_id + "' has the wrong number of features");
    }
    rows_by_group[r.group].push_back(i);
  }

  std::vector<std::string> groups;
  for (const auto& [g, quota] : list.quotas) {
    if (quota == 0) continue;
    auto it = models.find(g);
    if (it == models.end()) throw DataError("no model for group '" + g + "'");
    if (it->second.feature_names != feature_names) {
      throw DataError("model for group '" + g + "' was trained on different features");
    }
    groups.push_back(g);
  }

  std::vector<std::vector<ScoredRecord>> picked(groups.size());
  parallel_for(groups.size(), options.workers, [&](std::size_t gi) {
    const SparseModel& model = models.at(groups[gi]);
    auto& scored = picked[gi];
    auto found = rows_by_group.find(groups[gi]);
    if (found == rows_by_group.end()) return;
    scored.reserve(found->second.size());
    for (std::size_t i : found->second) {
      const auto& r = population[i];
      scored.push_back({r.record_id, model.score(std::span<const float>(r.features))});
    }
    const std::size_t quota = list.quotas.at(groups[gi]);
    const std::size_t keep = std::min(quota, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                      scored.end(), [](const ScoredRecord& a, const ScoredRecord& b) {
                        if (a.score != b.score) return a.score > b.score;
                        return a.record_id < b.record_id;
                      });
    scored.resize(keep);
  });

  struct Slot {
    double position;
    std::size_t group;
    std::size_t rank;
  };
  std::vector<Slot> slots;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const std::size_t quota = list.quotas.at(groups[gi]);
    if (picked[gi].size() < quota) list.shortfalls[groups[gi]] = quota - picked[gi].size();
    for (std::size_t k = 0; k < picked[gi].size(); ++k) {
      slots.push_back({(static_cast<double>(k) + 0.5) / static_cast<double>(quota), gi, k});
    }
  }
  // Interleave so any prefix of the list stays close to the target shares.
  std::sort(slots.begin(), slots.end(), [&](const Slot& a, const Slot& b) {
    if (a.position != b.position) return a.position < b.position;
    return groups[a.group] < groups[b.group];
  });
  list.entries.reserve(slots.size());
  for (const auto& s : slots) {
    const auto& rec = picked[s.group][s.rank];
    list.entries.push_back({rec.record_id, groups[s.group], rec.score});
  }
  return list;
}

void write_target_list(const std::filesystem::path& path, const TargetList& list) {
  CsvWriter out(path);
  out.row({"rank", "record_id", "group", "score"});
  std::size_t rank = 1;
  for (const auto& e : list.entries) {
    out.field(rank++).field(e.record_id).field(e.group).field(e.score);
    out.end_row();
  }
  out.flush();
}

}  // namespace outreach
