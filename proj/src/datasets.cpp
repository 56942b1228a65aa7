#include "cytoiqa/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "cytoiqa/error.hpp"
#include "cytoiqa/image_io.hpp"
#include "cytoiqa/rng.hpp"

namespace cytoiqa {

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::kOriginal: return "original";
    case Origin::kDarkEdge: return "dark_edge";
    case Origin::kDistractor: return "distractor";
  }
  return "unknown";
}

std::optional<Origin> parse_origin(std::string_view name) {
  if (name == "original") return Origin::kOriginal;
  if (name == "dark_edge") return Origin::kDarkEdge;
  if (name == "distractor") return Origin::kDistractor;
  return std::nullopt;
}

std::string_view to_string(SplitStrategy s) {
  return s == SplitStrategy::kSameIdx ? "sameidx" : "diffidx";
}

std::optional<SplitStrategy> parse_split_strategy(std::string_view name) {
  if (name == "sameidx") return SplitStrategy::kSameIdx;
  if (name == "diffidx") return SplitStrategy::kDiffIdx;
  return std::nullopt;
}

std::string_view to_string(ShuffleMode m) {
  switch (m) {
    case ShuffleMode::kNone: return "none";
    case ShuffleMode::kNormal: return "normal";
    case ShuffleMode::kPair: return "pair";
  }
  return "unknown";
}

std::optional<ShuffleMode> parse_shuffle_mode(std::string_view name) {
  if (name == "none") return ShuffleMode::kNone;
  if (name == "normal") return ShuffleMode::kNormal;
  if (name == "pair") return ShuffleMode::kPair;
  return std::nullopt;
}

std::vector<SampleRecord> SplitPlan::fold_records(const std::vector<SampleRecord>& records,
                                                  int fold) const {
  std::vector<SampleRecord> out;
  for (const auto& r : records) {
    const auto it = assignment.find(r.sample_id);
    if (it != assignment.end() && it->second == fold) out.push_back(r);
  }
  return out;
}

std::vector<SampleRecord> SplitPlan::training_records(const std::vector<SampleRecord>& records,
                                                      int fold) const {
  std::vector<SampleRecord> out;
  for (const auto& r : records) {
    const auto it = assignment.find(r.sample_id);
    if (it != assignment.end() && it->second != fold) out.push_back(r);
  }
  return out;
}

void check_unique_ids(const std::vector<SampleRecord>& records) {
  std::set<std::string_view> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.sample_id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate sample_id: " + r.sample_id);
    }
  }
}

namespace {

// Records sharing a pair_id, or a lone unpaired record. Units are sorted by
// key and members by sample_id so plans depend on the record set only.
struct Unit {
  std::string key;
  bool paired = false;
  std::vector<std::size_t> members;
};

std::vector<Unit> group_units(const std::vector<SampleRecord>& records) {
  std::map<std::string, Unit> by_key;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    // '\x01' keeps singleton keys disjoint from pair ids.
    std::string key = r.pair_id ? "\x02" + *r.pair_id : "\x01" + r.sample_id;
    auto& unit = by_key[key];
    unit.key = key;
    unit.paired = r.pair_id.has_value();
    unit.members.push_back(i);
  }
  std::vector<Unit> units;
  units.reserve(by_key.size());
  for (auto& [key, unit] : by_key) {
    std::sort(unit.members.begin(), unit.members.end(), [&](std::size_t a, std::size_t b) {
      return records[a].sample_id < records[b].sample_id;
    });
    units.push_back(std::move(unit));
  }
  return units;
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_supported_image(entry.path())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.filename().string() < b.filename().string();
  });
  return files;
}

// Uniform pick among the folds with the smallest load, skipping `excluded`.
int least_loaded(const std::vector<std::size_t>& load, int excluded, SeededRng& rng) {
  std::size_t best = SIZE_MAX;
  std::vector<int> ties;
  for (int f = 0; f < static_cast<int>(load.size()); ++f) {
    if (f == excluded) continue;
    if (load[f] < best) {
      best = load[f];
      ties.clear();
    }
    if (load[f] == best) ties.push_back(f);
  }
  return ties[rng.below(ties.size())];
}

}  // namespace

std::vector<SampleRecord> build_paired_manifest(const std::filesystem::path& high_dir,
                                                const std::filesystem::path& low_dir) {
  const auto high = list_images(high_dir);
  const auto low = list_images(low_dir);
  std::map<std::string, std::filesystem::path> high_by_name;
  std::map<std::string, std::filesystem::path> low_by_name;
  for (const auto& p : high) high_by_name.emplace(p.filename().string(), p);
  for (const auto& p : low) low_by_name.emplace(p.filename().string(), p);

  std::vector<std::string> orphans;
  for (const auto& [name, path] : high_by_name) {
    if (!low_by_name.contains(name)) orphans.push_back(path.string());
  }
  for (const auto& [name, path] : low_by_name) {
    if (!high_by_name.contains(name)) orphans.push_back(path.string());
  }
  if (!orphans.empty()) {
    std::string msg = "files without a partner:";
    for (const auto& o : orphans) msg += " " + o;
    throw Error(ErrorCode::kPairing, msg);
  }

  std::vector<SampleRecord> records;
  records.reserve(high.size() * 2);
  for (const auto& [name, path] : high_by_name) {
    records.push_back({"hq/" + name, name, Label::kPositive, Origin::kOriginal, path.string()});
    records.push_back({"lq/" + name, name, Label::kNegative, Origin::kOriginal,
                       low_by_name.at(name).string()});
  }
  return records;
}

ValidityManifest build_validity_manifest(const std::vector<SampleRecord>& cell_records,
                                         const std::filesystem::path& distractor_dir,
                                         const VignetteParams& dark_edge_params,
                                         const std::filesystem::path& output_dir) {
  dark_edge_params.validate();
  check_unique_ids(cell_records);
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec || !std::filesystem::is_directory(output_dir)) {
    throw Error(ErrorCode::kIo, "cannot create output directory " + output_dir.string());
  }

  const auto distractors = list_images(distractor_dir);
  if (distractors.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no PNG/JPEG files in distractor directory " + distractor_dir.string());
  }

  ValidityManifest out;
  std::vector<SampleRecord> dark;
  for (const auto& cell : cell_records) {
    SampleRecord positive = cell;
    positive.label = Label::kPositive;
    out.records.push_back(positive);

    std::string stem = cell.sample_id;
    std::replace(stem.begin(), stem.end(), '/', '_');
    const auto dest = output_dir / (stem + "_dark.png");
    write_png(synthesize_dark_edges(read_image(cell.path), dark_edge_params), dest);
    dark.push_back({"dark/" + cell.sample_id, cell.pair_id, Label::kPositive, Origin::kDarkEdge,
                    dest.string()});
  }
  out.records.insert(out.records.end(), dark.begin(), dark.end());

  for (const auto& path : distractors) {
    try {
      (void)read_image(path);
    } catch (const Error& e) {
      out.warnings.push_back("skipped distractor " + path.string() + ": " + e.what());
      ++out.skipped_distractors;
      continue;
    }
    out.records.push_back({"distractor/" + path.filename().string(), std::nullopt,
                           Label::kNegative, Origin::kDistractor, path.string()});
  }
  check_unique_ids(out.records);
  return out;
}

SplitPlan plan_kfold(const std::vector<SampleRecord>& records, int k, SplitStrategy strategy,
                     std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "k must be >= 2");
  check_unique_ids(records);
  auto units = group_units(records);
  SeededRng rng(seed);

  SplitPlan plan;
  plan.k = k;
  plan.strategy = strategy;
  plan.seed = seed;

  if (strategy == SplitStrategy::kSameIdx) {
    rng.shuffle(std::span(units));
    for (std::size_t i = 0; i < units.size(); ++i) {
      for (std::size_t m : units[i].members) {
        plan.assignment[records[m].sample_id] = static_cast<int>(i % k);
      }
    }
    return plan;
  }

  for (const auto& u : units) {
    if (!u.paired || u.members.size() != 2) {
      throw Error(ErrorCode::kStrategyInapplicable,
                  "diffidx needs every record in a pair of two; offending record " +
                      records[u.members.front()].sample_id);
    }
  }
  rng.shuffle(std::span(units));
  std::vector<std::size_t> load(static_cast<std::size_t>(k), 0);
  for (auto& u : units) {
    if (rng.below(2) == 1) std::swap(u.members[0], u.members[1]);
    const int first = least_loaded(load, -1, rng);
    ++load[first];
    const int second = least_loaded(load, first, rng);
    ++load[second];
    plan.assignment[records[u.members[0]].sample_id] = first;
    plan.assignment[records[u.members[1]].sample_id] = second;
  }
  return plan;
}

HoldoutSplit holdout_validation(const std::vector<SampleRecord>& train_records, double fraction,
                                std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "validation fraction must lie in (0,1)");
  }
  auto units = group_units(train_records);
  SeededRng rng(seed);
  rng.shuffle(std::span(units));
  const auto held =
      static_cast<std::size_t>(std::floor(fraction * static_cast<double>(units.size()) + 0.5));

  std::vector<bool> in_validation(train_records.size(), false);
  for (std::size_t i = 0; i < held && i < units.size(); ++i) {
    for (std::size_t m : units[i].members) in_validation[m] = true;
  }
  HoldoutSplit split;
  for (std::size_t i = 0; i < train_records.size(); ++i) {
    (in_validation[i] ? split.validation : split.train).push_back(train_records[i]);
  }
  return split;
}

std::vector<Batch> order_batches(const std::vector<SampleRecord>& records, int batch_size,
                                 ShuffleMode mode, std::uint64_t seed) {
  if (batch_size < 1) throw Error(ErrorCode::kInvalidConfiguration, "batch size must be >= 1");
  SeededRng rng(seed);
  std::vector<std::size_t> order;
  order.reserve(records.size());

  switch (mode) {
    case ShuffleMode::kNone:
      order.resize(records.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      break;
    case ShuffleMode::kNormal:
      order.resize(records.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(std::span(order));
      break;
    case ShuffleMode::kPair: {
      if (batch_size % 2 != 0) {
        throw Error(ErrorCode::kInvalidConfiguration, "pair shuffle needs an even batch size");
      }
      std::vector<Unit> pairs;
      std::vector<Unit> singles;
      for (auto& u : group_units(records)) {
        if (u.members.size() > 2) {
          throw Error(ErrorCode::kInvalidConfiguration,
                      "pair shuffle needs groups of at most two records");
        }
        (u.members.size() == 2 ? pairs : singles).push_back(std::move(u));
      }
      rng.shuffle(std::span(pairs));
      rng.shuffle(std::span(singles));
      for (const auto* group : {&pairs, &singles}) {
        for (const auto& u : *group) {
          order.insert(order.end(), u.members.begin(), u.members.end());
        }
      }
      break;
    }
  }

  std::vector<Batch> batches;
  for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(batch_size)) {
    Batch b;
    const std::size_t end = std::min(order.size(), i + static_cast<std::size_t>(batch_size));
    for (std::size_t j = i; j < end; ++j) b.push_back(records[order[j]]);
    batches.push_back(std::move(b));
  }
  return batches;
}

std::map<Label, double> class_weights(const std::vector<SampleRecord>& records) {
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (const auto& r : records) (r.label == Label::kPositive ? pos : neg) += 1;
  if (pos == 0 || neg == 0) {
    throw Error(ErrorCode::kDegenerateManifest, "class weights need both labels present");
  }
  const double ip = 1.0 / static_cast<double>(pos);
  const double in = 1.0 / static_cast<double>(neg);
  return {{Label::kPositive, ip / (ip + in)}, {Label::kNegative, in / (ip + in)}};
}

ExperimentPlan emit_experiment_plan(const PlanOverrides& o) {
  ExperimentPlan plan;
  if (o.learning_rate) plan.learning_rate = *o.learning_rate;
  if (o.momentum) plan.momentum = *o.momentum;
  if (o.batch_size) plan.batch_size = *o.batch_size;
  if (o.patience_epochs) plan.patience_epochs = *o.patience_epochs;
  if (o.k_folds) plan.k_folds = *o.k_folds;
  if (o.validation_fraction) plan.validation_fraction = *o.validation_fraction;
  if (o.class_weights) plan.class_weights = *o.class_weights;

  double weight_sum = 0.0;
  bool weights_ok = !plan.class_weights.empty();
  for (const auto& [label, w] : plan.class_weights) {
    weights_ok = weights_ok && std::isfinite(w) && w >= 0.0;
    weight_sum += w;
  }
  const bool ok = plan.learning_rate > 0.0 && plan.momentum >= 0.0 && plan.momentum < 1.0 &&
                  plan.batch_size >= 1 && plan.patience_epochs >= 1 && plan.k_folds >= 2 &&
                  plan.validation_fraction > 0.0 && plan.validation_fraction < 1.0 &&
                  weights_ok && std::abs(weight_sum - 1.0) <= 1e-9;
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "experiment plan override out of range");
  return plan;
}

}  // namespace cytoiqa
