#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cytoiqa/aggregation.hpp"
#include "cytoiqa/imaging.hpp"

namespace cytoiqa {

enum class Origin { kOriginal, kDarkEdge, kDistractor };

std::string_view to_string(Origin origin);
std::optional<Origin> parse_origin(std::string_view name);

struct SampleRecord {
  std::string sample_id;
  std::optional<std::string> pair_id;
  Label label = Label::kNegative;
  Origin origin = Origin::kOriginal;
  std::string path;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

enum class SplitStrategy { kSameIdx, kDiffIdx };
enum class ShuffleMode { kNone, kNormal, kPair };

std::string_view to_string(SplitStrategy s);
std::optional<SplitStrategy> parse_split_strategy(std::string_view name);
std::string_view to_string(ShuffleMode m);
std::optional<ShuffleMode> parse_shuffle_mode(std::string_view name);

struct SplitPlan {
  int k = 0;
  std::map<std::string, int> assignment;  // sample_id -> fold
  SplitStrategy strategy = SplitStrategy::kSameIdx;
  std::uint64_t seed = 0;

  /// Records of `records` assigned to `fold`, in input order.
  std::vector<SampleRecord> fold_records(const std::vector<SampleRecord>& records, int fold) const;
  /// Everything not in `fold`, in input order.
  std::vector<SampleRecord> training_records(const std::vector<SampleRecord>& records,
                                             int fold) const;
};

/// Throws kInvalidArgument on duplicate sample ids.
void check_unique_ids(const std::vector<SampleRecord>& records);

/// Pairs the files of two directories by file name. Files in `high_dir` are
/// positive, in `low_dir` negative; each matched name becomes a pair_id.
/// Throws kPairing naming every file without a partner.
std::vector<SampleRecord> build_paired_manifest(const std::filesystem::path& high_dir,
                                                const std::filesystem::path& low_dir);

struct ValidityManifest {
  std::vector<SampleRecord> records;
  std::vector<std::string> warnings;
  std::size_t skipped_distractors = 0;
};

/// Validity-gate manifest: every cell record relabelled positive, a dark-edge
/// copy of each written to `output_dir` (also positive, same pair_id), and
/// every decodable image of `distractor_dir` as a negative. Undecodable
/// distractors are skipped and reported; an unwritable `output_dir` throws kIo.
ValidityManifest build_validity_manifest(const std::vector<SampleRecord>& cell_records,
                                         const std::filesystem::path& distractor_dir,
                                         const VignetteParams& dark_edge_params,
                                         const std::filesystem::path& output_dir);

/// Seeded k-fold assignment honouring pair identity.
/// kSameIdx: pair groups (unpaired records as singletons) are shuffled and
/// dealt round-robin. kDiffIdx: the members of every pair land in different
/// folds, each member going to a least-loaded fold with seeded tie-breaks.
/// kDiffIdx needs every record in a pair of exactly two (kStrategyInapplicable).
SplitPlan plan_kfold(const std::vector<SampleRecord>& records, int k, SplitStrategy strategy,
                     std::uint64_t seed);

struct HoldoutSplit {
  std::vector<SampleRecord> train;
  std::vector<SampleRecord> validation;
};

/// Moves round-half-up(fraction x group count) whole pair groups to
/// validation. Throws kInvalidArgument unless 0 < fraction < 1.
HoldoutSplit holdout_validation(const std::vector<SampleRecord>& train_records,
                                double fraction = 0.15, std::uint64_t seed = 0);

using Batch = std::vector<SampleRecord>;

/// kNone keeps manifest order, kNormal permutes records, kPair permutes pairs
/// and emits both members adjacently (unpaired records follow the pairs).
/// kPair needs an even batch size and groups of at most two
/// (kInvalidConfiguration).
std::vector<Batch> order_batches(const std::vector<SampleRecord>& records, int batch_size,
                                 ShuffleMode mode, std::uint64_t seed);

/// Inverse-frequency class weights normalized to sum to one.
/// Throws kDegenerateManifest if a label is missing.
std::map<Label, double> class_weights(const std::vector<SampleRecord>& records);

struct ExperimentPlan {
  double learning_rate = 1e-4;
  double momentum = 0.9;
  int batch_size = 16;
  int patience_epochs = 10;
  int k_folds = 5;
  double validation_fraction = 0.15;
  std::map<Label, double> class_weights{{Label::kNegative, 0.5}, {Label::kPositive, 0.5}};
};

struct PlanOverrides {
  std::optional<double> learning_rate;
  std::optional<double> momentum;
  std::optional<int> batch_size;
  std::optional<int> patience_epochs;
  std::optional<int> k_folds;
  std::optional<double> validation_fraction;
  std::optional<std::map<Label, double>> class_weights;
};

/// Training hyperparameters for an external trainer. Throws kInvalidArgument
/// for overrides that break the plan's invariants.
ExperimentPlan emit_experiment_plan(const PlanOverrides& overrides = {});

}  // namespace cytoiqa
