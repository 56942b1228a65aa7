#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

namespace cytoiqa {

enum class StrategyId {
  kControl,
  kSum,
  kSumSize,
  kRgbVar,
  kRgbVarSize,
  kSatVar,
  kSatVarSize,
};

inline constexpr std::array<StrategyId, 7> kAllStrategies = {
    StrategyId::kControl, StrategyId::kSum,        StrategyId::kSumSize,
    StrategyId::kRgbVar,  StrategyId::kRgbVarSize, StrategyId::kSatVar,
    StrategyId::kSatVarSize,
};

/// CLI/report names: control, sum, sum_size, rgb_var, rgb_var_size, sat_var, sat_var_size.
std::string_view to_string(StrategyId id);
std::optional<StrategyId> parse_strategy(std::string_view name);

/// True for the strategies that weight by the non-padding share of a fragment.
bool uses_size_weight(StrategyId id);

struct PatchScore {
  double probability = 0.0;
  double rgb_variance = 0.0;
  double saturation_variance = 0.0;
  double valid_fraction = 1.0;
};

/// Throws kInvalidArgument for non-finite fields or a probability outside [0,1].
void validate(const PatchScore& score);

double fragment_weight(StrategyId strategy, const PatchScore& score);

/// Weighted mean sum(w*p)/sum(w) in list order; unweighted mean when every
/// weight is zero. Control takes exactly one score (kArity); an empty list
/// throws kEmptyInput.
double aggregate(StrategyId strategy, std::span<const PatchScore> scores);

enum class Label { kNegative = 0, kPositive = 1 };

std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view name);

inline Label decide(double probability, double threshold = 0.5) {
  return probability >= threshold ? Label::kPositive : Label::kNegative;
}

}  // namespace cytoiqa
