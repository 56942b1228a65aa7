#include "cytoiqa/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cytoiqa/error.hpp"

namespace cytoiqa {

std::string_view to_string(StrategyId id) {
  switch (id) {
    case StrategyId::kControl: return "control";
    case StrategyId::kSum: return "sum";
    case StrategyId::kSumSize: return "sum_size";
    case StrategyId::kRgbVar: return "rgb_var";
    case StrategyId::kRgbVarSize: return "rgb_var_size";
    case StrategyId::kSatVar: return "sat_var";
    case StrategyId::kSatVarSize: return "sat_var_size";
  }
  return "unknown";
}

std::optional<StrategyId> parse_strategy(std::string_view name) {
  for (StrategyId id : kAllStrategies) {
    if (to_string(id) == name) return id;
  }
  return std::nullopt;
}

bool uses_size_weight(StrategyId id) {
  return id == StrategyId::kSumSize || id == StrategyId::kRgbVarSize ||
         id == StrategyId::kSatVarSize;
}

std::string_view to_string(Label label) {
  return label == Label::kPositive ? "positive" : "negative";
}

std::optional<Label> parse_label(std::string_view name) {
  if (name == "positive") return Label::kPositive;
  if (name == "negative") return Label::kNegative;
  return std::nullopt;
}

void validate(const PatchScore& s) {
  const bool finite = std::isfinite(s.probability) && std::isfinite(s.rgb_variance) &&
                      std::isfinite(s.saturation_variance) && std::isfinite(s.valid_fraction);
  if (!finite || s.probability < 0.0 || s.probability > 1.0 || s.rgb_variance < 0.0 ||
      s.saturation_variance < 0.0 || s.valid_fraction <= 0.0 || s.valid_fraction > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "patch score outside its valid ranges");
  }
}

double fragment_weight(StrategyId strategy, const PatchScore& s) {
  switch (strategy) {
    case StrategyId::kControl:
    case StrategyId::kSum: return 1.0;
    case StrategyId::kSumSize: return s.valid_fraction;
    case StrategyId::kRgbVar: return s.rgb_variance;
    case StrategyId::kRgbVarSize: return s.rgb_variance * s.valid_fraction;
    case StrategyId::kSatVar: return s.saturation_variance;
    case StrategyId::kSatVarSize: return s.saturation_variance * s.valid_fraction;
  }
  return 1.0;
}

double aggregate(StrategyId strategy, std::span<const PatchScore> scores) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "no patch scores to aggregate");
  if (strategy == StrategyId::kControl && scores.size() != 1) {
    throw Error(ErrorCode::kArity, "control strategy takes exactly one score, got " +
                                       std::to_string(scores.size()));
  }
  for (const auto& s : scores) validate(s);

  // Weighted mean of offsets from the first probability: algebraically
  // sum(w*p)/sum(w), but exact when all probabilities are equal.
  const double anchor = scores.front().probability;
  double lo = anchor;
  double hi = anchor;
  double weight_sum = 0.0;
  double weighted = 0.0;
  double plain = 0.0;
  for (const auto& s : scores) {
    const double w = fragment_weight(strategy, s);
    const double d = s.probability - anchor;
    weight_sum += w;
    weighted += w * d;
    plain += d;
    lo = std::min(lo, s.probability);
    hi = std::max(hi, s.probability);
  }
  const double mean = weight_sum > 0.0 ? anchor + weighted / weight_sum
                                       : anchor + plain / static_cast<double>(scores.size());
  return std::clamp(mean, lo, hi);
}

}  // namespace cytoiqa
