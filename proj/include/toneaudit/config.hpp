#pragma once

#include "toneaudit/fairness_metrics.hpp"
#include "toneaudit/skin_extraction.hpp"
#include "toneaudit/stratification.hpp"

namespace toneaudit {

inline constexpr int kSchemaVersion = 1;

/// Every threshold used by an audit. Serialized alongside each report so the
/// output documents the settings that produced it.
struct AuditConfig {
  ClassSet classes;
  ItaThresholds ita;
  LightnessThresholds lightness;
  BrownOverrideRule brown_override;
  SegmentationConfig segmentation;
  LowColorCriterion low_color;
  MinCoverage min_coverage;
  TprAggregation tpr_aggregation = TprAggregation::Macro;
  /// Fraction of manifest rows allowed to miss the tone join before a warning.
  double max_join_miss_fraction = 0.05;

  /// Throws std::invalid_argument naming the offending setting.
  void validate() const;
};

}  // namespace toneaudit
