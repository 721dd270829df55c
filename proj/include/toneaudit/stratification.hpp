#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

#include "toneaudit/colorimetry.hpp"

namespace toneaudit {

enum class ToneGroup { Light = 0, Medium = 1, Dark = 2, Undetermined = 3 };

inline constexpr std::array<ToneGroup, 3> kToneGroups = {ToneGroup::Light, ToneGroup::Medium,
                                                          ToneGroup::Dark};

std::string_view to_string(ToneGroup g);
/// Accepts the names produced by to_string. Throws std::invalid_argument otherwise.
ToneGroup parse_tone_group(std::string_view s);

struct ItaThresholds {
  double light_min_deg = 55.0;  // Light when ITA > light_min_deg
  double dark_max_deg = 30.0;   // Dark when ITA < dark_max_deg

  void validate() const;
};

struct LightnessThresholds {
  double light_min = 67.0;
  double dark_max = 37.0;

  void validate() const;
};

struct ChannelRange {
  int lo = 0;
  int hi = 255;

  bool contains(int v) const { return v >= lo && v <= hi; }
};

/// Reassigns chromatically brown samples to Dark regardless of lightness.
struct BrownOverrideRule {
  ChannelRange r{100, 170};
  ChannelRange g{60, 110};
  ChannelRange b{40, 85};
  int rg_diff_max = 30;  // R - G < rg_diff_max
  int gb_diff_max = 25;  // G - B < gb_diff_max
  double hue_min_deg = 20.0;
  double hue_max_deg = 50.0;
  bool enabled = true;

  void validate() const;
};

ToneGroup classify_ita(double ita_deg, const ItaThresholds& t = {});
ToneGroup classify_lightness(double l_star, const LightnessThresholds& t = {});

/// True iff the channel boxes, R > G > B, both difference caps and the hue
/// band all hold. Ignores rule.enabled.
bool brown_override_applies(Rgb8 c, double hue_deg, const BrownOverrideRule& rule = {});

struct HlClassification {
  ToneGroup group = ToneGroup::Undetermined;
  ToneGroup lightness_group = ToneGroup::Undetermined;
  bool override_fired = false;
};

/// Hue-Lightness taxonomy for an image-level mean skin color: lightness
/// thresholds, then the brown-tone override. Achromatic colors (no hue) are
/// Undetermined.
HlClassification classify_hl(Rgb8 mean, const LightnessThresholds& t = {},
                             const BrownOverrideRule& rule = {});

struct TaxonomyComparison {
  /// counts[ita][hl], indexed by ToneGroup value.
  std::array<std::array<std::size_t, 4>, 4> counts{};
  std::size_t total = 0;
  /// Light/Medium/Dark diagonal over total; empty when there are no records.
  std::optional<double> agreement_rate;

  void add(ToneGroup ita, ToneGroup hl);
  void merge(const TaxonomyComparison& other);
  void finalize();
};

TaxonomyComparison compare_taxonomies(std::span<const std::pair<ToneGroup, ToneGroup>> records);

}  // namespace toneaudit
