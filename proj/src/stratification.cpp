#include "toneaudit/stratification.hpp"

#include <stdexcept>
#include <string>

namespace toneaudit {

std::string_view to_string(ToneGroup g) {
  switch (g) {
    case ToneGroup::Light: return "Light";
    case ToneGroup::Medium: return "Medium";
    case ToneGroup::Dark: return "Dark";
    case ToneGroup::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

ToneGroup parse_tone_group(std::string_view s) {
  for (ToneGroup g : {ToneGroup::Light, ToneGroup::Medium, ToneGroup::Dark,
                      ToneGroup::Undetermined}) {
    if (s == to_string(g)) return g;
  }
  throw std::invalid_argument("unknown tone group '" + std::string(s) + "'");
}

void ItaThresholds::validate() const {
  if (!(dark_max_deg < light_min_deg)) {
    throw std::invalid_argument("ita thresholds: dark_max_deg must be below light_min_deg");
  }
}

void LightnessThresholds::validate() const {
  if (!(dark_max < light_min)) {
    throw std::invalid_argument("lightness thresholds: dark_max must be below light_min");
  }
}

void BrownOverrideRule::validate() const {
  for (const ChannelRange& c : {r, g, b}) {
    if (c.lo > c.hi || c.lo < 0 || c.hi > 255) {
      throw std::invalid_argument("brown override: empty or out-of-range channel range");
    }
  }
  if (hue_min_deg > hue_max_deg || hue_min_deg < 0.0 || hue_max_deg >= 360.0) {
    throw std::invalid_argument("brown override: hue range must lie within [0, 360)");
  }
}

ToneGroup classify_ita(double ita_deg, const ItaThresholds& t) {
  if (ita_deg > t.light_min_deg) return ToneGroup::Light;
  if (ita_deg < t.dark_max_deg) return ToneGroup::Dark;
  return ToneGroup::Medium;
}

ToneGroup classify_lightness(double l_star, const LightnessThresholds& t) {
  if (l_star > t.light_min) return ToneGroup::Light;
  if (l_star < t.dark_max) return ToneGroup::Dark;
  return ToneGroup::Medium;
}

bool brown_override_applies(Rgb8 c, double hue_deg, const BrownOverrideRule& rule) {
  const int r = c.r, g = c.g, b = c.b;
  return rule.r.contains(r) && rule.g.contains(g) && rule.b.contains(b) &&
         r > g && g > b &&
         (r - g) < rule.rg_diff_max && (g - b) < rule.gb_diff_max &&
         hue_deg >= rule.hue_min_deg && hue_deg <= rule.hue_max_deg;
}

HlClassification classify_hl(Rgb8 mean, const LightnessThresholds& t,
                             const BrownOverrideRule& rule) {
  const LabColor lab = rgb_to_lab(mean);
  const auto hue = compute_hue(lab);
  HlClassification out;
  if (!hue) return out;
  out.lightness_group = classify_lightness(lab.l_star, t);
  out.group = out.lightness_group;
  if (rule.enabled && brown_override_applies(mean, *hue, rule)) {
    out.override_fired = true;
    out.group = ToneGroup::Dark;
  }
  return out;
}

void TaxonomyComparison::add(ToneGroup ita, ToneGroup hl) {
  ++counts[static_cast<std::size_t>(ita)][static_cast<std::size_t>(hl)];
  ++total;
}

void TaxonomyComparison::merge(const TaxonomyComparison& other) {
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) counts[i][j] += other.counts[i][j];
  }
  total += other.total;
}

void TaxonomyComparison::finalize() {
  if (total == 0) {
    agreement_rate.reset();
    return;
  }
  std::size_t agree = 0;
  for (ToneGroup g : kToneGroups) {
    const auto i = static_cast<std::size_t>(g);
    agree += counts[i][i];
  }
  agreement_rate = static_cast<double>(agree) / static_cast<double>(total);
}

TaxonomyComparison compare_taxonomies(std::span<const std::pair<ToneGroup, ToneGroup>> records) {
  TaxonomyComparison out;
  for (const auto& [ita, hl] : records) out.add(ita, hl);
  out.finalize();
  return out;
}

}  // namespace toneaudit
