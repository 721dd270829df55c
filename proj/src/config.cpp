#include "toneaudit/config.hpp"

#include <stdexcept>

namespace toneaudit {

void AuditConfig::validate() const {
  ita.validate();
  lightness.validate();
  brown_override.validate();

  const auto& y = segmentation.ycrcb;
  if (y.cr_min > y.cr_max || y.cb_min > y.cb_max) {
    throw std::invalid_argument("segmentation.ycrcb: empty chroma range");
  }
  const auto& h = segmentation.hsv;
  if (h.h_min > h.h_max || h.s_min > h.s_max) {
    throw std::invalid_argument("segmentation.hsv: empty hue or saturation range");
  }
  if (segmentation.otsu_min_separation < 0.0) {
    throw std::invalid_argument("segmentation.otsu_min_separation must be >= 0");
  }
  if (low_color.colorful_fraction_min < 0.0 || low_color.colorful_fraction_min > 1.0) {
    throw std::invalid_argument("low_color.colorful_fraction_min must lie in [0, 1]");
  }
  if (min_coverage.fraction < 0.0 || min_coverage.fraction > 1.0) {
    throw std::invalid_argument("min_coverage.fraction must lie in [0, 1]");
  }
  if (max_join_miss_fraction < 0.0 || max_join_miss_fraction > 1.0) {
    throw std::invalid_argument("max_join_miss_fraction must lie in [0, 1]");
  }
}

}  // namespace toneaudit
