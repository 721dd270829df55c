#include "toneaudit/skin_extraction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace toneaudit {

namespace {
__extension__ typedef __int128 i128;
}  // namespace

ImageRgb::ImageRgb(std::size_t width, std::size_t height, std::vector<Rgb8> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width_ == 0 || height_ == 0) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  if (pixels_.size() != width_ * height_) {
    throw std::invalid_argument("pixel count " + std::to_string(pixels_.size()) +
                                " does not match " + std::to_string(width_) + "x" +
                                std::to_string(height_));
  }
}

ImageRgb ImageRgb::filled(std::size_t width, std::size_t height, Rgb8 color) {
  return ImageRgb(width, height, std::vector<Rgb8>(width * height, color));
}

std::size_t SkinMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

namespace {

int chroma_proxy(Rgb8 c) {
  const int hi = std::max({c.r, c.g, c.b});
  const int lo = std::min({c.r, c.g, c.b});
  return hi - lo;
}

template <typename Pred>
SkinMask make_mask(const ImageRgb& img, Pred pred) {
  SkinMask mask{img.width(), img.height(), std::vector<std::uint8_t>(img.size(), 0)};
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) mask.bits[i] = pred(px[i]) ? 1 : 0;
  return mask;
}

std::uint8_t quantize_cr(double cr) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(cr), 0L, 255L));
}

}  // namespace

LowColorResult is_low_color(const ImageRgb& img, const LowColorCriterion& criterion) {
  std::uint64_t chroma_sum = 0;
  std::size_t colorful = 0;
  for (const Rgb8 p : img.pixels()) {
    const int c = chroma_proxy(p);
    chroma_sum += static_cast<std::uint64_t>(c);
    if (c > criterion.pixel_chroma_level) ++colorful;
  }
  const double n = static_cast<double>(img.size());
  LowColorResult out;
  out.stats.mean_chroma = static_cast<double>(chroma_sum) / n;
  out.stats.saturation_fraction = static_cast<double>(colorful) / n;
  out.low_color = out.stats.mean_chroma < criterion.mean_chroma_min ||
                  out.stats.saturation_fraction < criterion.colorful_fraction_min;
  return out;
}

YCrCb to_ycrcb(Rgb8 c) {
  const double y = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
  return {y, 128.0 + 0.5 * (c.r - y) / (1.0 - 0.299), 128.0 + 0.5 * (c.b - y) / (1.0 - 0.114)};
}

Hsv to_hsv(Rgb8 c) {
  const int hi = std::max({c.r, c.g, c.b});
  const int lo = std::min({c.r, c.g, c.b});
  const double delta = hi - lo;
  Hsv out;
  out.v = hi / 255.0;
  out.s = hi == 0 ? 0.0 : delta / hi;
  if (delta == 0.0) return out;
  double h = 0.0;
  if (hi == c.r) {
    h = 60.0 * (c.g - c.b) / delta;
  } else if (hi == c.g) {
    h = 60.0 * (c.b - c.r) / delta + 120.0;
  } else {
    h = 60.0 * (c.r - c.g) / delta + 240.0;
  }
  if (h < 0.0) h += 360.0;
  out.h = h;
  return out;
}

bool YCrCbBox::contains(const YCrCb& p) const {
  return p.y > y_min && p.cr >= cr_min && p.cr <= cr_max && p.cb >= cb_min && p.cb <= cb_max;
}

bool HsvBox::contains(const Hsv& p) const {
  return p.h >= h_min && p.h <= h_max && p.s >= s_min && p.s <= s_max && p.v > v_min;
}

SkinMask skin_mask_ycrcb(const ImageRgb& img, const YCrCbBox& box) {
  return make_mask(img, [&](Rgb8 p) { return box.contains(to_ycrcb(p)); });
}

SkinMask skin_mask_hsv(const ImageRgb& img, const HsvBox& box) {
  return make_mask(img, [&](Rgb8 p) { return box.contains(to_hsv(p)); });
}

int otsu_threshold(const std::array<std::uint64_t, 256>& histogram) {
  const std::uint64_t total = std::accumulate(histogram.begin(), histogram.end(), std::uint64_t{0});
  if (total == 0) throw std::invalid_argument("otsu_threshold: empty input");

  int distinct = 0;
  int only_value = 0;
  std::uint64_t sum_all = 0;
  for (int v = 0; v < 256; ++v) {
    if (histogram[v] == 0) continue;
    ++distinct;
    only_value = v;
    sum_all += histogram[v] * static_cast<std::uint64_t>(v);
  }
  if (distinct == 1) return only_value;

  // Between-class variance times N^2 is (N*S0 - n0*S)^2 / (n0*n1); the
  // numerator is formed exactly in 128-bit integers.
  int best_t = 0;
  long double best = -1.0L;
  std::uint64_t n0 = 0;
  std::uint64_t s0 = 0;
  for (int t = 0; t < 255; ++t) {
    n0 += histogram[t];
    s0 += histogram[t] * static_cast<std::uint64_t>(t);
    const std::uint64_t n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const i128 diff = static_cast<i128>(total) * s0 - static_cast<i128>(n0) * sum_all;
    const long double d = static_cast<long double>(diff);
    const long double var = d * d / (static_cast<long double>(n0) * static_cast<long double>(n1));
    if (var > best) {
      best = var;
      best_t = t;
    }
  }
  return best_t;
}

int otsu_threshold(std::span<const std::uint8_t> values) {
  std::array<std::uint64_t, 256> hist{};
  for (const auto v : values) ++hist[v];
  return otsu_threshold(hist);
}

SkinMask segment_skin(const ImageRgb& img, const SegmentationConfig& config) {
  SkinMask mask = make_mask(img, [&](Rgb8 p) {
    return config.ycrcb.contains(to_ycrcb(p)) && config.hsv.contains(to_hsv(p));
  });

  const auto px = img.pixels();
  std::array<std::uint64_t, 256> hist{};
  std::size_t candidates = 0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (!mask.bits[i]) continue;
    ++hist[quantize_cr(to_ycrcb(px[i]).cr)];
    ++candidates;
  }
  if (candidates == 0) return mask;

  const int t = otsu_threshold(hist);
  std::uint64_t n_low = 0, n_high = 0, s_low = 0, s_high = 0;
  for (int v = 0; v < 256; ++v) {
    if (v <= t) {
      n_low += hist[v];
      s_low += hist[v] * static_cast<std::uint64_t>(v);
    } else {
      n_high += hist[v];
      s_high += hist[v] * static_cast<std::uint64_t>(v);
    }
  }
  if (n_low == 0 || n_high == 0) return mask;
  const double separation = static_cast<double>(s_high) / static_cast<double>(n_high) -
                            static_cast<double>(s_low) / static_cast<double>(n_low);
  if (separation <= config.otsu_min_separation) return mask;

  for (std::size_t i = 0; i < px.size(); ++i) {
    if (mask.bits[i] && quantize_cr(to_ycrcb(px[i]).cr) <= t) mask.bits[i] = 0;
  }
  return mask;
}

std::optional<Rgb8> mean_skin_rgb(const ImageRgb& img, const SkinMask& mask,
                                  const MinCoverage& coverage) {
  if (mask.width != img.width() || mask.height != img.height() ||
      mask.bits.size() != img.size()) {
    throw std::invalid_argument("mean_skin_rgb: mask dimensions do not match image");
  }
  std::uint64_t n = 0, sr = 0, sg = 0, sb = 0;
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (!mask.bits[i]) continue;
    ++n;
    sr += px[i].r;
    sg += px[i].g;
    sb += px[i].b;
  }
  if (n == 0 || n < coverage.min_pixels ||
      static_cast<double>(n) < coverage.fraction * static_cast<double>(img.size())) {
    return std::nullopt;
  }
  // floor(sum/n + 1/2)
  auto round_half_up = [n](std::uint64_t s) {
    return static_cast<std::uint8_t>((2 * s + n) / (2 * n));
  };
  return Rgb8{round_half_up(sr), round_half_up(sg), round_half_up(sb)};
}

}  // namespace toneaudit
