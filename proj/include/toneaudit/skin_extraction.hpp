#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "toneaudit/colorimetry.hpp"

namespace toneaudit {

/// Decoded 8-bit RGB image, row-major.
class ImageRgb {
 public:
  /// Throws std::invalid_argument when the dimensions are zero or do not match
  /// the pixel count.
  ImageRgb(std::size_t width, std::size_t height, std::vector<Rgb8> pixels);

  /// Uniform image.
  static ImageRgb filled(std::size_t width, std::size_t height, Rgb8 color);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  std::span<const Rgb8> pixels() const { return pixels_; }
  Rgb8 at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<Rgb8> pixels_;
};

/// Per-pixel skin flags with the dimensions of the source image.
struct SkinMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;  // 1 = skin

  std::size_t count() const;
  bool at(std::size_t x, std::size_t y) const { return bits[y * width + x] != 0; }
};

struct ColorfulnessStats {
  double mean_chroma = 0.0;          // mean of max(r,g,b) - min(r,g,b)
  double saturation_fraction = 0.0;  // share of pixels above pixel_chroma_level
};

struct LowColorCriterion {
  double mean_chroma_min = 8.0;
  int pixel_chroma_level = 16;
  double colorful_fraction_min = 0.05;
};

struct LowColorResult {
  bool low_color = false;
  ColorfulnessStats stats;
};

/// Grayscale / near-grayscale detection on the max-min chroma proxy.
/// Low color when mean chroma < mean_chroma_min, or when fewer than
/// colorful_fraction_min of the pixels exceed pixel_chroma_level.
LowColorResult is_low_color(const ImageRgb& img, const LowColorCriterion& criterion = {});

/// Full-range BT.601 luma/chroma, as used by JPEG.
struct YCrCb {
  double y = 0.0;
  double cr = 0.0;
  double cb = 0.0;
};
YCrCb to_ycrcb(Rgb8 c);

/// Hue in degrees [0, 360), saturation and value in [0, 1].
struct Hsv {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};
Hsv to_hsv(Rgb8 c);

struct YCrCbBox {
  double y_min = 80.0;  // exclusive
  double cr_min = 135.0;
  double cr_max = 180.0;
  double cb_min = 85.0;
  double cb_max = 135.0;

  bool contains(const YCrCb& p) const;
};

struct HsvBox {
  double h_min = 0.0;
  double h_max = 50.0;
  double s_min = 0.23;
  double s_max = 0.68;
  double v_min = 0.35;  // exclusive

  bool contains(const Hsv& p) const;
};

struct SegmentationConfig {
  YCrCbBox ycrcb;
  HsvBox hsv;
  /// Otsu on candidate Cr only drops the low class when the class means are
  /// further apart than this (Cr units).
  double otsu_min_separation = 10.0;
};

SkinMask skin_mask_ycrcb(const ImageRgb& img, const YCrCbBox& box = {});
SkinMask skin_mask_hsv(const ImageRgb& img, const HsvBox& box = {});

/// Otsu's threshold over the 256-bin histogram of `values`.
///
/// The threshold t splits the data into {v <= t} and {v > t}; the returned t
/// maximizes the between-class variance, ties going to the lowest t. When all
/// values are identical that value is returned. Throws std::invalid_argument
/// on empty input.
int otsu_threshold(std::span<const std::uint8_t> values);

/// Histogram form of otsu_threshold.
int otsu_threshold(const std::array<std::uint64_t, 256>& histogram);

/// Intersection of the YCrCb and HSV masks, refined by Otsu on the Cr channel
/// of the candidate pixels. The result may be empty.
SkinMask segment_skin(const ImageRgb& img, const SegmentationConfig& config = {});

struct MinCoverage {
  double fraction = 0.01;
  std::size_t min_pixels = 64;
};

/// Per-channel mean of masked pixels, rounded half up. nullopt when the mask
/// covers fewer pixels than `coverage` requires (both floors must hold).
/// Throws std::invalid_argument on dimension mismatch.
std::optional<Rgb8> mean_skin_rgb(const ImageRgb& img, const SkinMask& mask,
                                  const MinCoverage& coverage = {});

}  // namespace toneaudit
