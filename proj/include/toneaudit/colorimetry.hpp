#pragma once

#include <cstdint>
#include <optional>

namespace toneaudit {

/// 8-bit sRGB-encoded color.
struct Rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

/// Linear-light sRGB, each component in [0, 1].
struct LinearRgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

/// CIE XYZ, normalized so the D65 reference white has Y = 1.
struct XyzColor {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// CIE L*a*b* relative to D65.
struct LabColor {
  double l_star = 0.0;
  double a_star = 0.0;
  double b_star = 0.0;
};

struct ToneAngles {
  std::optional<double> ita_deg;  // empty when L* = 50 and b* = 0
  std::optional<double> hue_deg;  // empty when a* = b* = 0
};

LinearRgb srgb_to_linear(Rgb8 c);
XyzColor linear_to_xyz(const LinearRgb& c);
LabColor xyz_to_lab(const XyzColor& c);

/// sRGB (D65, 2 degree observer) to CIELab.
LabColor rgb_to_lab(Rgb8 c);

/// Individual Typology Angle in degrees, arctan((L* - 50) / b*).
///
/// Uses the principal branch, so the result lies in [-90, 90]. b* = 0 maps to
/// +90 above L* = 50 and -90 below it. Returns nullopt at L* = 50, b* = 0.
std::optional<double> compute_ita(const LabColor& lab);

/// Hue angle atan2(b*, a*) in degrees, wrapped to [0, 360).
/// Returns nullopt for achromatic input (a* = b* = 0).
std::optional<double> compute_hue(const LabColor& lab);

ToneAngles compute_angles(const LabColor& lab);

/// Inverse of rgb_to_lab with clamping and rounding to 8 bits. Used to verify
/// the forward path; not part of the classification pipeline.
Rgb8 lab_to_rgb(const LabColor& lab);

}  // namespace toneaudit
