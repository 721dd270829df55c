#include "toneaudit/colorimetry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace toneaudit {
namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

// IEC 61966-2-1 primaries, D65.
constexpr Mat3 kRgbToXyz = {{
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
}};

constexpr Mat3 kXyzToRgb = {{
    {3.2404542, -1.5371385, -0.4985314},
    {-0.9692660, 1.8760108, 0.0415560},
    {0.0556434, -0.2040259, 1.0572252},
}};

XyzColor multiply(const Mat3& m, double a, double b, double c) {
  return {m[0][0] * a + m[0][1] * b + m[0][2] * c,
          m[1][0] * a + m[1][1] * b + m[1][2] * c,
          m[2][0] * a + m[2][1] * b + m[2][2] * c};
}

// White is the image of linear (1,1,1) so that achromatic inputs land on the
// neutral axis regardless of coefficient rounding.
const XyzColor kWhite = multiply(kRgbToXyz, 1.0, 1.0, 1.0);

constexpr double kDelta = 6.0 / 29.0;
constexpr double kDelta3 = kDelta * kDelta * kDelta;

double lab_f(double t) {
  if (t > kDelta3) return std::cbrt(t);
  return t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
  if (t > kDelta) return t * t * t;
  return 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

double decode_channel(std::uint8_t v) {
  const double c = v / 255.0;
  if (c <= 0.04045) return c / 12.92;
  return std::pow((c + 0.055) / 1.055, 2.4);
}

double encode_channel(double c) {
  c = std::clamp(c, 0.0, 1.0);
  if (c <= 0.0031308) return 12.92 * c;
  return 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

LinearRgb srgb_to_linear(Rgb8 c) {
  return {decode_channel(c.r), decode_channel(c.g), decode_channel(c.b)};
}

XyzColor linear_to_xyz(const LinearRgb& c) {
  return multiply(kRgbToXyz, c.r, c.g, c.b);
}

LabColor xyz_to_lab(const XyzColor& c) {
  const double ty = c.y / kWhite.y;
  const double fx = lab_f(c.x / kWhite.x);
  const double fy = lab_f(ty);
  const double fz = lab_f(c.z / kWhite.z);
  // Same value as 116 f(t) - 16 on the linear branch, without the cancellation.
  const double l_star = ty > kDelta3 ? 116.0 * fy - 16.0 : ty * (24389.0 / 27.0);
  return {l_star, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

LabColor rgb_to_lab(Rgb8 c) {
  return xyz_to_lab(linear_to_xyz(srgb_to_linear(c)));
}

std::optional<double> compute_ita(const LabColor& lab) {
  const double rise = lab.l_star - 50.0;
  if (lab.b_star == 0.0) {
    if (rise > 0.0) return 90.0;
    if (rise < 0.0) return -90.0;
    return std::nullopt;
  }
  return std::atan(rise / lab.b_star) * kRadToDeg;
}

std::optional<double> compute_hue(const LabColor& lab) {
  if (lab.a_star == 0.0 && lab.b_star == 0.0) return std::nullopt;
  double deg = std::atan2(lab.b_star, lab.a_star) * kRadToDeg;
  if (deg < 0.0) deg += 360.0;
  // -tiny + 360 rounds to 360
  if (deg >= 360.0) deg = 0.0;
  return deg;
}

ToneAngles compute_angles(const LabColor& lab) {
  return {compute_ita(lab), compute_hue(lab)};
}

Rgb8 lab_to_rgb(const LabColor& lab) {
  const double fy = (lab.l_star + 16.0) / 116.0;
  const double fx = fy + lab.a_star / 500.0;
  const double fz = fy - lab.b_star / 200.0;
  const XyzColor lin = multiply(kXyzToRgb, lab_f_inv(fx) * kWhite.x,
                                lab_f_inv(fy) * kWhite.y,
                                lab_f_inv(fz) * kWhite.z);
  auto to8 = [](double c) {
    return static_cast<std::uint8_t>(std::lround(encode_channel(c) * 255.0));
  };
  return {to8(lin.x), to8(lin.y), to8(lin.z)};
}

}  // namespace toneaudit
