// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "test_util.hpp"
#include "toneaudit/cli.hpp"
#include "toneaudit/colorimetry.hpp"
#include "toneaudit/dataset_io.hpp"
#include "toneaudit/fairness_metrics.hpp"
#include "toneaudit/skin_extraction.hpp"
#include "toneaudit/stratification.hpp"

using namespace toneaudit;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& fn) {
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Rgb8 random_rgb(std::mt19937& rng) {
  std::uniform_int_distribution<int> byte(0, 255);
  return {std::uint8_t(byte(rng)), std::uint8_t(byte(rng)), std::uint8_t(byte(rng))};
}

void add(std::vector<PredictionRecord>& out, ToneGroup g, std::size_t truth, std::size_t pred, int n) {
  for (int i = 0; i < n; ++i) out.push_back({"s" + std::to_string(out.size()), g, truth, pred});
}

double round_to(double v, int decimals) {
  const double s = std::pow(10.0, decimals);
  return std::round(v * s) / s;
}

Outcome colorimetry_oracle() {
  std::mt19937 rng(2024);
  std::vector<Rgb8> colors(1000);
  for (auto& c : colors) c = random_rgb(rng);
  const auto t0 = Clock::now();
  std::vector<LabColor> labs;
  labs.reserve(colors.size());
  for (auto c : colors) labs.push_back(rgb_to_lab(c));
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  for (std::size_t i = 0; i < colors.size(); ++i) {
    const auto ref = oracle::srgb_to_lab(colors[i].r, colors[i].g, colors[i].b);
    worst = std::max({worst, std::abs(labs[i].l_star - double(ref.l)),
                      std::abs(labs[i].a_star - double(ref.a)),
                      std::abs(labs[i].b_star - double(ref.b))});
  }
  const auto white = rgb_to_lab({255, 255, 255});
  const auto black = rgb_to_lab({0, 0, 0});
  const auto gray = rgb_to_lab({119, 119, 119});
  const bool anchors = white.l_star == 100.0 && std::abs(white.a_star) < 0.01 &&
                       std::abs(white.b_star) < 0.01 && black.l_star == 0.0 &&
                       black.a_star == 0.0 && black.b_star == 0.0 &&
                       std::abs(gray.l_star - 50.0344387925) < 1e-6 &&
                       std::abs(gray.a_star) < 0.01 && std::abs(gray.b_star) < 0.01;
  return {worst <= 0.05 && anchors && elapsed < 1.0,
          fmt("max delta %.2e over 1000 colors (tol 0.05), anchors %s, %.4f s", worst,
              anchors ? "ok" : "off", elapsed)};
}

Outcome ita_hue_formulas() {
  const auto ita = compute_ita({60.0, 0.0, 10.0});
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ab(-128.0, 127.0);
  std::uniform_real_distribution<double> logk(-6.0, 6.0);
  double worst = 0.0;
  int undefined_mismatch = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = ab(rng), b = ab(rng), k = std::exp(logk(rng));
    const auto h1 = compute_hue({50.0, a, b});
    const auto h2 = compute_hue({50.0, k * a, k * b});
    if (!h1 || !h2) {
      ++undefined_mismatch;
      continue;
    }
    double d = std::abs(*h1 - *h2);
    d = std::min(d, 360.0 - d);
    worst = std::max(worst, d);
  }
  const bool ok = ita && *ita == 45.0 && worst <= 1e-9 && undefined_mismatch == 0;
  return {ok, fmt("ITA(60,10)=%.17g, max hue drift %.2e over 10000 triples (tol 1e-9)",
                  ita ? *ita : -1.0, worst)};
}

Outcome boundary_suite() {
  const double ita_in[] = {29.999, 30.0, 55.0, 55.001};
  const double l_in[] = {36.999, 37.0, 67.0, 67.001};
  const ToneGroup want[] = {ToneGroup::Dark, ToneGroup::Medium, ToneGroup::Medium, ToneGroup::Light};
  std::string got;
  bool ok = true;
  for (int i = 0; i < 4; ++i) {
    ok = ok && classify_ita(ita_in[i]) == want[i] && classify_lightness(l_in[i]) == want[i];
    got += std::string(to_string(classify_ita(ita_in[i]))) + "/" +
           std::string(to_string(classify_lightness(l_in[i]))) + " ";
  }
  return {ok, "ita/lightness: " + got};
}

// Override clauses evaluated directly from the default numbers, with the hue
// taken from the oracle Lab conversion.
bool oracle_override(int r, int g, int b) {
  if (r < 100 || r > 170 || g < 60 || g > 110 || b < 40 || b > 85) return false;
  if (!(r > g && g > b)) return false;
  if (r - g >= 30 || g - b >= 25) return false;
  const auto lab = oracle::srgb_to_lab(r, g, b);
  long double h = std::atan2(lab.b, lab.a) * 180.0L / 3.14159265358979323846L;
  if (h < 0) h += 360.0L;
  return h >= 20.0L && h <= 50.0L;
}

Outcome override_exhaustive() {
  const auto t0 = Clock::now();
  long in_box = 0, fired = 0, mismatches = 0;
  for (int r = 100; r <= 170; ++r)
    for (int g = 60; g <= 110; ++g)
      for (int b = 40; b <= 85; ++b) {
        ++in_box;
        const Rgb8 c{std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)};
        const auto hl = classify_hl(c);
        const bool expect = oracle_override(r, g, b);
        if (expect) ++fired;
        if (expect && (hl.group != ToneGroup::Dark || !hl.override_fired)) ++mismatches;
        if (!expect && hl.override_fired) ++mismatches;
      }
  std::mt19937 rng(5);
  long outside = 0, outside_fired = 0;
  while (outside < 10000) {
    const Rgb8 c = random_rgb(rng);
    if (c.r >= 100 && c.r <= 170 && c.g >= 60 && c.g <= 110 && c.b >= 40 && c.b <= 85) continue;
    ++outside;
    if (classify_hl(c).override_fired) ++outside_fired;
  }
  const double elapsed = seconds_since(t0);
  return {mismatches == 0 && outside_fired == 0 && elapsed < 10.0,
          fmt("%ld in-box colors, %ld fire, %ld mismatches; %ld/10000 outside fire; %.3f s", in_box,
              fired, mismatches, outside_fired, elapsed)};
}

Outcome otsu_oracle() {
  std::mt19937 rng(17);
  std::vector<std::vector<std::uint8_t>> samples;
  for (int i = 0; i < 500; ++i) {
    // One or two modes of random position and spread.
    std::uniform_int_distribution<int> len(1, 2000), center(0, 255), spread(0, 60), modes(1, 2);
    const int m = modes(rng);
    std::vector<std::normal_distribution<double>> dists;
    for (int k = 0; k < m; ++k) dists.emplace_back(center(rng), spread(rng) + 0.5);
    std::vector<std::uint8_t> v(static_cast<std::size_t>(len(rng)));
    for (auto& x : v)
      x = static_cast<std::uint8_t>(std::clamp(std::lround(dists[rng() % m](rng)), 0L, 255L));
    samples.push_back(std::move(v));
  }
  const auto t0 = Clock::now();
  std::vector<int> got;
  for (const auto& s : samples) got.push_back(otsu_threshold(s));
  const double elapsed = seconds_since(t0);
  int mismatches = 0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (got[i] != oracle::otsu_brute_force(samples[i])) ++mismatches;
  return {mismatches == 0 && elapsed < 1.0,
          fmt("%d/500 mismatches against exhaustive search, %.4f s", mismatches, elapsed)};
}

Outcome fairness_oracle() {
  constexpr std::size_t k = 8;
  std::mt19937 rng(123);
  std::uniform_int_distribution<int> support(0, 50);
  std::uniform_int_distribution<std::size_t> cls(0, k - 1);
  long compared = 0, failures_n = 0;
  double worst = 0.0;
  auto cmp = [&](const std::optional<double>& a, const std::optional<double>& b) {
    ++compared;
    if (a.has_value() != b.has_value()) {
      ++failures_n;
      return;
    }
    if (a) {
      worst = std::max(worst, std::abs(*a - *b));
      if (std::abs(*a - *b) > 1e-12) ++failures_n;
    }
  };
  auto gap_value = [](const std::optional<Gap>& g) {
    return g ? std::optional<double>(g->value) : std::nullopt;
  };
  for (int set = 0; set < 100; ++set) {
    std::vector<PredictionRecord> recs;
    const double hit = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (int g = 0; g < 3; ++g)
      for (std::size_t c = 0; c < k; ++c) {
        const int n = rng() % 4 == 0 ? 0 : support(rng);
        for (int i = 0; i < n; ++i) {
          const std::size_t pred = std::bernoulli_distribution(hit)(rng) ? c : cls(rng);
          add(recs, kToneGroups[g], c, pred, 1);
        }
      }
    std::shuffle(recs.begin(), recs.end(), rng);
    const auto ref = oracle::naive_metrics(recs, k);
    for (auto agg : {TprAggregation::Macro, TprAggregation::Micro}) {
      const auto rep = build_fairness_report(tally(recs, k), ClassSet{}, agg);
      for (std::size_t gi = 0; gi < 3; ++gi) {
        for (std::size_t c = 0; c < k; ++c) {
          cmp(rep.groups[gi].precision[c], ref.precision[gi][c]);
          cmp(rep.groups[gi].recall[c], ref.recall[gi][c]);
          cmp(rep.groups[gi].f1[c], ref.f1[gi][c]);
          cmp(rep.eod.recall[gi][c], ref.recall[gi][c]);
        }
        cmp(rep.groups[gi].accuracy, ref.accuracy[gi]);
        cmp(rep.groups[gi].macro_f1, ref.macro_f1[gi]);
        cmp(rep.groups[gi].tpr,
            agg == TprAggregation::Macro ? ref.tpr_macro[gi] : ref.tpr_micro[gi]);
      }
      cmp(gap_value(rep.f1_gap), ref.f1_gap);
      cmp(gap_value(rep.accuracy_equality), ref.accuracy_equality);
      cmp(gap_value(rep.tpr_disparity),
          agg == TprAggregation::Macro ? ref.tpr_disparity_macro : ref.tpr_disparity_micro);
      for (std::size_t c = 0; c < k; ++c) cmp(rep.eod.disparity[c], ref.eod_disparity[c]);
    }
  }
  return {failures_n == 0, fmt("%ld values compared over 100 sets, %ld disagreements, max abs diff %.2e (tol 1e-12)",
                               compared, failures_n, worst)};
}

// One class per group: TP correct predictions, FN predicted as a class with
// no support in that group.
void plant_f1(std::vector<PredictionRecord>& recs, ToneGroup g, int tp, int fn) {
  add(recs, g, 0, 0, tp);
  add(recs, g, 0, 1, fn);
}

Outcome gap_arithmetic() {
  std::vector<PredictionRecord> a;
  plant_f1(a, ToneGroup::Light, 1, 3);   // 2/5   = 0.40
  plant_f1(a, ToneGroup::Medium, 9, 32);  // 18/50 = 0.36
  plant_f1(a, ToneGroup::Dark, 8, 34);    // 16/50 = 0.32
  const auto gap_a = f1_gap(tally(a, 8));

  std::vector<PredictionRecord> b;
  plant_f1(b, ToneGroup::Light, 1, 3);   // 0.40
  plant_f1(b, ToneGroup::Medium, 7, 26);  // 14/40 = 0.35
  const auto gap_b = f1_gap(tally(b, 8));

  std::vector<PredictionRecord> c;
  add(c, ToneGroup::Light, 0, 0, 9);
  add(c, ToneGroup::Light, 0, 1, 11);  // 0.45
  add(c, ToneGroup::Medium, 0, 0, 2);
  add(c, ToneGroup::Medium, 0, 1, 3);  // 0.40
  add(c, ToneGroup::Dark, 0, 0, 43);
  add(c, ToneGroup::Dark, 0, 1, 82);  // 0.344
  const auto tpr_c = tpr_disparity(tally(c, 8));

  std::vector<PredictionRecord> d;
  add(d, ToneGroup::Light, 0, 0, 43);
  add(d, ToneGroup::Light, 0, 1, 57);  // 0.43
  add(d, ToneGroup::Medium, 0, 0, 2);
  add(d, ToneGroup::Medium, 0, 1, 3);  // 0.40
  add(d, ToneGroup::Dark, 0, 0, 339);
  add(d, ToneGroup::Dark, 0, 1, 661);  // 0.339
  const auto tpr_d = tpr_disparity(tally(d, 8));

  auto matches = [](const std::optional<Gap>& g, double expected) {
    return g && std::abs(g->value - expected) <= 1e-12 && round_to(g->value, 3) == expected;
  };
  const bool ok = matches(gap_a, 0.080) && matches(gap_b, 0.050) && matches(tpr_c, 0.106) &&
                  matches(tpr_d, 0.091);
  auto v = [](const std::optional<Gap>& g) { return g ? g->value : -1.0; };
  return {ok, fmt("f1_gap %.17g (0.080), %.17g (0.050); tpr_disparity %.17g (0.106), %.17g (0.091)",
                  v(gap_a), v(gap_b), v(tpr_c), v(tpr_d))};
}

Outcome dark_anger_recall() {
  constexpr std::size_t kAnger = 6;
  std::vector<PredictionRecord> recs;
  add(recs, ToneGroup::Dark, kAnger, kAnger, 2);
  add(recs, ToneGroup::Dark, kAnger, 0, 1);
  const auto r = recall(ToneGroup::Dark, kAnger, tally(recs, 8));
  const bool ok = r && round_to(*r, 2) == 0.67;
  return {ok, fmt("Dark/Anger recall %.6f -> %.2f (0.67)", r ? *r : -1.0, r ? round_to(*r, 2) : -1.0)};
}

int run_cli_quiet(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return run_cli(args, out, err);
}

Outcome end_to_end_determinism() {
  testutil::TempDir dir;
  const fs::path img = dir / "img";
  fs::create_directories(img);
  const Rgb8 skins[] = {{235, 195, 170}, {225, 180, 150}, {200, 150, 120}, {180, 120, 90},
                        {160, 110, 85},  {140, 100, 80},  {125, 96, 84},   {150, 105, 80},
                        {210, 160, 130}};
  const Rgb8 backgrounds[] = {{0, 0, 255}, {20, 140, 40}, {240, 240, 240}};
  std::vector<std::string> names;
  for (std::size_t i = 0; i < 9; ++i) {
    names.push_back(fmt("face_%02zu.png", i));
    write_image(testutil::swatch_image(skins[i], backgrounds[i % 3], 48), img / names.back());
  }
  names.push_back("face_09.png");
  write_image(ImageRgb::filled(48, 48, {128, 128, 128}), img / names.back());
  names.push_back("face_10.png");
  write_image(ImageRgb::filled(48, 48, {20, 180, 30}), img / names.back());
  names.push_back("face_11.png");
  std::ofstream(img / names.back()) << "truncated";

  const char* labels[] = {"neutral", "happy", "sad", "surprise", "fear", "disgust", "anger", "contempt"};
  std::string manifest = "image_path,true_label,predicted_label\n";
  for (std::size_t i = 0; i < names.size(); ++i)
    manifest += names[i] + "," + labels[i % 8] + "," + labels[(i * 3) % 8] + "\n";
  std::ofstream(dir / "manifest.csv") << manifest;

  std::vector<std::string> tone_bytes, report_bytes;
  int bad_exit = 0;
  for (int run = 0; run < 3; ++run) {
    for (const char* threads : {"1", "4"}) {
      const std::string tag = std::to_string(run) + "_" + threads;
      const auto tones = (dir / ("tones_" + tag + ".csv")).string();
      const auto rep = (dir / ("report_" + tag + ".json")).string();
      bad_exit += run_cli_quiet({"tones", img.string(), "--out", tones, "--threads", threads}) != 0;
      bad_exit += run_cli_quiet({"audit", tones, (dir / "manifest.csv").string(), "--out", rep,
                                 "--threads", threads}) != 0;
      tone_bytes.push_back(read_file(tones));
      report_bytes.push_back(read_file(rep));
    }
  }
  bool identical = true;
  for (std::size_t i = 1; i < tone_bytes.size(); ++i)
    identical = identical && tone_bytes[i] == tone_bytes[0] && report_bytes[i] == report_bytes[0];
  return {bad_exit == 0 && identical,
          fmt("12 images, 3 runs x threads {1,4}: %s, %d nonzero exits",
              identical ? "byte-identical" : "outputs differ", bad_exit)};
}

Outcome segmentation_sanity() {
  const Rgb8 skin{180, 120, 90};
  const Rgb8 blue{0, 0, 255};
  std::vector<Rgb8> px;
  const std::size_t w = 64, h = 48;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) px.push_back(x < w / 2 ? skin : blue);
  const ImageRgb img(w, h, std::move(px));
  const auto mask = segment_skin(img);
  std::size_t skin_hit = 0, skin_n = 0, blue_hit = 0, blue_n = 0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      if (x < w / 2) {
        ++skin_n;
        skin_hit += mask.at(x, y);
      } else {
        ++blue_n;
        blue_hit += mask.at(x, y);
      }
    }
  const double skin_frac = double(skin_hit) / double(skin_n);
  const double blue_frac = double(blue_hit) / double(blue_n);
  return {skin_frac >= 0.99 && blue_hit == 0,
          fmt("swatch coverage %.4f (>= 0.99), blue coverage %.4f (0)", skin_frac, blue_frac)};
}

}  // namespace

int main() {
  report("colorimetry_oracle", colorimetry_oracle);
  report("ita_hue_formulas", ita_hue_formulas);
  report("threshold_boundaries", boundary_suite);
  report("override_exhaustive", override_exhaustive);
  report("otsu_oracle", otsu_oracle);
  report("fairness_oracle", fairness_oracle);
  report("gap_arithmetic", gap_arithmetic);
  report("dark_anger_recall", dark_anger_recall);
  report("end_to_end_determinism", end_to_end_determinism);
  report("segmentation_sanity", segmentation_sanity);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
