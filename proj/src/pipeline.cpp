#include "toneaudit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <map>
#include <set>
#include <thread>
#include <tuple>

namespace toneaudit {

namespace fs = std::filesystem;

TaxonomySelection parse_taxonomy_selection(std::string_view s) {
  if (s == "ita") return TaxonomySelection::Ita;
  if (s == "hl") return TaxonomySelection::Hl;
  if (s == "both") return TaxonomySelection::Both;
  throw std::invalid_argument("taxonomy must be one of ita, hl, both");
}

ToneRecordOut analyze_image(const ImageRgb& img, const AuditConfig& config,
                            std::string sample_id) {
  ToneRecordOut out;
  out.sample_id = std::move(sample_id);

  if (is_low_color(img, config.low_color).low_color) {
    out.exclusion_reason = kReasonLowColor;
    return out;
  }
  const SkinMask mask = segment_skin(img, config.segmentation);
  const auto mean = mean_skin_rgb(img, mask, config.min_coverage);
  if (!mean) {
    out.exclusion_reason = kReasonInsufficientSkin;
    return out;
  }
  out.mean_rgb = *mean;
  out.lab = rgb_to_lab(*mean);
  out.ita_deg = compute_ita(*out.lab);
  out.hue_deg = compute_hue(*out.lab);
  if (out.ita_deg) out.group_ita = classify_ita(*out.ita_deg, config.ita);
  const HlClassification hl = classify_hl(*mean, config.lightness, config.brown_override);
  out.group_hl = hl.group;
  out.override_fired = hl.override_fired;
  if (out.group_ita == ToneGroup::Undetermined || out.group_hl == ToneGroup::Undetermined) {
    out.exclusion_reason = kReasonAchromatic;
  }
  return out;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  static const std::set<std::string> kExtensions = {".png", ".jpg",  ".jpeg", ".bmp", ".ppm",
                                                    ".pgm", ".pnm", ".tif",  ".tiff", ".webp"};
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw PipelineError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (kExtensions.contains(ext)) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return files;
}

std::vector<ToneRecordOut> run_tones(const fs::path& dir, const AuditConfig& config,
                                     unsigned threads) {
  const auto files = list_images(dir);
  if (files.empty()) throw PipelineError("no images found in " + dir.string());

  std::vector<ToneRecordOut> results(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      const std::string id = files[i].filename().string();
      try {
        results[i] = analyze_image(decode_image(files[i]), config, id);
      } catch (const std::exception&) {
        results[i] = ToneRecordOut{};
        results[i].sample_id = id;
        results[i].exclusion_reason = kReasonDecodeError;
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(files.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  return results;
}

GroupCounts count_groups(const std::vector<ToneRecordOut>& records) {
  GroupCounts c;
  for (const auto& r : records) {
    ++c.ita[static_cast<std::size_t>(r.group_ita)];
    ++c.hl[static_cast<std::size_t>(r.group_hl)];
  }
  return c;
}

AuditReport run_audit(const std::vector<ToneRecordOut>& tones,
                      const std::vector<ManifestRow>& manifest, const AuditConfig& config,
                      TaxonomySelection selection) {
  std::map<std::string, const ToneRecordOut*> by_id;
  for (const auto& t : tones) {
    if (!by_id.emplace(t.sample_id, &t).second) {
      throw PipelineError("duplicate sample_id '" + t.sample_id + "' in tone records");
    }
  }

  AuditReport report;
  report.config = config;
  report.manifest_rows = manifest.size();
  report.tone_rows = tones.size();

  const bool want_ita = selection != TaxonomySelection::Hl;
  const bool want_hl = selection != TaxonomySelection::Ita;
  GroupConfusion ita_conf(config.classes.size());
  GroupConfusion hl_conf(config.classes.size());

  std::size_t misses = 0;
  std::set<std::string> seen;
  std::size_t duplicates = 0;
  for (const auto& row : manifest) {
    if (!seen.insert(row.sample_id).second) ++duplicates;
    const auto it = by_id.find(row.sample_id);
    if (it == by_id.end()) {
      ++misses;
      report.excluded.push_back({row.sample_id, "no_tone_record"});
      continue;
    }
    ++report.joined;
    if (!row.predicted_label) {
      report.excluded.push_back({row.sample_id, "no_prediction"});
      continue;
    }
    const ToneRecordOut& tone = *it->second;
    if (!tone.exclusion_reason.empty()) {
      report.excluded.push_back({row.sample_id, tone.exclusion_reason});
    }
    PredictionRecord rec{row.sample_id, ToneGroup::Undetermined, row.true_label,
                         *row.predicted_label};
    if (want_ita) {
      rec.group = tone.group_ita;
      ita_conf.add(rec);
    }
    if (want_hl) {
      rec.group = tone.group_hl;
      hl_conf.add(rec);
    }
  }

  if (report.joined == 0) {
    throw PipelineError("no manifest row matched a tone record on sample_id");
  }
  if (!manifest.empty() && static_cast<double>(misses) / static_cast<double>(manifest.size()) >
                               config.max_join_miss_fraction) {
    report.warnings.push_back("join: " + std::to_string(misses) + " of " +
                              std::to_string(manifest.size()) +
                              " manifest rows have no tone record");
  }
  if (duplicates > 0) {
    report.warnings.push_back("manifest: " + std::to_string(duplicates) +
                              " rows repeat an earlier sample_id");
  }

  std::sort(report.excluded.begin(), report.excluded.end(), [](const auto& a, const auto& b) {
    return std::tie(a.sample_id, a.reason) < std::tie(b.sample_id, b.reason);
  });
  if (want_ita) {
    report.taxonomies.push_back(
        {"ita", build_fairness_report(ita_conf, config.classes, config.tpr_aggregation)});
  }
  if (want_hl) {
    report.taxonomies.push_back(
        {"hl", build_fairness_report(hl_conf, config.classes, config.tpr_aggregation)});
  }
  // Same order as the keys of the serialized report.
  std::sort(report.taxonomies.begin(), report.taxonomies.end(),
            [](const auto& a, const auto& b) { return a.taxonomy < b.taxonomy; });
  return report;
}

TaxonomyComparison compare_tone_records(const std::vector<ToneRecordOut>& tones) {
  TaxonomyComparison c;
  for (const auto& t : tones) {
    if (t.exclusion_reason == kReasonAchromatic || t.exclusion_reason.empty()) {
      c.add(t.group_ita, t.group_hl);
    }
  }
  c.finalize();
  return c;
}

}  // namespace toneaudit
