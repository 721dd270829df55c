#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "toneaudit/config.hpp"
#include "toneaudit/dataset_io.hpp"

namespace toneaudit {

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TaxonomySelection { Ita, Hl, Both };
TaxonomySelection parse_taxonomy_selection(std::string_view s);

// Exclusion reasons written to the tone CSV and the report ledger.
inline constexpr std::string_view kReasonDecodeError = "decode_error";
inline constexpr std::string_view kReasonLowColor = "low_color";
inline constexpr std::string_view kReasonInsufficientSkin = "insufficient_skin";
inline constexpr std::string_view kReasonAchromatic = "achromatic";

/// Low-color filter, segmentation, mean skin color and both taxonomies.
ToneRecordOut analyze_image(const ImageRgb& img, const AuditConfig& config,
                            std::string sample_id);

/// Image files directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Analyzes every image in `dir` on `threads` workers. Output order follows
/// list_images regardless of thread count. sample_id is the file name.
/// Throws PipelineError when the directory holds no images.
std::vector<ToneRecordOut> run_tones(const std::filesystem::path& dir, const AuditConfig& config,
                                     unsigned threads);

struct GroupCounts {
  std::array<std::size_t, 4> ita{};
  std::array<std::size_t, 4> hl{};
};
GroupCounts count_groups(const std::vector<ToneRecordOut>& records);

/// Joins tone records with manifest predictions on sample_id and computes the
/// fairness report for the selected taxonomies. Throws PipelineError when no
/// manifest row joins.
AuditReport run_audit(const std::vector<ToneRecordOut>& tones,
                      const std::vector<ManifestRow>& manifest, const AuditConfig& config,
                      TaxonomySelection selection = TaxonomySelection::Both);

TaxonomyComparison compare_tone_records(const std::vector<ToneRecordOut>& tones);

}  // namespace toneaudit
