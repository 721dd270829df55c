#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "toneaudit/colorimetry.hpp"
#include "toneaudit/config.hpp"
#include "toneaudit/fairness_metrics.hpp"
#include "toneaudit/skin_extraction.hpp"
#include "toneaudit/stratification.hpp"

namespace toneaudit {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public IoError {
 public:
  using IoError::IoError;
};

class ManifestError : public IoError {
 public:
  using IoError::IoError;
};

class ImageDecodeError : public IoError {
 public:
  using IoError::IoError;
};

// --- CSV -------------------------------------------------------------------

struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields, doubled quotes, embedded line breaks, CRLF.
/// Throws IoError on an unterminated quote.
std::vector<CsvRecord> parse_csv(std::istream& in);

/// Quotes the field when it holds a comma, quote or line break.
std::string csv_escape(std::string_view field);

/// Fixed 4-decimal rendering; never emits "-0.0000".
std::string format_real4(double v);

// --- Config ----------------------------------------------------------------

std::string render_config_json(const AuditConfig& config);
/// Keys absent from the document keep their defaults; unknown keys are errors.
AuditConfig parse_config_json(std::string_view text);
/// Throws ConfigError (message includes the path) when the file is missing
/// or invalid.
AuditConfig load_config(const std::filesystem::path& path);

// --- Manifest --------------------------------------------------------------

struct ManifestRow {
  std::string image_path;
  std::size_t true_label = 0;
  std::optional<std::size_t> predicted_label;
  std::string sample_id;  // defaults to image_path
  std::size_t line = 0;
};

/// Columns: image_path, true_label (required); predicted_label, sample_id
/// (optional). Throws ManifestError naming the missing column, or the line
/// number of a malformed row.
std::vector<ManifestRow> parse_manifest(std::istream& in, const ClassSet& classes);
std::vector<ManifestRow> load_manifest(const std::filesystem::path& path,
                                       const ClassSet& classes);

// --- Images ----------------------------------------------------------------

/// 8-bit RGB; grayscale expands to r = g = b and alpha is dropped.
ImageRgb decode_image(const std::filesystem::path& path);
void write_image(const ImageRgb& img, const std::filesystem::path& path);

// --- Tone records ----------------------------------------------------------

struct ToneRecordOut {
  std::string sample_id;
  std::optional<Rgb8> mean_rgb;
  std::optional<LabColor> lab;
  std::optional<double> ita_deg;
  std::optional<double> hue_deg;
  ToneGroup group_ita = ToneGroup::Undetermined;
  ToneGroup group_hl = ToneGroup::Undetermined;
  bool override_fired = false;
  std::string exclusion_reason;  // empty when classified
};

std::string render_tone_csv(const std::vector<ToneRecordOut>& records);
std::vector<ToneRecordOut> parse_tone_csv(std::istream& in);
void write_tone_csv(const std::vector<ToneRecordOut>& records, const std::filesystem::path& path);
std::vector<ToneRecordOut> read_tone_csv(const std::filesystem::path& path);

// --- Reports ---------------------------------------------------------------

struct Exclusion {
  std::string sample_id;
  std::string reason;

  friend bool operator==(const Exclusion&, const Exclusion&) = default;
};

struct TaxonomyReport {
  std::string taxonomy;  // "ita" or "hl"
  FairnessReport metrics;
};

struct AuditReport {
  AuditConfig config;
  std::vector<TaxonomyReport> taxonomies;
  std::vector<Exclusion> excluded;
  std::vector<std::string> warnings;
  std::size_t manifest_rows = 0;
  std::size_t tone_rows = 0;
  std::size_t joined = 0;
};

std::string render_report_json(const AuditReport& report);
AuditReport parse_report_json(std::string_view text);
void write_report_json(const AuditReport& report, const std::filesystem::path& path);
AuditReport read_report_json(const std::filesystem::path& path);

/// Long-form recall table: taxonomy, group, emotion, recall.
std::string render_heatmap_csv(const AuditReport& report);
void emit_heatmap_data(const AuditReport& report, const std::filesystem::path& path);

/// f1_gap, accuracy_equality and tpr_disparity per taxonomy.
std::string render_gaps_csv(const AuditReport& report);

std::string render_comparison_json(const TaxonomyComparison& comparison);

/// Writes to a sibling temporary file and renames it into place, so a failed
/// write never leaves a partial file at `path`.
void write_file_atomically(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace toneaudit
