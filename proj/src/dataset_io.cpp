#include "toneaudit/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <map>
#include <sstream>
#include <system_error>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>

namespace toneaudit {

using nlohmann::json;
namespace fs = std::filesystem;

// --- CSV -------------------------------------------------------------------

std::vector<CsvRecord> parse_csv(std::istream& in) {
  std::vector<CsvRecord> records;
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  CsvRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A blank line is not a record.
    if (!(current.fields.size() == 1 && current.fields[0].empty())) {
      records.push_back(std::move(current));
    }
    current = CsvRecord{};
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(ch);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        current.line = line;
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes) {
    throw IoError("csv: unterminated quoted field starting on line " +
                  std::to_string(current.line));
  }
  if (field_started || !field.empty() || !current.fields.empty()) end_record();
  return records;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_real4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  std::string s(buf);
  if (s == "-0.0000") s = "0.0000";
  return s;
}

namespace {

std::string join_row(std::initializer_list<std::string> fields) {
  std::string out;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out.push_back(',');
    out += csv_escape(f);
    first = false;
  }
  out.push_back('\n');
  return out;
}

double parse_real(const std::string& s, std::string_view what, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw IoError("line " + std::to_string(line) + ": invalid number '" + s + "' in column " +
                  std::string(what));
  }
  return v;
}

long parse_int(const std::string& s, std::string_view what, std::size_t line) {
  long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw IoError("line " + std::to_string(line) + ": invalid integer '" + s + "' in column " +
                  std::string(what));
  }
  return v;
}

std::map<std::string, std::size_t> column_index(const CsvRecord& header) {
  std::map<std::string, std::size_t> cols;
  for (std::size_t i = 0; i < header.fields.size(); ++i) cols.emplace(header.fields[i], i);
  return cols;
}

}  // namespace

// --- Config ----------------------------------------------------------------

namespace {

using Handler = std::function<void(const json&)>;

void read_object(const json& obj, const std::string& where,
                 std::initializer_list<std::pair<const char*, Handler>> handlers) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const auto& [name, handler] : handlers) {
      if (key == name) {
        try {
          handler(value);
        } catch (const json::exception& e) {
          throw ConfigError(where + "." + key + ": " + e.what());
        }
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

json range_json(double lo, double hi) { return json::array({lo, hi}); }

template <typename T>
void read_range(const json& j, T& lo, T& hi) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a [min, max] pair");
  lo = j.at(0).get<T>();
  hi = j.at(1).get<T>();
}

json config_to_json(const AuditConfig& c) {
  const auto& bo = c.brown_override;
  const auto& seg = c.segmentation;
  return json{
      {"schema_version", kSchemaVersion},
      {"classes", c.classes.names()},
      {"ita_thresholds", {{"light_min_deg", c.ita.light_min_deg}, {"dark_max_deg", c.ita.dark_max_deg}}},
      {"lightness_thresholds", {{"light_min", c.lightness.light_min}, {"dark_max", c.lightness.dark_max}}},
      {"brown_override",
       {{"enabled", bo.enabled},
        {"r_range", json::array({bo.r.lo, bo.r.hi})},
        {"g_range", json::array({bo.g.lo, bo.g.hi})},
        {"b_range", json::array({bo.b.lo, bo.b.hi})},
        {"rg_diff_max", bo.rg_diff_max},
        {"gb_diff_max", bo.gb_diff_max},
        {"hue_range_deg", range_json(bo.hue_min_deg, bo.hue_max_deg)}}},
      {"segmentation",
       {{"ycrcb",
         {{"y_min", seg.ycrcb.y_min},
          {"cr_range", range_json(seg.ycrcb.cr_min, seg.ycrcb.cr_max)},
          {"cb_range", range_json(seg.ycrcb.cb_min, seg.ycrcb.cb_max)}}},
        {"hsv",
         {{"h_range_deg", range_json(seg.hsv.h_min, seg.hsv.h_max)},
          {"s_range", range_json(seg.hsv.s_min, seg.hsv.s_max)},
          {"v_min", seg.hsv.v_min}}},
        {"otsu_min_separation", seg.otsu_min_separation}}},
      {"low_color",
       {{"mean_chroma_min", c.low_color.mean_chroma_min},
        {"pixel_chroma_level", c.low_color.pixel_chroma_level},
        {"colorful_fraction_min", c.low_color.colorful_fraction_min}}},
      {"min_coverage", {{"fraction", c.min_coverage.fraction}, {"min_pixels", c.min_coverage.min_pixels}}},
      {"tpr_aggregation", std::string(to_string(c.tpr_aggregation))},
      {"max_join_miss_fraction", c.max_join_miss_fraction},
  };
}

AuditConfig config_from_json(const json& j) {
  AuditConfig c;
  read_object(j, "config", {
      {"schema_version", [](const json& v) {
         if (v.get<int>() != kSchemaVersion) {
           throw ConfigError("config: unsupported schema_version " + v.dump());
         }
       }},
      {"classes", [&](const json& v) { c.classes = ClassSet(v.get<std::vector<std::string>>()); }},
      {"ita_thresholds", [&](const json& v) {
         read_object(v, "ita_thresholds", {
             {"light_min_deg", [&](const json& x) { c.ita.light_min_deg = x.get<double>(); }},
             {"dark_max_deg", [&](const json& x) { c.ita.dark_max_deg = x.get<double>(); }},
         });
       }},
      {"lightness_thresholds", [&](const json& v) {
         read_object(v, "lightness_thresholds", {
             {"light_min", [&](const json& x) { c.lightness.light_min = x.get<double>(); }},
             {"dark_max", [&](const json& x) { c.lightness.dark_max = x.get<double>(); }},
         });
       }},
      {"brown_override", [&](const json& v) {
         auto& bo = c.brown_override;
         read_object(v, "brown_override", {
             {"enabled", [&](const json& x) { bo.enabled = x.get<bool>(); }},
             {"r_range", [&](const json& x) { read_range(x, bo.r.lo, bo.r.hi); }},
             {"g_range", [&](const json& x) { read_range(x, bo.g.lo, bo.g.hi); }},
             {"b_range", [&](const json& x) { read_range(x, bo.b.lo, bo.b.hi); }},
             {"rg_diff_max", [&](const json& x) { bo.rg_diff_max = x.get<int>(); }},
             {"gb_diff_max", [&](const json& x) { bo.gb_diff_max = x.get<int>(); }},
             {"hue_range_deg", [&](const json& x) { read_range(x, bo.hue_min_deg, bo.hue_max_deg); }},
         });
       }},
      {"segmentation", [&](const json& v) {
         auto& seg = c.segmentation;
         read_object(v, "segmentation", {
             {"ycrcb", [&](const json& x) {
                read_object(x, "segmentation.ycrcb", {
                    {"y_min", [&](const json& y) { seg.ycrcb.y_min = y.get<double>(); }},
                    {"cr_range", [&](const json& y) { read_range(y, seg.ycrcb.cr_min, seg.ycrcb.cr_max); }},
                    {"cb_range", [&](const json& y) { read_range(y, seg.ycrcb.cb_min, seg.ycrcb.cb_max); }},
                });
              }},
             {"hsv", [&](const json& x) {
                read_object(x, "segmentation.hsv", {
                    {"h_range_deg", [&](const json& y) { read_range(y, seg.hsv.h_min, seg.hsv.h_max); }},
                    {"s_range", [&](const json& y) { read_range(y, seg.hsv.s_min, seg.hsv.s_max); }},
                    {"v_min", [&](const json& y) { seg.hsv.v_min = y.get<double>(); }},
                });
              }},
             {"otsu_min_separation", [&](const json& x) { seg.otsu_min_separation = x.get<double>(); }},
         });
       }},
      {"low_color", [&](const json& v) {
         read_object(v, "low_color", {
             {"mean_chroma_min", [&](const json& x) { c.low_color.mean_chroma_min = x.get<double>(); }},
             {"pixel_chroma_level", [&](const json& x) { c.low_color.pixel_chroma_level = x.get<int>(); }},
             {"colorful_fraction_min", [&](const json& x) { c.low_color.colorful_fraction_min = x.get<double>(); }},
         });
       }},
      {"min_coverage", [&](const json& v) {
         read_object(v, "min_coverage", {
             {"fraction", [&](const json& x) { c.min_coverage.fraction = x.get<double>(); }},
             {"min_pixels", [&](const json& x) { c.min_coverage.min_pixels = x.get<std::size_t>(); }},
         });
       }},
      {"tpr_aggregation", [&](const json& v) {
         c.tpr_aggregation = parse_tpr_aggregation(v.get<std::string>());
       }},
      {"max_join_miss_fraction", [&](const json& v) { c.max_join_miss_fraction = v.get<double>(); }},
  });
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

}  // namespace

std::string render_config_json(const AuditConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

AuditConfig parse_config_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

AuditConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  try {
    return parse_config_json(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// --- Manifest --------------------------------------------------------------

std::vector<ManifestRow> parse_manifest(std::istream& in, const ClassSet& classes) {
  const auto records = parse_csv(in);
  if (records.empty()) throw ManifestError("manifest: missing header row");
  const auto cols = column_index(records.front());
  for (const char* required : {"image_path", "true_label"}) {
    if (!cols.contains(required)) {
      throw ManifestError(std::string("manifest: missing required column '") + required + "'");
    }
  }
  const std::size_t width = records.front().fields.size();
  auto optional_col = [&](const char* name) -> std::optional<std::size_t> {
    if (const auto it = cols.find(name); it != cols.end()) return it->second;
    return std::nullopt;
  };
  const std::size_t path_col = cols.at("image_path");
  const std::size_t truth_col = cols.at("true_label");
  const auto pred_col = optional_col("predicted_label");
  const auto id_col = optional_col("sample_id");

  auto label_id = [&](const std::string& label, const char* column, std::size_t line) {
    const auto id = classes.index_of(label);
    if (!id) {
      throw ManifestError("manifest line " + std::to_string(line) + ": unknown label '" + label +
                          "' in column " + column);
    }
    return *id;
  };

  std::vector<ManifestRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.fields.size() != width) {
      throw ManifestError("manifest line " + std::to_string(rec.line) + ": expected " +
                          std::to_string(width) + " fields, found " +
                          std::to_string(rec.fields.size()));
    }
    ManifestRow row;
    row.line = rec.line;
    row.image_path = rec.fields[path_col];
    if (row.image_path.empty()) {
      throw ManifestError("manifest line " + std::to_string(rec.line) + ": empty image_path");
    }
    row.true_label = label_id(rec.fields[truth_col], "true_label", rec.line);
    if (pred_col && !rec.fields[*pred_col].empty()) {
      row.predicted_label = label_id(rec.fields[*pred_col], "predicted_label", rec.line);
    }
    row.sample_id = (id_col && !rec.fields[*id_col].empty()) ? rec.fields[*id_col] : row.image_path;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ManifestRow> load_manifest(const fs::path& path, const ClassSet& classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot open manifest " + path.string());
  try {
    return parse_manifest(in, classes);
  } catch (const IoError& e) {
    throw ManifestError(path.string() + ": " + e.what());
  }
}

// --- Images ----------------------------------------------------------------

ImageRgb decode_image(const fs::path& path) {
  cv::Mat bgr;
  try {
    bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw ImageDecodeError(path.string() + ": " + e.what());
  }
  if (bgr.empty()) throw ImageDecodeError(path.string() + ": unreadable or unsupported image");
  std::vector<Rgb8> pixels;
  pixels.reserve(static_cast<std::size_t>(bgr.rows) * static_cast<std::size_t>(bgr.cols));
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) pixels.push_back({row[x][2], row[x][1], row[x][0]});
  }
  return ImageRgb(static_cast<std::size_t>(bgr.cols), static_cast<std::size_t>(bgr.rows),
                  std::move(pixels));
}

void write_image(const ImageRgb& img, const fs::path& path) {
  cv::Mat bgr(static_cast<int>(img.height()), static_cast<int>(img.width()), CV_8UC3);
  for (std::size_t y = 0; y < img.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(static_cast<int>(y));
    for (std::size_t x = 0; x < img.width(); ++x) {
      const Rgb8 p = img.at(x, y);
      row[x] = cv::Vec3b(p.b, p.g, p.r);
    }
  }
  if (!cv::imwrite(path.string(), bgr)) throw IoError("cannot write image " + path.string());
}

// --- Tone records ----------------------------------------------------------

namespace {

constexpr const char* kToneColumns[] = {
    "schema_version", "sample_id", "mean_r",   "mean_g",    "mean_b",   "l_star",         "a_star",
    "b_star",         "ita_deg",   "hue_deg",  "group_ita", "group_hl", "override_fired", "exclusion_reason"};

std::string opt_real(const std::optional<double>& v) { return v ? format_real4(*v) : std::string(); }

}  // namespace

std::string render_tone_csv(const std::vector<ToneRecordOut>& records) {
  std::string out;
  for (std::size_t i = 0; i < std::size(kToneColumns); ++i) {
    if (i) out.push_back(',');
    out += kToneColumns[i];
  }
  out.push_back('\n');
  for (const auto& r : records) {
    auto channel = [&](std::uint8_t Rgb8::*m) {
      return r.mean_rgb ? std::to_string(static_cast<int>((*r.mean_rgb).*m)) : std::string();
    };
    auto lab = [&](double LabColor::*m) {
      return r.lab ? format_real4((*r.lab).*m) : std::string();
    };
    out += join_row({std::to_string(kSchemaVersion), r.sample_id, channel(&Rgb8::r),
                     channel(&Rgb8::g), channel(&Rgb8::b), lab(&LabColor::l_star),
                     lab(&LabColor::a_star), lab(&LabColor::b_star), opt_real(r.ita_deg),
                     opt_real(r.hue_deg), std::string(to_string(r.group_ita)),
                     std::string(to_string(r.group_hl)), r.override_fired ? "1" : "0",
                     r.exclusion_reason});
  }
  return out;
}

std::vector<ToneRecordOut> parse_tone_csv(std::istream& in) {
  const auto records = parse_csv(in);
  if (records.empty()) throw IoError("tone csv: missing header row");
  const auto cols = column_index(records.front());
  for (const char* name : kToneColumns) {
    if (!cols.contains(name)) {
      throw IoError(std::string("tone csv: missing required column '") + name + "'");
    }
  }
  std::vector<ToneRecordOut> out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.fields.size() != records.front().fields.size()) {
      throw IoError("tone csv line " + std::to_string(rec.line) + ": wrong field count");
    }
    auto field = [&](const char* name) -> const std::string& { return rec.fields[cols.at(name)]; };
    if (parse_int(field("schema_version"), "schema_version", rec.line) != kSchemaVersion) {
      throw IoError("tone csv line " + std::to_string(rec.line) + ": unsupported schema_version");
    }
    ToneRecordOut r;
    r.sample_id = field("sample_id");
    if (!field("mean_r").empty()) {
      auto ch = [&](const char* name) {
        const long v = parse_int(field(name), name, rec.line);
        if (v < 0 || v > 255) {
          throw IoError("tone csv line " + std::to_string(rec.line) + ": channel out of range");
        }
        return static_cast<std::uint8_t>(v);
      };
      r.mean_rgb = Rgb8{ch("mean_r"), ch("mean_g"), ch("mean_b")};
    }
    if (!field("l_star").empty()) {
      r.lab = LabColor{parse_real(field("l_star"), "l_star", rec.line),
                       parse_real(field("a_star"), "a_star", rec.line),
                       parse_real(field("b_star"), "b_star", rec.line)};
    }
    if (!field("ita_deg").empty()) r.ita_deg = parse_real(field("ita_deg"), "ita_deg", rec.line);
    if (!field("hue_deg").empty()) r.hue_deg = parse_real(field("hue_deg"), "hue_deg", rec.line);
    try {
      r.group_ita = parse_tone_group(field("group_ita"));
      r.group_hl = parse_tone_group(field("group_hl"));
    } catch (const std::invalid_argument& e) {
      throw IoError("tone csv line " + std::to_string(rec.line) + ": " + e.what());
    }
    r.override_fired = field("override_fired") == "1";
    r.exclusion_reason = field("exclusion_reason");
    out.push_back(std::move(r));
  }
  return out;
}

void write_tone_csv(const std::vector<ToneRecordOut>& records, const fs::path& path) {
  write_file_atomically(path, render_tone_csv(records));
}

std::vector<ToneRecordOut> read_tone_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tone csv " + path.string());
  return parse_tone_csv(in);
}

// --- Reports ---------------------------------------------------------------

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json opt_vec_json(const std::vector<std::optional<double>>& v) {
  json arr = json::array();
  for (const auto& x : v) arr.push_back(opt_json(x));
  return arr;
}

json gap_json(const std::optional<Gap>& g) {
  if (!g) return nullptr;
  return {{"value", g->value},
          {"best", std::string(to_string(g->best))},
          {"worst", std::string(to_string(g->worst))}};
}

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::vector<std::optional<double>> opt_vec_from(const json& j) {
  std::vector<std::optional<double>> out;
  for (const auto& x : j) out.push_back(opt_from(x));
  return out;
}

std::optional<Gap> gap_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Gap{j.at("value").get<double>(), parse_tone_group(j.at("best").get<std::string>()),
             parse_tone_group(j.at("worst").get<std::string>())};
}

json fairness_json(const FairnessReport& r) {
  json groups = json::object();
  json eod_recall = json::object();
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& m = r.groups[i];
    const std::string name(to_string(kToneGroups[i]));
    groups[name] = {{"precision", opt_vec_json(m.precision)},
                    {"recall", opt_vec_json(m.recall)},
                    {"f1", opt_vec_json(m.f1)},
                    {"support", m.support},
                    {"total", m.total},
                    {"correct", m.correct},
                    {"accuracy", opt_json(m.accuracy)},
                    {"macro_f1", opt_json(m.macro_f1)},
                    {"tpr", opt_json(m.tpr)}};
    eod_recall[name] = opt_vec_json(r.eod.recall[i]);
  }
  json undefined = json::array();
  for (const auto& u : r.undefined_cells) {
    undefined.push_back({{"group", std::string(to_string(u.group))},
                         {"class", r.classes.at(u.class_id)},
                         {"metric", u.metric}});
  }
  return {{"classes", r.classes},
          {"tpr_aggregation", std::string(to_string(r.tpr_aggregation))},
          {"groups", groups},
          {"f1_gap", gap_json(r.f1_gap)},
          {"accuracy_equality", gap_json(r.accuracy_equality)},
          {"tpr_disparity", gap_json(r.tpr_disparity)},
          {"eod", {{"recall", eod_recall}, {"disparity", opt_vec_json(r.eod.disparity)}}},
          {"undefined_cells", undefined},
          {"excluded_undetermined", r.excluded_undetermined}};
}

FairnessReport fairness_from(const json& j) {
  FairnessReport r;
  r.classes = j.at("classes").get<std::vector<std::string>>();
  r.tpr_aggregation = parse_tpr_aggregation(j.at("tpr_aggregation").get<std::string>());
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string name(to_string(kToneGroups[i]));
    const json& g = j.at("groups").at(name);
    auto& m = r.groups[i];
    m.precision = opt_vec_from(g.at("precision"));
    m.recall = opt_vec_from(g.at("recall"));
    m.f1 = opt_vec_from(g.at("f1"));
    m.support = g.at("support").get<std::vector<std::size_t>>();
    m.total = g.at("total").get<std::size_t>();
    m.correct = g.at("correct").get<std::size_t>();
    m.accuracy = opt_from(g.at("accuracy"));
    m.macro_f1 = opt_from(g.at("macro_f1"));
    m.tpr = opt_from(g.at("tpr"));
    r.eod.recall[i] = opt_vec_from(j.at("eod").at("recall").at(name));
  }
  r.eod.disparity = opt_vec_from(j.at("eod").at("disparity"));
  r.f1_gap = gap_from(j.at("f1_gap"));
  r.accuracy_equality = gap_from(j.at("accuracy_equality"));
  r.tpr_disparity = gap_from(j.at("tpr_disparity"));
  for (const auto& u : j.at("undefined_cells")) {
    const auto cls = u.at("class").get<std::string>();
    const auto it = std::find(r.classes.begin(), r.classes.end(), cls);
    if (it == r.classes.end()) throw IoError("report: unknown class '" + cls + "'");
    r.undefined_cells.push_back({parse_tone_group(u.at("group").get<std::string>()),
                                 static_cast<std::size_t>(it - r.classes.begin()),
                                 u.at("metric").get<std::string>()});
  }
  r.excluded_undetermined = j.at("excluded_undetermined").get<std::size_t>();
  return r;
}

}  // namespace

std::string render_report_json(const AuditReport& report) {
  json taxonomies = json::object();
  for (const auto& t : report.taxonomies) taxonomies[t.taxonomy] = fairness_json(t.metrics);
  json excluded = json::array();
  for (const auto& e : report.excluded) {
    excluded.push_back({{"sample_id", e.sample_id}, {"reason", e.reason}});
  }
  const json doc = {{"schema_version", kSchemaVersion},
                    {"config", config_to_json(report.config)},
                    {"taxonomies", taxonomies},
                    {"excluded", excluded},
                    {"warnings", report.warnings},
                    {"join", {{"manifest_rows", report.manifest_rows},
                              {"tone_rows", report.tone_rows},
                              {"joined", report.joined}}}};
  return doc.dump(2) + "\n";
}

AuditReport parse_report_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("schema_version").get<int>() != kSchemaVersion) {
      throw IoError("report: unsupported schema_version");
    }
    AuditReport r;
    r.config = config_from_json(doc.at("config"));
    for (const auto& [name, body] : doc.at("taxonomies").items()) {
      r.taxonomies.push_back({name, fairness_from(body)});
    }
    for (const auto& e : doc.at("excluded")) {
      r.excluded.push_back({e.at("sample_id").get<std::string>(), e.at("reason").get<std::string>()});
    }
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    r.manifest_rows = doc.at("join").at("manifest_rows").get<std::size_t>();
    r.tone_rows = doc.at("join").at("tone_rows").get<std::size_t>();
    r.joined = doc.at("join").at("joined").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    throw IoError(std::string("report: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("report: ") + e.what());
  }
}

void write_report_json(const AuditReport& report, const fs::path& path) {
  write_file_atomically(path, render_report_json(report));
}

AuditReport read_report_json(const fs::path& path) {
  return parse_report_json(read_file(path));
}

std::string render_heatmap_csv(const AuditReport& report) {
  std::string out = "schema_version,taxonomy,group,emotion,recall\n";
  for (const auto& t : report.taxonomies) {
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& recalls = t.metrics.eod.recall[i];
      for (std::size_t c = 0; c < recalls.size(); ++c) {
        out += join_row({std::to_string(kSchemaVersion), t.taxonomy,
                         std::string(to_string(kToneGroups[i])), t.metrics.classes[c],
                         opt_real(recalls[c])});
      }
    }
  }
  return out;
}

void emit_heatmap_data(const AuditReport& report, const fs::path& path) {
  write_file_atomically(path, render_heatmap_csv(report));
}

std::string render_gaps_csv(const AuditReport& report) {
  std::string out = "schema_version,taxonomy,metric,value,best_group,worst_group\n";
  for (const auto& t : report.taxonomies) {
    const std::pair<const char*, const std::optional<Gap>*> gaps[] = {
        {"f1_gap", &t.metrics.f1_gap},
        {"accuracy_equality", &t.metrics.accuracy_equality},
        {"tpr_disparity", &t.metrics.tpr_disparity}};
    for (const auto& [name, gap] : gaps) {
      if (*gap) {
        out += join_row({std::to_string(kSchemaVersion), t.taxonomy, name,
                         format_real4((*gap)->value), std::string(to_string((*gap)->best)),
                         std::string(to_string((*gap)->worst))});
      } else {
        out += join_row({std::to_string(kSchemaVersion), t.taxonomy, name, "", "", ""});
      }
    }
  }
  return out;
}

std::string render_comparison_json(const TaxonomyComparison& comparison) {
  json table = json::object();
  constexpr ToneGroup all[] = {ToneGroup::Light, ToneGroup::Medium, ToneGroup::Dark,
                               ToneGroup::Undetermined};
  for (ToneGroup ita : all) {
    json row = json::object();
    for (ToneGroup hl : all) {
      row[std::string(to_string(hl))] =
          comparison.counts[static_cast<std::size_t>(ita)][static_cast<std::size_t>(hl)];
    }
    table[std::string(to_string(ita))] = row;
  }
  const json doc = {{"schema_version", kSchemaVersion},
                    {"rows", "ita"},
                    {"columns", "hl"},
                    {"counts", table},
                    {"total", comparison.total},
                    {"agreement_rate", opt_json(comparison.agreement_rate)}};
  return doc.dump(2) + "\n";
}

void write_file_atomically(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace toneaudit
