#include "toneaudit/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "toneaudit/dataset_io.hpp"
#include "toneaudit/pipeline.hpp"

namespace toneaudit {
namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "1.0.0";

struct CommonOptions {
  std::string config_path;
  std::string out;
  unsigned threads = 1;
  std::string taxonomy = "both";
  bool strict = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

AuditConfig resolve_config(const CommonOptions& opts) {
  std::string path = opts.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("TONEAUDIT_CONFIG"); env && *env) path = env;
  }
  if (path.empty()) return AuditConfig{};
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  return load_config(path);
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

// Run metadata lives beside the data files so the data files stay
// reproducible byte for byte.
void write_sidecar(const fs::path& path, const std::string& command, const CommonOptions& opts) {
  const nlohmann::json doc = {{"tool", "toneaudit"},
                              {"version", kVersion},
                              {"command", command},
                              {"threads", opts.threads},
                              {"taxonomy", opts.taxonomy},
                              {"finished_utc", utc_now()}};
  write_file_atomically(path, doc.dump(2) + "\n");
}

fs::path sidecar_for(const fs::path& out) {
  fs::path p = out;
  p += ".run.json";
  return p;
}

/// Tracks written outputs and removes them unless committed.
class OutputSet {
 public:
  void write(const fs::path& path, std::string_view content) {
    write_file_atomically(path, content);
    written_.push_back(path);
  }
  void commit() { committed_ = true; }
  ~OutputSet() {
    if (committed_) return;
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

 private:
  std::vector<fs::path> written_;
  bool committed_ = false;
};

void print_counts(std::ostream& out, const char* label, const std::array<std::size_t, 4>& c) {
  out << label << ": Light=" << c[0] << " Medium=" << c[1] << " Dark=" << c[2]
      << " Undetermined=" << c[3] << "\n";
}

int cmd_tones(const std::string& image_dir, const CommonOptions& opts, std::ostream& out) {
  const auto selection = parse_taxonomy_selection(opts.taxonomy);
  const AuditConfig config = resolve_config(opts);
  const auto records = run_tones(image_dir, config, opts.threads);

  OutputSet outputs;
  outputs.write(opts.out, render_tone_csv(records));
  write_sidecar(sidecar_for(opts.out), "tones", opts);
  outputs.commit();

  std::size_t excluded = 0;
  for (const auto& r : records) excluded += r.exclusion_reason.empty() ? 0 : 1;
  const GroupCounts counts = count_groups(records);
  out << "images: " << records.size() << " (excluded " << excluded << ")\n";
  if (selection != TaxonomySelection::Hl) print_counts(out, "ita", counts.ita);
  if (selection != TaxonomySelection::Ita) print_counts(out, "hl", counts.hl);
  return kExitOk;
}

int cmd_audit(const std::string& tone_csv, const std::string& manifest_path,
              const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  const auto selection = parse_taxonomy_selection(opts.taxonomy);
  const AuditConfig config = resolve_config(opts);
  const auto tones = read_tone_csv(tone_csv);
  const auto manifest = load_manifest(manifest_path, config.classes);
  const AuditReport report = run_audit(tones, manifest, config, selection);

  for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  if (opts.strict && !report.warnings.empty()) {
    err << "error: warnings present and --strict is set\n";
    return kExitFailure;
  }

  OutputSet outputs;
  outputs.write(opts.out, render_report_json(report));
  write_sidecar(sidecar_for(opts.out), "audit", opts);
  outputs.commit();

  out << "joined " << report.joined << " of " << report.manifest_rows << " manifest rows\n";
  for (const auto& t : report.taxonomies) {
    out << t.taxonomy << ": f1_gap="
        << (t.metrics.f1_gap ? format_real4(t.metrics.f1_gap->value) : "undefined")
        << " accuracy_equality="
        << (t.metrics.accuracy_equality ? format_real4(t.metrics.accuracy_equality->value)
                                        : "undefined")
        << " tpr_disparity="
        << (t.metrics.tpr_disparity ? format_real4(t.metrics.tpr_disparity->value) : "undefined")
        << "\n";
  }
  return kExitOk;
}

int cmd_compare(const std::string& tone_csv, const CommonOptions& opts, std::ostream& out) {
  const auto tones = read_tone_csv(tone_csv);
  const TaxonomyComparison cmp = compare_tone_records(tones);

  OutputSet outputs;
  outputs.write(opts.out, render_comparison_json(cmp));
  write_sidecar(sidecar_for(opts.out), "compare", opts);
  outputs.commit();

  out << std::left << std::setw(14) << "ita \\ hl";
  for (std::size_t j = 0; j < 4; ++j) {
    out << std::setw(14) << to_string(static_cast<ToneGroup>(j));
  }
  out << "\n";
  for (std::size_t i = 0; i < 4; ++i) {
    out << std::setw(14) << to_string(static_cast<ToneGroup>(i));
    for (std::size_t j = 0; j < 4; ++j) out << std::setw(14) << cmp.counts[i][j];
    out << "\n";
  }
  out << "agreement_rate: "
      << (cmp.agreement_rate ? format_real4(*cmp.agreement_rate) : "undetermined") << "\n";
  return kExitOk;
}

int cmd_report(const std::string& report_json, const CommonOptions& opts, std::ostream& out) {
  const AuditReport report = read_report_json(report_json);
  const fs::path dir = opts.out;
  fs::create_directories(dir);

  OutputSet outputs;
  outputs.write(dir / "heatmap.csv", render_heatmap_csv(report));
  outputs.write(dir / "gaps.csv", render_gaps_csv(report));
  write_sidecar(dir / "run.json", "report", opts);
  outputs.commit();

  out << "wrote " << (dir / "heatmap.csv").string() << " and " << (dir / "gaps.csv").string()
      << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Skin tone stratification and group fairness auditing", "toneaudit"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kVersion);

  CommonOptions opts;
  auto add_common = [&](CLI::App* sub, const char* out_help) {
    sub->add_option("--config", opts.config_path,
                    "Audit config (JSON); falls back to $TONEAUDIT_CONFIG, then defaults");
    sub->add_option("--out", opts.out, out_help)->required();
    sub->add_option("--threads", opts.threads, "Worker threads for per-image work")
        ->check(CLI::Range(1u, 1024u));
    sub->add_option("--taxonomy", opts.taxonomy, "ita, hl or both")
        ->check(CLI::IsMember({"ita", "hl", "both"}));
    sub->add_flag("--strict", opts.strict, "Treat warnings as errors");
  };

  std::string image_dir, tone_csv, manifest, report_json;
  auto* tones = app.add_subcommand("tones", "Estimate skin tone groups for a directory of face crops");
  tones->add_option("image_dir", image_dir, "Directory of cropped face images")->required();
  add_common(tones, "Tone CSV to write");

  auto* audit = app.add_subcommand("audit", "Fairness report from tone CSV and prediction manifest");
  audit->add_option("tone_csv", tone_csv, "Tone CSV from `tones`")->required();
  audit->add_option("manifest", manifest, "Manifest CSV with labels and predictions")->required();
  add_common(audit, "Report JSON to write");

  auto* compare = app.add_subcommand("compare", "Contingency table of ITA vs Hue-Lightness groups");
  compare->add_option("tone_csv", tone_csv, "Tone CSV from `tones`")->required();
  add_common(compare, "Comparison JSON to write");

  auto* report = app.add_subcommand("report", "Plot-ready CSVs from a report JSON");
  report->add_option("report_json", report_json, "Report JSON from `audit`")->required();
  add_common(report, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (tones->parsed()) return cmd_tones(image_dir, opts, out);
    if (audit->parsed()) return cmd_audit(tone_csv, manifest, opts, out, err);
    if (compare->parsed()) return cmd_compare(tone_csv, opts, out);
    if (report->parsed()) return cmd_report(report_json, opts, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace toneaudit
