#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toneaudit/stratification.hpp"

namespace toneaudit {

/// Ordered set of class labels. Class ids are positions in `names`.
class ClassSet {
 public:
  ClassSet();  // the eight AffectNet expression categories
  explicit ClassSet(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t id) const { return names_.at(id); }
  std::optional<std::size_t> index_of(std::string_view label) const;

 private:
  std::vector<std::string> names_;
};

struct PredictionRecord {
  std::string sample_id;
  ToneGroup group = ToneGroup::Undetermined;
  std::size_t true_label = 0;
  std::size_t predicted_label = 0;
};

/// Per-group confusion matrices over Light/Medium/Dark. Records with an
/// Undetermined group are only counted in excluded().
class GroupConfusion {
 public:
  explicit GroupConfusion(std::size_t num_classes);

  /// Throws std::out_of_range when a label is not a valid class id.
  void add(const PredictionRecord& r);
  /// Throws std::invalid_argument when class counts differ.
  void merge(const GroupConfusion& other);

  std::size_t num_classes() const { return num_classes_; }
  std::size_t cell(ToneGroup g, std::size_t truth, std::size_t predicted) const;
  std::size_t tp(ToneGroup g, std::size_t c) const;
  std::size_t fp(ToneGroup g, std::size_t c) const;
  std::size_t fn(ToneGroup g, std::size_t c) const;
  std::size_t support(ToneGroup g, std::size_t c) const;
  std::size_t total(ToneGroup g) const;
  std::size_t correct(ToneGroup g) const;
  std::size_t excluded() const { return excluded_; }

  friend bool operator==(const GroupConfusion&, const GroupConfusion&) = default;

 private:
  std::size_t index(std::size_t g, std::size_t truth, std::size_t predicted) const {
    return (g * num_classes_ + truth) * num_classes_ + predicted;
  }

  std::size_t num_classes_;
  std::vector<std::size_t> cells_;
  std::size_t excluded_ = 0;
};

GroupConfusion tally(std::span<const PredictionRecord> records, std::size_t num_classes);

/// TP / support; empty when the class has no support in the group.
std::optional<double> recall(ToneGroup g, std::size_t c, const GroupConfusion& conf);

struct PrecisionF1 {
  std::optional<double> precision;  // TP / (TP + FP)
  std::optional<double> f1;         // 2TP / (2TP + FP + FN)
};
PrecisionF1 precision_f1(ToneGroup g, std::size_t c, const GroupConfusion& conf);

/// Unweighted mean F1 over classes with nonzero support in the group.
std::optional<double> group_macro_f1(ToneGroup g, const GroupConfusion& conf);
std::optional<double> group_accuracy(ToneGroup g, const GroupConfusion& conf);

enum class TprAggregation { Macro, Micro };
std::string_view to_string(TprAggregation a);
TprAggregation parse_tpr_aggregation(std::string_view s);

/// Macro: mean of defined class recalls. Micro: pooled TP over pooled support.
std::optional<double> group_tpr(ToneGroup g, const GroupConfusion& conf,
                                TprAggregation aggregation = TprAggregation::Macro);

/// max - min over groups, with the groups that attain them.
struct Gap {
  double value = 0.0;
  ToneGroup best = ToneGroup::Undetermined;
  ToneGroup worst = ToneGroup::Undetermined;
};

using PerGroup = std::array<std::optional<double>, 3>;

/// Range over the defined entries; empty when fewer than `min_defined` exist.
/// Ties for best/worst resolve to the earlier group (Light, Medium, Dark).
std::optional<Gap> group_range(const PerGroup& values, std::size_t min_defined = 2);

std::optional<Gap> f1_gap(const GroupConfusion& conf);
std::optional<Gap> accuracy_equality(const GroupConfusion& conf);
std::optional<Gap> tpr_disparity(const GroupConfusion& conf,
                                 TprAggregation aggregation = TprAggregation::Macro);

struct EodMatrix {
  /// recall[group][class]
  std::array<std::vector<std::optional<double>>, 3> recall;
  /// Per-class max - min over groups with defined recall.
  std::vector<std::optional<double>> disparity;
};
EodMatrix eod_matrix(const GroupConfusion& conf);

struct UndefinedCell {
  ToneGroup group;
  std::size_t class_id;
  std::string metric;  // "precision", "recall" or "f1"
};

struct GroupMetrics {
  std::vector<std::optional<double>> precision;
  std::vector<std::optional<double>> recall;
  std::vector<std::optional<double>> f1;
  std::vector<std::size_t> support;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::optional<double> accuracy;
  std::optional<double> macro_f1;
  std::optional<double> tpr;
};

struct FairnessReport {
  std::vector<std::string> classes;
  TprAggregation tpr_aggregation = TprAggregation::Macro;
  std::array<GroupMetrics, 3> groups;
  std::optional<Gap> f1_gap;
  std::optional<Gap> accuracy_equality;
  std::optional<Gap> tpr_disparity;
  EodMatrix eod;
  std::vector<UndefinedCell> undefined_cells;
  std::size_t excluded_undetermined = 0;
};

FairnessReport build_fairness_report(const GroupConfusion& conf, const ClassSet& classes,
                                     TprAggregation aggregation = TprAggregation::Macro);

}  // namespace toneaudit
