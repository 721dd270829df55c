#include "toneaudit/fairness_metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace toneaudit {
namespace {

std::size_t group_index(ToneGroup g) {
  if (g == ToneGroup::Undetermined) throw std::invalid_argument("no metrics for Undetermined");
  return static_cast<std::size_t>(g);
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ClassSet::ClassSet()
    : ClassSet({"neutral", "happy", "sad", "surprise", "fear", "disgust", "anger", "contempt"}) {}

ClassSet::ClassSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw std::invalid_argument("class set must not be empty");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw std::invalid_argument("class names must not be empty");
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[i] == names_[j]) {
        throw std::invalid_argument("duplicate class name '" + names_[i] + "'");
      }
    }
  }
}

std::optional<std::size_t> ClassSet::index_of(std::string_view label) const {
  const auto it = std::find(names_.begin(), names_.end(), label);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

GroupConfusion::GroupConfusion(std::size_t num_classes)
    : num_classes_(num_classes), cells_(3 * num_classes * num_classes, 0) {
  if (num_classes == 0) throw std::invalid_argument("GroupConfusion needs at least one class");
}

void GroupConfusion::add(const PredictionRecord& r) {
  if (r.true_label >= num_classes_ || r.predicted_label >= num_classes_) {
    throw std::out_of_range("label out of range for sample '" + r.sample_id + "'");
  }
  if (r.group == ToneGroup::Undetermined) {
    ++excluded_;
    return;
  }
  ++cells_[index(static_cast<std::size_t>(r.group), r.true_label, r.predicted_label)];
}

void GroupConfusion::merge(const GroupConfusion& other) {
  if (other.num_classes_ != num_classes_) {
    throw std::invalid_argument("cannot merge confusions with different class counts");
  }
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
  excluded_ += other.excluded_;
}

std::size_t GroupConfusion::cell(ToneGroup g, std::size_t truth, std::size_t predicted) const {
  return cells_.at(index(group_index(g), truth, predicted));
}

std::size_t GroupConfusion::tp(ToneGroup g, std::size_t c) const { return cell(g, c, c); }

std::size_t GroupConfusion::fp(ToneGroup g, std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t t = 0; t < num_classes_; ++t) {
    if (t != c) n += cell(g, t, c);
  }
  return n;
}

std::size_t GroupConfusion::fn(ToneGroup g, std::size_t c) const {
  return support(g, c) - tp(g, c);
}

std::size_t GroupConfusion::support(ToneGroup g, std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t p = 0; p < num_classes_; ++p) n += cell(g, c, p);
  return n;
}

std::size_t GroupConfusion::total(ToneGroup g) const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < num_classes_; ++c) n += support(g, c);
  return n;
}

std::size_t GroupConfusion::correct(ToneGroup g) const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < num_classes_; ++c) n += tp(g, c);
  return n;
}

GroupConfusion tally(std::span<const PredictionRecord> records, std::size_t num_classes) {
  GroupConfusion conf(num_classes);
  for (const auto& r : records) conf.add(r);
  return conf;
}

std::optional<double> recall(ToneGroup g, std::size_t c, const GroupConfusion& conf) {
  return ratio(conf.tp(g, c), conf.support(g, c));
}

PrecisionF1 precision_f1(ToneGroup g, std::size_t c, const GroupConfusion& conf) {
  const std::size_t tp = conf.tp(g, c);
  const std::size_t fp = conf.fp(g, c);
  const std::size_t fn = conf.fn(g, c);
  return {ratio(tp, tp + fp), ratio(2 * tp, 2 * tp + fp + fn)};
}

std::optional<double> group_macro_f1(ToneGroup g, const GroupConfusion& conf) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < conf.num_classes(); ++c) {
    if (conf.support(g, c) == 0) continue;
    sum += *precision_f1(g, c, conf).f1;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> group_accuracy(ToneGroup g, const GroupConfusion& conf) {
  return ratio(conf.correct(g), conf.total(g));
}

std::string_view to_string(TprAggregation a) {
  return a == TprAggregation::Macro ? "macro" : "micro";
}

TprAggregation parse_tpr_aggregation(std::string_view s) {
  if (s == "macro") return TprAggregation::Macro;
  if (s == "micro") return TprAggregation::Micro;
  throw std::invalid_argument("tpr_aggregation must be 'macro' or 'micro'");
}

std::optional<double> group_tpr(ToneGroup g, const GroupConfusion& conf,
                                TprAggregation aggregation) {
  if (aggregation == TprAggregation::Micro) return group_accuracy(g, conf);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < conf.num_classes(); ++c) {
    if (const auto r = recall(g, c, conf)) {
      sum += *r;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<Gap> group_range(const PerGroup& values, std::size_t min_defined) {
  std::size_t defined = 0;
  Gap gap;
  double hi = 0.0, lo = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) continue;
    const double v = *values[i];
    if (defined == 0 || v > hi) {
      hi = v;
      gap.best = kToneGroups[i];
    }
    if (defined == 0 || v < lo) {
      lo = v;
      gap.worst = kToneGroups[i];
    }
    ++defined;
  }
  if (defined == 0 || defined < min_defined) return std::nullopt;
  gap.value = hi - lo;
  return gap;
}

namespace {

template <typename F>
PerGroup per_group(F f) {
  PerGroup out;
  for (std::size_t i = 0; i < 3; ++i) out[i] = f(kToneGroups[i]);
  return out;
}

}  // namespace

std::optional<Gap> f1_gap(const GroupConfusion& conf) {
  return group_range(per_group([&](ToneGroup g) { return group_macro_f1(g, conf); }));
}

std::optional<Gap> accuracy_equality(const GroupConfusion& conf) {
  return group_range(per_group([&](ToneGroup g) { return group_accuracy(g, conf); }));
}

std::optional<Gap> tpr_disparity(const GroupConfusion& conf, TprAggregation aggregation) {
  return group_range(per_group([&](ToneGroup g) { return group_tpr(g, conf, aggregation); }));
}

EodMatrix eod_matrix(const GroupConfusion& conf) {
  const std::size_t k = conf.num_classes();
  EodMatrix out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.recall[i].resize(k);
    for (std::size_t c = 0; c < k; ++c) out.recall[i][c] = recall(kToneGroups[i], c, conf);
  }
  out.disparity.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const PerGroup column{out.recall[0][c], out.recall[1][c], out.recall[2][c]};
    if (const auto gap = group_range(column, 1)) out.disparity[c] = gap->value;
  }
  return out;
}

FairnessReport build_fairness_report(const GroupConfusion& conf, const ClassSet& classes,
                                     TprAggregation aggregation) {
  if (classes.size() != conf.num_classes()) {
    throw std::invalid_argument("class set does not match confusion dimensions");
  }
  const std::size_t k = conf.num_classes();
  FairnessReport report;
  report.classes = classes.names();
  report.tpr_aggregation = aggregation;
  report.excluded_undetermined = conf.excluded();

  for (std::size_t i = 0; i < 3; ++i) {
    const ToneGroup g = kToneGroups[i];
    GroupMetrics& m = report.groups[i];
    m.precision.resize(k);
    m.recall.resize(k);
    m.f1.resize(k);
    m.support.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
      const auto pf = precision_f1(g, c, conf);
      m.precision[c] = pf.precision;
      m.recall[c] = recall(g, c, conf);
      m.f1[c] = pf.f1;
      m.support[c] = conf.support(g, c);
      if (!m.precision[c]) report.undefined_cells.push_back({g, c, "precision"});
      if (!m.recall[c]) report.undefined_cells.push_back({g, c, "recall"});
      if (!m.f1[c]) report.undefined_cells.push_back({g, c, "f1"});
    }
    m.total = conf.total(g);
    m.correct = conf.correct(g);
    m.accuracy = group_accuracy(g, conf);
    m.macro_f1 = group_macro_f1(g, conf);
    m.tpr = group_tpr(g, conf, aggregation);
  }
  report.f1_gap = f1_gap(conf);
  report.accuracy_equality = accuracy_equality(conf);
  report.tpr_disparity = tpr_disparity(conf, aggregation);
  report.eod = eod_matrix(conf);
  return report;
}

}  // namespace toneaudit
