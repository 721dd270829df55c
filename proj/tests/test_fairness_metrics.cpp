#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "toneaudit/fairness_metrics.hpp"

using namespace toneaudit;

namespace {

constexpr std::size_t kAnger = 6;
constexpr std::size_t kDisgust = 5;

void add(std::vector<PredictionRecord>& out, ToneGroup g, std::size_t truth, std::size_t pred,
         int n = 1) {
  for (int i = 0; i < n; ++i) {
    out.push_back({"s" + std::to_string(out.size()), g, truth, pred});
  }
}

std::vector<PredictionRecord> random_records(std::mt19937& rng, std::size_t k) {
  std::vector<PredictionRecord> recs;
  std::uniform_int_distribution<int> support(0, 12);
  std::uniform_int_distribution<std::size_t> cls(0, k - 1);
  std::uniform_int_distribution<int> grp(0, 3);
  for (std::size_t c = 0; c < k; ++c) {
    for (int g = 0; g < 4; ++g) {
      const int n = support(rng);
      for (int i = 0; i < n; ++i) {
        const std::size_t pred = rng() % 2 ? c : cls(rng);
        add(recs, static_cast<ToneGroup>(g), c, pred);
      }
    }
  }
  std::shuffle(recs.begin(), recs.end(), rng);
  return recs;
}

}  // namespace

TEST_CASE("ClassSet") {
  const ClassSet def;
  CHECK(def.size() == 8);
  CHECK(*def.index_of("anger") == kAnger);
  CHECK(*def.index_of("disgust") == kDisgust);
  CHECK_FALSE(def.index_of("Anger").has_value());
  CHECK_THROWS(ClassSet({"a", "a"}));
  CHECK_THROWS(ClassSet(std::vector<std::string>{}));
}

TEST_CASE("tally") {
  const auto empty = tally({}, 8);
  for (auto g : kToneGroups) CHECK(empty.total(g) == 0);
  CHECK(empty.excluded() == 0);

  std::vector<PredictionRecord> one;
  add(one, ToneGroup::Medium, 2, 2);
  const auto c = tally(one, 8);
  CHECK(c.tp(ToneGroup::Medium, 2) == 1);
  CHECK(c.support(ToneGroup::Medium, 2) == 1);
  CHECK(c.total(ToneGroup::Light) == 0);

  std::vector<PredictionRecord> und;
  add(und, ToneGroup::Undetermined, 0, 0, 3);
  CHECK(tally(und, 8).excluded() == 3);

  std::vector<PredictionRecord> bad;
  add(bad, ToneGroup::Light, 8, 0);
  CHECK_THROWS_AS(tally(bad, 8), std::out_of_range);

  SUBCASE("planted counts") {
    std::mt19937 rng(4);
    std::uniform_int_distribution<int> n(0, 20);
    std::size_t planted[3][4][4];
    std::vector<PredictionRecord> recs;
    for (int g = 0; g < 3; ++g)
      for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t p = 0; p < 4; ++p) {
          planted[g][t][p] = static_cast<std::size_t>(n(rng));
          add(recs, kToneGroups[g], t, p, static_cast<int>(planted[g][t][p]));
        }
    std::shuffle(recs.begin(), recs.end(), rng);
    const auto conf = tally(recs, 4);
    for (int g = 0; g < 3; ++g)
      for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t p = 0; p < 4; ++p) CHECK(conf.cell(kToneGroups[g], t, p) == planted[g][t][p]);
  }
  SUBCASE("merge of partial tallies equals the full tally") {
    std::mt19937 rng(8);
    const auto recs = random_records(rng, 8);
    const std::size_t cut = recs.size() / 3;
    auto left = tally(std::span(recs).first(cut), 8);
    left.merge(tally(std::span(recs).subspan(cut), 8));
    CHECK(left == tally(recs, 8));
    GroupConfusion other(7);
    CHECK_THROWS(left.merge(other));
  }
}

TEST_CASE("recall") {
  std::vector<PredictionRecord> recs;
  add(recs, ToneGroup::Dark, kAnger, kAnger, 2);
  add(recs, ToneGroup::Dark, kAnger, 0, 1);
  const auto conf = tally(recs, 8);
  CHECK(*recall(ToneGroup::Dark, kAnger, conf) == doctest::Approx(2.0 / 3.0));
  CHECK(std::round(*recall(ToneGroup::Dark, kAnger, conf) * 100.0) / 100.0 == 0.67);
  CHECK_FALSE(recall(ToneGroup::Light, kAnger, conf).has_value());
}

TEST_CASE("precision_f1") {
  std::vector<PredictionRecord> recs;
  add(recs, ToneGroup::Light, 0, 0);
  auto conf = tally(recs, 8);
  auto pf = precision_f1(ToneGroup::Light, 0, conf);
  CHECK(*pf.precision == 1.0);
  CHECK(*pf.f1 == 1.0);

  recs.clear();
  add(recs, ToneGroup::Light, 1, 0, 2);  // class 1: TP 0, FP 0, FN 2
  conf = tally(recs, 8);
  pf = precision_f1(ToneGroup::Light, 1, conf);
  CHECK_FALSE(pf.precision.has_value());
  CHECK(*recall(ToneGroup::Light, 1, conf) == 0.0);
  CHECK(*pf.f1 == 0.0);
  // class 2 never appears at all
  pf = precision_f1(ToneGroup::Light, 2, conf);
  CHECK_FALSE(pf.precision.has_value());
  CHECK_FALSE(pf.f1.has_value());

  SUBCASE("Dark / Disgust precision 1.00") {
    recs.clear();
    add(recs, ToneGroup::Dark, kDisgust, kDisgust, 1);
    add(recs, ToneGroup::Dark, kDisgust, 0, 4);
    conf = tally(recs, 8);
    CHECK(*precision_f1(ToneGroup::Dark, kDisgust, conf).precision == 1.0);
    CHECK(*recall(ToneGroup::Dark, kDisgust, conf) == doctest::Approx(0.2));
  }
}

TEST_CASE("group_macro_f1") {
  std::vector<PredictionRecord> recs;
  // class 0: TP 1, FN 3 -> F1 = 2/5
  add(recs, ToneGroup::Light, 0, 0, 1);
  add(recs, ToneGroup::Light, 0, 1, 3);
  auto conf = tally(recs, 8);
  CHECK(*group_macro_f1(ToneGroup::Light, conf) == doctest::Approx(0.4));
  CHECK_FALSE(group_macro_f1(ToneGroup::Dark, conf).has_value());

  // F1 values 0.2, 0.4, 0.6 in three classes (zero-support class 7 gets FP only).
  recs.clear();
  add(recs, ToneGroup::Medium, 0, 0, 1);
  add(recs, ToneGroup::Medium, 0, 7, 8);  // 2/10 = 0.2
  add(recs, ToneGroup::Medium, 1, 1, 1);
  add(recs, ToneGroup::Medium, 1, 7, 3);  // 2/5 = 0.4
  add(recs, ToneGroup::Medium, 2, 2, 3);
  add(recs, ToneGroup::Medium, 2, 7, 4);  // 6/10 = 0.6
  conf = tally(recs, 8);
  CHECK(*group_macro_f1(ToneGroup::Medium, conf) == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("gaps") {
  std::vector<PredictionRecord> recs;
  add(recs, ToneGroup::Light, 0, 0, 5);
  add(recs, ToneGroup::Light, 0, 1, 5);
  add(recs, ToneGroup::Medium, 0, 0, 4);
  add(recs, ToneGroup::Medium, 0, 1, 6);
  const auto conf = tally(recs, 2);

  const auto acc = accuracy_equality(conf);
  REQUIRE(acc);
  CHECK(acc->value == doctest::Approx(0.1));
  CHECK(acc->best == ToneGroup::Light);
  CHECK(acc->worst == ToneGroup::Medium);

  SUBCASE("fewer than two groups") {
    std::vector<PredictionRecord> single;
    add(single, ToneGroup::Dark, 0, 0, 3);
    const auto c = tally(single, 2);
    CHECK_FALSE(f1_gap(c).has_value());
    CHECK_FALSE(accuracy_equality(c).has_value());
    CHECK_FALSE(tpr_disparity(c).has_value());
    const auto eod = eod_matrix(c);
    CHECK(*eod.disparity[0] == 0.0);
    CHECK_FALSE(eod.disparity[1].has_value());
  }
  SUBCASE("identical groups have zero gaps") {
    std::vector<PredictionRecord> same;
    for (auto g : kToneGroups) {
      add(same, g, 0, 0, 3);
      add(same, g, 0, 1, 2);
      add(same, g, 1, 1, 4);
    }
    const auto c = tally(same, 2);
    CHECK(f1_gap(c)->value == 0.0);
    CHECK(accuracy_equality(c)->value == 0.0);
    CHECK(tpr_disparity(c)->value == 0.0);
  }
  SUBCASE("group_range") {
    const auto g = group_range({0.40, 0.36, 0.32});
    CHECK(g->value == doctest::Approx(0.08));
    CHECK(g->best == ToneGroup::Light);
    CHECK(g->worst == ToneGroup::Dark);
    CHECK(group_range({0.4, std::nullopt, 0.35})->worst == ToneGroup::Dark);
    CHECK_FALSE(group_range({0.4, std::nullopt, std::nullopt}).has_value());
  }
}

TEST_CASE("eod_matrix") {
  // Anger recalls 0.41 / 0.44 / 0.67 as counts 41/100, 44/100, 2/3.
  std::vector<PredictionRecord> recs;
  add(recs, ToneGroup::Light, kAnger, kAnger, 41);
  add(recs, ToneGroup::Light, kAnger, 0, 59);
  add(recs, ToneGroup::Medium, kAnger, kAnger, 44);
  add(recs, ToneGroup::Medium, kAnger, 0, 56);
  add(recs, ToneGroup::Dark, kAnger, kAnger, 2);
  add(recs, ToneGroup::Dark, kAnger, 0, 1);
  const auto eod = eod_matrix(tally(recs, 8));
  CHECK(*eod.recall[0][kAnger] == doctest::Approx(0.41));
  CHECK(*eod.recall[1][kAnger] == doctest::Approx(0.44));
  CHECK(std::round(*eod.recall[2][kAnger] * 100) / 100 == 0.67);
  CHECK(std::round(*eod.disparity[kAnger] * 100) / 100 == 0.26);
  CHECK_FALSE(eod.disparity[1].has_value());
}

TEST_CASE("tpr aggregation") {
  std::vector<PredictionRecord> recs;
  add(recs, ToneGroup::Light, 0, 0, 9);
  add(recs, ToneGroup::Light, 0, 1, 1);  // recall 0.9
  add(recs, ToneGroup::Light, 1, 1, 1);
  add(recs, ToneGroup::Light, 1, 0, 1);  // recall 0.5
  const auto conf = tally(recs, 2);
  CHECK(*group_tpr(ToneGroup::Light, conf, TprAggregation::Macro) == doctest::Approx(0.7));
  CHECK(*group_tpr(ToneGroup::Light, conf, TprAggregation::Micro) == doctest::Approx(10.0 / 12.0));
  CHECK(parse_tpr_aggregation("micro") == TprAggregation::Micro);
  CHECK_THROWS(parse_tpr_aggregation("weighted"));
}

TEST_CASE("metrics agree with the naive oracle") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto recs = random_records(rng, 8);
    const auto conf = tally(recs, 8);
    const auto ref = oracle::naive_metrics(recs, 8);
    for (std::size_t gi = 0; gi < 3; ++gi) {
      const auto g = kToneGroups[gi];
      for (std::size_t c = 0; c < 8; ++c) {
        const auto pf = precision_f1(g, c, conf);
        REQUIRE(pf.precision.has_value() == ref.precision[gi][c].has_value());
        REQUIRE(pf.f1.has_value() == ref.f1[gi][c].has_value());
        if (pf.precision) REQUIRE(std::abs(*pf.precision - *ref.precision[gi][c]) <= 1e-12);
        if (pf.f1) REQUIRE(std::abs(*pf.f1 - *ref.f1[gi][c]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("dropping a group leaves the others bit-identical") {
  std::mt19937 rng(77);
  const auto recs = random_records(rng, 8);
  std::vector<PredictionRecord> without_dark;
  for (const auto& r : recs)
    if (r.group != ToneGroup::Dark) without_dark.push_back(r);
  const auto full = build_fairness_report(tally(recs, 8), ClassSet{});
  const auto part = build_fairness_report(tally(without_dark, 8), ClassSet{});
  for (std::size_t gi = 0; gi < 2; ++gi) {
    CHECK(full.groups[gi].precision == part.groups[gi].precision);
    CHECK(full.groups[gi].recall == part.groups[gi].recall);
    CHECK(full.groups[gi].f1 == part.groups[gi].f1);
    CHECK(full.groups[gi].macro_f1 == part.groups[gi].macro_f1);
    CHECK(full.groups[gi].accuracy == part.groups[gi].accuracy);
    CHECK(full.groups[gi].tpr == part.groups[gi].tpr);
  }
  CHECK(part.groups[2].total == 0);
}

TEST_CASE("gaps are invariant under group relabeling") {
  std::mt19937 rng(13);
  const auto recs = random_records(rng, 8);
  auto relabeled = recs;
  for (auto& r : relabeled) {
    if (r.group == ToneGroup::Light) r.group = ToneGroup::Dark;
    else if (r.group == ToneGroup::Dark) r.group = ToneGroup::Medium;
    else if (r.group == ToneGroup::Medium) r.group = ToneGroup::Light;
  }
  const auto a = tally(recs, 8);
  const auto b = tally(relabeled, 8);
  CHECK(f1_gap(a)->value == doctest::Approx(f1_gap(b)->value).epsilon(1e-15));
  CHECK(accuracy_equality(a)->value == doctest::Approx(accuracy_equality(b)->value).epsilon(1e-15));
  CHECK(tpr_disparity(a)->value == doctest::Approx(tpr_disparity(b)->value).epsilon(1e-15));
}

TEST_CASE("build_fairness_report enumerates undefined cells") {
  std::vector<PredictionRecord> recs;
  add(recs, ToneGroup::Light, 0, 0, 2);
  add(recs, ToneGroup::Undetermined, 0, 0, 5);
  const auto report = build_fairness_report(tally(recs, 2), ClassSet({"a", "b"}));
  CHECK(report.excluded_undetermined == 5);
  // Light/b: precision, recall, f1 undefined; Medium and Dark: all six each.
  CHECK(report.undefined_cells.size() == 3 + 6 + 6);
  CHECK_THROWS(build_fairness_report(tally(recs, 2), ClassSet{}));
}
