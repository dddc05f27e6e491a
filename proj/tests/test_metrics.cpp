#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "snnforge/metrics.hpp"
#include "snnforge/rng.hpp"

using namespace snnforge;

namespace {

// O(P*Q) pairwise concordance, the oracle auc_roc is checked against.
double auc_brute_force(const std::vector<int>& labels,
                       const std::vector<double>& scores) {
  double hits = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) hits += 1.0;
      else if (scores[i] == scores[j]) hits += 0.5;
    }
  }
  return hits / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("mean_error") {
  CHECK(mean_error({1, 0, 1}, {1, 0, 1}) == 0.0);
  CHECK(mean_error({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == doctest::Approx(0.125));
  CHECK(mean_error({1.0, 0.0}, {0, 1}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(mean_error({}, {}), DataError);
  CHECK_THROWS_AS(mean_error({0.5}, {1, 0}), DataError);
}

TEST_CASE("confusion counts and the >= tie rule") {
  auto c = confusion({1, 0}, {0.9, 0.1}, 0.5);
  CHECK(c.tp == 1);
  CHECK(c.tn == 1);
  CHECK(c.fp == 0);
  CHECK(c.fn == 0);

  c = confusion({1, 0}, {0.5, 0.5}, 0.5);
  CHECK(c.tp == 1);  // score == threshold predicts positive
  CHECK(c.fp == 1);

  c = confusion({1, 1, 0, 0}, {0.6, 0.4, 0.6, 0.4}, 0.5);
  CHECK(c.tp == 1);
  CHECK(c.fn == 1);
  CHECK(c.fp == 1);
  CHECK(c.tn == 1);
}

TEST_CASE("auc_roc") {
  SUBCASE("perfect separation") {
    CHECK(auc_roc({1, 1, 0, 0}, {0.9, 0.8, 0.2, 0.1}) == 1.0);
  }
  SUBCASE("all ties") {
    CHECK(auc_roc({1, 0, 1, 0}, {0.5, 0.5, 0.5, 0.5}) == 0.5);
  }
  SUBCASE("worked example") {
    CHECK(auc_roc({1, 0, 1, 0}, {0.9, 0.8, 0.3, 0.1}) == doctest::Approx(0.75));
  }
  SUBCASE("single class is an error") {
    CHECK_THROWS_AS(auc_roc({1, 1}, {0.5, 0.6}), UndefinedAucError);
    CHECK_THROWS_AS(auc_roc({0, 0}, {0.5, 0.6}), UndefinedAucError);
  }
  SUBCASE("matches pairwise brute force on random sets with ties") {
    Rng rng(301);
    int done = 0;
    while (done < 200) {
      const std::size_t n = 2 + rng.below(40);
      std::vector<int> labels(n);
      std::vector<double> scores(n);
      for (auto& y : labels) y = rng.raw() % 2;
      // scores on a small grid so ties actually happen
      for (auto& s : scores) s = static_cast<double>(rng.below(8)) / 7.0;
      const std::size_t pos = std::count(labels.begin(), labels.end(), 1);
      if (pos == 0 || pos == n) continue;
      ++done;
      CHECK(auc_roc(labels, scores) ==
            doctest::Approx(auc_brute_force(labels, scores)).epsilon(1e-12));
    }
  }
  SUBCASE("invariant under strictly increasing transforms") {
    Rng rng(302);
    std::vector<int> labels(30);
    std::vector<double> scores(30), mapped(30);
    for (auto& y : labels) y = rng.raw() % 2;
    labels[0] = 1;
    labels[1] = 0;
    for (auto& s : scores) s = rng.unit();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      mapped[i] = std::exp(3.0 * scores[i]);
    }
    CHECK(auc_roc(labels, scores) == doctest::Approx(auc_roc(labels, mapped)));
  }
  SUBCASE("antisymmetry under score reversal without ties") {
    Rng rng(303);
    std::vector<int> labels = {1, 0, 1, 0, 1, 0, 0, 1, 1, 0};
    std::vector<double> scores(labels.size()), reversed(labels.size());
    for (auto& s : scores) s = rng.unit();
    for (std::size_t i = 0; i < scores.size(); ++i) reversed[i] = -scores[i];
    CHECK(auc_roc(labels, scores) + auc_roc(labels, reversed) ==
          doctest::Approx(1.0));
  }
}

TEST_CASE("kpi_suite") {
  SUBCASE("perfect classifier") {
    const KpiReport r = kpi_suite({1, 1, 0, 0}, {0.9, 0.6, 0.4, 0.1}, 0.5);
    CHECK(r.acc == 1.0);
    CHECK(r.f1 == 1.0);
    CHECK(r.auc == 1.0);
    CHECK(r.tpr == 1.0);
    CHECK(r.tnr == 1.0);
  }
  SUBCASE("total inversion") {
    const KpiReport r = kpi_suite({1, 0}, {0.1, 0.9}, 0.5);
    CHECK(r.acc == 0.0);
    CHECK(r.f1 == 0.0);
    CHECK(r.auc == 0.0);
  }
  SUBCASE("single class yields NaN auc, other KPIs defined") {
    const KpiReport r = kpi_suite({1, 1, 1}, {0.9, 0.8, 0.4}, 0.5);
    CHECK(std::isnan(r.auc));
    CHECK(r.acc == doctest::Approx(2.0 / 3.0));
    CHECK(r.tnr == 1.0);  // no negatives
  }
  SUBCASE("acc plus error rate is exactly one") {
    Rng rng(304);
    for (int i = 0; i < 50; ++i) {
      const std::size_t n = 1 + rng.below(60);
      std::vector<int> labels(n);
      std::vector<double> scores(n);
      for (auto& y : labels) y = rng.raw() % 2;
      for (auto& s : scores) s = rng.unit();
      const KpiReport r = kpi_suite(labels, scores, 0.5);
      const double error_rate =
          static_cast<double>(r.counts.fp + r.counts.fn) /
          static_cast<double>(r.counts.total());
      CHECK(r.acc + error_rate == 1.0);
      CHECK(r.f1 >= 0.0);
      CHECK(r.f1 <= 1.0);
      const bool f1_is_one = r.f1 == 1.0;
      const bool clean = r.counts.fp == 0 && r.counts.fn == 0 && r.counts.tp > 0;
      CHECK(f1_is_one == clean);
    }
  }
  SUBCASE("permutation invariance") {
    Rng rng(305);
    std::vector<int> labels = {1, 0, 1, 1, 0, 0, 1, 0};
    std::vector<double> scores = {0.9, 0.2, 0.7, 0.4, 0.6, 0.1, 0.5, 0.3};
    const KpiReport a = kpi_suite(labels, scores, 0.5);
    std::vector<std::size_t> perm(labels.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<int> pl(labels.size());
    std::vector<double> ps(labels.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      pl[i] = labels[perm[i]];
      ps[i] = scores[perm[i]];
    }
    const KpiReport b = kpi_suite(pl, ps, 0.5);
    CHECK(a.acc == b.acc);
    CHECK(a.f1 == b.f1);
    CHECK(a.auc == doctest::Approx(b.auc).epsilon(1e-12));
    CHECK(a.err == doctest::Approx(b.err).epsilon(1e-12));
  }
  SUBCASE("degenerate edges") {
    // no positives: tpr defined as 1
    KpiReport r = kpi_suite({0, 0}, {0.1, 0.9}, 0.5);
    CHECK(r.tpr == 1.0);
    CHECK(r.f1 == 0.0);
    // bad threshold
    CHECK_THROWS_AS(kpi_suite({1, 0}, {0.5, 0.5}, 1.0), ConfigError);
  }
  SUBCASE("csv row shape") {
    const KpiReport r = kpi_suite({1, 0}, {0.9, 0.1}, 0.5);
    CHECK(KpiReport::csv_header() ==
          "err,acc,f1,auc,tpr,tnr,tp,fp,tn,fn,threshold");
    const std::string row = r.csv_row();
    CHECK(std::count(row.begin(), row.end(), ',') == 10);
  }
}
