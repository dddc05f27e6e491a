#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "snnforge/dataset.hpp"
#include "test_support.hpp"

using namespace snnforge;
using test_support::TempDir;
using test_support::data_path;
using test_support::write_text;

namespace {

DatasetManifest simple_manifest() {
  return DatasetManifest::from_json(R"({
    "name": "toy",
    "label_column": "y",
    "positive_token": "1",
    "negative_token": "0",
    "missing_token": "?"
  })");
}

}  // namespace

TEST_CASE("load_csv on the shipped datasets") {
  SUBCASE("wbc") {
    const auto manifest =
        DatasetManifest::from_json_file(data_path("wbc.manifest.json"));
    const Dataset d = load_csv(data_path("wbc.csv"), manifest);
    CHECK(d.rows() == 699);
    CHECK(d.cols() == 9);
    CHECK(d.missing_cells.size() == 16);
    CHECK(d.positives() == 241);
    // id column dropped, bare_nuclei carries the missing cells
    for (const auto& [r, c] : d.missing_cells) {
      CHECK(d.feature_names[c] == "bare_nuclei");
    }
  }
  SUBCASE("ionosphere") {
    const auto manifest =
        DatasetManifest::from_json_file(data_path("ionosphere.manifest.json"));
    const Dataset d = load_csv(data_path("ionosphere.csv"), manifest);
    CHECK(d.rows() == 351);
    CHECK(d.cols() == 34);
    CHECK(d.positives() == 225);
  }
  SUBCASE("sonar") {
    const auto manifest =
        DatasetManifest::from_json_file(data_path("sonar.manifest.json"));
    const Dataset d = load_csv(data_path("sonar.csv"), manifest);
    CHECK(d.rows() == 208);
    CHECK(d.cols() == 60);
    CHECK(d.positives() == 111);
  }
}

TEST_CASE("load_csv error paths") {
  TempDir tmp("csv");
  SUBCASE("header only") {
    write_text(tmp.path("h.csv"), "a,b,y\n");
    CHECK_THROWS_AS(load_csv(tmp.path("h.csv"), simple_manifest()), DataError);
  }
  SUBCASE("unparseable cell names row and column") {
    write_text(tmp.path("bad.csv"), "a,b,y\n1,oops,1\n");
    try {
      load_csv(tmp.path("bad.csv"), simple_manifest());
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(":2") != std::string::npos);
      CHECK(msg.find("'b'") != std::string::npos);
      CHECK(msg.find("oops") != std::string::npos);
    }
  }
  SUBCASE("label outside declared tokens") {
    write_text(tmp.path("lbl.csv"), "a,b,y\n1,2,maybe\n");
    CHECK_THROWS_AS(load_csv(tmp.path("lbl.csv"), simple_manifest()), DataError);
  }
  SUBCASE("missing label column") {
    write_text(tmp.path("noy.csv"), "a,b,c\n1,2,3\n");
    CHECK_THROWS_AS(load_csv(tmp.path("noy.csv"), simple_manifest()), DataError);
  }
}

TEST_CASE("class-conditional mean imputation") {
  TempDir tmp("imp");
  SUBCASE("no missing cells leaves the dataset unchanged") {
    write_text(tmp.path("c.csv"), "a,y\n1,1\n3,0\n");
    const Dataset d = load_csv(tmp.path("c.csv"), simple_manifest());
    const Dataset out = impute_class_mean(d);
    CHECK(out.imputation_log.empty());
    CHECK(out.features == d.features);
  }
  SUBCASE("same-class mean") {
    write_text(tmp.path("m.csv"), "a,y\n1,1\n?,1\n3,1\n0,0\n");
    const Dataset out = impute_class_mean(load_csv(tmp.path("m.csv"), simple_manifest()));
    CHECK(out.at(1, 0) == doctest::Approx(2.0));
    REQUIRE(out.imputation_log.size() == 1);
    CHECK(out.imputation_log[0].row == 1);
    CHECK(out.imputation_log[0].col == 0);
  }
  SUBCASE("only same-class rows contribute") {
    write_text(tmp.path("m2.csv"), "a,y\n1,1\n?,1\n9,0\n");
    const Dataset out =
        impute_class_mean(load_csv(tmp.path("m2.csv"), simple_manifest()));
    CHECK(out.at(1, 0) == doctest::Approx(1.0));
  }
  SUBCASE("class with no values at all is an error") {
    write_text(tmp.path("m3.csv"), "a,y\n?,1\n9,0\n");
    CHECK_THROWS_AS(
        impute_class_mean(load_csv(tmp.path("m3.csv"), simple_manifest())),
        DataError);
  }
}

TEST_CASE("min-max normalization") {
  TempDir tmp("norm");
  write_text(tmp.path("n.csv"), "a,b,c,y\n1,5,2,1\n10,5,4,0\n4,5,6,1\n");
  const Dataset out = normalize_minmax(load_csv(tmp.path("n.csv"), simple_manifest()));
  CHECK(out.at(0, 0) == 0.0);
  CHECK(out.at(1, 0) == 1.0);
  // constant feature maps to zero
  CHECK(out.at(0, 1) == 0.0);
  CHECK(out.at(1, 1) == 0.0);
  CHECK(out.at(2, 1) == 0.0);
  // affine map
  CHECK(out.at(0, 2) == doctest::Approx(0.0));
  CHECK(out.at(1, 2) == doctest::Approx(0.5));
  CHECK(out.at(2, 2) == doctest::Approx(1.0));
  REQUIRE(out.normalization.has_value());
  CHECK(out.normalization->min_max[0] == std::pair<double, double>{1.0, 10.0});
}

TEST_CASE("train/test split") {
  Rng rng(41);
  const Dataset d = test_support::random_dataset(699, 3, rng);
  SUBCASE("floor arithmetic and disjoint exact partition") {
    auto [train, test] = split_indices(699, 0.9, 7);
    CHECK(train.size() == 629);
    CHECK(test.size() == 70);
    std::set<std::size_t> all(train.begin(), train.end());
    all.insert(test.begin(), test.end());
    CHECK(all.size() == 699);
    CHECK(*all.rbegin() == 698);
  }
  SUBCASE("even halves") {
    auto [train, test] = split_indices(10, 0.5, 7);
    CHECK(train.size() == 5);
    CHECK(test.size() == 5);
  }
  SUBCASE("determinism") {
    auto a = split_indices(699, 0.7, 123);
    auto b = split_indices(699, 0.7, 123);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
    auto c = split_indices(699, 0.7, 124);
    CHECK(a.first != c.first);
  }
  SUBCASE("degenerate rates are rejected") {
    CHECK_THROWS_AS(split_indices(10, 0.05, 1), ConfigError);  // empty train
    CHECK_THROWS_AS(split_indices(2, 0.3, 1), ConfigError);
    CHECK_THROWS_AS(split_train_test(d, 1.0, 1), ConfigError);
    CHECK_THROWS_AS(split_train_test(d, 0.0, 1), ConfigError);
  }
}

TEST_CASE("fold plans") {
  TempDir tmp("folds");
  SUBCASE("five folds of two") {
    std::string csv = "a,y\n";
    for (int i = 0; i < 10; ++i) csv += std::to_string(i) + "," + (i < 5 ? "1" : "0") + "\n";
    write_text(tmp.path("f.csv"), csv);
    const Dataset d = load_csv(tmp.path("f.csv"), simple_manifest());
    const FoldPlan plan = make_folds(d, 5, 3, true);
    for (std::size_t f = 0; f < 5; ++f) CHECK(plan.fold_rows(f).size() == 2);
  }
  SUBCASE("stratification keeps positives balanced") {
    std::string csv = "a,y\n";
    for (int i = 0; i < 40; ++i) csv += std::to_string(i) + "," + (i % 2 ? "1" : "0") + "\n";
    write_text(tmp.path("s.csv"), csv);
    const Dataset d = load_csv(tmp.path("s.csv"), simple_manifest());
    const FoldPlan plan = make_folds(d, 2, 9, true);
    for (std::size_t f = 0; f < 2; ++f) {
      const auto rows = plan.fold_rows(f);
      std::size_t pos = 0;
      for (std::size_t r : rows) pos += d.labels[r];
      CHECK(pos == 10);  // half of 20 positives, exactly balanced here
    }
  }
  SUBCASE("699 rows in 10 folds have sizes 69 or 70") {
    Rng rng(42);
    const Dataset d = test_support::random_dataset(699, 2, rng);
    const FoldPlan plan = make_folds(d, 10, 5, true);
    std::size_t total = 0;
    for (std::size_t f = 0; f < 10; ++f) {
      const std::size_t size = plan.fold_rows(f).size();
      CHECK(size >= 69);
      CHECK(size <= 70);
      total += size;
    }
    CHECK(total == 699);
  }
  SUBCASE("k > N is rejected") {
    Rng rng(43);
    const Dataset d = test_support::random_dataset(5, 2, rng);
    CHECK_THROWS_AS(make_folds(d, 6, 1, true), ConfigError);
    CHECK_THROWS_AS(make_folds(d, 1, 1, true), ConfigError);
  }
}

TEST_CASE("information gain ranking") {
  TempDir tmp("ig");
  SUBCASE("perfect predictor first, constant last") {
    std::string csv = "noise,copy,flat,y\n";
    Rng rng(51);
    for (int i = 0; i < 64; ++i) {
      const int y = (i % 2);
      csv += std::to_string(rng.unit()) + "," + std::to_string(y) + ",3.0," +
             std::to_string(y) + "\n";
    }
    write_text(tmp.path("ig.csv"), csv);
    const Dataset d = load_csv(tmp.path("ig.csv"), simple_manifest());
    const auto gains = info_gain_values(d);
    const auto rank = info_gain_rank(d);
    CHECK(rank[0] == 1);                      // the label copy
    CHECK(gains[1] == doctest::Approx(1.0));  // = H(Y) for balanced labels
    CHECK(gains[2] == doctest::Approx(0.0));  // constant feature
    CHECK(gains[0] < 0.35);                   // noise carries little
  }
  SUBCASE("uninformative binary feature has zero gain") {
    write_text(tmp.path("z.csv"), "f,y\n0,0\n0,1\n1,0\n1,1\n");
    const Dataset d = load_csv(tmp.path("z.csv"), simple_manifest());
    CHECK(info_gain_values(d)[0] == doctest::Approx(0.0));
  }
  SUBCASE("invariant under strictly increasing transforms") {
    std::string plain = "f,y\n", warped = "f,y\n";
    Rng rng(52);
    for (int i = 0; i < 50; ++i) {
      const double v = rng.uniform(0.1, 4.0);
      const int y = v > 2.0 ? (i % 7 != 0) : (i % 5 == 0);
      plain += std::to_string(v) + "," + std::to_string(y) + "\n";
      warped += std::to_string(v * v * v) + "," + std::to_string(y) + "\n";
    }
    write_text(tmp.path("p.csv"), plain);
    write_text(tmp.path("w.csv"), warped);
    const auto g1 = info_gain_values(load_csv(tmp.path("p.csv"), simple_manifest()));
    const auto g2 = info_gain_values(load_csv(tmp.path("w.csv"), simple_manifest()));
    CHECK(g1[0] == doctest::Approx(g2[0]).epsilon(1e-12));
  }
  SUBCASE("ties break by ascending feature index") {
    write_text(tmp.path("t.csv"), "p,q,y\n1,1,0\n1,1,1\n2,2,0\n2,2,1\n");
    const auto rank = info_gain_rank(load_csv(tmp.path("t.csv"), simple_manifest()));
    CHECK(rank == std::vector<std::size_t>{0, 1});
  }
}

TEST_CASE("select_top_features") {
  TempDir tmp("sel");
  // a repeats values across both classes (zero gain), b copies the label,
  // c is constant
  write_text(tmp.path("s.csv"), "a,b,c,y\n1,0,5,0\n1,1,5,1\n2,0,5,0\n2,1,5,1\n");
  const Dataset d = load_csv(tmp.path("s.csv"), simple_manifest());
  const auto rank = info_gain_rank(d);
  SUBCASE("identity projection") {
    const Dataset same = select_top_features(d, 3, rank);
    CHECK(same.cols() == 3);
    CHECK(same.rows() == 4);
  }
  SUBCASE("k beyond n is rejected") {
    CHECK_THROWS_AS(select_top_features(d, 4, rank), ConfigError);
  }
  SUBCASE("top-1 keeps the perfect predictor") {
    const Dataset one = select_top_features(d, 1, rank);
    REQUIRE(one.cols() == 1);
    CHECK(one.feature_names[0] == "b");
    CHECK(test_support::logistic_fit_accuracy(one, 2000, 1.0) == 1.0);
  }
}

TEST_CASE("pipeline output has no gaps and unit scale") {
  const auto manifest =
      DatasetManifest::from_json_file(data_path("wbc.manifest.json"));
  const Dataset raw = load_csv(data_path("wbc.csv"), manifest);
  const Dataset clean = normalize_minmax(impute_class_mean(raw));
  CHECK(clean.imputation_log.size() == 16);
  CHECK_FALSE(clean.has_missing());
  for (std::size_t r = 0; r < clean.rows(); ++r) {
    for (std::size_t c = 0; c < clean.cols(); ++c) {
      const double v = clean.at(r, c);
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}
