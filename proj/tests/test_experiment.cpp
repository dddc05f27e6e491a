#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "snnforge/experiment.hpp"
#include "test_support.hpp"

using namespace snnforge;
using test_support::TempDir;
using test_support::read_text;
using test_support::write_text;

namespace {

const char* kToyManifest = R"({
  "name": "toy",
  "label_column": "y",
  "positive_token": "1",
  "negative_token": "0"
})";

// 40 rows whose first feature equals the label plus a noise column.
std::string deterministic_csv() {
  std::string csv = "signal,noise,y\n";
  Rng rng(81);
  for (int i = 0; i < 40; ++i) {
    const int y = i % 2;
    csv += std::to_string(y) + "," + std::to_string(rng.unit()) + "," +
           std::to_string(y) + "\n";
  }
  return csv;
}

ExperimentSpec base_spec(const std::string& csv, const std::string& manifest) {
  ExperimentSpec spec;
  spec.datasets = {{csv, manifest}};
  spec.algorithms = {Algorithm::Pdbp};
  spec.driver = Driver::Acc;
  spec.hidden = 1;
  spec.seed = 7;
  spec.pdbp.max_iterations = 1500;
  spec.pdbp.tolerance = 150;
  spec.vpso.max_iterations = 400;
  spec.vpso.tolerance = 80;
  return spec;
}

}  // namespace

TEST_CASE("preprocess_split fits statistics on the training rows only") {
  TempDir tmp("prep");
  write_text(tmp.path("train.csv"), "a,y\n0,0\n5,1\n?,1\n");
  write_text(tmp.path("test.csv"), "a,y\n50,0\n?,1\n");
  const auto manifest = DatasetManifest::from_json(kToyManifest);
  const Dataset raw_train = load_csv(tmp.path("train.csv"), manifest);
  const Dataset raw_test = load_csv(tmp.path("test.csv"), manifest);
  const auto [train, test] = preprocess_split(raw_train, raw_test);

  // Train side scales to [0,1] by its own min/max of {0, 5, 5}.
  CHECK(train.at(0, 0) == 0.0);
  CHECK(train.at(1, 0) == 1.0);
  CHECK(train.at(2, 0) == 1.0);  // imputed with the train class-1 mean (5)
  // Test row 0 is far outside the train range: the train map sends it to 10,
  // which proves the test rows did not contribute to the statistics.
  CHECK(test.at(0, 0) == doctest::Approx(10.0));
  // Test missing cell filled with the train class-1 mean, then scaled.
  CHECK(test.at(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("full train protocol on a degenerate one-row dataset") {
  TempDir tmp("one");
  write_text(tmp.path("one.csv"), "a,b,y\n0.5,0.25,1\n");
  write_text(tmp.path("m.json"), kToyManifest);
  ExperimentSpec spec = base_spec(tmp.path("one.csv"), tmp.path("m.json"));
  spec.pdbp.max_iterations = 30;
  spec.pdbp.tolerance = 10;
  const ExperimentResult result = run_full_train(spec);
  REQUIRE(result.runs.size() == 1);
  CHECK(result.failed_runs.empty());
  const double acc = result.runs[0].eval.acc;
  CHECK((acc == 0.0 || acc == 1.0));
  CHECK(std::isnan(result.runs[0].eval.auc));
  CHECK(result.aggregates.size() == 1);
  CHECK(result.aggregates[0].auc.count == 0);  // aggregate marks auc n/a
}

TEST_CASE("kfold cv on a perfectly predictable dataset") {
  TempDir tmp("cv");
  write_text(tmp.path("det.csv"), deterministic_csv());
  write_text(tmp.path("m.json"), kToyManifest);
  ExperimentSpec spec = base_spec(tmp.path("det.csv"), tmp.path("m.json"));
  spec.protocol = Protocol::KfoldCv;
  spec.folds = 5;
  const ExperimentResult result = run_kfold_cv(spec);
  REQUIRE(result.runs.size() == 5);
  CHECK(result.failed_runs.empty());

  // leakage audit: every run's train and test rows are disjoint, and the
  // test folds tile the whole dataset exactly once
  std::set<std::size_t> seen;
  for (const auto& run : result.runs) {
    std::set<std::size_t> train(run.train_rows.begin(), run.train_rows.end());
    for (std::size_t r : run.test_rows) {
      CHECK(train.count(r) == 0);
      CHECK(seen.insert(r).second);
    }
    CHECK(train.size() + run.test_rows.size() == 40);
    CHECK(run.eval_on_test);
  }
  CHECK(seen.size() == 40);

  REQUIRE(result.aggregates.size() == 1);
  CHECK(result.aggregates[0].acc.mean == doctest::Approx(1.0));
  CHECK(result.aggregates[0].acc.stddev == doctest::Approx(0.0));
}

TEST_CASE("rate sweep with one rate collapses to a holdout") {
  TempDir tmp("rate");
  write_text(tmp.path("det.csv"), deterministic_csv());
  write_text(tmp.path("m.json"), kToyManifest);
  ExperimentSpec spec = base_spec(tmp.path("det.csv"), tmp.path("m.json"));
  spec.protocol = Protocol::RateSweep;
  spec.rates = {0.5};
  spec.repeats = 2;
  const ExperimentResult result = run_rate_sweep(spec);
  REQUIRE(result.runs.size() == 2);
  for (const auto& run : result.runs) {
    CHECK(run.train_rows.size() == 20);
    CHECK(run.test_rows.size() == 20);
    std::set<std::size_t> train(run.train_rows.begin(), run.train_rows.end());
    for (std::size_t r : run.test_rows) CHECK(train.count(r) == 0);
  }
  REQUIRE(result.aggregates.size() == 1);
  CHECK(result.aggregates[0].runs == 2);
}

TEST_CASE("incremental sweep pairs seeds across m") {
  TempDir tmp("sweep");
  write_text(tmp.path("det.csv"), deterministic_csv());
  write_text(tmp.path("m.json"), kToyManifest);
  ExperimentSpec spec = base_spec(tmp.path("det.csv"), tmp.path("m.json"));
  spec.protocol = Protocol::IncrementalSweep;
  spec.repeats = 2;
  spec.pdbp.max_iterations = 300;
  spec.pdbp.tolerance = 50;
  const ExperimentResult result = run_incremental_sweep(spec);
  REQUIRE(result.runs.size() == 4);  // m in {1,2} x 2 repeats
  CHECK(result.runs[0].seed == result.runs[2].seed);  // same repeat, other m
  CHECK(result.aggregates.size() == 2);
}

TEST_CASE("compare protocol trims wide datasets and renders baselines") {
  TempDir tmp("cmp");
  // 15 features; only f0 carries signal
  std::string csv = "f0";
  for (int c = 1; c < 15; ++c) csv += ",f" + std::to_string(c);
  csv += ",y\n";
  Rng rng(82);
  for (int r = 0; r < 30; ++r) {
    const int y = r % 2;
    csv += std::to_string(y);
    for (int c = 1; c < 15; ++c) csv += "," + std::to_string(rng.unit());
    csv += "," + std::to_string(y) + "\n";
  }
  write_text(tmp.path("wide.csv"), csv);
  write_text(tmp.path("m.json"), R"({
    "name": "widetoy",
    "label_column": "y",
    "positive_token": "1",
    "negative_token": "0"
  })");
  write_text(tmp.path("baselines.json"), R"({
    "column_order": ["C4.5"],
    "columns": {"C4.5": "published numbers"},
    "datasets": {"widetoy": {"n": 15, "N": 30, "C4.5": [70.25, 1.5]}}
  })");

  ExperimentSpec spec = base_spec(tmp.path("wide.csv"), tmp.path("m.json"));
  spec.protocol = Protocol::Compare;
  spec.baselines = tmp.path("baselines.json");
  spec.repeats = 2;
  spec.hidden.reset();
  const ExperimentResult result = run_compare(spec);
  REQUIRE(result.runs.size() == 2);
  CHECK(result.failed_runs.empty());
  CHECK(result.runs[0].hidden == 6);  // ceil(12 / 2)
  CHECK(result.table_md.find("70.25") != std::string::npos);
  CHECK(result.table_md.find("widetoy") != std::string::npos);
}

TEST_CASE("experiment artifacts round-trip through the report renderer") {
  TempDir tmp("art");
  write_text(tmp.path("det.csv"), deterministic_csv());
  write_text(tmp.path("m.json"), kToyManifest);
  ExperimentSpec spec = base_spec(tmp.path("det.csv"), tmp.path("m.json"));
  spec.protocol = Protocol::KfoldCv;
  spec.folds = 4;
  const ExperimentResult result = run_kfold_cv(spec);
  write_experiment(result, spec, tmp.path("out"));

  const std::string report = read_text(tmp.path("out/report.csv"));
  CHECK(!report.empty());
  CHECK(read_text(tmp.path("out/runs/run_000.json")).find("\"fold\": 0") !=
        std::string::npos);

  // aggregates must be recomputable from the persisted raw rows
  rerender_report(tmp.path("out"));
  CHECK(read_text(tmp.path("out/report.csv")) == report);

  // and a rerun of the same spec reproduces the identical report
  const ExperimentResult again = run_kfold_cv(spec);
  write_experiment(again, spec, tmp.path("out2"));
  CHECK(read_text(tmp.path("out2/report.csv")) == report);
}

TEST_CASE("spec validation lists every violation at once") {
  const std::string bad = R"({
    "protocol": "rate_sweep",
    "datasets": [{"csv": "x.csv", "manifest": "x.json"}],
    "driver": "wat",
    "rates": [1.0],
    "repeats": 0,
    "mystery": true
  })";
  try {
    (void)ExperimentSpec::from_json(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("driver") != std::string::npos);
    CHECK(msg.find("1.0") != std::string::npos);
    CHECK(msg.find("repeats") != std::string::npos);
    CHECK(msg.find("mystery") != std::string::npos);
    CHECK(msg.find("hidden") != std::string::npos);
  }
}

TEST_CASE("spec parses a complete document") {
  const ExperimentSpec spec = ExperimentSpec::from_json(R"({
    "name": "demo",
    "protocol": "kfold_cv",
    "datasets": [{"csv": "a.csv", "manifest": "a.json"}],
    "algorithms": ["pdbp", "vpso"],
    "driver": "f1",
    "hidden": 4,
    "folds": 10,
    "repeats": 3,
    "seed": 42,
    "pdbp": {"learning_rate": 0.1, "max_iterations": 5000},
    "vpso": {"population": 64, "c1": 2.1}
  })");
  CHECK(spec.name == "demo");
  CHECK(spec.protocol == Protocol::KfoldCv);
  CHECK(spec.algorithms.size() == 2);
  CHECK(spec.driver == Driver::F1);
  CHECK(spec.hidden == 4);
  CHECK(spec.seed == 42);
  CHECK(spec.pdbp.learning_rate == 0.1);
  CHECK(spec.vpso.population == 64);
  CHECK(spec.vpso.c1 == 2.1);
}
