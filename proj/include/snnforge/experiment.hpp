#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "snnforge/dataset.hpp"
#include "snnforge/metrics.hpp"
#include "snnforge/pdbp.hpp"
#include "snnforge/vpso.hpp"

namespace snnforge {

enum class Algorithm { Pdbp, Vpso };
enum class Protocol { FullTrain, IncrementalSweep, KfoldCv, RateSweep, Compare };

Algorithm algorithm_from_string(const std::string& s);
std::string to_string(Algorithm a);
Protocol protocol_from_string(const std::string& s);
std::string to_string(Protocol p);

struct DatasetRef {
  std::string csv;
  std::string manifest;
};

// One experiment, loaded from a JSON spec file. Validation collects every
// violation and reports them all at once before any run starts.
struct ExperimentSpec {
  std::string name;
  Protocol protocol = Protocol::FullTrain;
  std::vector<DatasetRef> datasets;       // compare walks all, others use the first
  std::vector<Algorithm> algorithms;      // compare walks all, others use the first
  Driver driver = Driver::Acc;
  std::optional<std::size_t> hidden;      // m; compare derives it per dataset
  std::size_t sweep_from = 1;
  std::optional<std::size_t> sweep_to;    // default: feature count
  std::size_t folds = 10;
  bool stratified = true;
  std::vector<double> rates;              // rate sweep; default 0.5..0.9
  std::size_t repeats = 1;
  std::uint64_t seed = 0;
  std::optional<std::string> baselines;   // compare: baselines JSON path
  std::size_t top_features = 12;          // compare: IG cut for wide datasets
  std::size_t jobs = 1;                   // parallel independent runs (CLI flag)
  PdbpConfig pdbp;                        // shared overrides; driver/seed set per run
  VpsoConfig vpso;

  static ExperimentSpec from_json_file(const std::string& path);
  static ExperimentSpec from_json(const std::string& text);
};

// Everything needed to audit or replay a single training run.
struct RunRecord {
  std::size_t run_index = 0;
  std::string group;  // aggregation key, e.g. "wbc/acc-pdbp/m=4"
  std::uint64_t seed = 0;
  std::string dataset;
  Algorithm algorithm = Algorithm::Pdbp;
  Driver driver = Driver::Acc;
  std::size_t hidden = 0;
  std::optional<std::size_t> fold;
  std::optional<double> rate;
  std::vector<std::size_t> train_rows;  // original row indices; empty = all
  std::vector<std::size_t> test_rows;
  KpiReport eval;                        // the KPIs this run contributes
  bool eval_on_test = false;
  std::size_t best_iteration = 0;
  std::size_t iterations_run = 0;
  double train_time_ms = 0.0;
  std::vector<TraceRecord> trace;        // persisted to runs/*_trace.csv

  std::string to_json() const;
  static RunRecord from_json(const std::string& text);
};

struct KpiMeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::size_t count = 0;
};

// Mean and deviation per KPI over a group of runs; NaN AUCs are skipped.
struct AggregateReport {
  std::string label;
  std::size_t runs = 0;
  KpiMeanStd err, acc, f1, auc, tpr, tnr;

  static AggregateReport from_reports(const std::string& label,
                                      const std::vector<KpiReport>& rows);
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<AggregateReport> aggregates;
  std::string table_md;
  std::vector<std::size_t> failed_runs;
  std::vector<std::string> messages;  // one per failure
};

// Protocol entry points. `train_once` dispatches on algorithm with the
// spec's config overrides; per-run seeds are base_seed + run counter.
TrainedResult train_once(const Dataset& train, Algorithm algorithm,
                         Driver driver, std::size_t m, std::uint64_t seed,
                         const PdbpConfig& pdbp, const VpsoConfig& vpso);
KpiReport evaluate_model(const SnnModel& model, const Dataset& data,
                         double threshold);

ExperimentResult run_full_train(const ExperimentSpec& spec);
ExperimentResult run_incremental_sweep(const ExperimentSpec& spec);
ExperimentResult run_kfold_cv(const ExperimentSpec& spec);
ExperimentResult run_rate_sweep(const ExperimentSpec& spec);
ExperimentResult run_compare(const ExperimentSpec& spec);
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Artifact layout: report.csv (aggregates), runs/run_NNN.json,
// runs/run_NNN_trace.csv, table.md.
void write_experiment(const ExperimentResult& result, const ExperimentSpec& spec,
                      const std::string& out_dir);

// Re-render report.csv and table.md from the persisted runs/*.json rows.
void rerender_report(const std::string& out_dir);

// Published baseline columns for the comparison table; never recomputed.
struct BaselineTable {
  std::vector<std::string> columns;                  // display order
  std::map<std::string, std::string> sources;        // column -> citation
  struct Row {
    std::size_t n = 0, N = 0;
    std::map<std::string, std::pair<double, double>> values;  // percent
  };
  std::map<std::string, Row> rows;  // dataset name -> row

  static BaselineTable from_json_file(const std::string& path);
};

// Split-hygienic preprocessing: imputation and scaling statistics are
// fitted on the training rows only, then applied to both sides.
std::pair<Dataset, Dataset> preprocess_split(const Dataset& raw_train,
                                             const Dataset& raw_test);
Dataset preprocess_full(const Dataset& raw);

}  // namespace snnforge
