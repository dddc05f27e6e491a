#include "snnforge/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "snnforge/kernels.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace snnforge {

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "pdbp" || s == "PDBP") return Algorithm::Pdbp;
  if (s == "vpso" || s == "VPSO") return Algorithm::Vpso;
  throw ConfigError("unknown algorithm '" + s + "' (expected pdbp or vpso)");
}

std::string to_string(Algorithm a) {
  return a == Algorithm::Pdbp ? "pdbp" : "vpso";
}

Protocol protocol_from_string(const std::string& s) {
  if (s == "full_train") return Protocol::FullTrain;
  if (s == "incremental_sweep") return Protocol::IncrementalSweep;
  if (s == "kfold_cv") return Protocol::KfoldCv;
  if (s == "rate_sweep") return Protocol::RateSweep;
  if (s == "compare") return Protocol::Compare;
  throw ConfigError("unknown protocol '" + s + "'");
}

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::FullTrain: return "full_train";
    case Protocol::IncrementalSweep: return "incremental_sweep";
    case Protocol::KfoldCv: return "kfold_cv";
    case Protocol::RateSweep: return "rate_sweep";
    case Protocol::Compare: return "compare";
  }
  return "?";
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << text;
}

json kpi_to_json(const KpiReport& r) {
  json j;
  j["err"] = r.err;
  j["acc"] = r.acc;
  j["f1"] = r.f1;
  if (std::isnan(r.auc)) {
    j["auc"] = nullptr;
  } else {
    j["auc"] = r.auc;
  }
  j["tpr"] = r.tpr;
  j["tnr"] = r.tnr;
  j["tp"] = r.counts.tp;
  j["fp"] = r.counts.fp;
  j["tn"] = r.counts.tn;
  j["fn"] = r.counts.fn;
  j["threshold"] = r.threshold;
  return j;
}

KpiReport kpi_from_json(const json& j) {
  KpiReport r;
  r.err = j.at("err").get<double>();
  r.acc = j.at("acc").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.auc = j.at("auc").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                : j.at("auc").get<double>();
  r.tpr = j.at("tpr").get<double>();
  r.tnr = j.at("tnr").get<double>();
  r.counts.tp = j.at("tp").get<std::size_t>();
  r.counts.fp = j.at("fp").get<std::size_t>();
  r.counts.tn = j.at("tn").get<std::size_t>();
  r.counts.fn = j.at("fn").get<std::size_t>();
  r.threshold = j.at("threshold").get<double>();
  return r;
}

KpiMeanStd mean_std(const std::vector<double>& vals) {
  KpiMeanStd out;
  std::vector<double> defined;
  for (double v : vals) {
    if (!std::isnan(v)) defined.push_back(v);
  }
  out.count = defined.size();
  if (defined.empty()) {
    out.mean = out.stddev = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double sum = 0.0;
  for (double v : defined) sum += v;
  out.mean = sum / static_cast<double>(defined.size());
  double sq = 0.0;
  for (double v : defined) sq += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(sq / static_cast<double>(defined.size()));
  return out;
}

std::string pct_cell(const KpiMeanStd& m) {
  if (m.count == 0) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f ±%.2f", 100.0 * m.mean, 100.0 * m.stddev);
  return buf;
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json_file(const std::string& path) {
  return from_json(read_file(path));
}

ExperimentSpec ExperimentSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment spec is not valid JSON: ") + e.what());
  }

  std::vector<std::string> errors;
  auto fail = [&errors](const std::string& msg) { errors.push_back(msg); };

  static const std::vector<std::string> known = {
      "name",     "protocol",   "datasets", "algorithms", "driver",
      "hidden",   "sweep",      "folds",    "stratified", "rates",
      "repeats",  "seed",       "baselines", "top_features", "pdbp", "vpso"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      fail("unknown field '" + it.key() + "'");
    }
  }

  ExperimentSpec spec;
  spec.name = j.value("name", "experiment");

  if (!j.contains("protocol")) {
    fail("missing required field 'protocol'");
  } else {
    try {
      spec.protocol = protocol_from_string(j["protocol"].get<std::string>());
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }

  if (!j.contains("datasets") || !j["datasets"].is_array() || j["datasets"].empty()) {
    fail("'datasets' must be a non-empty array of {csv, manifest}");
  } else {
    for (const auto& dj : j["datasets"]) {
      if (!dj.contains("csv") || !dj.contains("manifest")) {
        fail("each dataset entry needs 'csv' and 'manifest'");
        continue;
      }
      spec.datasets.push_back(
          {dj["csv"].get<std::string>(), dj["manifest"].get<std::string>()});
    }
  }

  if (j.contains("algorithms")) {
    for (const auto& aj : j["algorithms"]) {
      try {
        spec.algorithms.push_back(algorithm_from_string(aj.get<std::string>()));
      } catch (const ConfigError& e) {
        fail(e.what());
      }
    }
  }
  if (spec.algorithms.empty()) spec.algorithms.push_back(Algorithm::Pdbp);

  if (j.contains("driver")) {
    try {
      spec.driver = driver_from_string(j["driver"].get<std::string>());
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }

  if (j.contains("hidden")) {
    const long long m = j["hidden"].get<long long>();
    if (m < 1) {
      fail("'hidden' must be >= 1");
    } else {
      spec.hidden = static_cast<std::size_t>(m);
    }
  }

  if (j.contains("sweep")) {
    const auto& sj = j["sweep"];
    if (sj.contains("from")) {
      const long long f = sj["from"].get<long long>();
      if (f < 1) fail("'sweep.from' must be >= 1");
      else spec.sweep_from = static_cast<std::size_t>(f);
    }
    if (sj.contains("to")) {
      const long long t = sj["to"].get<long long>();
      if (t < 1) fail("'sweep.to' must be >= 1");
      else spec.sweep_to = static_cast<std::size_t>(t);
    }
    if (spec.sweep_to && *spec.sweep_to < spec.sweep_from) {
      fail("'sweep.to' must be >= 'sweep.from'");
    }
  }

  spec.folds = j.value("folds", std::size_t{10});
  if (spec.protocol == Protocol::KfoldCv && spec.folds < 2) {
    fail("'folds' must be >= 2");
  }
  spec.stratified = j.value("stratified", true);

  if (j.contains("rates")) {
    for (const auto& rj : j["rates"]) {
      const double r = rj.get<double>();
      if (!(r > 0.0 && r < 1.0)) {
        fail("training rate " + std::to_string(r) + " must lie in the open interval (0,1)");
      }
      spec.rates.push_back(r);
    }
  }
  if (spec.rates.empty()) spec.rates = {0.5, 0.6, 0.7, 0.8, 0.9};

  spec.repeats = j.value("repeats", std::size_t{1});
  if (spec.repeats < 1) fail("'repeats' must be >= 1");
  spec.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("baselines")) spec.baselines = j["baselines"].get<std::string>();
  if (spec.protocol == Protocol::Compare && !spec.baselines) {
    fail("compare protocol requires a 'baselines' file");
  }
  spec.top_features = j.value("top_features", std::size_t{12});
  if (spec.top_features < 1) fail("'top_features' must be >= 1");

  if (j.contains("pdbp")) {
    const auto& pj = j["pdbp"];
    spec.pdbp.max_iterations = pj.value("max_iterations", spec.pdbp.max_iterations);
    if (pj.contains("tolerance") && !pj["tolerance"].is_null()) {
      spec.pdbp.tolerance = pj["tolerance"].get<std::size_t>();
    }
    spec.pdbp.learning_rate = pj.value("learning_rate", spec.pdbp.learning_rate);
    spec.pdbp.init_range = pj.value("init_range", spec.pdbp.init_range);
    spec.pdbp.threshold = pj.value("threshold", spec.pdbp.threshold);
  }
  if (j.contains("vpso")) {
    const auto& vj = j["vpso"];
    if (vj.contains("population") && !vj["population"].is_null()) {
      spec.vpso.population = vj["population"].get<std::size_t>();
    }
    spec.vpso.max_iterations = vj.value("max_iterations", spec.vpso.max_iterations);
    if (vj.contains("tolerance") && !vj["tolerance"].is_null()) {
      spec.vpso.tolerance = vj["tolerance"].get<std::size_t>();
    }
    if (vj.contains("reorder_period") && !vj["reorder_period"].is_null()) {
      spec.vpso.reorder_period = vj["reorder_period"].get<std::size_t>();
    }
    spec.vpso.c1 = vj.value("c1", spec.vpso.c1);
    spec.vpso.c2 = vj.value("c2", spec.vpso.c2);
    spec.vpso.inertia_max = vj.value("inertia_max", spec.vpso.inertia_max);
    spec.vpso.inertia_min = vj.value("inertia_min", spec.vpso.inertia_min);
    spec.vpso.mass_epsilon = vj.value("mass_epsilon", spec.vpso.mass_epsilon);
    spec.vpso.threshold = vj.value("threshold", spec.vpso.threshold);
  }

  const bool needs_hidden = spec.protocol == Protocol::FullTrain ||
                            spec.protocol == Protocol::KfoldCv ||
                            spec.protocol == Protocol::RateSweep;
  if (needs_hidden && !spec.hidden) {
    fail("protocol '" + to_string(spec.protocol) + "' requires 'hidden'");
  }

  if (!errors.empty()) {
    std::string all = "experiment spec has " + std::to_string(errors.size()) +
                      " problem(s):";
    for (const auto& e : errors) all += "\n  - " + e;
    throw ConfigError(all);
  }
  return spec;
}

std::string RunRecord::to_json() const {
  json j;
  j["run_index"] = run_index;
  j["group"] = group;
  j["seed"] = seed;
  j["dataset"] = dataset;
  j["algorithm"] = snnforge::to_string(algorithm);
  j["driver"] = snnforge::to_string(driver);
  j["hidden"] = hidden;
  if (fold) j["fold"] = *fold;
  if (rate) j["rate"] = *rate;
  j["train_rows"] = train_rows;
  j["test_rows"] = test_rows;
  j["eval"] = kpi_to_json(eval);
  j["eval_on_test"] = eval_on_test;
  j["best_iteration"] = best_iteration;
  j["iterations_run"] = iterations_run;
  j["train_time_ms"] = train_time_ms;
  return j.dump(2);
}

RunRecord RunRecord::from_json(const std::string& text) {
  json j = json::parse(text);
  RunRecord r;
  r.run_index = j.at("run_index").get<std::size_t>();
  r.group = j.value("group", "");
  r.seed = j.at("seed").get<std::uint64_t>();
  r.dataset = j.at("dataset").get<std::string>();
  r.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  r.driver = driver_from_string(j.at("driver").get<std::string>());
  r.hidden = j.at("hidden").get<std::size_t>();
  if (j.contains("fold")) r.fold = j["fold"].get<std::size_t>();
  if (j.contains("rate")) r.rate = j["rate"].get<double>();
  r.train_rows = j.value("train_rows", std::vector<std::size_t>{});
  r.test_rows = j.value("test_rows", std::vector<std::size_t>{});
  r.eval = kpi_from_json(j.at("eval"));
  r.eval_on_test = j.at("eval_on_test").get<bool>();
  r.best_iteration = j.at("best_iteration").get<std::size_t>();
  r.iterations_run = j.at("iterations_run").get<std::size_t>();
  r.train_time_ms = j.at("train_time_ms").get<double>();
  return r;
}

AggregateReport AggregateReport::from_reports(const std::string& label,
                                              const std::vector<KpiReport>& rows) {
  AggregateReport a;
  a.label = label;
  a.runs = rows.size();
  auto collect = [&rows](double KpiReport::* field) {
    std::vector<double> vals;
    vals.reserve(rows.size());
    for (const auto& r : rows) vals.push_back(r.*field);
    return vals;
  };
  a.err = mean_std(collect(&KpiReport::err));
  a.acc = mean_std(collect(&KpiReport::acc));
  a.f1 = mean_std(collect(&KpiReport::f1));
  a.auc = mean_std(collect(&KpiReport::auc));
  a.tpr = mean_std(collect(&KpiReport::tpr));
  a.tnr = mean_std(collect(&KpiReport::tnr));
  return a;
}

TrainedResult train_once(const Dataset& train, Algorithm algorithm,
                         Driver driver, std::size_t m, std::uint64_t seed,
                         const PdbpConfig& pdbp, const VpsoConfig& vpso) {
  if (algorithm == Algorithm::Pdbp) {
    PdbpConfig c = pdbp;
    c.driver = driver;
    c.seed = seed;
    return train_pdbp(train, m, c);
  }
  VpsoConfig c = vpso;
  c.driver = driver;
  c.seed = seed;
  return optimize_vpso(train, m, c);
}

KpiReport evaluate_model(const SnnModel& model, const Dataset& data,
                         double threshold) {
  std::vector<double> outputs;
  batch_outputs(model, data, outputs);
  return kpi_suite(data.labels, outputs, threshold);
}

std::pair<Dataset, Dataset> preprocess_split(const Dataset& raw_train,
                                             const Dataset& raw_test) {
  const ImputeStats imp = fit_class_means(raw_train);
  Dataset train = apply_impute(raw_train, imp);
  Dataset test = apply_impute(raw_test, imp);
  const NormStats norm = fit_minmax(train);
  return {apply_minmax(train, norm), apply_minmax(test, norm)};
}

Dataset preprocess_full(const Dataset& raw) {
  return normalize_minmax(impute_class_mean(raw));
}

namespace {

Dataset load_raw(const DatasetRef& ref) {
  return load_csv(ref.csv, DatasetManifest::from_json_file(ref.manifest));
}

struct GroupKey {
  std::string label;
  std::vector<KpiReport> rows;
};

std::vector<AggregateReport> aggregate_by_group(const std::vector<RunRecord>& runs) {
  std::vector<GroupKey> groups;
  for (const auto& r : runs) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const GroupKey& g) { return g.label == r.group; });
    if (it == groups.end()) {
      groups.push_back({r.group, {}});
      it = std::prev(groups.end());
    }
    it->rows.push_back(r.eval);
  }
  std::vector<AggregateReport> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    out.push_back(AggregateReport::from_reports(g.label, g.rows));
  }
  return out;
}

std::string render_generic_table(const std::vector<AggregateReport>& aggs) {
  std::string md = "| group | runs | ERR | ACC | F1 | AUC | TPR | TNR |\n";
  md += "|---|---|---|---|---|---|---|---|\n";
  char err_buf[64];
  for (const auto& a : aggs) {
    std::snprintf(err_buf, sizeof(err_buf), "%.4f ±%.4f", a.err.mean, a.err.stddev);
    md += "| " + a.label + " | " + std::to_string(a.runs) + " | " + err_buf +
          " | " + pct_cell(a.acc) + " | " + pct_cell(a.f1) + " | " +
          pct_cell(a.auc) + " | " + pct_cell(a.tpr) + " | " + pct_cell(a.tnr) +
          " |\n";
  }
  return md;
}

std::string render_compare_table(
    const std::vector<AggregateReport>& aggs, const BaselineTable& baselines,
    const std::vector<std::tuple<std::string, std::size_t, std::size_t>>& dataset_info,
    const std::vector<Algorithm>& algorithms, Driver driver) {
  std::string md = "| Data | n | N |";
  for (const auto& col : baselines.columns) md += " " + col + " |";
  for (Algorithm a : algorithms) {
    std::string up = to_string(driver);
    for (auto& ch : up) ch = static_cast<char>(std::toupper(ch));
    std::string alg = to_string(a);
    for (auto& ch : alg) ch = static_cast<char>(std::toupper(ch));
    md += " " + up + "-" + alg + " |";
  }
  md += "\n|---|---|---|";
  for (std::size_t i = 0; i < baselines.columns.size() + algorithms.size(); ++i)
    md += "---|";
  md += "\n";

  char buf[64];
  for (const auto& [name, n, N] : dataset_info) {
    md += "| " + name + " | " + std::to_string(n) + " | " + std::to_string(N) + " |";
    const auto row_it = baselines.rows.find(name);
    for (const auto& col : baselines.columns) {
      if (row_it != baselines.rows.end() &&
          row_it->second.values.count(col) > 0) {
        const auto [mean, dev] = row_it->second.values.at(col);
        std::snprintf(buf, sizeof(buf), "%.2f ±%.2f", mean, dev);
        md += std::string(" ") + buf + " |";
      } else {
        md += " n/a |";
      }
    }
    for (Algorithm a : algorithms) {
      const std::string label = name + "/" + to_string(a);
      auto it = std::find_if(aggs.begin(), aggs.end(), [&](const AggregateReport& g) {
        return g.label == label;
      });
      md += it == aggs.end() ? " n/a |" : " " + pct_cell(it->acc) + " |";
    }
    md += "\n";
  }
  md += "\nBaseline columns are published constants";
  if (!baselines.sources.empty()) md += " (see the baselines file for sources)";
  md += "; the last columns are mean test accuracy over this run's splits.\n";
  return md;
}

// Runs `count` independent jobs, optionally in parallel, collecting failures.
void for_each_run(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn,
                  std::vector<std::size_t>& failed,
                  std::vector<std::string>& messages) {
  std::vector<std::string> errors(count);
  std::vector<char> bad(count, 0);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (const std::exception& e) {
        bad[i] = 1;
        errors[i] = e.what();
      }
    }
  } else {
#pragma omp parallel for schedule(dynamic) num_threads(static_cast<int>(jobs))
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (const std::exception& e) {
        bad[static_cast<std::size_t>(i)] = 1;
        errors[static_cast<std::size_t>(i)] = e.what();
      }
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (bad[i]) {
      failed.push_back(i);
      messages.push_back("run " + std::to_string(i) + ": " + errors[i]);
    }
  }
}

}  // namespace

ExperimentResult run_full_train(const ExperimentSpec& spec) {
  const Dataset raw = load_raw(spec.datasets.front());
  const Dataset data = preprocess_full(raw);
  const std::size_t m = *spec.hidden;

  struct Job {
    Algorithm algorithm;
    std::size_t repeat;
  };
  std::vector<Job> jobs_list;
  for (Algorithm a : spec.algorithms) {
    for (std::size_t r = 0; r < spec.repeats; ++r) jobs_list.push_back({a, r});
  }

  ExperimentResult result;
  result.runs.resize(jobs_list.size());
  std::vector<std::string> messages;
  for_each_run(
      jobs_list.size(), spec.jobs,
      [&](std::size_t i) {
        const Job& job = jobs_list[i];
        const std::uint64_t seed = spec.seed + job.repeat;
        TrainedResult trained = train_once(data, job.algorithm, spec.driver, m,
                                           seed, spec.pdbp, spec.vpso);
        RunRecord rec;
        rec.run_index = i;
        rec.group = data.name + "/" + to_string(spec.driver) + "-" +
                    to_string(job.algorithm);
        rec.seed = seed;
        rec.dataset = data.name;
        rec.algorithm = job.algorithm;
        rec.driver = spec.driver;
        rec.hidden = m;
        rec.eval = trained.report_at_best();
        rec.eval_on_test = false;
        rec.best_iteration = trained.best_iteration;
        rec.iterations_run = trained.iterations_run;
        rec.train_time_ms = trained.train_time_ms;
        rec.trace = std::move(trained.trace);
        result.runs[i] = std::move(rec);
      },
      result.failed_runs, messages);
  result.messages = std::move(messages);
  result.aggregates = aggregate_by_group(result.runs);
  result.table_md = render_generic_table(result.aggregates);
  return result;
}

ExperimentResult run_incremental_sweep(const ExperimentSpec& spec) {
  const Dataset raw = load_raw(spec.datasets.front());
  const Dataset data = preprocess_full(raw);
  const std::size_t m_from = spec.sweep_from;
  const std::size_t m_to = spec.sweep_to ? *spec.sweep_to : data.cols();
  if (m_to < m_from) throw ConfigError("sweep range is empty");

  struct Job {
    Algorithm algorithm;
    std::size_t m;
    std::size_t repeat;
  };
  std::vector<Job> jobs_list;
  for (Algorithm a : spec.algorithms) {
    for (std::size_t m = m_from; m <= m_to; ++m) {
      for (std::size_t r = 0; r < spec.repeats; ++r) jobs_list.push_back({a, m, r});
    }
  }

  ExperimentResult result;
  result.runs.resize(jobs_list.size());
  std::vector<std::string> messages;
  for_each_run(
      jobs_list.size(), spec.jobs,
      [&](std::size_t i) {
        const Job& job = jobs_list[i];
        // Seeds are paired across m so the sweep compares like with like.
        const std::uint64_t seed = spec.seed + job.repeat;
        TrainedResult trained = train_once(data, job.algorithm, spec.driver,
                                           job.m, seed, spec.pdbp, spec.vpso);
        RunRecord rec;
        rec.run_index = i;
        rec.group = data.name + "/" + to_string(spec.driver) + "-" +
                    to_string(job.algorithm) + "/m=" + std::to_string(job.m);
        rec.seed = seed;
        rec.dataset = data.name;
        rec.algorithm = job.algorithm;
        rec.driver = spec.driver;
        rec.hidden = job.m;
        rec.eval = trained.report_at_best();
        rec.eval_on_test = false;
        rec.best_iteration = trained.best_iteration;
        rec.iterations_run = trained.iterations_run;
        rec.train_time_ms = trained.train_time_ms;
        rec.trace = std::move(trained.trace);
        result.runs[i] = std::move(rec);
      },
      result.failed_runs, messages);
  result.messages = std::move(messages);
  result.aggregates = aggregate_by_group(result.runs);
  result.table_md = render_generic_table(result.aggregates);
  return result;
}

ExperimentResult run_kfold_cv(const ExperimentSpec& spec) {
  const Dataset raw = load_raw(spec.datasets.front());
  const std::size_t m = *spec.hidden;
  const FoldPlan plan = make_folds(raw, spec.folds, spec.seed, spec.stratified);

  struct Job {
    Algorithm algorithm;
    std::size_t fold;
  };
  std::vector<Job> jobs_list;
  for (Algorithm a : spec.algorithms) {
    for (std::size_t f = 0; f < spec.folds; ++f) jobs_list.push_back({a, f});
  }

  ExperimentResult result;
  result.runs.resize(jobs_list.size());
  std::vector<std::string> messages;
  for_each_run(
      jobs_list.size(), spec.jobs,
      [&](std::size_t i) {
        const Job& job = jobs_list[i];
        const std::vector<std::size_t> train_rows = plan.complement_rows(job.fold);
        const std::vector<std::size_t> test_rows = plan.fold_rows(job.fold);
        auto [train, test] =
            preprocess_split(raw.subset(train_rows), raw.subset(test_rows));
        const std::uint64_t seed = spec.seed + job.fold;
        TrainedResult trained = train_once(train, job.algorithm, spec.driver, m,
                                           seed, spec.pdbp, spec.vpso);
        RunRecord rec;
        rec.run_index = i;
        rec.group = raw.name + "/" + to_string(spec.driver) + "-" +
                    to_string(job.algorithm);
        rec.seed = seed;
        rec.dataset = raw.name;
        rec.algorithm = job.algorithm;
        rec.driver = spec.driver;
        rec.hidden = m;
        rec.fold = job.fold;
        rec.train_rows = train_rows;
        rec.test_rows = test_rows;
        rec.eval = evaluate_model(trained.model, test,
                                  spec.pdbp.threshold);
        rec.eval_on_test = true;
        rec.best_iteration = trained.best_iteration;
        rec.iterations_run = trained.iterations_run;
        rec.train_time_ms = trained.train_time_ms;
        rec.trace = std::move(trained.trace);
        result.runs[i] = std::move(rec);
      },
      result.failed_runs, messages);
  result.messages = std::move(messages);
  result.aggregates = aggregate_by_group(result.runs);
  result.table_md = render_generic_table(result.aggregates);
  return result;
}

ExperimentResult run_rate_sweep(const ExperimentSpec& spec) {
  const Dataset raw = load_raw(spec.datasets.front());
  const std::size_t m = *spec.hidden;

  struct Job {
    Algorithm algorithm;
    std::size_t rate_index;
    std::size_t repeat;
  };
  std::vector<Job> jobs_list;
  for (Algorithm a : spec.algorithms) {
    for (std::size_t ri = 0; ri < spec.rates.size(); ++ri) {
      for (std::size_t r = 0; r < spec.repeats; ++r) jobs_list.push_back({a, ri, r});
    }
  }

  ExperimentResult result;
  result.runs.resize(jobs_list.size());
  std::vector<std::string> messages;
  for_each_run(
      jobs_list.size(), spec.jobs,
      [&](std::size_t i) {
        const Job& job = jobs_list[i];
        const double rate = spec.rates[job.rate_index];
        const std::uint64_t seed =
            spec.seed + job.rate_index * spec.repeats + job.repeat;
        auto [train_rows, test_rows] = split_indices(raw.rows(), rate, seed);
        auto [train, test] =
            preprocess_split(raw.subset(train_rows), raw.subset(test_rows));
        TrainedResult trained = train_once(train, job.algorithm, spec.driver, m,
                                           seed, spec.pdbp, spec.vpso);
        RunRecord rec;
        rec.run_index = i;
        char rate_label[32];
        std::snprintf(rate_label, sizeof(rate_label), "rate=%.2f", rate);
        rec.group = raw.name + "/" + to_string(spec.driver) + "-" +
                    to_string(job.algorithm) + "/" + rate_label;
        rec.seed = seed;
        rec.dataset = raw.name;
        rec.algorithm = job.algorithm;
        rec.driver = spec.driver;
        rec.hidden = m;
        rec.rate = rate;
        rec.train_rows = train_rows;
        rec.test_rows = test_rows;
        rec.eval = evaluate_model(trained.model, test, spec.pdbp.threshold);
        rec.eval_on_test = true;
        rec.best_iteration = trained.best_iteration;
        rec.iterations_run = trained.iterations_run;
        rec.train_time_ms = trained.train_time_ms;
        rec.trace = std::move(trained.trace);
        result.runs[i] = std::move(rec);
      },
      result.failed_runs, messages);
  result.messages = std::move(messages);
  result.aggregates = aggregate_by_group(result.runs);
  result.table_md = render_generic_table(result.aggregates);
  return result;
}

ExperimentResult run_compare(const ExperimentSpec& spec) {
  const BaselineTable baselines = BaselineTable::from_json_file(*spec.baselines);

  ExperimentResult result;
  std::vector<std::tuple<std::string, std::size_t, std::size_t>> dataset_info;

  for (const auto& ref : spec.datasets) {
    Dataset raw;
    try {
      raw = load_raw(ref);
    } catch (const std::exception& e) {
      result.messages.push_back(std::string("dataset '") + ref.csv +
                                "' failed: " + e.what());
      result.failed_runs.push_back(result.runs.size());
      continue;
    }
    dataset_info.emplace_back(raw.name, raw.cols(), raw.rows());

    // Wide datasets keep only the top information-gain features; the
    // ranking is computed once on the class-mean-imputed full table.
    Dataset working = raw;
    if (raw.cols() > spec.top_features) {
      const Dataset for_ranking = impute_class_mean(raw);
      const auto ranking = info_gain_rank(for_ranking);
      working = select_top_features(raw, spec.top_features, ranking);
    }
    const std::size_t m = (working.cols() + 1) / 2;  // ceil(n/2)

    struct Job {
      Algorithm algorithm;
      std::size_t repeat;
    };
    std::vector<Job> jobs_list;
    for (Algorithm a : spec.algorithms) {
      for (std::size_t r = 0; r < spec.repeats; ++r) jobs_list.push_back({a, r});
    }

    const std::size_t base_index = result.runs.size();
    result.runs.resize(base_index + jobs_list.size());
    std::vector<std::size_t> failed_local;
    std::vector<std::string> messages_local;
    for_each_run(
        jobs_list.size(), spec.jobs,
        [&](std::size_t i) {
          const Job& job = jobs_list[i];
          // Splits depend only on the repeat, so both algorithms see the
          // same train/test partitions.
          const std::uint64_t seed = spec.seed + job.repeat;
          auto [train_rows, test_rows] = split_indices(working.rows(), 0.5, seed);
          auto [train, test] = preprocess_split(working.subset(train_rows),
                                                working.subset(test_rows));
          TrainedResult trained = train_once(train, job.algorithm, spec.driver,
                                             m, seed, spec.pdbp, spec.vpso);
          RunRecord rec;
          rec.run_index = base_index + i;
          rec.group = working.name + "/" + to_string(job.algorithm);
          rec.seed = seed;
          rec.dataset = working.name;
          rec.algorithm = job.algorithm;
          rec.driver = spec.driver;
          rec.hidden = m;
          rec.rate = 0.5;
          rec.train_rows = train_rows;
          rec.test_rows = test_rows;
          rec.eval = evaluate_model(trained.model, test, spec.pdbp.threshold);
          rec.eval_on_test = true;
          rec.best_iteration = trained.best_iteration;
          rec.iterations_run = trained.iterations_run;
          rec.train_time_ms = trained.train_time_ms;
          rec.trace = std::move(trained.trace);
          result.runs[base_index + i] = std::move(rec);
        },
        failed_local, messages_local);
    for (std::size_t f : failed_local) result.failed_runs.push_back(base_index + f);
    for (auto& msg : messages_local) result.messages.push_back(std::move(msg));
  }

  result.aggregates = aggregate_by_group(result.runs);
  result.table_md = render_compare_table(result.aggregates, baselines,
                                         dataset_info, spec.algorithms,
                                         spec.driver);
  return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  switch (spec.protocol) {
    case Protocol::FullTrain: return run_full_train(spec);
    case Protocol::IncrementalSweep: return run_incremental_sweep(spec);
    case Protocol::KfoldCv: return run_kfold_cv(spec);
    case Protocol::RateSweep: return run_rate_sweep(spec);
    case Protocol::Compare: return run_compare(spec);
  }
  throw ConfigError("unhandled protocol");
}

namespace {

std::string aggregates_csv(const std::vector<AggregateReport>& aggs) {
  std::string csv =
      "group,runs,err_mean,err_std,acc_mean,acc_std,f1_mean,f1_std,"
      "auc_mean,auc_std,tpr_mean,tpr_std,tnr_mean,tnr_std\n";
  char buf[512];
  for (const auto& a : aggs) {
    std::snprintf(buf, sizeof(buf),
                  "%s,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g\n",
                  a.label.c_str(), a.runs, a.err.mean, a.err.stddev, a.acc.mean,
                  a.acc.stddev, a.f1.mean, a.f1.stddev, a.auc.mean, a.auc.stddev,
                  a.tpr.mean, a.tpr.stddev, a.tnr.mean, a.tnr.stddev);
    csv += buf;
  }
  return csv;
}

}  // namespace

void write_experiment(const ExperimentResult& result, const ExperimentSpec& spec,
                      const std::string& out_dir) {
  fs::create_directories(fs::path(out_dir) / "runs");
  write_file((fs::path(out_dir) / "report.csv").string(),
             aggregates_csv(result.aggregates));
  write_file((fs::path(out_dir) / "table.md").string(), result.table_md);

  json meta;
  meta["name"] = spec.name;
  meta["protocol"] = to_string(spec.protocol);
  meta["driver"] = to_string(spec.driver);
  json algs = json::array();
  for (Algorithm a : spec.algorithms) algs.push_back(to_string(a));
  meta["algorithms"] = algs;
  meta["seed"] = spec.seed;
  meta["seed_scheme"] =
      "per-run seed = seed + counter (repeat, fold, or rate_index*repeats+repeat)";
  meta["repeats"] = spec.repeats;
  if (spec.baselines) meta["baselines"] = *spec.baselines;
  json ds = json::array();
  for (const auto& ref : spec.datasets) {
    json dj;
    dj["csv"] = ref.csv;
    dj["manifest"] = ref.manifest;
    dj["checksum_fnv1a64"] = file_checksum(ref.csv);
    ds.push_back(dj);
  }
  meta["datasets"] = ds;
  json failed = json::array();
  for (std::size_t f : result.failed_runs) failed.push_back(f);
  meta["failed_runs"] = failed;
  meta["messages"] = result.messages;
  write_file((fs::path(out_dir) / "experiment.json").string(), meta.dump(2));

  char name[64];
  for (const auto& run : result.runs) {
    std::snprintf(name, sizeof(name), "run_%03zu", run.run_index);
    write_file((fs::path(out_dir) / "runs" / (std::string(name) + ".json")).string(),
               run.to_json());
    const bool with_fitness = run.algorithm == Algorithm::Vpso;
    write_file(
        (fs::path(out_dir) / "runs" / (std::string(name) + "_trace.csv")).string(),
        trace_to_csv(run.trace, with_fitness));
  }
}

void rerender_report(const std::string& out_dir) {
  const fs::path runs_dir = fs::path(out_dir) / "runs";
  if (!fs::exists(runs_dir)) {
    throw DataError("no runs directory under " + out_dir);
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    const std::string fn = entry.path().filename().string();
    if (fn.size() > 5 && fn.substr(fn.size() - 5) == ".json") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> runs;
  for (const auto& f : files) runs.push_back(RunRecord::from_json(read_file(f)));
  std::sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) {
    return a.run_index < b.run_index;
  });

  const auto aggs = aggregate_by_group(runs);
  write_file((fs::path(out_dir) / "report.csv").string(), aggregates_csv(aggs));

  // Rebuild the table; compare runs need the persisted context.
  const fs::path meta_path = fs::path(out_dir) / "experiment.json";
  std::string table;
  if (fs::exists(meta_path)) {
    const json meta = json::parse(read_file(meta_path.string()));
    if (meta.value("protocol", "") == "compare" && meta.contains("baselines")) {
      const BaselineTable baselines =
          BaselineTable::from_json_file(meta["baselines"].get<std::string>());
      std::vector<std::tuple<std::string, std::size_t, std::size_t>> info;
      std::vector<Algorithm> algorithms;
      for (const auto& aj : meta["algorithms"]) {
        algorithms.push_back(algorithm_from_string(aj.get<std::string>()));
      }
      // Dataset display rows from the baselines file where known.
      std::vector<std::string> seen;
      for (const auto& r : runs) {
        if (std::find(seen.begin(), seen.end(), r.dataset) == seen.end()) {
          seen.push_back(r.dataset);
          const auto it = baselines.rows.find(r.dataset);
          if (it != baselines.rows.end()) {
            info.emplace_back(r.dataset, it->second.n, it->second.N);
          } else {
            info.emplace_back(r.dataset, 0, 0);
          }
        }
      }
      const Driver driver = runs.empty() ? Driver::Acc : runs.front().driver;
      table = render_compare_table(aggs, baselines, info, algorithms, driver);
    }
  }
  if (table.empty()) table = render_generic_table(aggs);
  write_file((fs::path(out_dir) / "table.md").string(), table);
}

BaselineTable BaselineTable::from_json_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(std::string("baselines file is not valid JSON: ") + e.what());
  }
  BaselineTable t;
  if (j.contains("columns")) {
    for (auto it = j["columns"].begin(); it != j["columns"].end(); ++it) {
      t.sources[it.key()] = it.value().get<std::string>();
    }
  }
  if (j.contains("column_order")) {
    t.columns = j["column_order"].get<std::vector<std::string>>();
  } else {
    for (const auto& [col, src] : t.sources) t.columns.push_back(col);
  }
  if (j.contains("datasets")) {
    for (auto it = j["datasets"].begin(); it != j["datasets"].end(); ++it) {
      Row row;
      const json& rj = it.value();
      row.n = rj.value("n", std::size_t{0});
      row.N = rj.value("N", std::size_t{0});
      for (const auto& col : t.columns) {
        if (rj.contains(col)) {
          const auto pair = rj[col].get<std::vector<double>>();
          if (pair.size() == 2) row.values[col] = {pair[0], pair[1]};
        }
      }
      t.rows[it.key()] = row;
    }
  }
  return t;
}

}  // namespace snnforge
