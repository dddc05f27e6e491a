#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "snnforge/dataset.hpp"
#include "snnforge/experiment.hpp"
#include "snnforge/kernels.hpp"
#include "snnforge/metrics.hpp"
#include "snnforge/pdbp.hpp"
#include "snnforge/vpso.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace snnforge;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << text;
}

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

// --seed flag wins, then SNN_FORGE_SEED, then 0.
std::pair<std::uint64_t, std::string> resolve_seed(
    const std::optional<std::uint64_t>& flag) {
  if (flag) return {*flag, "flag"};
  if (const char* env = std::getenv("SNN_FORGE_SEED")) {
    return {std::strtoull(env, nullptr, 10), "env"};
  }
  return {0, "default"};
}

json dataset_meta(const std::string& csv, const std::string& manifest,
                  const Dataset& d) {
  json j;
  j["csv"] = csv;
  j["manifest"] = manifest;
  j["checksum_fnv1a64"] = file_checksum(csv);
  j["rows"] = d.rows();
  j["features"] = d.cols();
  return j;
}

json pdbp_config_json(const PdbpConfig& c, std::size_t d) {
  json j;
  j["driver"] = to_string(c.driver);
  j["max_iterations"] = c.max_iterations;
  j["tolerance"] = c.resolved_tolerance(d);
  j["learning_rate"] = c.learning_rate;
  j["init_range"] = c.init_range;
  j["threshold"] = c.threshold;
  j["seed"] = c.seed;
  j["d"] = d;
  return j;
}

json vpso_config_json(const VpsoConfig& c, std::size_t d) {
  json j;
  j["driver"] = to_string(c.driver);
  j["population"] = c.resolved_population(d);
  j["max_iterations"] = c.max_iterations;
  j["tolerance"] = c.resolved_tolerance(d);
  j["reorder_period"] = c.resolved_reorder_period(d);
  j["c1"] = c.c1;
  j["c2"] = c.c2;
  j["inertia_max"] = c.inertia_max;
  j["inertia_min"] = c.inertia_min;
  j["mass_epsilon"] = c.mass_epsilon;
  j["threshold"] = c.threshold;
  j["seed"] = c.seed;
  j["d"] = d;
  return j;
}

void write_manifest(const std::string& out_dir, const std::string& command_line,
                    std::uint64_t seed, const std::string& seed_source,
                    json dataset, json config) {
  json j;
  j["command_line"] = command_line;
  j["tool"] = {{"name", "snnforge"}, {"version", kVersion}};
  j["timestamp_utc"] = timestamp_utc();
  j["seed"] = seed;
  j["seed_source"] = seed_source;
  j["dataset"] = std::move(dataset);
  j["config"] = std::move(config);
  write_file((fs::path(out_dir) / "manifest.json").string(), j.dump(2));
}

std::string snapshot_csv(const Dataset& d) {
  std::string csv;
  for (std::size_t c = 0; c < d.cols(); ++c) csv += d.feature_names[c] + ",";
  csv += "label\n";
  char buf[64];
  for (std::size_t r = 0; r < d.rows(); ++r) {
    for (std::size_t c = 0; c < d.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g,", d.at(r, c));
      csv += buf;
    }
    csv += std::to_string(d.labels[r]) + "\n";
  }
  return csv;
}

std::string imputation_log_csv(const Dataset& d) {
  std::string csv = "row,column,feature,filled_value\n";
  char buf[64];
  for (const auto& cell : d.imputation_log) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%s,%.17g\n", cell.row, cell.col,
                  d.feature_names[cell.col].c_str(), cell.value);
    csv += buf;
  }
  return csv;
}

int cmd_prepare(const std::string& csv, const std::string& manifest_path,
                const std::string& out_dir, const std::string& command_line) {
  const DatasetManifest manifest = DatasetManifest::from_json_file(manifest_path);
  const Dataset raw = load_csv(csv, manifest);
  std::fprintf(stderr, "loaded %s: %zu rows, %zu features, %zu missing cells\n",
               raw.name.c_str(), raw.rows(), raw.cols(), raw.missing_cells.size());
  const Dataset prepared = preprocess_full(raw);

  fs::create_directories(out_dir);
  write_file((fs::path(out_dir) / "dataset_snapshot.csv").string(),
             snapshot_csv(prepared));
  write_file((fs::path(out_dir) / "imputation_log.csv").string(),
             imputation_log_csv(prepared));
  write_manifest(out_dir, command_line, 0, "none",
                 dataset_meta(csv, manifest_path, raw),
                 json{{"pipeline", "impute_class_mean + normalize_minmax"}});
  std::fprintf(stderr, "prepared snapshot written to %s (%zu cells imputed)\n",
               out_dir.c_str(), prepared.imputation_log.size());
  return 0;
}

std::string run_report_csv(const TrainedResult& result) {
  std::string csv = "which," + KpiReport::csv_header() +
                    ",best_iteration,iterations_run,train_time_ms\n";
  char buf[96];
  std::snprintf(buf, sizeof(buf), ",%zu,%zu,%.3f\n", result.best_iteration,
                result.iterations_run, result.train_time_ms);
  csv += "at_best," + result.report_at_best().csv_row() + buf;
  csv += "final," + result.final_report.csv_row() + buf;
  return csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"snnforge: shallow sigmoid network training by "
               "performance-driven backpropagation and a variant particle "
               "swarm optimizer, plus an experiment harness"};
  app.require_subcommand(1);
  const std::string command_line = join_args(argc, argv);

  // prepare
  auto* prepare = app.add_subcommand(
      "prepare", "Ingest a CSV: impute class means, scale to [0,1], write a "
                 "snapshot and the imputation log");
  std::string prep_csv, prep_manifest, prep_out;
  prepare->add_option("--csv", prep_csv, "dataset CSV")->required();
  prepare->add_option("--manifest", prep_manifest, "dataset manifest JSON")->required();
  prepare->add_option("--out", prep_out, "output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "Train one network and write "
                                            "model, trace and report");
  std::string trn_csv, trn_manifest, trn_out, trn_algo = "pdbp", trn_driver = "acc";
  std::size_t trn_hidden = 0;
  std::optional<std::uint64_t> trn_seed;
  PdbpConfig pdbp_cfg;
  VpsoConfig vpso_cfg;
  std::optional<std::size_t> opt_tolerance, opt_npop, opt_period;
  std::optional<std::size_t> opt_max_iter;
  train->add_option("--csv", trn_csv, "dataset CSV")->required();
  train->add_option("--manifest", trn_manifest, "dataset manifest JSON")->required();
  train->add_option("--out", trn_out, "output directory")->required();
  train->add_option("--algo", trn_algo, "pdbp or vpso")
      ->check(CLI::IsMember({"pdbp", "vpso"}));
  train->add_option("--driver", trn_driver, "err, acc or f1")
      ->check(CLI::IsMember({"err", "acc", "f1"}));
  train->add_option("--hidden", trn_hidden, "hidden neurons m")->required();
  train->add_option("--seed", trn_seed, "RNG seed (falls back to SNN_FORGE_SEED)");
  train->add_option("--max-iter", opt_max_iter, "iteration cap (default 20000)");
  train->add_option("--tolerance", opt_tolerance,
                    "stall tolerance (default 20*d)");
  train->add_option("--eta,--learning-rate", pdbp_cfg.learning_rate,
                    "pdbp learning rate (default 0.05)");
  train->add_option("--init-range", pdbp_cfg.init_range,
                    "pdbp init range (default 0.5)");
  train->add_option("--threshold", pdbp_cfg.threshold,
                    "classification threshold (default 0.5)");
  train->add_option("--npop", opt_npop, "vpso population (default 2*d)");
  train->add_option("--reorder-period", opt_period,
                    "vpso ring reorder period (default 10*d)");
  train->add_option("--c1", vpso_cfg.c1, "vpso cognitive coefficient");
  train->add_option("--c2", vpso_cfg.c2, "vpso social coefficient");
  train->add_option("--wmax", vpso_cfg.inertia_max, "vpso max inertia");
  train->add_option("--wmin", vpso_cfg.inertia_min, "vpso min inertia");
  train->add_option("--eps-mass", vpso_cfg.mass_epsilon, "vpso mass epsilon");

  // experiment
  auto* experiment = app.add_subcommand(
      "experiment", "Run an experiment spec end to end and write its artifacts");
  std::string exp_spec, exp_out;
  std::size_t exp_jobs = 1;
  std::optional<std::uint64_t> exp_seed;
  experiment->add_option("--spec", exp_spec, "experiment spec JSON")->required();
  experiment->add_option("--out", exp_out, "output directory")->required();
  experiment->add_option("--jobs", exp_jobs, "parallel independent runs (default 1)");
  experiment->add_option("--seed", exp_seed, "override the spec's base seed");

  // report
  auto* report = app.add_subcommand(
      "report", "Re-render report.csv and table.md from persisted run records");
  std::string rep_dir;
  report->add_option("--dir", rep_dir, "experiment output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*prepare) {
      return cmd_prepare(prep_csv, prep_manifest, prep_out, command_line);
    }

    if (*train) {
      const auto [seed, seed_source] = resolve_seed(trn_seed);
      const DatasetManifest manifest = DatasetManifest::from_json_file(trn_manifest);
      const Dataset raw = load_csv(trn_csv, manifest);
      const Dataset data = preprocess_full(raw);
      const std::size_t d = dimension_count(data.cols(), trn_hidden);
      const Driver driver = driver_from_string(trn_driver);

      TrainedResult result;
      json config_json;
      if (trn_algo == "pdbp") {
        pdbp_cfg.driver = driver;
        pdbp_cfg.seed = seed;
        if (opt_max_iter) pdbp_cfg.max_iterations = *opt_max_iter;
        if (opt_tolerance) pdbp_cfg.tolerance = *opt_tolerance;
        config_json = pdbp_config_json(pdbp_cfg, d);
        config_json["algorithm"] = "pdbp";
        std::fprintf(stderr, "training %s-pdbp on %s (m=%zu, d=%zu, seed=%llu)\n",
                     trn_driver.c_str(), data.name.c_str(), trn_hidden, d,
                     static_cast<unsigned long long>(seed));
        result = train_pdbp(data, trn_hidden, pdbp_cfg);
      } else {
        vpso_cfg.driver = driver;
        vpso_cfg.seed = seed;
        vpso_cfg.threshold = pdbp_cfg.threshold;
        if (opt_max_iter) vpso_cfg.max_iterations = *opt_max_iter;
        if (opt_tolerance) vpso_cfg.tolerance = *opt_tolerance;
        if (opt_npop) vpso_cfg.population = *opt_npop;
        if (opt_period) vpso_cfg.reorder_period = *opt_period;
        config_json = vpso_config_json(vpso_cfg, d);
        config_json["algorithm"] = "vpso";
        std::fprintf(stderr, "optimizing %s-vpso on %s (m=%zu, d=%zu, seed=%llu)\n",
                     trn_driver.c_str(), data.name.c_str(), trn_hidden, d,
                     static_cast<unsigned long long>(seed));
        result = optimize_vpso(data, trn_hidden, vpso_cfg);
      }

      fs::create_directories(trn_out);
      write_file((fs::path(trn_out) / "model.json").string(),
                 model_to_json(result.model));
      write_file((fs::path(trn_out) / "trace.csv").string(),
                 trace_to_csv(result.trace, trn_algo == "vpso"));
      write_file((fs::path(trn_out) / "report.csv").string(),
                 run_report_csv(result));
      write_manifest(trn_out, command_line, seed, seed_source,
                     dataset_meta(trn_csv, trn_manifest, raw), config_json);
      std::fprintf(stderr,
                   "done: %zu iterations (best at %zu), %.1f ms, "
                   "final acc %.4f, artifacts in %s\n",
                   result.iterations_run, result.best_iteration,
                   result.train_time_ms, result.final_report.acc,
                   trn_out.c_str());
      return 0;
    }

    if (*experiment) {
      ExperimentSpec spec = ExperimentSpec::from_json_file(exp_spec);
      if (exp_seed) {
        spec.seed = *exp_seed;
      } else if (const char* env = std::getenv("SNN_FORGE_SEED");
                 env && spec.seed == 0) {
        spec.seed = std::strtoull(env, nullptr, 10);
      }
      spec.jobs = exp_jobs;
      std::fprintf(stderr, "experiment '%s' (%s), %zu dataset(s), seed %llu\n",
                   spec.name.c_str(), to_string(spec.protocol).c_str(),
                   spec.datasets.size(),
                   static_cast<unsigned long long>(spec.seed));
      const ExperimentResult result = run_experiment(spec);
      write_experiment(result, spec, exp_out);
      write_manifest(exp_out, command_line, spec.seed, "spec",
                     json{{"spec_file", exp_spec}},
                     json{{"protocol", to_string(spec.protocol)},
                          {"jobs", exp_jobs}});
      if (!result.failed_runs.empty()) {
        std::fprintf(stderr, "%zu run(s) failed:\n", result.failed_runs.size());
        for (const auto& msg : result.messages) {
          std::fprintf(stderr, "  %s\n", msg.c_str());
        }
        return 1;
      }
      std::fprintf(stderr, "experiment complete: %zu runs, artifacts in %s\n",
                   result.runs.size(), exp_out.c_str());
      return 0;
    }

    if (*report) {
      rerender_report(rep_dir);
      std::fprintf(stderr, "re-rendered report.csv and table.md in %s\n",
                   rep_dir.c_str());
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const DivergedError& e) {
    std::fprintf(stderr, "training error: %s\n", e.what());
    return 4;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
