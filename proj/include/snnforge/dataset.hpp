#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "snnforge/errors.hpp"

namespace snnforge {

// Per-dataset ingestion rules, loaded from a small JSON file.
struct DatasetManifest {
  std::string name;
  std::string label_column;
  std::string positive_token;
  std::optional<std::string> negative_token;  // unset: any other token is 0
  std::string missing_token = "?";
  std::vector<std::string> id_columns_to_drop;

  static DatasetManifest from_json_file(const std::string& path);
  static DatasetManifest from_json(const std::string& text);
};

struct ImputedCell {
  std::size_t row = 0, col = 0;
  double value = 0.0;
};

// Per-feature (min, max) recorded when min-max scaling was applied, so that
// the same affine map can be reused at evaluation time.
struct NormStats {
  std::vector<std::pair<double, double>> min_max;
};

// Class-conditional per-feature means used to fill missing cells.
struct ImputeStats {
  // means[cls][col]; valid[cls][col] false when the class had no values.
  std::vector<std::vector<double>> means;
  std::vector<std::vector<bool>> valid;
};

struct Dataset {
  std::string name;
  std::vector<std::string> feature_names;
  std::vector<double> features;  // rows*cols row-major; NaN marks missing
  std::vector<int> labels;       // 0/1
  std::vector<std::pair<std::size_t, std::size_t>> missing_cells;
  std::vector<ImputedCell> imputation_log;
  std::optional<NormStats> normalization;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return feature_names.size(); }
  double at(std::size_t r, std::size_t c) const { return features[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return features[r * cols() + c]; }
  const double* row(std::size_t r) const { return features.data() + r * cols(); }
  bool has_missing() const { return !missing_cells.empty(); }
  std::size_t positives() const;

  Dataset subset(const std::vector<std::size_t>& row_indices) const;
  Dataset project(const std::vector<std::size_t>& col_indices) const;
};

// Parse a headered CSV. Feature cells must be numeric or the missing token;
// missing cells are recorded, not filled. Label cells must match the
// manifest tokens. Errors carry 1-based row/column coordinates.
Dataset load_csv(const std::string& path, const DatasetManifest& manifest);

// Statistics fitted on one dataset and applied to another, so that held-out
// rows never contribute to them.
ImputeStats fit_class_means(const Dataset& d);
Dataset apply_impute(const Dataset& d, const ImputeStats& stats);
NormStats fit_minmax(const Dataset& d);
Dataset apply_minmax(const Dataset& d, const NormStats& stats);

// Convenience forms that fit and apply on the same rows.
Dataset impute_class_mean(const Dataset& d);
Dataset normalize_minmax(const Dataset& d);

// Seeded shuffle split; train side takes floor(rate * N) rows. Row order
// within each side is ascending by original index.
std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double rate,
                                             std::uint64_t seed);
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t rows, double rate, std::uint64_t seed);

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // fold index per row
  std::uint64_t seed = 0;
  bool stratified = true;

  std::vector<std::size_t> fold_rows(std::size_t fold) const;
  std::vector<std::size_t> complement_rows(std::size_t fold) const;
};

// Stratified plans deal shuffled positives then shuffled negatives round
// robin, so fold sizes and per-fold positive counts each differ by at most 1.
FoldPlan make_folds(const Dataset& d, std::size_t k, std::uint64_t seed,
                    bool stratified);

// Features ranked by non-increasing information gain against the labels,
// ties broken by ascending feature index. Continuous features are
// discretized by equal-frequency binning; runs of equal values always land
// in one bin, which keeps the ranking invariant under strictly increasing
// transforms of a feature.
std::vector<std::size_t> info_gain_rank(const Dataset& d, std::size_t bins = 10);
std::vector<double> info_gain_values(const Dataset& d, std::size_t bins = 10);

// Keep the k best-ranked features (original column order preserved).
Dataset select_top_features(const Dataset& d, std::size_t k,
                            const std::vector<std::size_t>& ranking);

// FNV-1a 64 of a file's bytes, for run manifests.
std::uint64_t file_checksum(const std::string& path);

}  // namespace snnforge
