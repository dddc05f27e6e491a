#include "snnforge/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "snnforge/rng.hpp"

namespace snnforge {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim_cell(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
    s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
  s.erase(0, b);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(trim_cell(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(trim_cell(cur));
  return cells;
}

}  // namespace

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("manifest is not valid JSON: ") + e.what());
  }
  DatasetManifest m;
  if (!j.contains("label_column") || !j.contains("positive_token")) {
    throw DataError("manifest must declare label_column and positive_token");
  }
  m.name = j.value("name", "");
  m.label_column = j["label_column"].get<std::string>();
  m.positive_token = j["positive_token"].get<std::string>();
  if (j.contains("negative_token")) {
    m.negative_token = j["negative_token"].get<std::string>();
  }
  m.missing_token = j.value("missing_token", "?");
  if (j.contains("id_columns_to_drop")) {
    m.id_columns_to_drop = j["id_columns_to_drop"].get<std::vector<std::string>>();
  }
  return m;
}

DatasetManifest DatasetManifest::from_json_file(const std::string& path) {
  return from_json(read_file(path));
}

std::size_t Dataset::positives() const {
  std::size_t p = 0;
  for (int y : labels) p += (y == 1);
  return p;
}

Dataset Dataset::subset(const std::vector<std::size_t>& row_indices) const {
  Dataset out;
  out.name = name;
  out.feature_names = feature_names;
  out.normalization = normalization;
  out.features.reserve(row_indices.size() * cols());
  out.labels.reserve(row_indices.size());
  for (std::size_t new_r = 0; new_r < row_indices.size(); ++new_r) {
    const std::size_t r = row_indices[new_r];
    if (r >= rows()) throw ConfigError("subset row index out of range");
    for (std::size_t c = 0; c < cols(); ++c) out.features.push_back(at(r, c));
    out.labels.push_back(labels[r]);
    for (const auto& [mr, mc] : missing_cells) {
      if (mr == r) out.missing_cells.emplace_back(new_r, mc);
    }
  }
  return out;
}

Dataset Dataset::project(const std::vector<std::size_t>& col_indices) const {
  Dataset out;
  out.name = name;
  out.labels = labels;
  for (std::size_t c : col_indices) {
    if (c >= cols()) throw ConfigError("project column index out of range");
    out.feature_names.push_back(feature_names[c]);
  }
  out.features.reserve(rows() * col_indices.size());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t new_c = 0; new_c < col_indices.size(); ++new_c) {
      out.features.push_back(at(r, col_indices[new_c]));
    }
  }
  for (const auto& [mr, mc] : missing_cells) {
    for (std::size_t new_c = 0; new_c < col_indices.size(); ++new_c) {
      if (col_indices[new_c] == mc) out.missing_cells.emplace_back(mr, new_c);
    }
  }
  return out;
}

Dataset load_csv(const std::string& path, const DatasetManifest& manifest) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const std::vector<std::string> header = split_line(line);

  std::vector<bool> drop(header.size(), false);
  std::size_t label_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == manifest.label_column) label_col = c;
    for (const auto& id : manifest.id_columns_to_drop) {
      if (header[c] == id) drop[c] = true;
    }
  }
  if (label_col == header.size()) {
    throw DataError(path + ": label column '" + manifest.label_column +
                    "' not found in header");
  }
  if (drop[label_col]) {
    throw DataError(path + ": label column is also listed in id_columns_to_drop");
  }

  Dataset d;
  d.name = manifest.name.empty() ? path : manifest.name;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col && !drop[c]) d.feature_names.push_back(header[c]);
  }
  if (d.feature_names.empty()) throw DataError(path + ": no feature columns");

  std::size_t file_row = 1;
  while (std::getline(in, line)) {
    ++file_row;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError(path + ":" + std::to_string(file_row) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    }
    const std::size_t r = d.labels.size();
    std::size_t out_c = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == label_col || drop[c]) continue;
      const std::string& cell = cells[c];
      if (cell == manifest.missing_token) {
        d.features.push_back(kNaN);
        d.missing_cells.emplace_back(r, out_c);
      } else {
        std::size_t consumed = 0;
        double value = 0.0;
        try {
          value = std::stod(cell, &consumed);
        } catch (const std::exception&) {
          consumed = 0;
        }
        if (consumed != cell.size() || cell.empty()) {
          throw DataError(path + ":" + std::to_string(file_row) + ": column '" +
                          header[c] + "': cannot parse cell '" + cell + "'");
        }
        d.features.push_back(value);
      }
      ++out_c;
    }
    const std::string& label_cell = cells[label_col];
    if (label_cell == manifest.positive_token) {
      d.labels.push_back(1);
    } else if (!manifest.negative_token || label_cell == *manifest.negative_token) {
      if (label_cell.empty() || label_cell == manifest.missing_token) {
        throw DataError(path + ":" + std::to_string(file_row) +
                        ": missing label value");
      }
      d.labels.push_back(0);
    } else {
      throw DataError(path + ":" + std::to_string(file_row) + ": label '" +
                      label_cell + "' matches neither positive nor negative token");
    }
  }
  if (d.labels.empty()) throw DataError(path + ": no data rows");
  return d;
}

ImputeStats fit_class_means(const Dataset& d) {
  const std::size_t cols = d.cols();
  ImputeStats s;
  s.means.assign(2, std::vector<double>(cols, 0.0));
  s.valid.assign(2, std::vector<bool>(cols, false));
  std::vector<std::vector<double>> sums(2, std::vector<double>(cols, 0.0));
  std::vector<std::vector<std::size_t>> counts(2, std::vector<std::size_t>(cols, 0));
  for (std::size_t r = 0; r < d.rows(); ++r) {
    const int cls = d.labels[r];
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = d.at(r, c);
      if (!std::isnan(v)) {
        sums[cls][c] += v;
        ++counts[cls][c];
      }
    }
  }
  for (int cls = 0; cls < 2; ++cls) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (counts[cls][c] > 0) {
        s.means[cls][c] = sums[cls][c] / static_cast<double>(counts[cls][c]);
        s.valid[cls][c] = true;
      }
    }
  }
  return s;
}

Dataset apply_impute(const Dataset& d, const ImputeStats& stats) {
  Dataset out = d;
  for (const auto& [r, c] : d.missing_cells) {
    const int cls = d.labels[r];
    if (!stats.valid[cls][c]) {
      throw DataError("cannot impute column '" + d.feature_names[c] +
                      "': class " + std::to_string(cls) + " has no values");
    }
    const double v = stats.means[cls][c];
    out.at(r, c) = v;
    out.imputation_log.push_back({r, c, v});
  }
  out.missing_cells.clear();
  return out;
}

Dataset impute_class_mean(const Dataset& d) {
  return apply_impute(d, fit_class_means(d));
}

NormStats fit_minmax(const Dataset& d) {
  NormStats s;
  s.min_max.resize(d.cols());
  for (std::size_t c = 0; c < d.cols(); ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < d.rows(); ++r) {
      const double v = d.at(r, c);
      if (std::isnan(v)) {
        throw DataError("min-max fit requires imputed data (missing cell in '" +
                        d.feature_names[c] + "')");
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    s.min_max[c] = {lo, hi};
  }
  return s;
}

Dataset apply_minmax(const Dataset& d, const NormStats& stats) {
  if (stats.min_max.size() != d.cols()) {
    throw ConfigError("normalization stats width does not match dataset");
  }
  Dataset out = d;
  for (std::size_t c = 0; c < d.cols(); ++c) {
    const auto [lo, hi] = stats.min_max[c];
    for (std::size_t r = 0; r < d.rows(); ++r) {
      // Constant features map to 0.
      out.at(r, c) = (hi > lo) ? (d.at(r, c) - lo) / (hi - lo) : 0.0;
    }
  }
  out.normalization = stats;
  return out;
}

Dataset normalize_minmax(const Dataset& d) {
  return apply_minmax(d, fit_minmax(d));
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t rows, double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate < 1.0)) {
    throw ConfigError("training rate must lie in (0,1)");
  }
  const std::size_t train_n = static_cast<std::size_t>(
      std::floor(rate * static_cast<double>(rows)));
  if (train_n == 0 || train_n == rows) {
    throw ConfigError("training rate " + std::to_string(rate) +
                      " leaves an empty side for N = " + std::to_string(rows));
  }
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> train(order.begin(), order.begin() + train_n);
  std::vector<std::size_t> test(order.begin() + train_n, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double rate,
                                             std::uint64_t seed) {
  auto [train_rows, test_rows] = split_indices(d.rows(), rate, seed);
  return {d.subset(train_rows), d.subset(test_rows)};
}

std::vector<std::size_t> FoldPlan::fold_rows(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < assignments.size(); ++r) {
    if (assignments[r] == fold) out.push_back(r);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::complement_rows(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < assignments.size(); ++r) {
    if (assignments[r] != fold) out.push_back(r);
  }
  return out;
}

FoldPlan make_folds(const Dataset& d, std::size_t k, std::uint64_t seed,
                    bool stratified) {
  const std::size_t rows = d.rows();
  if (k < 2) throw ConfigError("k-fold requires k >= 2");
  if (k > rows) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds N = " +
                      std::to_string(rows));
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.stratified = stratified;
  plan.assignments.assign(rows, 0);

  Rng rng(seed);
  std::vector<std::size_t> order;
  if (stratified) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t r = 0; r < rows; ++r) {
      (d.labels[r] == 1 ? pos : neg).push_back(r);
    }
    rng.shuffle(pos);
    rng.shuffle(neg);
    order = std::move(pos);
    order.insert(order.end(), neg.begin(), neg.end());
  } else {
    order.resize(rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
  }
  // Dealing in sequence keeps fold sizes (and per-class counts, when
  // stratified) within one of each other.
  for (std::size_t i = 0; i < rows; ++i) {
    plan.assignments[order[i]] = i % k;
  }
  return plan;
}

std::vector<double> info_gain_values(const Dataset& d, std::size_t bins) {
  if (bins < 2) throw ConfigError("information gain requires bins >= 2");
  if (d.has_missing()) {
    throw DataError("information gain requires imputed data");
  }
  const std::size_t rows = d.rows();
  auto entropy = [](std::size_t pos, std::size_t total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    for (std::size_t part : {pos, total - pos}) {
      if (part == 0) continue;
      const double p = static_cast<double>(part) / static_cast<double>(total);
      h -= p * std::log2(p);
    }
    return h;
  };
  std::size_t label_pos = d.positives();
  const double h_y = entropy(label_pos, rows);

  std::vector<double> gains(d.cols(), 0.0);
  std::vector<std::size_t> idx(rows);
  for (std::size_t c = 0; c < d.cols(); ++c) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return d.at(a, c) < d.at(b, c);
    });
    // Equal-frequency bins over rank, with runs of equal values kept whole
    // (the run's first rank picks the bin).
    std::vector<std::size_t> bin_pos(bins, 0), bin_total(bins, 0);
    std::size_t i = 0;
    while (i < rows) {
      std::size_t j = i;
      while (j < rows && d.at(idx[j], c) == d.at(idx[i], c)) ++j;
      const std::size_t bin = i * bins / rows;
      for (std::size_t t = i; t < j; ++t) {
        bin_total[bin] += 1;
        bin_pos[bin] += (d.labels[idx[t]] == 1);
      }
      i = j;
    }
    double h_cond = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      if (bin_total[b] == 0) continue;
      const double p = static_cast<double>(bin_total[b]) / static_cast<double>(rows);
      h_cond += p * entropy(bin_pos[b], bin_total[b]);
    }
    gains[c] = h_y - h_cond;
  }
  return gains;
}

std::vector<std::size_t> info_gain_rank(const Dataset& d, std::size_t bins) {
  const std::vector<double> gains = info_gain_values(d, bins);
  std::vector<std::size_t> ranking(d.cols());
  std::iota(ranking.begin(), ranking.end(), std::size_t{0});
  std::stable_sort(ranking.begin(), ranking.end(),
                   [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });
  return ranking;
}

Dataset select_top_features(const Dataset& d, std::size_t k,
                            const std::vector<std::size_t>& ranking) {
  if (k > d.cols()) {
    throw ConfigError("cannot select " + std::to_string(k) + " of " +
                      std::to_string(d.cols()) + " features");
  }
  if (ranking.size() != d.cols()) {
    throw ConfigError("ranking length does not match feature count");
  }
  std::vector<std::size_t> keep(ranking.begin(), ranking.begin() + k);
  std::sort(keep.begin(), keep.end());
  return d.project(keep);
}

std::uint64_t file_checksum(const std::string& path) {
  const std::string bytes = read_file(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace snnforge
