#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "snnforge/errors.hpp"

namespace snnforge {

// Indicator that drives convergence (PDBP) or serves as fitness (VPSO).
// ERR is minimized, ACC and F1 are maximized.
enum class Driver { Err, Acc, F1 };

Driver driver_from_string(const std::string& s);
std::string to_string(Driver d);

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

// The six indicators reported for every evaluation. `auc` is NaN when the
// evaluated set holds a single class; renderers print it as n/a.
struct KpiReport {
  double err = 0.0;  // mean half squared error
  double acc = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
  ConfusionCounts counts;
  double threshold = 0.5;

  // Natural orientation: err for Driver::Err, acc/f1 otherwise.
  double driver_value(Driver d) const;

  static std::string csv_header();
  std::string csv_row() const;
};

// epsilon = (1/N) * 1/2 * sum_i (o_i - y_i)^2. Throws DataError on empty or
// mismatched inputs.
double mean_error(const std::vector<double>& outputs,
                  const std::vector<int>& targets);

// Predict positive iff score >= threshold.
ConfusionCounts confusion(const std::vector<int>& labels,
                          const std::vector<double>& scores, double threshold);

// Probability of concordance with half credit for ties; equals the
// trapezoidal ROC area. Throws UndefinedAucError on single-class input.
double auc_roc(const std::vector<int>& labels,
               const std::vector<double>& scores);

// All six KPIs from one pass: err from raw scores, classification KPIs from
// thresholded predictions, auc set to NaN when only one class is present.
KpiReport kpi_suite(const std::vector<int>& labels,
                    const std::vector<double>& scores, double threshold);

}  // namespace snnforge
