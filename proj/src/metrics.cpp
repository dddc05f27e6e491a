#include "snnforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace snnforge {

Driver driver_from_string(const std::string& s) {
  if (s == "err" || s == "ERR") return Driver::Err;
  if (s == "acc" || s == "ACC") return Driver::Acc;
  if (s == "f1" || s == "F1") return Driver::F1;
  throw ConfigError("unknown driver '" + s + "' (expected err, acc or f1)");
}

std::string to_string(Driver d) {
  switch (d) {
    case Driver::Err: return "err";
    case Driver::Acc: return "acc";
    case Driver::F1: return "f1";
  }
  return "?";
}

double KpiReport::driver_value(Driver d) const {
  switch (d) {
    case Driver::Err: return err;
    case Driver::Acc: return acc;
    case Driver::F1: return f1;
  }
  return 0.0;
}

std::string KpiReport::csv_header() {
  return "err,acc,f1,auc,tpr,tnr,tp,fp,tn,fn,threshold";
}

std::string KpiReport::csv_row() const {
  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%zu,%zu,%zu,%zu,%.17g",
                err, acc, f1, auc, tpr, tnr, counts.tp, counts.fp, counts.tn,
                counts.fn, threshold);
  return buf;
}

static void check_pair(std::size_t labels, std::size_t scores) {
  if (labels == 0) throw DataError("metrics require at least one sample");
  if (labels != scores) {
    throw DataError("labels and scores lengths differ: " +
                    std::to_string(labels) + " vs " + std::to_string(scores));
  }
}

double mean_error(const std::vector<double>& outputs,
                  const std::vector<int>& targets) {
  check_pair(targets.size(), outputs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double diff = outputs[i] - static_cast<double>(targets[i]);
    sum += diff * diff;
  }
  return 0.5 * sum / static_cast<double>(outputs.size());
}

ConfusionCounts confusion(const std::vector<int>& labels,
                          const std::vector<double>& scores, double threshold) {
  check_pair(labels.size(), scores.size());
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

// Midrank formulation of the concordance probability. Rank sums stay exact
// in doubles (integers and halves well below 2^53), so this matches the
// O(P*Q) pairwise count bit for bit.
double auc_roc(const std::vector<int>& labels,
               const std::vector<double>& scores) {
  check_pair(labels.size(), scores.size());
  const std::size_t n = labels.size();
  std::size_t pos = 0;
  for (int y : labels) pos += (y == 1);
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw UndefinedAucError();

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    // 1-based midrank for the tie group [i, j)
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]] == 1) rank_sum_pos += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum_pos - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

KpiReport kpi_suite(const std::vector<int>& labels,
                    const std::vector<double>& scores, double threshold) {
  check_pair(labels.size(), scores.size());
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("threshold must lie in (0,1)");
  }
  KpiReport r;
  r.threshold = threshold;
  r.err = mean_error(scores, labels);
  r.counts = confusion(labels, scores, threshold);
  const auto& c = r.counts;
  const double n = static_cast<double>(c.total());
  r.acc = static_cast<double>(c.tp + c.tn) / n;
  r.tpr = (c.tp + c.fn == 0)
              ? 1.0
              : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  r.tnr = (c.tn + c.fp == 0)
              ? 1.0
              : static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  const double prec =
      (c.tp + c.fp == 0) ? 0.0
                         : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  r.f1 = (prec + r.tpr == 0.0) ? 0.0 : 2.0 * prec * r.tpr / (prec + r.tpr);
  try {
    r.auc = auc_roc(labels, scores);
  } catch (const UndefinedAucError&) {
    r.auc = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace snnforge
