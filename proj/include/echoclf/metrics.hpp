#pragma once

// Evaluation: k-fold splits, MSE, confusion matrix, ROC/AUC and the
// cross-validation harness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "echoclf/csv.hpp"
#include "echoclf/dataio.hpp"
#include "echoclf/error.hpp"
#include "echoclf/numkit.hpp"

namespace echoclf {

/// k disjoint index sets covering 0..n-1 after a seeded shuffle. The first
/// n % k folds hold one extra element.
inline std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw InvalidArgument("kfold_split: need 2 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SeededRng rng(seed);
  rng.shuffle(order);

  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

inline double mse(const Vector& labels, const Vector& scores) {
  if (labels.size() != scores.size()) {
    throw DimensionError("mse: length mismatch");
  }
  if (labels.size() == 0) {
    throw InvalidArgument("mse: empty input");
  }
  return (labels - scores).squaredNorm() / static_cast<double>(labels.size());
}

// Ties at the threshold are classified positive.
inline Vector classify(const Vector& scores, double threshold) {
  return (scores.array() >= threshold).cast<double>().matrix();
}

inline double accuracy(const Vector& labels, const Vector& predictions) {
  if (labels.size() != predictions.size() || labels.size() == 0) {
    throw DimensionError("accuracy: length mismatch or empty input");
  }
  return static_cast<double>((labels.array() == predictions.array()).count()) / static_cast<double>(labels.size());
}

struct ConfusionMatrix {
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tp = 0;

  std::size_t total() const { return tn + fp + fn + tp; }
  double accuracy() const { return static_cast<double>(tn + tp) / static_cast<double>(total()); }
  // tp / (tp + fn)
  double sensitivity() const { return static_cast<double>(tp) / static_cast<double>(tp + fn); }
  // tn / (tn + fp)
  double specificity() const { return static_cast<double>(tn) / static_cast<double>(tn + fp); }
};

inline ConfusionMatrix confusion(const Vector& labels, const Vector& predictions) {
  if (labels.size() != predictions.size()) {
    throw DimensionError("confusion: length mismatch");
  }
  ConfusionMatrix cm;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const double y = labels(i);
    const double p = predictions(i);
    if ((y != 0.0 && y != 1.0) || (p != 0.0 && p != 1.0)) {
      throw InvalidArgument("confusion: values must be 0 or 1 (index " + std::to_string(i) + ")");
    }
    if (y == 1.0) {
      (p == 1.0 ? cm.tp : cm.fn) += 1;
    } else {
      (p == 1.0 ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  // thresholds[i] is the cut that produces points[i] (score >= threshold is
  // positive). The first entry is max score + 1 so that nothing is positive.
  std::vector<double> thresholds;
  double auc = 0.0;
};

/// Threshold sweep over the distinct scores in descending order. Tied scores
/// move together, giving a diagonal segment; area by the trapezoidal rule.
inline RocCurve roc(const Vector& labels, const Vector& scores) {
  if (labels.size() != scores.size()) {
    throw DimensionError("roc: length mismatch");
  }
  if (!scores.allFinite()) {
    throw InvalidArgument("roc: non-finite score");
  }
  std::size_t pos = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 0.0 && labels(i) != 1.0) {
      throw InvalidArgument("roc: labels must be 0 or 1");
    }
    pos += labels(i) == 1.0 ? 1 : 0;
  }
  const std::size_t neg = static_cast<std::size_t>(labels.size()) - pos;
  if (pos == 0 || neg == 0) {
    throw InvalidArgument("roc: both classes must be present");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(labels.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return scores(a) > scores(b); });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  curve.thresholds.push_back(scores(order.front()) + 1.0);
  std::size_t tp = 0;
  std::size_t fp = 0;
  double area2 = 0.0; // twice the area, in units of (1/neg) x (1/pos)
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores(order[i]);
    const std::size_t tp0 = tp;
    const std::size_t fp0 = fp;
    for (; i < order.size() && scores(order[i]) == s; ++i) {
      (labels(order[i]) == 1.0 ? tp : fp) += 1;
    }
    area2 += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0);
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos)});
    curve.thresholds.push_back(s);
  }
  curve.auc = area2 / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return curve;
}

// Area under an explicit point list (trapezoidal).
inline double trapezoid_auc(const std::vector<RocPoint>& pts) {
  double a = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    a += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) * 0.5;
  }
  return a;
}

inline void write_roc_csv(const RocCurve& c, std::ostream& out) {
  out << "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    out << format_double(c.thresholds[i]) << ',' << format_double(c.points[i].fpr) << ','
        << format_double(c.points[i].tpr) << '\n';
  }
}

inline RocCurve read_roc_csv(const CsvTable& t) {
  const auto ci = t.column("threshold");
  const auto cf = t.column("fpr");
  const auto ct = t.column("tpr");
  if (!ci || !cf || !ct) {
    throw DataError("ROC points file needs threshold,fpr,tpr columns");
  }
  RocCurve c;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != t.header.size()) {
      throw DataError("ROC points file: ragged row at line " + std::to_string(t.line_numbers[r]));
    }
    const auto th = parse_double(row[*ci]);
    const auto f = parse_double(row[*cf]);
    const auto tp = parse_double(row[*ct]);
    if (!th || !f || !tp) {
      throw DataError("ROC points file: bad number at line " + std::to_string(t.line_numbers[r]));
    }
    c.thresholds.push_back(*th);
    c.points.push_back({*f, *tp});
  }
  if (c.points.size() < 2) {
    throw DataError("ROC points file: need at least two points");
  }
  c.auc = trapezoid_auc(c.points);
  return c;
}

// ---------------------------------------------------------------------------
// Cross-validation

/// Fits on `train` and returns one score in [0, 1] per row of `test`.
using Trainer = std::function<Vector(const Dataset& train, const Dataset& test)>;

struct FoldMetrics {
  std::size_t n_test = 0;
  double mse = 0.0;
  double accuracy = 0.0;
};

struct CvReport {
  std::size_t k = 0;
  std::vector<FoldMetrics> per_fold;
  double avg_mse = 0.0;
  double std_dev = 0.0;
  double variance = 0.0;
  double mean_accuracy = 0.0;
  std::vector<std::vector<std::size_t>> folds;
  Vector oof_scores; // held-out score of every row, original order
};

// One entry per failed fold.
class CvError : public NumericError {
public:
  CvError(const std::string& what, std::vector<std::string> fold_messages)
      : NumericError(what), fold_messages_(std::move(fold_messages)) {}
  const std::vector<std::string>& fold_messages() const noexcept { return fold_messages_; }

private:
  std::vector<std::string> fold_messages_;
};

struct CvOptions {
  double threshold = 0.5;
  // Worker threads for folds; 1 runs in the calling thread. Results do not
  // depend on this value.
  std::size_t threads = 1;
};

/// Mean MSE, sample (n-1) standard deviation and variance of the per-fold MSE,
/// and mean accuracy. variance is computed first and std_dev = sqrt(variance).
inline void aggregate(CvReport& r) {
  const auto k = r.per_fold.size();
  if (k == 0) {
    throw InvalidArgument("aggregate: no folds");
  }
  double sum = 0.0;
  double acc = 0.0;
  for (const auto& f : r.per_fold) {
    sum += f.mse;
    acc += f.accuracy;
  }
  r.avg_mse = sum / static_cast<double>(k);
  r.mean_accuracy = acc / static_cast<double>(k);
  double ss = 0.0;
  for (const auto& f : r.per_fold) {
    ss += (f.mse - r.avg_mse) * (f.mse - r.avg_mse);
  }
  r.variance = k > 1 ? ss / static_cast<double>(k - 1) : 0.0;
  r.std_dev = std::sqrt(r.variance);
}

inline CvReport cross_validate(const Trainer& trainer, const Dataset& data, std::size_t k, std::uint64_t seed,
                               const CvOptions& opt = {}) {
  validate_dataset(data);
  CvReport report;
  report.k = k;
  report.folds = kfold_split(data.rows(), k, seed);
  report.per_fold.resize(k);
  report.oof_scores = Vector::Zero(static_cast<Eigen::Index>(data.rows()));
  std::vector<std::string> errors(k);

  const auto run_fold = [&](std::size_t f) {
    try {
      std::vector<std::size_t> train_idx;
      train_idx.reserve(data.rows() - report.folds[f].size());
      for (std::size_t g = 0; g < k; ++g) {
        if (g != f) {
          train_idx.insert(train_idx.end(), report.folds[g].begin(), report.folds[g].end());
        }
      }
      std::sort(train_idx.begin(), train_idx.end());
      const Dataset train = data.subset_rows(train_idx);
      const Dataset test = data.subset_rows(report.folds[f]);
      const Vector scores = trainer(train, test);
      if (scores.size() != test.labels.size()) {
        throw DimensionError("trainer returned " + std::to_string(scores.size()) + " scores for " +
                             std::to_string(test.labels.size()) + " rows");
      }
      if (!scores.allFinite() || scores.minCoeff() < 0.0 || scores.maxCoeff() > 1.0) {
        throw InvalidArgument("trainer returned scores outside [0, 1]");
      }
      report.per_fold[f] = {test.rows(), mse(test.labels, scores),
                            accuracy(test.labels, classify(scores, opt.threshold))};
      for (std::size_t i = 0; i < report.folds[f].size(); ++i) {
        report.oof_scores(static_cast<Eigen::Index>(report.folds[f][i])) = scores(static_cast<Eigen::Index>(i));
      }
    } catch (const std::exception& e) {
      errors[f] = e.what();
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(opt.threads, k));
  if (threads == 1) {
    for (std::size_t f = 0; f < k; ++f) {
      run_fold(f);
    }
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t f = t; f < k; f += threads) {
          run_fold(f);
        }
      });
    }
  }

  std::vector<std::string> failed;
  for (std::size_t f = 0; f < k; ++f) {
    if (!errors[f].empty()) {
      failed.push_back("fold " + std::to_string(f) + ": " + errors[f]);
    }
  }
  if (!failed.empty()) {
    std::string msg = "cross_validate: " + std::to_string(failed.size()) + " of " + std::to_string(k) + " folds failed";
    for (const auto& m : failed) {
      msg += "\n  " + m;
    }
    throw CvError(msg, failed);
  }
  aggregate(report);
  return report;
}

} // namespace echoclf
