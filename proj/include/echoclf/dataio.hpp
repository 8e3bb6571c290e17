#pragma once

// Tabular datasets: CSV ingestion, z-score standardization and a synthetic
// generator with planted ground truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "echoclf/csv.hpp"
#include "echoclf/error.hpp"
#include "echoclf/numkit.hpp"

namespace echoclf {

// Per-column (mean, sd) used to standardize a dataset.
struct Standardization {
  Vector mean;
  Vector sd;
};

struct Dataset {
  std::vector<std::string> feature_names;
  Matrix features; // n x p
  Vector labels;   // n, values in {0, 1}
  std::optional<Standardization> standardization;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i) {
      if (feature_names[i] == name) {
        return i;
      }
    }
    return std::nullopt;
  }

  Dataset subset_rows(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.feature_names = feature_names;
    out.standardization = standardization;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
    out.labels.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto src = static_cast<Eigen::Index>(idx[r]);
      out.features.row(static_cast<Eigen::Index>(r)) = features.row(src);
      out.labels(static_cast<Eigen::Index>(r)) = labels(src);
    }
    return out;
  }

  // Columns in the order given. Unknown names are an error.
  Dataset select_columns(const std::vector<std::string>& names) const {
    Dataset out;
    out.feature_names = names;
    out.labels = labels;
    out.features.resize(features.rows(), static_cast<Eigen::Index>(names.size()));
    std::optional<Standardization> st;
    if (standardization) {
      st = Standardization{Vector(names.size()), Vector(names.size())};
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
      const auto src = column(names[j]);
      if (!src) {
        throw DataError("unknown column '" + names[j] + "'");
      }
      const auto s = static_cast<Eigen::Index>(*src);
      const auto d = static_cast<Eigen::Index>(j);
      out.features.col(d) = features.col(s);
      if (st) {
        st->mean(d) = standardization->mean(s);
        st->sd(d) = standardization->sd(s);
      }
    }
    out.standardization = std::move(st);
    return out;
  }
};

inline void validate_dataset(const Dataset& d) {
  if (d.feature_names.size() != d.cols()) {
    throw DimensionError("dataset: feature_names length does not match column count");
  }
  if (d.labels.size() != d.features.rows()) {
    throw DimensionError("dataset: label count does not match row count");
  }
  if (!d.features.allFinite()) {
    throw DataError("dataset: non-finite feature value");
  }
  for (Eigen::Index i = 0; i < d.labels.size(); ++i) {
    if (d.labels(i) != 0.0 && d.labels(i) != 1.0) {
      throw DataError("dataset: label at row " + std::to_string(i) + " is not 0 or 1");
    }
  }
}

struct LoadReport {
  std::string source;
  std::size_t source_rows = 0;
  std::size_t kept_rows = 0;
  std::vector<std::size_t> dropped_lines; // 1-based line numbers

  std::size_t dropped_rows() const { return dropped_lines.size(); }

  std::string to_text() const {
    std::ostringstream os;
    os << "source: " << source << '\n'
       << "rows read: " << source_rows << '\n'
       << "rows kept: " << kept_rows << '\n'
       << "rows dropped: " << dropped_rows() << '\n';
    if (!dropped_lines.empty()) {
      os << "dropped lines:";
      for (auto l : dropped_lines) {
        os << ' ' << l;
      }
      os << '\n';
    }
    return os.str();
  }
};

struct LoadedCsv {
  Dataset data;
  LoadReport report;
};

/// Builds a dataset from a parsed table. Every column except `label_column`
/// becomes a feature. Rows with an empty or non-numeric cell (or a non-finite
/// value) are dropped and recorded; a numeric label other than 0/1 is a hard
/// error naming the line.
inline LoadedCsv dataset_from_table(const CsvTable& table, const std::string& label_column, std::string source) {
  std::set<std::string> seen;
  for (const auto& h : table.header) {
    if (!seen.insert(h).second) {
      throw DataError("duplicate column name '" + h + "' in " + source);
    }
  }
  const auto label_idx = table.column(label_column);
  if (!label_idx) {
    throw DataError("label column '" + label_column + "' not found in " + source);
  }

  LoadedCsv out;
  out.report.source = std::move(source);
  out.report.source_rows = table.rows.size();
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j != *label_idx) {
      out.data.feature_names.push_back(table.header[j]);
    }
  }
  const std::size_t p = out.data.feature_names.size();

  std::vector<double> values;
  std::vector<double> labels;
  values.reserve(table.rows.size() * p);
  std::vector<double> row_values(p);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    bool ok = row.size() == table.header.size();
    std::optional<double> label;
    if (ok) {
      label = parse_double(row[*label_idx]);
      ok = label.has_value();
    }
    if (ok && *label != 0.0 && *label != 1.0) {
      throw DataError("label '" + row[*label_idx] + "' at line " + std::to_string(line) + " of " +
                      out.report.source + " is not 0 or 1");
    }
    for (std::size_t j = 0, k = 0; ok && j < row.size(); ++j) {
      if (j == *label_idx) {
        continue;
      }
      const auto v = parse_double(row[j]);
      if (!v) {
        ok = false;
        break;
      }
      row_values[k++] = *v;
    }
    if (!ok) {
      out.report.dropped_lines.push_back(line);
      continue;
    }
    values.insert(values.end(), row_values.begin(), row_values.end());
    labels.push_back(*label);
  }

  const std::size_t n = labels.size();
  if (n == 0) {
    throw DataError("no usable rows in " + out.report.source);
  }
  out.report.kept_rows = n;
  out.data.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  out.data.labels.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      out.data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * p + j];
    }
    out.data.labels(static_cast<Eigen::Index>(i)) = labels[i];
  }
  return out;
}

inline LoadedCsv load_csv(std::istream& in, const std::string& label_column, std::string source = "<stream>") {
  return dataset_from_table(read_csv_table(in), label_column, std::move(source));
}

inline LoadedCsv load_csv(const std::string& path, const std::string& label_column) {
  return dataset_from_table(read_csv_table(path), label_column, path);
}

// Features first, label last; 17 significant digits so loading reproduces
// every value bit for bit.
inline void save_csv(const Dataset& d, std::ostream& out, const std::string& label_column = "label") {
  for (const auto& name : d.feature_names) {
    out << name << ',';
  }
  out << label_column << '\n';
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.features.cols(); ++j) {
      out << format_double(d.features(i, j)) << ',';
    }
    out << (d.labels(i) != 0.0 ? '1' : '0') << '\n';
  }
}

inline void save_csv(const Dataset& d, const std::string& path, const std::string& label_column = "label") {
  auto out = open_output(path);
  save_csv(d, out, label_column);
  if (!out) {
    throw IoError("failed writing '" + path + "'");
  }
}

// ---------------------------------------------------------------------------
// Standardization

inline Standardization fit_standardization(const Dataset& d) {
  const Eigen::Index n = d.features.rows();
  if (n < 2) {
    throw DataError("standardize: need at least two rows");
  }
  Standardization st{d.features.colwise().mean().transpose(), Vector(d.features.cols())};
  for (Eigen::Index j = 0; j < d.features.cols(); ++j) {
    const double ss = (d.features.col(j).array() - st.mean(j)).square().sum();
    st.sd(j) = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(st.sd(j) > 0.0)) {
      throw DataError("standardize: column '" + d.feature_names[static_cast<std::size_t>(j)] + "' is constant");
    }
  }
  return st;
}

// Applies stored parameters (normally fitted on a training fold) to any dataset.
inline Dataset apply_standardization(const Dataset& d, const Standardization& st) {
  if (st.mean.size() != d.features.cols() || st.sd.size() != d.features.cols()) {
    throw DimensionError("apply_standardization: parameter length does not match column count");
  }
  Dataset out = d;
  out.features = ((d.features.rowwise() - st.mean.transpose()).array().rowwise() / st.sd.transpose().array()).matrix();
  out.standardization = st;
  return out;
}

/// Columns to mean 0 and sample sd 1. The parameters are kept on the result
/// so held-out data can be transformed with the same values.
inline Dataset standardize(const Dataset& d) { return apply_standardization(d, fit_standardization(d)); }

// ---------------------------------------------------------------------------
// Synthetic generator

enum class Nonlinearity { none, interaction, threshold };

inline std::string to_string(Nonlinearity n) {
  switch (n) {
  case Nonlinearity::none:
    return "none";
  case Nonlinearity::interaction:
    return "interaction";
  case Nonlinearity::threshold:
    return "threshold";
  }
  return "none";
}

inline Nonlinearity parse_nonlinearity(std::string_view s) {
  if (s == "none") {
    return Nonlinearity::none;
  }
  if (s == "interaction") {
    return Nonlinearity::interaction;
  }
  if (s == "threshold") {
    return Nonlinearity::threshold;
  }
  throw InvalidArgument("unknown nonlinearity '" + std::string(s) + "' (expected none, interaction or threshold)");
}

// 1, -1, 1.5, -1.5, 2, -2, ...
inline std::vector<double> default_planted_beta(std::size_t k) {
  std::vector<double> beta(k);
  for (std::size_t j = 0; j < k; ++j) {
    beta[j] = (j % 2 ? -1.0 : 1.0) * (1.0 + 0.5 * static_cast<double>(j / 2));
  }
  return beta;
}

struct SynthSpec {
  std::size_t n = 804;
  std::size_t p_informative = 5;
  std::size_t p_noise = 15;
  double planted_alpha = 0.0;
  std::vector<double> planted_beta = default_planted_beta(5);
  Nonlinearity nonlinearity = Nonlinearity::none;
  // Coefficient of the nonlinear term: x1*x2 for interaction, 1[x1 > 0] for threshold.
  double nonlinear_strength = 3.0;
  double label_noise = 0.0;
  std::uint64_t seed = 1;
};

struct GroundTruth {
  SynthSpec spec;
  std::vector<std::string> informative;
  std::vector<std::string> noise;
};

struct SynthData {
  Dataset data;
  GroundTruth truth;
};

inline void validate(const SynthSpec& s) {
  if (s.n == 0) {
    throw InvalidArgument("synth: n must be >= 1");
  }
  if (s.planted_beta.size() != s.p_informative) {
    throw InvalidArgument("synth: planted_beta has " + std::to_string(s.planted_beta.size()) +
                          " entries but p_informative is " + std::to_string(s.p_informative));
  }
  if (!(s.label_noise >= 0.0 && s.label_noise < 0.5)) {
    throw InvalidArgument("synth: label_noise must lie in [0, 0.5)");
  }
  if (s.p_informative + s.p_noise == 0) {
    throw InvalidArgument("synth: need at least one feature");
  }
  if (s.nonlinearity == Nonlinearity::interaction && s.p_informative < 2) {
    throw InvalidArgument("synth: interaction needs at least two informative features");
  }
  if (s.nonlinearity == Nonlinearity::threshold && s.p_informative < 1) {
    throw InvalidArgument("synth: threshold needs at least one informative feature");
  }
}

// Column names f01, f02, ... (zero padded so lexicographic = numeric order).
inline std::string synth_column_name(std::size_t j, std::size_t p) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(p).size());
  std::string digits = std::to_string(j + 1);
  return "f" + std::string(width - digits.size(), '0') + digits;
}

inline double logistic(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// Standard-normal features; the first p_informative columns carry the planted
/// model, the rest are noise. Labels are Bernoulli(logistic(score)) where
///   none:        score = alpha + beta'x_inf
///   interaction: score + strength * x_inf[0] * x_inf[1]
///   threshold:   score + strength * 1[x_inf[0] > 0]
/// and each label is then flipped with probability label_noise.
inline SynthData synth_generate(const SynthSpec& spec) {
  validate(spec);
  const std::size_t p = spec.p_informative + spec.p_noise;
  SeededRng rng(spec.seed);

  SynthData out;
  out.truth.spec = spec;
  for (std::size_t j = 0; j < p; ++j) {
    const auto name = synth_column_name(j, p);
    out.data.feature_names.push_back(name);
    (j < spec.p_informative ? out.truth.informative : out.truth.noise).push_back(name);
  }
  out.data.features.resize(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(p));
  out.data.labels.resize(static_cast<Eigen::Index>(spec.n));
  for (std::size_t i = 0; i < spec.n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < p; ++j) {
      out.data.features(r, static_cast<Eigen::Index>(j)) = rng.normal();
    }
    double score = spec.planted_alpha;
    for (std::size_t j = 0; j < spec.p_informative; ++j) {
      score += spec.planted_beta[j] * out.data.features(r, static_cast<Eigen::Index>(j));
    }
    if (spec.nonlinearity == Nonlinearity::interaction) {
      score += spec.nonlinear_strength * out.data.features(r, 0) * out.data.features(r, 1);
    } else if (spec.nonlinearity == Nonlinearity::threshold) {
      score += out.data.features(r, 0) > 0.0 ? spec.nonlinear_strength : 0.0;
    }
    bool label = rng.uniform01() < logistic(score);
    if (spec.label_noise > 0.0 && rng.uniform01() < spec.label_noise) {
      label = !label;
    }
    out.data.labels(r) = label ? 1.0 : 0.0;
  }
  return out;
}

// Sidecar CSV: term,column,value. Terms: intercept, beta, nonlinear, label_noise,
// noise (value 0 for the pure-noise columns).
inline void save_ground_truth(const GroundTruth& t, std::ostream& out) {
  out << "term,column,value\n";
  out << "intercept,," << format_double(t.spec.planted_alpha) << '\n';
  for (std::size_t j = 0; j < t.informative.size(); ++j) {
    out << "beta," << t.informative[j] << ',' << format_double(t.spec.planted_beta[j]) << '\n';
  }
  if (t.spec.nonlinearity == Nonlinearity::interaction) {
    out << "interaction," << t.informative[0] << '*' << t.informative[1] << ','
        << format_double(t.spec.nonlinear_strength) << '\n';
  } else if (t.spec.nonlinearity == Nonlinearity::threshold) {
    out << "threshold," << t.informative[0] << ">0," << format_double(t.spec.nonlinear_strength) << '\n';
  }
  for (const auto& name : t.noise) {
    out << "noise," << name << ",0\n";
  }
  out << "label_noise,," << format_double(t.spec.label_noise) << '\n';
}

inline void save_ground_truth(const GroundTruth& t, const std::string& path) {
  auto out = open_output(path);
  save_ground_truth(t, out);
  if (!out) {
    throw IoError("failed writing '" + path + "'");
  }
}

} // namespace echoclf
